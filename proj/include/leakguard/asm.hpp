// Parser for the assembly emitted by the backend.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "leakguard/backend/machine.hpp"

namespace leakguard {

class AsmParseError : public std::runtime_error {
 public:
  AsmParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct AsmBinding {
  std::string name;
  std::uint32_t slot;
};

struct AsmProgram {
  /// Operands are PReg or Slot; `value` is unset.
  std::vector<MachineInstr> code;
  std::vector<AsmBinding> inputs;
  std::vector<AsmBinding> outputs;

  /// One past the highest register index used.
  std::uint32_t registers_used() const;
};

AsmProgram parse_asm(std::string_view text);

}  // namespace leakguard
