// Word-level straight-line IR consumed by every analysis and by the backend.
//
// A Program is in single-assignment form: each variable is either an
// annotated input or the destination of exactly one instruction, and every
// operand is defined before it is used.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace leakguard {

enum class InputKind : std::uint8_t { Public, Secret, Random };

enum class Opcode : std::uint8_t { Not, Xor, And, Or, Gmul };

/// Index of a variable: inputs occupy [0, num_inputs), instruction results
/// follow in program order.
using VarId = std::uint32_t;

inline constexpr bool is_unary(Opcode op) { return op == Opcode::Not; }

std::string_view to_string(InputKind kind);
std::string_view to_string(Opcode op);

struct Input {
  std::string name;
  InputKind kind;
};

struct Instruction {
  std::string dest;
  Opcode op;
  std::vector<std::string> operands;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct Diagnostic {
  enum class Kind : std::uint8_t {
    DuplicateDefinition,
    UseBeforeDef,
    UndefinedOutput,
    BadArity,
    GmulWidth,
    BadWidth,
  };
  Kind kind;
  std::string name;
  /// Instruction index, or -1 for input/output level problems.
  int instruction = -1;

  bool operator==(const Diagnostic&) const = default;
};

std::string_view to_string(Diagnostic::Kind kind);
std::string describe(const Diagnostic& d);

/// Thrown by Program::index() when the program violates its invariants.
class InvalidProgram : public std::runtime_error {
 public:
  explicit InvalidProgram(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// Resolved operand form of an instruction, used by the analyses.
struct Def {
  VarId dest;
  Opcode op;
  VarId lhs;
  VarId rhs;  // equals lhs for unary ops
};

class Program {
 public:
  Program() = default;
  Program(std::vector<Input> inputs, std::vector<Instruction> instructions,
          std::vector<std::string> outputs, unsigned width = 8);

  const std::vector<Input>& inputs() const { return inputs_; }
  const std::vector<Instruction>& instructions() const { return instructions_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  unsigned width() const { return width_; }

  std::size_t num_inputs() const { return inputs_.size(); }
  std::size_t num_vars() const { return inputs_.size() + instructions_.size(); }

  VarId id(std::string_view name) const;
  std::optional<VarId> find(std::string_view name) const;
  const std::string& name(VarId v) const;
  bool is_input(VarId v) const { return v < inputs_.size(); }
  InputKind input_kind(VarId v) const { return inputs_.at(v).kind; }

  /// Defining instruction of a non-input variable.
  const Def& def(VarId v) const { return defs_.at(v - inputs_.size()); }
  const std::vector<Def>& defs() const { return defs_; }
  std::vector<VarId> output_ids() const;

 private:
  void index();

  std::vector<Input> inputs_;
  std::vector<Instruction> instructions_;
  std::vector<std::string> outputs_;
  unsigned width_ = 8;

  std::unordered_map<std::string, VarId> ids_;
  std::vector<std::string> names_;
  std::vector<Def> defs_;
};

/// Parses the textual IR. Statements are separated by newlines or `;`,
/// `#` starts a comment. Throws ParseError on syntax errors and on any
/// violated program invariant (reported at the offending statement).
Program parse_program(std::string_view text, unsigned width = 8);

/// Invariant check that never throws; an empty result means the parts form
/// a valid program.
std::vector<Diagnostic> validate(const std::vector<Input>& inputs,
                                 const std::vector<Instruction>& instructions,
                                 const std::vector<std::string>& outputs,
                                 unsigned width);
std::vector<Diagnostic> validate(const Program& p);

std::string to_text(const Program& p);

}  // namespace leakguard
