// End-to-end drivers: analysis (types and leaks) and compilation
// (mitigating lowering, constrained allocation, emission).

#pragma once

#include <string>
#include <vector>

#include "leakguard/backend/lower.hpp"
#include "leakguard/backend/machine.hpp"
#include "leakguard/backend/regalloc.hpp"
#include "leakguard/depsets.hpp"
#include "leakguard/factbase.hpp"
#include "leakguard/hdleaks.hpp"
#include "leakguard/ir.hpp"
#include "leakguard/typeinfer.hpp"

namespace leakguard {

enum class ShareMode : std::uint8_t { All, Backend };
std::string_view to_string(ShareMode m);

struct AnalyzeOptions {
  EncodingScheme encoding = EncodingScheme::segmented(4);
  ShareMode share = ShareMode::Backend;
  RuleSet rules = RuleSet::Strict;
};

struct Phase {
  std::string name;
  double ms = 0;
};

struct Analysis {
  DepSets depsets;
  InferenceResult inference;
  SharePairs share = SharePairs::all(0);
  LeakReport leaks;
  std::vector<Phase> phases;
};

/// parse is the caller's business; this runs depsets, types, share, detect.
/// In backend mode Share comes from the plain (unmitigated) lowering.
Analysis analyze(const Program& p, const AnalyzeOptions& options = {});

struct CompileOptions {
  AnalyzeOptions analysis;
  unsigned regs = 4;
  bool mitigate = true;
};

struct Compilation {
  Analysis analysis;
  bool mitigation = true;
  std::vector<InstrForm> forms;
  /// IR instructions left in a leaky form because no safe form exists.
  std::vector<std::size_t> unmitigated;
  MachineFunction vcode;  // allocated, still over vregs
  MachineFunction code;   // register-assigned
  Allocation allocation;
  /// Register clears inserted to break leaking transitions.
  std::size_t clears = 0;
  std::string assembly;
  /// Constraint-satisfaction violations found in the emitted code.
  std::vector<std::string> violations;
  std::vector<Phase> phases;

  bool mitigated() const { return unmitigated.empty() && violations.empty(); }
};

Compilation compile(const Program& p, const CompileOptions& options = {});

/// Walks the register-assigned code tracking which variable each register
/// holds and reports every register write that loads an HW variable or
/// moves a register between the two sides of an HDD or HDS pair.
std::vector<std::string> check_constraints(const Program& p, const MachineFunction& assigned,
                                           const LeakReport& report);

}  // namespace leakguard
