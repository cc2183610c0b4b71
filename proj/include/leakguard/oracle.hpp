// Ground truth by exhaustive enumeration.
//
// Every input valuation is enumerated; random inputs are uniform. A
// distribution is kept per (public valuation x, secret valuation k) as a
// histogram over the random valuations. An observable is secret-independent
// iff for every x its histogram is the same for all k.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakguard/asm.hpp"
#include "leakguard/ir.hpp"
#include "leakguard/typeinfer.hpp"

namespace leakguard {

/// Total input bits the oracle is willing to enumerate.
inline constexpr unsigned kEnumerationBudget = 24;
inline constexpr unsigned kTruthTableBudget = 16;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One value per input, in input order.
using Valuation = std::vector<std::uint32_t>;

std::uint32_t word_mask(unsigned width);
std::uint32_t apply(Opcode op, std::uint32_t a, std::uint32_t b, unsigned width);

/// Values of all variables, indexed by VarId. Throws std::invalid_argument
/// if the valuation has the wrong size or a value does not fit the width.
std::vector<std::uint32_t> interpret(const Program& p, const Valuation& in);

/// Bits of x (public) and k (secret) packed in input order, first input
/// most significant.
struct Witness {
  std::uint64_t x = 0;
  std::uint64_t k1 = 0;
  std::uint64_t k2 = 0;
};

struct DistributionTable {
  unsigned width = 1;
  std::uint64_t public_space = 1;
  std::uint64_t secret_space = 1;
  std::uint64_t samples = 1;  // random valuations per (x, k)
  /// hist[x * secret_space + k] maps value -> count.
  std::vector<std::map<std::uint32_t, std::uint64_t>> hist;

  const std::map<std::uint32_t, std::uint64_t>& at(std::uint64_t x, std::uint64_t k) const;
  std::uint64_t count(std::uint64_t x, std::uint64_t k, std::uint32_t value) const;
  /// Number of random valuations giving a non-zero value.
  std::uint64_t count_nonzero(std::uint64_t x, std::uint64_t k) const;

  /// First (x, k1, k2) with differing histograms, if any.
  std::optional<Witness> secret_dependence() const;
  /// First (x, k) whose histogram is not uniform over [0, 2^width), if any.
  std::optional<Witness> non_uniformity() const;
};

using Observable = std::function<std::uint32_t(const std::vector<std::uint32_t>& values)>;

/// Tables for several observables in one sweep. Throws BudgetExceeded when
/// the inputs exceed kEnumerationBudget bits.
std::vector<DistributionTable> distributions(const Program& p, const std::vector<Observable>& obs);
DistributionTable distribution(const Program& p, VarId v);
DistributionTable distribution(const Program& p, const Observable& obs);
/// Observable for v1 xor v2.
Observable xor_of(VarId v1, VarId v2);

struct SoundnessVerdict {
  VarId var;
  DistType type;
  bool ok = true;
  std::optional<Witness> witness;
  std::string reason;
};

/// RUD must be uniform for every (x, k) and identical across k; SID must be
/// identical across k; UKD passes vacuously.
std::vector<SoundnessVerdict> check_type_soundness(const Program& p, const TypeMap& types);
/// Same for arbitrary labelled observables.
SoundnessVerdict check_observable(const Program& p, const Observable& obs, DistType claimed);

class AsmRuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AsmStep {
  std::size_t index;
  std::uint32_t reg;
  std::uint32_t old_value;
  std::uint32_t new_value;
};

struct AsmTrace {
  /// One step per instruction with a register destination.
  std::vector<AsmStep> steps;
  /// Register file after each instruction (only when requested).
  std::vector<std::vector<std::uint32_t>> snapshots;
  std::map<std::uint32_t, std::uint32_t> slots;
  /// Values of asm.outputs, in order.
  std::vector<std::uint32_t> outputs;
};

/// Runs the assembly with the named inputs preloaded into their slots.
/// Registers start at zero. Throws AsmRuntimeError on an uninitialized slot
/// read, a register index >= k or a missing input value.
AsmTrace simulate_asm(const AsmProgram& asm_prog, const std::map<std::string, std::uint32_t>& inputs,
                      unsigned width, unsigned k, bool snapshots = false);

class SemanticMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Leakage : std::uint8_t { HW, HD };
std::string_view to_string(Leakage l);

struct AsmLeak {
  std::size_t instruction;
  std::uint32_t reg;
  Leakage observable;
  Witness witness;
};

struct Certification {
  std::vector<AsmLeak> leaks;
  std::uint64_t valuations = 0;

  bool certified() const { return leaks.empty(); }
};

/// Checks HW(new) and HD(old, new) of every register write against the
/// secrets of `p`, and that every asm output equals the program's value.
/// Throws SemanticMismatch, BudgetExceeded or AsmRuntimeError.
Certification certify_asm(const AsmProgram& asm_prog, const Program& p, unsigned k);

struct TruthTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::uint32_t>> rows;

  std::size_t column(const std::string& name) const;
  std::string render() const;
};

/// Rows in lexicographic input order (first input most significant); one
/// column per input, per requested variable and per HD pair. Throws
/// BudgetExceeded above kTruthTableBudget input bits.
TruthTable truth_table(const Program& p, const std::vector<VarId>& vars,
                       const std::vector<std::pair<VarId, VarId>>& hd_pairs);

}  // namespace leakguard
