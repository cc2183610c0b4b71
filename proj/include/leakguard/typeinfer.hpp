// Distribution-type inference.
//
// Every variable gets one of three types, ordered by desirability:
//   RUD  uniformly random and independent of the secrets
//   SID  independent of the secrets
//   UKD  nothing could be proven (possible leak)
//
// Types are derived by a fixpoint over a fact base: input annotations, the
// def-use edges and the precomputed supp/unq/dom sets (in any of the three
// encodings). RUD is decided first (dom(v) non-empty); SID facts are then
// grown semi-naively; whatever is left is UKD.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakguard/depsets.hpp"
#include "leakguard/factbase.hpp"
#include "leakguard/ir.hpp"

namespace leakguard {

enum class DistType : std::uint8_t { UKD = 0, SID = 1, RUD = 2 };

std::string_view to_string(DistType t);
/// Secret-independent: RUD or SID.
inline bool is_safe(DistType t) { return t != DistType::UKD; }

/// Which rule produced a type.
enum class Rule : std::uint8_t {
  R1,        // dom(v) non-empty
  R2,        // no secret in supp(v)
  R3a,
  R3b,
  R4,
  R5a,
  R5b,
  R6,
  R7a,
  R7b,
  R8,
  Copy,      // v <- Uop(v1)
  RandomIn,
  PublicIn,
  Fallback,  // no RUD/SID derivation
};

std::string_view to_string(Rule r);

/// The strict rule set drops the two shared-mask rules (5a/5b) and requires
/// a mask of one GMUL operand to be absent from the other operand's support
/// (rule 8). Both literal forms admit secret-dependent counterexamples; see
/// the oracle tests. The literal set is kept for comparison.
enum class RuleSet : std::uint8_t { Strict, Literal };

struct InferenceOptions {
  RuleSet rules = RuleSet::Strict;
  /// Visit instructions back-to-front in the initial round. The fixpoint is
  /// the same either way.
  bool reverse_order = false;
};

using TypeMap = std::vector<DistType>;

struct InferenceResult {
  TypeMap types;
  std::vector<Rule> rules;
  /// Set facts stored under the chosen encoding, per relation (Supp, Unq, Dom).
  std::array<std::size_t, 3> set_facts{};
  /// Total derived type facts after each round; never decreases.
  std::vector<std::size_t> fact_history;

  std::size_t count(DistType t) const;
};

struct OperandFacts {
  NodeSets sets;
  DistType type;
};

/// Attempts the SID rules for `v <- op(lhs, rhs)` whose sets are already
/// encoded as nodes of `sets`. `secret` is the node holding the secret-input
/// set in its Supp relation.
std::optional<Rule> derive_sid(const SetRelations& sets, Opcode op, NodeId v, NodeId lhs, DistType lhs_type,
                               NodeId rhs, DistType rhs_type, NodeId secret, RuleSet rules);

/// Types a node that is not part of the program, built over existing facts.
/// Used for the XOR of two variables and for the single-instruction rewrites.
DistType type_synthetic(Opcode op, const OperandFacts& lhs, const OperandFacts& rhs, const InputSet& secret,
                        RuleSet rules = RuleSet::Strict, Rule* why = nullptr);

InferenceResult infer_types(const Program& p, const DepSets& d, EncodingScheme scheme,
                            const InferenceOptions& options = {});

/// Type of v1 XOR v2 as if the program computed it.
DistType type_of_xor_pair(const Program& p, const DepSets& d, const TypeMap& types, VarId v1, VarId v2,
                          RuleSet rules = RuleSet::Strict);

class EncodingMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EncodingRun {
  EncodingScheme scheme;
  std::array<std::size_t, 3> set_facts{};
  std::size_t type_facts = 0;
  double millis = 0;
};

struct EncodingComparison {
  TypeMap types;
  std::vector<EncodingRun> runs;
};

/// Runs inference under the element, powerset and segmented(S) encodings and
/// throws EncodingMismatch if the resulting types differ.
EncodingComparison compare_encodings(const Program& p, const DepSets& d, unsigned segment_width = 4,
                                     const InferenceOptions& options = {});

std::map<std::string, DistType> named_types(const Program& p, const TypeMap& types);

}  // namespace leakguard
