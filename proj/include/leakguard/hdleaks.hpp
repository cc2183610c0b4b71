// Hamming-weight and Hamming-distance leak detection.
//
//   hw   variables typed UKD
//   hdd  unordered pairs {v1, v2} that may share a register and whose XOR is UKD
//   hds  (result, operand) of one instruction whose register transition is UKD
//
// Both pair kinds are filtered through the Share relation, which is either
// every pair (no backend information) or derived from the vregs carrying
// each variable in a lowered function.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakguard/depsets.hpp"
#include "leakguard/ir.hpp"
#include "leakguard/typeinfer.hpp"

namespace leakguard {

struct VarPair {
  VarId first;
  VarId second;

  auto operator<=>(const VarPair&) const = default;
};

class SharePairs {
 public:
  /// Every pair of distinct variables.
  static SharePairs all(std::size_t num_vars);
  /// No pair; add() fills it in.
  static SharePairs none(std::size_t num_vars);

  void add(VarId a, VarId b);
  bool contains(VarId a, VarId b) const;
  bool unfiltered() const { return all_; }
  std::size_t num_vars() const { return n_; }
  std::size_t size() const;
  /// Pairs with first < second, in lexicographic order.
  std::vector<VarPair> pairs() const;

 private:
  SharePairs(std::size_t n, bool all);

  std::size_t n_ = 0;
  bool all_ = false;
  std::vector<bool> bits_;  // n*n, symmetric
};

/// What the backend knows about register sharing: the vregs through which
/// each variable passes, and which vregs are simultaneously live.
struct CarrierInfo {
  /// Indexed by VarId. Empty if the variable never enters a register.
  std::vector<std::vector<std::uint32_t>> carriers;
  std::function<bool(std::uint32_t, std::uint32_t)> interferes;
};

class UnknownVariable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unfiltered mode.
SharePairs compute_share(const Program& p);

/// Filtered mode. A pair may share a register iff some vreg carrying one and
/// some vreg carrying the other are the same vreg or do not interfere.
/// Variables that never enter a register share with nothing. The (dest,
/// operand) pairs of every instruction are always included. Throws
/// UnknownVariable if `backend` does not describe exactly p's variables.
SharePairs compute_share(const Program& p, const CarrierInfo& backend);

struct HddLeak {
  VarId a;  // a < b
  VarId b;
};

struct HdsLeak {
  VarId dest;
  VarId operand;
  /// The expression the transition reduces to, e.g. "t2 and not m3".
  std::string rewrite;
  DistType rewrite_type = DistType::UKD;
};

struct LeakReport {
  std::vector<VarId> hw;
  std::vector<HddLeak> hdd;
  std::vector<HdsLeak> hds;

  bool clean() const { return hw.empty() && hdd.empty() && hds.empty(); }
  bool has_hw(VarId v) const;
  bool has_hdd(VarId a, VarId b) const;
  bool has_hds(VarId dest, VarId operand) const;
};

/// Transition of `operand`'s register to the value of `dest` when the two
/// are tied in dest's defining instruction. `operand` must be an operand.
HdsLeak hds_transition(const Program& p, const DepSets& d, const TypeMap& types, VarId dest, VarId operand,
                       RuleSet rules = RuleSet::Strict);

/// Type of a xor b. For a (dest, operand) pair the better of the synthetic
/// XOR node and the instruction's transition rewrite.
DistType xor_pair_type(const Program& p, const DepSets& d, const TypeMap& types, VarId a, VarId b,
                       RuleSet rules = RuleSet::Strict);

LeakReport detect(const Program& p, const TypeMap& types, const DepSets& d, const SharePairs& share,
                  RuleSet rules = RuleSet::Strict);

}  // namespace leakguard
