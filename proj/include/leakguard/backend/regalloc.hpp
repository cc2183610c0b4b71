// Liveness, interference and Chaitin-Briggs graph coloring with spilling.
//
// Leak constraints enter as extra interference edges plus coalescing bans
// between the vregs carrying the two halves of every HDD pair. Tie-breaking
// is lowest index first everywhere.

#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "leakguard/backend/machine.hpp"
#include "leakguard/hdleaks.hpp"

namespace leakguard {

struct LiveRange {
  int def = -1;
  int last = -1;

  bool present() const { return def >= 0; }
};

class MalformedCode : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Range per vreg, [first def, last use]; a dead def gives [def, def].
/// Throws MalformedCode on a use before any def.
std::vector<LiveRange> liveness(const MachineFunction& mf);

bool ranges_overlap(const LiveRange& p, const LiveRange& q);

using VRegPair = std::pair<std::uint32_t, std::uint32_t>;  // first < second

struct InterferenceGraph {
  std::uint32_t num_nodes = 0;
  std::vector<std::set<std::uint32_t>> adj;  // live and extra edges
  std::set<VRegPair> live_edges;
  std::set<VRegPair> extra_edges;
  std::set<VRegPair> moves;
  std::set<VRegPair> bans;

  explicit InterferenceGraph(std::uint32_t n = 0) : num_nodes(n), adj(n) {}

  bool adjacent(std::uint32_t a, std::uint32_t b) const { return adj[a].contains(b); }
  bool live_interfere(std::uint32_t a, std::uint32_t b) const;
  bool banned(std::uint32_t a, std::uint32_t b) const;

  void add_live_edge(std::uint32_t a, std::uint32_t b);
  void add_extra_edge(std::uint32_t a, std::uint32_t b);
  void ban(std::uint32_t a, std::uint32_t b);
};

VRegPair ordered(std::uint32_t a, std::uint32_t b);

InterferenceGraph build_interference(const MachineFunction& mf, const std::vector<LiveRange>& ranges);

/// Share input for hdleaks: carriers come from the code, interference from
/// live ranges only.
CarrierInfo carrier_info(const MachineFunction& mf, const InterferenceGraph& g);

/// Adds an extra edge and a coalescing ban between every pair of distinct
/// vregs carrying the two variables of an HDD pair. Throws UnknownVariable
/// if the report names a variable the function does not know.
void apply_leak_constraints(InterferenceGraph& g, const LeakReport& report, const MachineFunction& mf);

/// Merges move-related vregs that neither interfere nor are banned, deleting
/// the moves. Returns the number of merges.
std::size_t coalesce(InterferenceGraph& g, MachineFunction& mf);

struct Coloring {
  std::vector<int> color;  // -1 if uncolored
  std::vector<std::uint32_t> spill;
  std::vector<std::uint32_t> failed;  // unspillable nodes left uncolored
};

/// One simplify/select pass over the vregs that appear in the code.
Coloring color_graph(const InterferenceGraph& g, const MachineFunction& mf, unsigned k);

/// Rewrites every occurrence of the given vregs to a fresh slot each, folding
/// memory operands where the ISA allows and reloading through new unspillable
/// temporaries otherwise.
void insert_spill_code(MachineFunction& mf, const std::vector<std::uint32_t>& spilled);

class Unsatisfiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Allocation {
  unsigned k = 0;
  std::vector<int> color;  // per vreg of the final function
  unsigned rounds = 0;
  std::size_t spilled = 0;
  std::size_t coalesced = 0;
  /// Spill temps whose leak edges had to be dropped; their transitions are
  /// broken by register clears after assignment instead.
  std::size_t relaxed = 0;
};

/// Produces leak constraints for the current code, or an empty report.
using ConstraintSource = std::function<LeakReport(const MachineFunction&)>;

/// Iterates liveness, constraints, coalescing, coloring and spilling until
/// every vreg has a register. Throws Unsatisfiable if some unspillable vreg
/// cannot be colored and none of its neighbours can be spilled.
Allocation allocate(MachineFunction& mf, unsigned k, const ConstraintSource& constraints = {});

/// Replaces vregs with their physical registers and drops self-moves.
MachineFunction assign_registers(const MachineFunction& mf, const Allocation& alloc);

}  // namespace leakguard
