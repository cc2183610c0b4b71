// Syntactic dependence sets over input variables.
//
//   supp(v): inputs v depends on syntactically
//   unq(v):  random inputs with exactly one def-use path to v
//   dom(v):  random inputs with exactly one path to v whose binary nodes are all XOR
//
// Each set is a bitset indexed by input ordinal. All three are computed in a
// single forward pass each.

#pragma once

#include <boost/dynamic_bitset.hpp>
#include <string>
#include <vector>

#include "leakguard/ir.hpp"

namespace leakguard {

using InputSet = boost::dynamic_bitset<std::uint64_t>;

/// The three sets of one (possibly synthetic) node.
struct NodeSets {
  InputSet supp;
  InputSet unq;
  InputSet dom;
};

/// Applies the supp/unq/dom recurrences to a node defined by `op` over the
/// given operand sets. For unary ops `rhs` is ignored.
NodeSets combine(Opcode op, const NodeSets& lhs, const NodeSets& rhs);

struct DepSets {
  std::vector<InputSet> supp;
  std::vector<InputSet> unq;
  std::vector<InputSet> dom;

  InputSet random_inputs;
  InputSet secret_inputs;

  std::size_t num_inputs() const { return random_inputs.size(); }
  NodeSets node(VarId v) const { return {supp.at(v), unq.at(v), dom.at(v)}; }
};

std::vector<InputSet> compute_supp(const Program& p);
std::vector<InputSet> compute_unq(const Program& p, const std::vector<InputSet>& supp);
std::vector<InputSet> compute_dom(const Program& p, const std::vector<InputSet>& unq);

DepSets compute_depsets(const Program& p);

/// Names of the inputs in `s`, in input order.
std::vector<std::string> set_names(const Program& p, const InputSet& s);

}  // namespace leakguard
