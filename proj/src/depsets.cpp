#include "leakguard/depsets.hpp"

namespace leakguard {
namespace {

InputSet kind_mask(const Program& p, InputKind kind) {
  InputSet s(p.num_inputs());
  for (std::size_t i = 0; i < p.num_inputs(); ++i)
    if (p.inputs()[i].kind == kind) s.set(i);
  return s;
}

}  // namespace

NodeSets combine(Opcode op, const NodeSets& lhs, const NodeSets& rhs) {
  if (is_unary(op)) return lhs;
  NodeSets out;
  out.supp = lhs.supp | rhs.supp;
  out.unq = (lhs.unq | rhs.unq) - (lhs.supp & rhs.supp);
  if (op == Opcode::Xor) {
    out.dom = (lhs.dom | rhs.dom) & out.unq;
  } else {
    out.dom = InputSet(lhs.dom.size());
  }
  return out;
}

std::vector<InputSet> compute_supp(const Program& p) {
  const std::size_t n = p.num_inputs();
  std::vector<InputSet> supp(p.num_vars(), InputSet(n));
  for (std::size_t i = 0; i < n; ++i) supp[i].set(i);
  for (const auto& d : p.defs()) supp[d.dest] = is_unary(d.op) ? supp[d.lhs] : supp[d.lhs] | supp[d.rhs];
  return supp;
}

std::vector<InputSet> compute_unq(const Program& p, const std::vector<InputSet>& supp) {
  const std::size_t n = p.num_inputs();
  std::vector<InputSet> unq(p.num_vars(), InputSet(n));
  for (std::size_t i = 0; i < n; ++i)
    if (p.inputs()[i].kind == InputKind::Random) unq[i].set(i);
  for (const auto& d : p.defs()) {
    if (is_unary(d.op)) {
      unq[d.dest] = unq[d.lhs];
    } else {
      unq[d.dest] = (unq[d.lhs] | unq[d.rhs]) - (supp[d.lhs] & supp[d.rhs]);
    }
  }
  return unq;
}

std::vector<InputSet> compute_dom(const Program& p, const std::vector<InputSet>& unq) {
  const std::size_t n = p.num_inputs();
  std::vector<InputSet> dom(p.num_vars(), InputSet(n));
  for (std::size_t i = 0; i < n; ++i)
    if (p.inputs()[i].kind == InputKind::Random) dom[i].set(i);
  for (const auto& d : p.defs()) {
    if (is_unary(d.op)) {
      dom[d.dest] = dom[d.lhs];
    } else if (d.op == Opcode::Xor) {
      dom[d.dest] = (dom[d.lhs] | dom[d.rhs]) & unq[d.dest];
    }
  }
  return dom;
}

DepSets compute_depsets(const Program& p) {
  DepSets d;
  d.supp = compute_supp(p);
  d.unq = compute_unq(p, d.supp);
  d.dom = compute_dom(p, d.unq);
  d.random_inputs = kind_mask(p, InputKind::Random);
  d.secret_inputs = kind_mask(p, InputKind::Secret);
  return d;
}

std::vector<std::string> set_names(const Program& p, const InputSet& s) {
  std::vector<std::string> names;
  for (auto i = s.find_first(); i != InputSet::npos; i = s.find_next(i)) names.push_back(p.inputs()[i].name);
  return names;
}

}  // namespace leakguard
