#include "leakguard/typeinfer.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace leakguard {

std::string_view to_string(DistType t) {
  switch (t) {
    case DistType::RUD: return "RUD";
    case DistType::SID: return "SID";
    case DistType::UKD: return "UKD";
  }
  return "?";
}

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::R1: return "rule1";
    case Rule::R2: return "rule2";
    case Rule::R3a: return "rule3a";
    case Rule::R3b: return "rule3b";
    case Rule::R4: return "rule4";
    case Rule::R5a: return "rule5a";
    case Rule::R5b: return "rule5b";
    case Rule::R6: return "rule6";
    case Rule::R7a: return "rule7a";
    case Rule::R7b: return "rule7b";
    case Rule::R8: return "rule8";
    case Rule::Copy: return "copy";
    case Rule::RandomIn: return "random-input";
    case Rule::PublicIn: return "public-input";
    case Rule::Fallback: return "fallback";
  }
  return "?";
}

std::size_t InferenceResult::count(DistType t) const {
  return static_cast<std::size_t>(std::count(types.begin(), types.end(), t));
}

std::optional<Rule> derive_sid(const SetRelations& sets, Opcode op, NodeId v, NodeId lhs, DistType lt, NodeId rhs,
                               DistType rt, NodeId secret, RuleSet rules) {
  constexpr auto RUD = DistType::RUD;
  constexpr auto SID = DistType::SID;
  using enum SetRel;

  if (sets.disjoint(Supp, v, Supp, secret)) return Rule::R2;
  if (is_unary(op)) {
    if (lt == SID) return Rule::Copy;
    return std::nullopt;
  }

  const bool xor_or_gmul = op == Opcode::Xor || op == Opcode::Gmul;
  const bool disjoint_supp = sets.disjoint(Supp, lhs, Supp, rhs);
  if (disjoint_supp && !xor_or_gmul) {
    if (lt == RUD && rt == SID) return Rule::R3a;
    if (lt == SID && rt == RUD) return Rule::R3b;
  }
  if (disjoint_supp && lt == SID && rt == SID) return Rule::R4;

  if (rules == RuleSet::Literal) {
    const bool same = sets.equal(Dom, lhs, rhs) && sets.equal(Supp, lhs, rhs);
    if (same && lt == RUD && sets.subset(Dom, lhs, Supp, rhs)) return Rule::R5a;
    if (same && rt == RUD && sets.subset(Dom, rhs, Supp, lhs)) return Rule::R5b;
  }

  // A dominant mask of one operand that the other operand never touches.
  const bool lhs_fresh_mask = !sets.subset(Dom, lhs, Supp, rhs);
  const bool rhs_fresh_mask = !sets.subset(Dom, rhs, Supp, lhs);
  if (!xor_or_gmul && lt == RUD && rt == RUD && (lhs_fresh_mask || rhs_fresh_mask)) return Rule::R6;

  if (op == Opcode::Gmul) {
    if (lt == RUD && rt == SID && lhs_fresh_mask) return Rule::R7a;
    if (lt == SID && rt == RUD && rhs_fresh_mask) return Rule::R7b;
    if (lt == RUD && rt == RUD) {
      const bool fires = rules == RuleSet::Literal
                             ? !sets.subset(Dom, lhs, Dom, rhs) || !sets.subset(Dom, rhs, Dom, lhs)
                             : lhs_fresh_mask || rhs_fresh_mask;
      if (fires) return Rule::R8;
    }
  }
  return std::nullopt;
}

namespace {

// Non-owning view over a handful of explicit node sets, answered like the
// powerset encoding.
class LocalSets final : public SetRelations {
 public:
  LocalSets(std::initializer_list<const NodeSets*> nodes, std::size_t universe) : universe_(universe) {
    std::copy(nodes.begin(), nodes.end(), nodes_.begin());
    size_ = nodes.size();
  }

  EncodingScheme scheme() const override { return EncodingScheme::powerset(); }
  std::size_t num_nodes() const override { return size_; }
  std::size_t universe() const override { return universe_; }

  bool empty(SetRel r, NodeId x) const override { return get(r, x).none(); }
  bool disjoint(SetRel a, NodeId x, SetRel b, NodeId y) const override { return !get(a, x).intersects(get(b, y)); }
  bool subset(SetRel a, NodeId x, SetRel b, NodeId y) const override { return get(a, x).is_subset_of(get(b, y)); }
  bool equal(SetRel r, NodeId x, NodeId y) const override { return get(r, x) == get(r, y); }
  InputSet decode(SetRel r, NodeId x) const override { return get(r, x); }
  std::size_t fact_count(SetRel) const override { return size_; }
  std::size_t fact_count(SetRel, NodeId) const override { return 1; }
  std::vector<std::string> render(SetRel, NodeId, const std::string&) const override { return {}; }

 private:
  const InputSet& get(SetRel r, NodeId x) const {
    const NodeSets& n = *nodes_.at(x);
    switch (r) {
      case SetRel::Supp: return n.supp;
      case SetRel::Unq: return n.unq;
      case SetRel::Dom: return n.dom;
    }
    return n.supp;
  }

  std::array<const NodeSets*, 4> nodes_{};
  std::size_t size_ = 0;
  std::size_t universe_;
};

}  // namespace

DistType type_synthetic(Opcode op, const OperandFacts& lhs, const OperandFacts& rhs, const InputSet& secret,
                        RuleSet rules, Rule* why) {
  const NodeSets result = combine(op, lhs.sets, rhs.sets);
  auto note = [&](Rule r) {
    if (why) *why = r;
  };
  if (result.dom.any()) {
    note(Rule::R1);
    return DistType::RUD;
  }
  const InputSet none(secret.size());
  const NodeSets secret_node{secret, none, none};
  LocalSets sets({&lhs.sets, &rhs.sets, &result, &secret_node}, secret.size());
  if (auto r = derive_sid(sets, op, 2, 0, lhs.type, 1, rhs.type, 3, rules)) {
    note(*r);
    return DistType::SID;
  }
  note(Rule::Fallback);
  return DistType::UKD;
}

InferenceResult infer_types(const Program& p, const DepSets& d, EncodingScheme scheme,
                            const InferenceOptions& options) {
  const auto sets = encode_sets(d, scheme);
  const auto n = static_cast<VarId>(p.num_vars());
  const NodeId secret = n;

  InferenceResult out;
  for (std::size_t r = 0; r < 3; ++r) out.set_facts[r] = sets->fact_count(static_cast<SetRel>(r));

  std::vector<std::optional<DistType>> derived(n);
  out.rules.assign(n, Rule::Fallback);
  std::size_t facts = 0;

  std::vector<std::vector<VarId>> users(n);
  for (const auto& def : p.defs()) {
    users[def.lhs].push_back(def.dest);
    if (def.rhs != def.lhs) users[def.rhs].push_back(def.dest);
  }

  // RUD stratum: rule 1 only needs the precomputed dom facts.
  for (VarId v = 0; v < n; ++v) {
    if (!sets->empty(SetRel::Dom, v)) {
      derived[v] = DistType::RUD;
      out.rules[v] = p.is_input(v) ? Rule::RandomIn : Rule::R1;
      ++facts;
    }
  }
  out.fact_history.push_back(facts);

  // SID stratum. Untyped operands match no rule premise, so the evaluation is
  // monotone in the SID facts and can proceed semi-naively.
  auto current = [&](VarId v) { return derived[v].value_or(DistType::UKD); };
  auto try_derive = [&](VarId v) -> bool {
    if (derived[v]) return false;
    std::optional<Rule> rule;
    if (p.is_input(v)) {
      if (p.input_kind(v) == InputKind::Public) rule = Rule::PublicIn;
    } else {
      const Def& def = p.def(v);
      rule = derive_sid(*sets, def.op, v, def.lhs, current(def.lhs), def.rhs, current(def.rhs), secret, options.rules);
    }
    if (!rule) return false;
    derived[v] = DistType::SID;
    out.rules[v] = *rule;
    ++facts;
    return true;
  };

  std::vector<VarId> order(n);
  std::iota(order.begin(), order.end(), VarId{0});
  if (options.reverse_order) std::reverse(order.begin(), order.end());

  std::vector<VarId> delta;
  for (VarId v : order)
    if (try_derive(v)) delta.push_back(v);
  out.fact_history.push_back(facts);

  while (!delta.empty()) {
    std::vector<VarId> next;
    for (VarId x : delta)
      for (VarId u : users[x])
        if (try_derive(u)) next.push_back(u);
    delta = std::move(next);
    out.fact_history.push_back(facts);
  }

  out.types.resize(n);
  for (VarId v = 0; v < n; ++v) out.types[v] = current(v);
  return out;
}

DistType type_of_xor_pair(const Program& p, const DepSets& d, const TypeMap& types, VarId v1, VarId v2,
                          RuleSet rules) {
  (void)p;
  return type_synthetic(Opcode::Xor, {d.node(v1), types.at(v1)}, {d.node(v2), types.at(v2)}, d.secret_inputs, rules);
}

EncodingComparison compare_encodings(const Program& p, const DepSets& d, unsigned segment_width,
                                     const InferenceOptions& options) {
  EncodingComparison out;
  const EncodingScheme schemes[] = {EncodingScheme::element(), EncodingScheme::powerset(),
                                    EncodingScheme::segmented(segment_width)};
  for (const auto& scheme : schemes) {
    const auto start = std::chrono::steady_clock::now();
    auto result = infer_types(p, d, scheme, options);
    const auto stop = std::chrono::steady_clock::now();

    EncodingRun run;
    run.scheme = scheme;
    run.set_facts = result.set_facts;
    run.type_facts = result.types.size();
    run.millis = std::chrono::duration<double, std::milli>(stop - start).count();
    out.runs.push_back(run);

    if (out.runs.size() == 1) {
      out.types = std::move(result.types);
    } else if (result.types != out.types) {
      for (std::size_t v = 0; v < out.types.size(); ++v) {
        if (result.types[v] != out.types[v])
          throw EncodingMismatch("encodings disagree on '" + p.name(static_cast<VarId>(v)) + "': " +
                                 std::string(to_string(out.types[v])) + " under " + to_string(schemes[0]) + ", " +
                                 std::string(to_string(result.types[v])) + " under " + to_string(scheme));
      }
    }
  }
  return out;
}

std::map<std::string, DistType> named_types(const Program& p, const TypeMap& types) {
  std::map<std::string, DistType> out;
  for (std::size_t v = 0; v < types.size(); ++v) out.emplace(p.name(static_cast<VarId>(v)), types[v]);
  return out;
}

}  // namespace leakguard
