#include "leakguard/hdleaks.hpp"

#include <algorithm>

namespace leakguard {

SharePairs::SharePairs(std::size_t n, bool all) : n_(n), all_(all) {
  if (!all) bits_.assign(n * n, false);
}

SharePairs SharePairs::all(std::size_t num_vars) { return SharePairs(num_vars, true); }
SharePairs SharePairs::none(std::size_t num_vars) { return SharePairs(num_vars, false); }

void SharePairs::add(VarId a, VarId b) {
  if (a >= n_ || b >= n_) throw UnknownVariable("share pair outside the program");
  if (all_ || a == b) return;
  bits_[a * n_ + b] = true;
  bits_[b * n_ + a] = true;
}

bool SharePairs::contains(VarId a, VarId b) const {
  if (a >= n_ || b >= n_ || a == b) return false;
  return all_ || bits_[a * n_ + b];
}

std::size_t SharePairs::size() const {
  if (all_) return n_ * (n_ - (n_ ? 1 : 0)) / 2;
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)) / 2;
}

std::vector<VarPair> SharePairs::pairs() const {
  std::vector<VarPair> out;
  for (VarId a = 0; a < n_; ++a)
    for (VarId b = a + 1; b < n_; ++b)
      if (contains(a, b)) out.push_back({a, b});
  return out;
}

SharePairs compute_share(const Program& p) { return SharePairs::all(p.num_vars()); }

SharePairs compute_share(const Program& p, const CarrierInfo& backend) {
  const auto n = static_cast<VarId>(p.num_vars());
  if (backend.carriers.size() != n)
    throw UnknownVariable("carrier table has " + std::to_string(backend.carriers.size()) + " entries for " +
                          std::to_string(n) + " variables");
  SharePairs share = SharePairs::none(n);
  for (VarId a = 0; a < n; ++a) {
    const auto& ca = backend.carriers[a];
    if (ca.empty()) continue;
    for (VarId b = a + 1; b < n; ++b) {
      const auto& cb = backend.carriers[b];
      bool may = false;
      for (auto x : ca) {
        for (auto y : cb) {
          if (x == y || !backend.interferes(x, y)) {
            may = true;
            break;
          }
        }
        if (may) break;
      }
      if (may) share.add(a, b);
    }
  }
  for (const auto& def : p.defs()) {
    share.add(def.dest, def.lhs);
    share.add(def.dest, def.rhs);
  }
  return share;
}

bool LeakReport::has_hw(VarId v) const { return std::find(hw.begin(), hw.end(), v) != hw.end(); }

bool LeakReport::has_hdd(VarId a, VarId b) const {
  if (a > b) std::swap(a, b);
  return std::any_of(hdd.begin(), hdd.end(), [&](const HddLeak& l) { return l.a == a && l.b == b; });
}

bool LeakReport::has_hds(VarId dest, VarId operand) const {
  return std::any_of(hds.begin(), hds.end(),
                     [&](const HdsLeak& l) { return l.dest == dest && l.operand == operand; });
}

HdsLeak hds_transition(const Program& p, const DepSets& d, const TypeMap& types, VarId dest, VarId operand,
                       RuleSet rules) {
  const Def& def = p.def(dest);
  if (operand != def.lhs && operand != def.rhs) throw std::invalid_argument("not an operand of the instruction");
  const VarId other = operand == def.lhs ? def.rhs : def.lhs;
  const std::string& v2 = p.name(operand);
  const std::string& v3 = p.name(other);

  HdsLeak out{dest, operand, {}, DistType::UKD};
  switch (def.op) {
    case Opcode::Not:
      out.rewrite = "all-ones";
      out.rewrite_type = DistType::SID;
      break;
    case Opcode::Xor:
      out.rewrite = v3;
      out.rewrite_type = types.at(other);
      break;
    case Opcode::And:
    case Opcode::Or: {
      // (v2 and v3) ^ v2 = v2 and not v3;  (v2 or v3) ^ v2 = not v2 and v3.
      // NOT keeps the sets and the type, so both reduce to an AND node.
      out.rewrite = def.op == Opcode::And ? v2 + " and not " + v3 : "not " + v2 + " and " + v3;
      out.rewrite_type = type_synthetic(Opcode::And, {d.node(operand), types.at(operand)},
                                        {d.node(other), types.at(other)}, d.secret_inputs, rules);
      break;
    }
    case Opcode::Gmul: {
      out.rewrite = "(" + v2 + " gmul " + v3 + ") xor " + v2;
      if (types.at(operand) == DistType::UKD || types.at(other) == DistType::UKD) {
        out.rewrite_type = DistType::UKD;
      } else {
        const bool touches_secret = (d.supp.at(operand) | d.supp.at(other)).intersects(d.secret_inputs);
        out.rewrite_type = touches_secret ? DistType::UKD : DistType::SID;
      }
      break;
    }
  }
  return out;
}

namespace {

bool is_operand_of(const Program& p, VarId operand, VarId dest) {
  if (p.is_input(dest)) return false;
  const Def& def = p.def(dest);
  return def.lhs == operand || def.rhs == operand;
}

}  // namespace

DistType xor_pair_type(const Program& p, const DepSets& d, const TypeMap& types, VarId a, VarId b, RuleSet rules) {
  DistType t = type_of_xor_pair(p, d, types, a, b, rules);
  // For a (dest, operand) pair the XOR is also the instruction's transition,
  // which the per-operator rewrite may type more precisely.
  if (a > b) std::swap(a, b);
  if (t != DistType::RUD && is_operand_of(p, a, b))
    t = std::max(t, hds_transition(p, d, types, b, a, rules).rewrite_type);
  return t;
}

LeakReport detect(const Program& p, const TypeMap& types, const DepSets& d, const SharePairs& share, RuleSet rules) {
  LeakReport report;
  const auto n = static_cast<VarId>(p.num_vars());
  for (VarId v = 0; v < n; ++v)
    if (types.at(v) == DistType::UKD) report.hw.push_back(v);

  for (VarId a = 0; a < n; ++a) {
    for (VarId b = a + 1; b < n; ++b) {
      if (!share.contains(a, b)) continue;
      if (xor_pair_type(p, d, types, a, b, rules) == DistType::UKD) report.hdd.push_back({a, b});
    }
  }

  for (const auto& def : p.defs()) {
    if (is_unary(def.op)) continue;
    const std::size_t positions = def.lhs == def.rhs ? 1 : 2;
    const VarId operands[] = {def.lhs, def.rhs};
    for (std::size_t i = 0; i < positions; ++i) {
      const VarId operand = operands[i];
      if (!share.contains(def.dest, operand)) continue;
      auto t = hds_transition(p, d, types, def.dest, operand, rules);
      if (t.rewrite_type == DistType::UKD) report.hds.push_back(std::move(t));
    }
  }
  return report;
}

}  // namespace leakguard
