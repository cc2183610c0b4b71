#include "leakguard/backend/regalloc.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace leakguard {

std::vector<LiveRange> liveness(const MachineFunction& mf) {
  std::vector<LiveRange> r(mf.num_vregs);
  for (std::size_t i = 0; i < mf.code.size(); ++i) {
    const auto& ins = mf.code[i];
    const int at = static_cast<int>(i);
    auto use = [&](const Operand& o) {
      if (!o.is_vreg()) return;
      auto& lr = r.at(o.id);
      if (!lr.present())
        throw MalformedCode("vr" + std::to_string(o.id) + " used before definition at " + std::to_string(i));
      lr.last = at;
    };
    use(ins.src);
    if (ins.reads_dst()) use(ins.dst);
    if (ins.dst.is_vreg()) {
      auto& lr = r.at(ins.dst.id);
      if (!lr.present()) lr.def = at;
      lr.last = at;
    }
  }
  return r;
}

bool ranges_overlap(const LiveRange& p, const LiveRange& q) {
  return p.present() && q.present() && q.def < p.last && p.def < q.last;
}

VRegPair ordered(std::uint32_t a, std::uint32_t b) { return a < b ? VRegPair{a, b} : VRegPair{b, a}; }

bool InterferenceGraph::live_interfere(std::uint32_t a, std::uint32_t b) const {
  return live_edges.contains(ordered(a, b));
}

bool InterferenceGraph::banned(std::uint32_t a, std::uint32_t b) const { return bans.contains(ordered(a, b)); }

void InterferenceGraph::add_live_edge(std::uint32_t a, std::uint32_t b) {
  if (a == b) return;
  live_edges.insert(ordered(a, b));
  adj[a].insert(b);
  adj[b].insert(a);
}

void InterferenceGraph::add_extra_edge(std::uint32_t a, std::uint32_t b) {
  if (a == b) return;
  extra_edges.insert(ordered(a, b));
  adj[a].insert(b);
  adj[b].insert(a);
}

void InterferenceGraph::ban(std::uint32_t a, std::uint32_t b) {
  if (a != b) bans.insert(ordered(a, b));
}

InterferenceGraph build_interference(const MachineFunction& mf, const std::vector<LiveRange>& ranges) {
  InterferenceGraph g(mf.num_vregs);
  for (std::uint32_t p = 0; p < ranges.size(); ++p)
    for (std::uint32_t q = p + 1; q < ranges.size(); ++q)
      if (ranges_overlap(ranges[p], ranges[q])) g.add_live_edge(p, q);
  for (const auto& ins : mf.code)
    if (ins.op == MOpcode::Mov && ins.dst.is_vreg() && ins.src.is_vreg() && ins.dst.id != ins.src.id)
      g.moves.insert(ordered(ins.dst.id, ins.src.id));
  return g;
}

namespace {

std::vector<std::vector<std::uint32_t>> carriers_by_var(const MachineFunction& mf) {
  std::vector<std::vector<std::uint32_t>> out(mf.num_vars);
  const auto carried = mf.carried();
  for (std::uint32_t r = 0; r < carried.size(); ++r)
    for (VarId v : carried[r]) out.at(v).push_back(r);
  return out;
}

}  // namespace

CarrierInfo carrier_info(const MachineFunction& mf, const InterferenceGraph& g) {
  CarrierInfo info;
  info.carriers = carriers_by_var(mf);
  info.interferes = [edges = g.live_edges](std::uint32_t a, std::uint32_t b) {
    return edges.contains(ordered(a, b));
  };
  return info;
}

void apply_leak_constraints(InterferenceGraph& g, const LeakReport& report, const MachineFunction& mf) {
  const auto carriers = carriers_by_var(mf);
  for (const auto& leak : report.hdd) {
    if (leak.a >= carriers.size() || leak.b >= carriers.size())
      throw UnknownVariable("leak pair names a variable outside the function");
    for (auto p : carriers[leak.a])
      for (auto q : carriers[leak.b]) {
        if (p == q) continue;
        g.add_extra_edge(p, q);
        g.ban(p, q);
      }
  }
}

std::size_t coalesce(InterferenceGraph& g, MachineFunction& mf) {
  std::vector<std::uint32_t> rep(mf.num_vregs);
  for (std::uint32_t i = 0; i < rep.size(); ++i) rep[i] = i;
  auto find = [&](std::uint32_t x) {
    while (rep[x] != x) x = rep[x];
    return x;
  };

  std::size_t merges = 0;
  for (const auto& ins : mf.code) {
    if (ins.op != MOpcode::Mov || !ins.dst.is_vreg() || !ins.src.is_vreg()) continue;
    const auto a = find(ins.src.id);
    const auto b = find(ins.dst.id);
    if (a == b || g.adjacent(a, b) || g.banned(a, b)) continue;
    const auto keep = std::min(a, b);
    const auto gone = std::max(a, b);
    rep[gone] = keep;
    ++merges;

    for (auto n : g.adj[gone]) {
      g.adj[n].erase(gone);
      g.adj[n].insert(keep);
      g.adj[keep].insert(n);
    }
    g.adj[gone].clear();
    auto remap = [&](std::set<VRegPair>& s) {
      std::set<VRegPair> out;
      for (auto [x, y] : s) {
        x = x == gone ? keep : x;
        y = y == gone ? keep : y;
        if (x != y) out.insert(ordered(x, y));
      }
      s = std::move(out);
    };
    remap(g.live_edges);
    remap(g.extra_edges);
    remap(g.bans);
    remap(g.moves);
    if (mf.unspillable[gone]) mf.unspillable[keep] = true;
  }
  if (merges == 0) return 0;

  std::vector<MachineInstr> code;
  code.reserve(mf.code.size());
  for (auto ins : mf.code) {
    if (ins.dst.is_vreg()) ins.dst.id = find(ins.dst.id);
    if (ins.src.is_vreg()) ins.src.id = find(ins.src.id);
    if (ins.op == MOpcode::Mov && ins.dst == ins.src) continue;
    code.push_back(ins);
  }
  mf.code = std::move(code);
  return merges;
}

namespace {

std::vector<std::size_t> use_counts(const MachineFunction& mf) {
  std::vector<std::size_t> uses(mf.num_vregs, 0);
  for (const auto& ins : mf.code) {
    if (ins.dst.is_vreg()) ++uses[ins.dst.id];
    if (ins.src.is_vreg() && ins.src != ins.dst) ++uses[ins.src.id];
  }
  return uses;
}

double spill_cost(std::size_t uses, std::size_t degree) {
  if (degree == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(uses) / static_cast<double>(degree);
}

}  // namespace

Coloring color_graph(const InterferenceGraph& g, const MachineFunction& mf, unsigned k) {
  const auto n = mf.num_vregs;
  const auto uses = use_counts(mf);
  std::vector<bool> active(n, false);
  for (std::uint32_t v = 0; v < n; ++v) active[v] = uses[v] > 0;

  std::vector<std::size_t> degree(n, 0);
  std::size_t remaining = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!active[v]) continue;
    ++remaining;
    for (auto u : g.adj[v])
      if (active[u]) ++degree[v];
  }

  std::vector<std::uint32_t> stack;
  auto remove = [&](std::uint32_t v) {
    active[v] = false;
    --remaining;
    stack.push_back(v);
    for (auto u : g.adj[v])
      if (active[u]) --degree[u];
  };

  while (remaining > 0) {
    std::optional<std::uint32_t> pick;
    for (std::uint32_t v = 0; v < n && !pick; ++v)
      if (active[v] && degree[v] < k) pick = v;
    if (!pick) {
      // Potential spill: cheapest spillable node, pushed optimistically.
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!active[v] || mf.unspillable[v]) continue;
        const double c = spill_cost(uses[v], degree[v]);
        if (!pick || c < best) {
          best = c;
          pick = v;
        }
      }
      for (std::uint32_t v = 0; v < n && !pick; ++v)
        if (active[v]) pick = v;
    }
    remove(*pick);
  }

  Coloring out;
  out.color.assign(n, -1);
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    std::vector<bool> taken(k, false);
    for (auto u : g.adj[v])
      if (out.color[u] >= 0) taken[out.color[u]] = true;
    const auto free = std::find(taken.begin(), taken.end(), false);
    if (free != taken.end()) {
      out.color[v] = static_cast<int>(free - taken.begin());
    } else if (mf.unspillable[v]) {
      out.failed.push_back(v);
    } else {
      out.spill.push_back(v);
    }
  }
  std::sort(out.spill.begin(), out.spill.end());
  std::sort(out.failed.begin(), out.failed.end());
  return out;
}

void insert_spill_code(MachineFunction& mf, const std::vector<std::uint32_t>& spilled) {
  std::map<std::uint32_t, Operand> slot_of;
  for (auto v : spilled) slot_of.emplace(v, Operand::slot(mf.new_slot()));
  auto spilled_slot = [&](const Operand& o) -> std::optional<Operand> {
    if (!o.is_vreg()) return std::nullopt;
    if (auto it = slot_of.find(o.id); it != slot_of.end()) return it->second;
    return std::nullopt;
  };

  std::vector<VarId> current(mf.num_vregs, kNoVar);
  std::vector<MachineInstr> code;
  code.reserve(mf.code.size() * 2);
  auto emit = [&](MOpcode op, Operand dst, Operand src, VarId value) { code.push_back({op, dst, src, value}); };
  auto temp = [&] { return Operand::vreg(mf.new_vreg(true)); };

  for (const auto& ins : mf.code) {
    const auto dst_slot = spilled_slot(ins.dst);
    const auto src_slot = spilled_slot(ins.src);
    const Operand src = src_slot ? *src_slot : ins.src;
    const VarId src_value = ins.src.is_vreg() ? current[ins.src.id] : kNoVar;
    const VarId dst_value = ins.dst.is_vreg() ? current[ins.dst.id] : kNoVar;

    if (dst_slot) {
      const Operand d = *dst_slot;
      if (ins.op == MOpcode::Mov && ins.src == ins.dst) {
        // no-op
      } else if (src.is_mem()) {
        const auto t = temp();
        if (ins.op == MOpcode::Mov) {
          emit(MOpcode::Mov, t, src, ins.value);
        } else {
          emit(MOpcode::Mov, t, d, dst_value);
          emit(ins.op, t, src, ins.value);
        }
        emit(MOpcode::Mov, d, t, ins.value);
      } else {
        emit(ins.op, d, src, ins.value);
      }
    } else if (src_slot && ins.dst.is_mem()) {
      const auto t = temp();
      emit(MOpcode::Mov, t, src, src_value);
      emit(ins.op, ins.dst, t, ins.value);
    } else {
      emit(ins.op, ins.dst, src, ins.value);
    }
    if (ins.dst.is_vreg()) current[ins.dst.id] = ins.value;
  }
  mf.code = std::move(code);
}

Allocation allocate(MachineFunction& mf, unsigned k, const ConstraintSource& constraints) {
  if (k == 0) throw std::invalid_argument("register count must be at least 1");
  Allocation a;
  a.k = k;
  // Unspillable vregs whose leak edges were dropped after they failed to color.
  std::set<std::uint32_t> relaxed;
  for (;;) {
    ++a.rounds;
    const auto ranges = liveness(mf);
    InterferenceGraph g = build_interference(mf, ranges);
    if (constraints) apply_leak_constraints(g, constraints(mf), mf);
    for (auto r : relaxed) {
      for (auto it = g.adj[r].begin(); it != g.adj[r].end();) {
        const auto e = ordered(r, *it);
        if (g.extra_edges.contains(e) && !g.live_edges.contains(e)) {
          g.extra_edges.erase(e);
          g.adj[*it].erase(r);
          it = g.adj[r].erase(it);
        } else {
          ++it;
        }
      }
    }
    if (const auto merged = coalesce(g, mf); merged > 0) {
      a.coalesced += merged;
      continue;
    }

    const Coloring c = color_graph(g, mf, k);
    if (c.spill.empty() && c.failed.empty()) {
      a.color = c.color;
      a.relaxed = relaxed.size();
      return a;
    }

    std::vector<std::uint32_t> spill = c.spill;
    const auto uses = use_counts(mf);
    for (auto f : c.failed) {
      const bool relieved = std::any_of(g.adj[f].begin(), g.adj[f].end(), [&](std::uint32_t u) {
        return std::find(spill.begin(), spill.end(), u) != spill.end();
      });
      if (relieved) continue;
      std::optional<std::uint32_t> pick;
      double best = 0;
      for (auto u : g.adj[f]) {
        if (mf.unspillable[u] || uses[u] == 0) continue;
        const double cost = spill_cost(uses[u], g.adj[u].size());
        if (!pick || cost < best) {
          best = cost;
          pick = u;
        }
      }
      if (!pick) {
        const bool constrained = std::any_of(g.adj[f].begin(), g.adj[f].end(), [&](std::uint32_t u) {
          return !g.live_edges.contains(ordered(f, u));
        });
        if (constrained && relaxed.insert(f).second) continue;
        throw Unsatisfiable("cannot fit vr" + std::to_string(f) + " into " + std::to_string(k) +
                            " register(s): every interfering value is already in memory");
      }
      spill.push_back(*pick);
    }
    std::sort(spill.begin(), spill.end());
    spill.erase(std::unique(spill.begin(), spill.end()), spill.end());
    a.relaxed = relaxed.size();
    if (spill.empty()) continue;
    insert_spill_code(mf, spill);
    a.spilled += spill.size();
  }
}

MachineFunction assign_registers(const MachineFunction& mf, const Allocation& alloc) {
  MachineFunction out = mf;
  out.code.clear();
  auto phys = [&](Operand o) {
    if (o.is_vreg()) {
      const int c = alloc.color.at(o.id);
      if (c < 0) throw std::logic_error("vr" + std::to_string(o.id) + " has no register");
      return Operand::preg(static_cast<std::uint32_t>(c));
    }
    return o;
  };
  for (auto ins : mf.code) {
    ins.dst = phys(ins.dst);
    ins.src = phys(ins.src);
    if (ins.op == MOpcode::Mov && ins.dst == ins.src) continue;
    out.code.push_back(ins);
  }
  return out;
}

}  // namespace leakguard
