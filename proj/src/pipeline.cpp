#include "leakguard/pipeline.hpp"

#include <chrono>
#include <optional>

#include "leakguard/backend/emit.hpp"

namespace leakguard {

std::string_view to_string(ShareMode m) { return m == ShareMode::All ? "all" : "backend"; }

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<Phase>& phases) : phases_(phases), start_(std::chrono::steady_clock::now()) {}

  void lap(std::string name) {
    const auto now = std::chrono::steady_clock::now();
    phases_.push_back({std::move(name), std::chrono::duration<double, std::milli>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<Phase>& phases_;
  std::chrono::steady_clock::time_point start_;
};

SharePairs backend_share(const Program& p, const MachineFunction& mf) {
  const auto g = build_interference(mf, liveness(mf));
  return compute_share(p, carrier_info(mf, g));
}

struct Forbidden {
  std::vector<bool> hw;
  std::vector<std::vector<bool>> bad;  // bad[prev][next]

  Forbidden(std::size_t n, const LeakReport& report) : hw(n, false), bad(n, std::vector<bool>(n, false)) {
    for (VarId v : report.hw) hw[v] = true;
    for (const auto& l : report.hdd) bad[l.a][l.b] = bad[l.b][l.a] = true;
    for (const auto& l : report.hds) bad[l.operand][l.dest] = true;
  }

  bool transition(VarId prev, VarId next) const {
    return prev != kNoVar && next != kNoVar && prev != next && bad[prev][next];
  }
};

// Zeroes a register before a plain load that would otherwise replace one side
// of a leaking pair with the other. HD(a, 0) and HD(0, b) are the Hamming
// weights of a and b, which never enter a register while UKD.
std::size_t insert_clears(MachineFunction& assigned, const Forbidden& f) {
  std::vector<MachineInstr> code;
  code.reserve(assigned.code.size());
  std::vector<VarId> held;
  std::size_t clears = 0;
  for (const auto& ins : assigned.code) {
    if (ins.dst.kind == Operand::Kind::PReg) {
      if (held.size() <= ins.dst.id) held.resize(ins.dst.id + 1, kNoVar);
      if (ins.op == MOpcode::Mov && f.transition(held[ins.dst.id], ins.value)) {
        code.push_back({MOpcode::Xor, ins.dst, ins.dst, kNoVar});
        ++clears;
      }
      held[ins.dst.id] = ins.value;
    }
    code.push_back(ins);
  }
  assigned.code = std::move(code);
  return clears;
}

}  // namespace

Analysis analyze(const Program& p, const AnalyzeOptions& options) {
  Analysis a;
  Stopwatch clock(a.phases);
  a.depsets = compute_depsets(p);
  clock.lap("depsets");
  a.inference = infer_types(p, a.depsets, options.encoding, {options.rules, false});
  clock.lap("typeinfer");
  if (options.share == ShareMode::All) {
    a.share = compute_share(p);
  } else {
    a.share = backend_share(p, lower(p));
  }
  clock.lap("share");
  a.leaks = detect(p, a.inference.types, a.depsets, a.share, options.rules);
  clock.lap("detect");
  return a;
}

Compilation compile(const Program& p, const CompileOptions& options) {
  Compilation c;
  c.mitigation = options.mitigate;
  c.analysis = analyze(p, options.analysis);
  Stopwatch clock(c.phases);
  const auto& types = c.analysis.inference.types;
  const auto& d = c.analysis.depsets;
  const auto rules = options.analysis.rules;

  MachineFunction mf;
  if (options.mitigate) {
    auto lowered = rewrite_hds(p, c.analysis.leaks);
    mf = std::move(lowered.mf);
    c.forms = std::move(lowered.forms);
    c.unmitigated = std::move(lowered.unmitigated);
  } else {
    mf = lower(p);
  }
  clock.lap("lower");

  ConstraintSource constraints;
  if (options.mitigate) {
    constraints = [&](const MachineFunction& current) {
      return detect(p, types, d, backend_share(p, current), rules);
    };
  }
  c.allocation = allocate(mf, options.regs, constraints);
  clock.lap("regalloc");

  c.code = assign_registers(mf, c.allocation);
  c.vcode = std::move(mf);
  std::optional<LeakReport> all;
  if (options.mitigate) {
    all = detect(p, types, d, compute_share(p), rules);
    c.clears = insert_clears(c.code, Forbidden(p.num_vars(), *all));
  }
  c.assembly = emit(c.code, &p);
  clock.lap("emit");

  if (all) {
    c.violations = check_constraints(p, c.code, *all);
    clock.lap("verify");
  }
  return c;
}

std::vector<std::string> check_constraints(const Program& p, const MachineFunction& assigned,
                                           const LeakReport& report) {
  const Forbidden f(p.num_vars(), report);

  std::vector<std::string> out;
  std::vector<VarId> held;
  for (std::size_t i = 0; i < assigned.code.size(); ++i) {
    const auto& ins = assigned.code[i];
    if (ins.dst.is_mem()) continue;
    if (ins.dst.kind != Operand::Kind::PReg) {
      out.push_back(std::to_string(i) + ": destination is not a physical register");
      continue;
    }
    if (held.size() <= ins.dst.id) held.resize(ins.dst.id + 1, kNoVar);
    const VarId prev = held[ins.dst.id];
    const VarId next = ins.value;
    const std::string where = std::to_string(i) + " (" + to_string(ins) + "): ";
    if (next != kNoVar && f.hw[next]) out.push_back(where + "register holds UKD value " + p.name(next));
    if (f.transition(prev, next))
      out.push_back(where + "leaky transition " + p.name(prev) + " -> " + p.name(next));
    held[ins.dst.id] = next;
  }
  return out;
}

}  // namespace leakguard
