#include "leakguard/oracle.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <sstream>

#include "leakguard/gf256.hpp"

namespace leakguard {

std::uint32_t word_mask(unsigned width) { return width >= 32 ? 0xFFFFFFFFu : (1u << width) - 1u; }

std::uint32_t apply(Opcode op, std::uint32_t a, std::uint32_t b, unsigned width) {
  const auto m = word_mask(width);
  switch (op) {
    case Opcode::Not: return ~a & m;
    case Opcode::Xor: return (a ^ b) & m;
    case Opcode::And: return a & b & m;
    case Opcode::Or: return (a | b) & m;
    case Opcode::Gmul:
      if (width != 8) throw std::invalid_argument("gmul requires width 8");
      return gf256_mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
  }
  return 0;
}

std::vector<std::uint32_t> interpret(const Program& p, const Valuation& in) {
  if (in.size() != p.num_inputs())
    throw std::invalid_argument("expected " + std::to_string(p.num_inputs()) + " input values, got " +
                                std::to_string(in.size()));
  const auto m = word_mask(p.width());
  std::vector<std::uint32_t> val(p.num_vars());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] & ~m)
      throw std::invalid_argument("value of '" + p.inputs()[i].name + "' exceeds width " + std::to_string(p.width()));
    val[i] = in[i];
  }
  for (const auto& d : p.defs()) val[d.dest] = apply(d.op, val[d.lhs], val[d.rhs], p.width());
  return val;
}

namespace {

// Input ordinals grouped by annotation.
struct Partition {
  std::vector<VarId> pub, sec, rnd;
  unsigned width;

  explicit Partition(const Program& p) : width(p.width()) {
    for (VarId i = 0; i < p.num_inputs(); ++i) {
      switch (p.input_kind(i)) {
        case InputKind::Public: pub.push_back(i); break;
        case InputKind::Secret: sec.push_back(i); break;
        case InputKind::Random: rnd.push_back(i); break;
      }
    }
  }

  static std::uint64_t space(std::size_t n, unsigned width) { return std::uint64_t{1} << (n * width); }
  std::uint64_t public_space() const { return space(pub.size(), width); }
  std::uint64_t secret_space() const { return space(sec.size(), width); }
  std::uint64_t random_space() const { return space(rnd.size(), width); }

  // Spreads packed bits (first listed input most significant) into `val`.
  void scatter(const std::vector<VarId>& ids, std::uint64_t bits, Valuation& val) const {
    const auto m = word_mask(width);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto shift = width * (ids.size() - 1 - j);
      val[ids[j]] = static_cast<std::uint32_t>(bits >> shift) & m;
    }
  }
};

void check_budget(const Program& p, unsigned budget) {
  const std::size_t bits = p.num_inputs() * p.width();
  if (bits > budget)
    throw BudgetExceeded("enumeration needs " + std::to_string(bits) + " input bits, budget is " +
                         std::to_string(budget));
}

// Calls f(x, k, valuation) for every valuation, randoms innermost.
template <typename F>
void enumerate(const Program& p, F&& f) {
  check_budget(p, kEnumerationBudget);
  const Partition part(p);
  Valuation val(p.num_inputs(), 0);
  for (std::uint64_t x = 0; x < part.public_space(); ++x) {
    part.scatter(part.pub, x, val);
    for (std::uint64_t k = 0; k < part.secret_space(); ++k) {
      part.scatter(part.sec, k, val);
      for (std::uint64_t r = 0; r < part.random_space(); ++r) {
        part.scatter(part.rnd, r, val);
        f(x, k, r, val);
      }
    }
  }
}

}  // namespace

const std::map<std::uint32_t, std::uint64_t>& DistributionTable::at(std::uint64_t x, std::uint64_t k) const {
  return hist.at(x * secret_space + k);
}

std::uint64_t DistributionTable::count(std::uint64_t x, std::uint64_t k, std::uint32_t value) const {
  const auto& h = at(x, k);
  auto it = h.find(value);
  return it == h.end() ? 0 : it->second;
}

std::uint64_t DistributionTable::count_nonzero(std::uint64_t x, std::uint64_t k) const {
  return samples - count(x, k, 0);
}

std::optional<Witness> DistributionTable::secret_dependence() const {
  for (std::uint64_t x = 0; x < public_space; ++x)
    for (std::uint64_t k = 1; k < secret_space; ++k)
      if (at(x, k) != at(x, 0)) return Witness{x, 0, k};
  return std::nullopt;
}

std::optional<Witness> DistributionTable::non_uniformity() const {
  const std::uint64_t values = std::uint64_t{1} << width;
  for (std::uint64_t x = 0; x < public_space; ++x) {
    for (std::uint64_t k = 0; k < secret_space; ++k) {
      const auto& h = at(x, k);
      bool uniform = samples % values == 0 && h.size() == values;
      for (const auto& [v, c] : h) uniform = uniform && c == samples / values;
      if (!uniform) return Witness{x, k, k};
    }
  }
  return std::nullopt;
}

std::vector<DistributionTable> distributions(const Program& p, const std::vector<Observable>& obs) {
  check_budget(p, kEnumerationBudget);
  const Partition part(p);
  std::vector<DistributionTable> out(obs.size());
  for (auto& t : out) {
    t.width = p.width();
    t.public_space = part.public_space();
    t.secret_space = part.secret_space();
    t.samples = part.random_space();
    t.hist.resize(t.public_space * t.secret_space);
  }
  enumerate(p, [&](std::uint64_t x, std::uint64_t k, std::uint64_t, const Valuation& val) {
    const auto values = interpret(p, val);
    for (std::size_t i = 0; i < obs.size(); ++i) ++out[i].hist[x * out[i].secret_space + k][obs[i](values)];
  });
  return out;
}

DistributionTable distribution(const Program& p, VarId v) {
  return distribution(p, [v](const std::vector<std::uint32_t>& values) { return values.at(v); });
}

DistributionTable distribution(const Program& p, const Observable& obs) { return distributions(p, {obs}).front(); }

Observable xor_of(VarId v1, VarId v2) {
  return [v1, v2](const std::vector<std::uint32_t>& values) { return values.at(v1) ^ values.at(v2); };
}

namespace {

SoundnessVerdict judge(const DistributionTable& t, VarId var, DistType type) {
  SoundnessVerdict out{var, type, true, std::nullopt, {}};
  if (type == DistType::UKD) return out;
  if (auto w = t.secret_dependence()) {
    out.ok = false;
    out.witness = w;
    out.reason = "distribution depends on the secret";
  } else if (type == DistType::RUD) {
    if (auto w = t.non_uniformity()) {
      out.ok = false;
      out.witness = w;
      out.reason = "distribution is not uniform";
    }
  }
  return out;
}

}  // namespace

std::vector<SoundnessVerdict> check_type_soundness(const Program& p, const TypeMap& types) {
  std::vector<Observable> obs;
  std::vector<VarId> vars;
  for (VarId v = 0; v < p.num_vars(); ++v) {
    if (types.at(v) == DistType::UKD) continue;
    vars.push_back(v);
    obs.push_back([v](const std::vector<std::uint32_t>& values) { return values[v]; });
  }
  std::vector<SoundnessVerdict> out;
  const auto tables = obs.empty() ? std::vector<DistributionTable>{} : distributions(p, obs);
  std::size_t next = 0;
  for (VarId v = 0; v < p.num_vars(); ++v) {
    if (types[v] == DistType::UKD) {
      out.push_back({v, DistType::UKD, true, std::nullopt, {}});
    } else {
      out.push_back(judge(tables[next++], v, types[v]));
    }
  }
  return out;
}

SoundnessVerdict check_observable(const Program& p, const Observable& obs, DistType claimed) {
  if (claimed == DistType::UKD) return {kNoVar, claimed, true, std::nullopt, {}};
  return judge(distribution(p, obs), kNoVar, claimed);
}

namespace {

// Dense slot store; -1 marks an unwritten slot.
class Machine {
 public:
  Machine(const AsmProgram& prog, unsigned width, unsigned k) : prog_(prog), width_(width), k_(k), regs_(k, 0) {
    std::uint32_t slots = 0;
    for (const auto& ins : prog.code)
      for (const auto* o : {&ins.dst, &ins.src})
        if (o->is_mem()) slots = std::max(slots, o->id + 1);
    for (const auto& b : prog.inputs) slots = std::max(slots, b.slot + 1);
    for (const auto& b : prog.outputs) slots = std::max(slots, b.slot + 1);
    mem_.assign(slots, -1);
    for (const auto& ins : prog.code)
      for (const auto* o : {&ins.dst, &ins.src})
        if (o->kind == Operand::Kind::PReg && o->id >= k)
          throw AsmRuntimeError("register r" + std::to_string(o->id) + " but only " + std::to_string(k) +
                                " available");
  }

  void reset() {
    std::fill(regs_.begin(), regs_.end(), 0u);
    std::fill(mem_.begin(), mem_.end(), -1);
  }

  void store_input(std::uint32_t slot, std::uint32_t v) { mem_[slot] = v; }

  std::uint32_t read(const Operand& o, std::size_t at) const {
    if (o.is_mem()) {
      if (mem_[o.id] < 0) throw AsmRuntimeError("read of uninitialized slot s" + std::to_string(o.id) +
                                                " at instruction " + std::to_string(at));
      return static_cast<std::uint32_t>(mem_[o.id]);
    }
    return regs_[o.id];
  }

  // Executes instruction i; reports register writes through `step`.
  template <typename F>
  void exec(std::size_t i, F&& step) {
    const auto& ins = prog_.code[i];
    std::uint32_t result;
    switch (ins.op) {
      case MOpcode::Mov: result = read(ins.src, i); break;
      case MOpcode::Not: result = ~read(ins.dst, i) & word_mask(width_); break;
      case MOpcode::Xor: result = apply(Opcode::Xor, read(ins.dst, i), read(ins.src, i), width_); break;
      case MOpcode::And: result = apply(Opcode::And, read(ins.dst, i), read(ins.src, i), width_); break;
      case MOpcode::Or: result = apply(Opcode::Or, read(ins.dst, i), read(ins.src, i), width_); break;
      case MOpcode::Gmul: result = apply(Opcode::Gmul, read(ins.dst, i), read(ins.src, i), width_); break;
      default: result = 0;
    }
    if (ins.dst.is_mem()) {
      mem_[ins.dst.id] = result;
    } else {
      const auto old = regs_[ins.dst.id];
      regs_[ins.dst.id] = result;
      step(AsmStep{i, ins.dst.id, old, result});
    }
  }

  std::uint32_t output(std::uint32_t slot) const {
    if (mem_[slot] < 0) throw AsmRuntimeError("output slot s" + std::to_string(slot) + " never written");
    return static_cast<std::uint32_t>(mem_[slot]);
  }

  const std::vector<std::uint32_t>& registers() const { return regs_; }
  const std::vector<std::int64_t>& memory() const { return mem_; }

 private:
  const AsmProgram& prog_;
  unsigned width_;
  unsigned k_;
  std::vector<std::uint32_t> regs_;
  std::vector<std::int64_t> mem_;
};

}  // namespace

AsmTrace simulate_asm(const AsmProgram& asm_prog, const std::map<std::string, std::uint32_t>& inputs, unsigned width,
                      unsigned k, bool snapshots) {
  Machine m(asm_prog, width, k);
  for (const auto& b : asm_prog.inputs) {
    auto it = inputs.find(b.name);
    if (it == inputs.end()) throw AsmRuntimeError("no value for input '" + b.name + "'");
    if (it->second & ~word_mask(width)) throw AsmRuntimeError("value of '" + b.name + "' exceeds the width");
    m.store_input(b.slot, it->second);
  }
  AsmTrace trace;
  for (std::size_t i = 0; i < asm_prog.code.size(); ++i) {
    m.exec(i, [&](const AsmStep& s) { trace.steps.push_back(s); });
    if (snapshots) trace.snapshots.push_back(m.registers());
  }
  for (const auto& b : asm_prog.outputs) trace.outputs.push_back(m.output(b.slot));
  for (std::uint32_t s = 0; s < m.memory().size(); ++s)
    if (m.memory()[s] >= 0) trace.slots[s] = static_cast<std::uint32_t>(m.memory()[s]);
  return trace;
}

std::string_view to_string(Leakage l) { return l == Leakage::HW ? "HW" : "HD"; }

Certification certify_asm(const AsmProgram& asm_prog, const Program& p, unsigned k) {
  check_budget(p, kEnumerationBudget);
  const unsigned width = p.width();

  // Bind asm slots to program inputs/outputs by name.
  std::vector<std::pair<std::uint32_t, VarId>> in_slots;
  for (const auto& b : asm_prog.inputs) {
    auto v = p.find(b.name);
    if (!v || !p.is_input(*v)) throw SemanticMismatch("asm input '" + b.name + "' is not a program input");
    in_slots.emplace_back(b.slot, *v);
  }
  std::vector<VarId> out_vars;
  for (const auto& b : asm_prog.outputs) {
    auto v = p.find(b.name);
    if (!v) throw SemanticMismatch("asm output '" + b.name + "' is not a program variable");
    out_vars.push_back(*v);
  }
  for (const auto& name : p.outputs()) {
    const bool bound = std::any_of(asm_prog.outputs.begin(), asm_prog.outputs.end(),
                                   [&](const AsmBinding& b) { return b.name == name; });
    if (!bound) throw SemanticMismatch("program output '" + name + "' is missing from the assembly");
  }

  // Register writes happen at the same steps for every valuation.
  std::vector<std::size_t> write_steps;
  for (std::size_t i = 0; i < asm_prog.code.size(); ++i)
    if (!asm_prog.code[i].dst.is_mem()) write_steps.push_back(i);
  std::vector<std::size_t> step_of(asm_prog.code.size(), 0);
  for (std::size_t j = 0; j < write_steps.size(); ++j) step_of[write_steps[j]] = j;

  const std::size_t levels = width + 1;  // HW and HD are in [0, width]
  const std::size_t per_key = write_steps.size() * 2 * levels;
  std::vector<std::uint64_t> reference(per_key), current(per_key);
  std::map<std::pair<std::size_t, int>, AsmLeak> leaks;

  Machine m(asm_prog, width, k);
  Certification cert;
  std::uint64_t last_x = ~std::uint64_t{0}, last_k = ~std::uint64_t{0};

  auto flush = [&] {
    if (last_k == ~std::uint64_t{0}) return;
    if (last_k == 0) {
      reference = current;
    } else {
      for (std::size_t j = 0; j < write_steps.size(); ++j)
        for (int o = 0; o < 2; ++o) {
          const std::size_t base = (j * 2 + static_cast<std::size_t>(o)) * levels;
          if (!std::equal(current.begin() + static_cast<std::ptrdiff_t>(base),
                          current.begin() + static_cast<std::ptrdiff_t>(base + levels),
                          reference.begin() + static_cast<std::ptrdiff_t>(base))) {
            const auto i = write_steps[j];
            leaks.try_emplace({i, o}, AsmLeak{i, asm_prog.code[i].dst.id, o == 0 ? Leakage::HW : Leakage::HD,
                                              Witness{last_x, 0, last_k}});
          }
        }
    }
    std::fill(current.begin(), current.end(), 0);
  };

  enumerate(p, [&](std::uint64_t x, std::uint64_t key, std::uint64_t, const Valuation& val) {
    if (x != last_x || key != last_k) {
      flush();
      last_x = x;
      last_k = key;
    }
    ++cert.valuations;
    m.reset();
    for (const auto& [slot, v] : in_slots) m.store_input(slot, val[v]);
    for (std::size_t i = 0; i < asm_prog.code.size(); ++i) {
      m.exec(i, [&](const AsmStep& s) {
        const std::size_t base = step_of[i] * 2 * levels;
        ++current[base + static_cast<std::size_t>(std::popcount(s.new_value))];
        ++current[base + levels + static_cast<std::size_t>(std::popcount(s.old_value ^ s.new_value))];
      });
    }
    const auto expect = interpret(p, val);
    for (std::size_t o = 0; o < out_vars.size(); ++o) {
      const auto got = m.output(asm_prog.outputs[o].slot);
      if (got != expect[out_vars[o]])
        throw SemanticMismatch("output '" + asm_prog.outputs[o].name + "' is " + std::to_string(got) +
                               ", program computes " + std::to_string(expect[out_vars[o]]));
    }
  });
  flush();

  for (auto& [key, leak] : leaks) cert.leaks.push_back(leak);
  return cert;
}

std::size_t TruthTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::string TruthTable::render() const {
  std::vector<std::size_t> w(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) w[c] = std::max<std::size_t>(columns[c].size(), 1);
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? " " : "") << std::setw(static_cast<int>(w[c])) << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? " " : "") << std::setw(static_cast<int>(w[c])) << row[c];
    os << '\n';
  }
  return os.str();
}

TruthTable truth_table(const Program& p, const std::vector<VarId>& vars,
                       const std::vector<std::pair<VarId, VarId>>& hd_pairs) {
  check_budget(p, kTruthTableBudget);
  TruthTable t;
  for (const auto& in : p.inputs()) t.columns.push_back(in.name);
  for (VarId v : vars) t.columns.push_back(p.name(v));
  for (auto [a, b] : hd_pairs) t.columns.push_back("HD(" + p.name(a) + "," + p.name(b) + ")");

  std::vector<VarId> all(p.num_inputs());
  for (VarId i = 0; i < all.size(); ++i) all[i] = i;
  const Partition part(p);
  const std::uint64_t rows = Partition::space(all.size(), p.width());
  Valuation val(p.num_inputs(), 0);
  for (std::uint64_t r = 0; r < rows; ++r) {
    part.scatter(all, r, val);
    const auto values = interpret(p, val);
    std::vector<std::uint32_t> row(val.begin(), val.end());
    for (VarId v : vars) row.push_back(values[v]);
    for (auto [a, b] : hd_pairs) row.push_back(static_cast<std::uint32_t>(std::popcount(values[a] ^ values[b])));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace leakguard
