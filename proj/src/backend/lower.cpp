#include "leakguard/backend/lower.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

namespace leakguard {

std::string_view to_string(InstrForm f) {
  switch (f) {
    case InstrForm::TieLhs: return "tie-lhs";
    case InstrForm::TieRhs: return "tie-rhs";
    case InstrForm::MemLhs: return "mem-lhs";
    case InstrForm::MemRhs: return "mem-rhs";
    case InstrForm::NotInPlace: return "not-in-place";
  }
  return "?";
}

namespace {

constexpr std::size_t kForever = std::numeric_limits<std::size_t>::max();

class Lowerer {
 public:
  explicit Lowerer(const Program& p) : p_(p), loc_(p.num_vars()), last_use_(p.num_vars(), 0) {
    mf_.num_vars = p.num_vars();
    for (VarId i = 0; i < p.num_inputs(); ++i) {
      const auto s = mf_.new_slot();
      loc_[i] = Operand::slot(s);
      mf_.inputs.push_back({p.inputs()[i].name, i, s});
    }
    for (std::size_t i = 0; i < p.defs().size(); ++i) {
      last_use_[p.defs()[i].lhs] = i;
      last_use_[p.defs()[i].rhs] = i;
    }
    for (VarId v : p.output_ids()) last_use_[v] = kForever;
  }

  // Is `v`'s value still needed after instruction `i`?
  bool live_after(VarId v, std::size_t i) const { return last_use_[v] == kForever || last_use_[v] > i; }

  const Operand& loc(VarId v) const { return loc_[v]; }

  void emit(MOpcode op, Operand dst, Operand src, VarId value) { mf_.code.push_back({op, dst, src, value}); }

  // mov vr, loc(t); op vr, loc(o)
  void tie(const Def& def, VarId t, VarId o) {
    const auto vr = Operand::vreg(mf_.new_vreg());
    emit(MOpcode::Mov, vr, loc_[t], t);
    if (def.op == Opcode::Not)
      emit(MOpcode::Not, vr, {}, def.dest);
    else
      emit(machine_opcode(def.op), vr, loc_[o], def.dest);
    loc_[def.dest] = vr;
    after_def(def.dest);
  }

  // Cost of preparing o's slot as the destination, or nothing if o would
  // have to pass through a register while being UKD.
  std::optional<int> mem_dest_cost(VarId o, std::size_t i, const std::vector<bool>& hw) const {
    if (loc_[o].is_vreg()) return 1;
    if (!live_after(o, i)) return 0;
    if (!hw[o]) return 2;
    return std::nullopt;
  }

  // Result computed into a slot holding o; r supplies the register operand.
  void mem_dest(const Def& def, std::size_t i, VarId r, VarId o) {
    Operand dst;
    if (loc_[o].is_vreg()) {
      dst = Operand::slot(mf_.new_slot());
      emit(MOpcode::Mov, dst, loc_[o], o);
    } else if (!live_after(o, i)) {
      dst = loc_[o];
    } else {
      const auto tmp = Operand::vreg(mf_.new_vreg());
      dst = Operand::slot(mf_.new_slot());
      emit(MOpcode::Mov, tmp, loc_[o], o);
      emit(MOpcode::Mov, dst, tmp, o);
    }
    Operand reg = loc_[r];
    if (!reg.is_vreg()) {
      reg = Operand::vreg(mf_.new_vreg());
      emit(MOpcode::Mov, reg, loc_[r], r);
    }
    emit(machine_opcode(def.op), dst, reg, def.dest);
    loc_[def.dest] = dst;
    after_def(def.dest);
  }

  void not_in_place(const Def& def) {
    emit(MOpcode::Not, loc_[def.lhs], {}, def.dest);
    loc_[def.dest] = loc_[def.lhs];
    after_def(def.dest);
  }

  MachineFunction finish() {
    std::map<VarId, std::uint32_t> slot_of;
    for (const auto& b : mf_.inputs) slot_of[b.var] = b.slot;
    for (auto& [v, s] : stored_) slot_of[v] = s;
    for (const auto& name : p_.outputs()) {
      const VarId v = p_.id(name);
      std::uint32_t s;
      if (auto it = slot_of.find(v); it != slot_of.end()) s = it->second;
      else s = loc_[v].id;  // result left in a slot by a memory form
      mf_.outputs.push_back({name, v, s});
    }
    return std::move(mf_);
  }

 private:
  void after_def(VarId v) {
    if (last_use_[v] != kForever || !loc_[v].is_vreg() || stored_.contains(v)) return;
    const auto s = mf_.new_slot();
    emit(MOpcode::Mov, Operand::slot(s), loc_[v], v);
    stored_[v] = s;
  }

  const Program& p_;
  MachineFunction mf_;
  std::vector<Operand> loc_;
  std::vector<std::size_t> last_use_;
  std::map<VarId, std::uint32_t> stored_;
};

}  // namespace

MachineFunction lower(const Program& p) {
  Lowerer low(p);
  for (const auto& def : p.defs()) low.tie(def, def.lhs, def.rhs);
  return low.finish();
}

LoweringResult rewrite_hds(const Program& p, const LeakReport& report) {
  std::vector<bool> hw(p.num_vars(), false);
  for (VarId v : report.hw) hw.at(v) = true;

  Lowerer low(p);
  LoweringResult out;
  const auto& defs = p.defs();
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const Def& def = defs[i];
    const VarId v = def.dest;

    if (def.op == Opcode::Not) {
      if (!hw[def.lhs]) {
        low.tie(def, def.lhs, def.lhs);
        out.forms.push_back(InstrForm::TieLhs);
      } else if (low.loc(def.lhs).is_mem() && !low.live_after(def.lhs, i)) {
        low.not_in_place(def);
        out.forms.push_back(InstrForm::NotInPlace);
      } else {
        low.tie(def, def.lhs, def.lhs);
        out.forms.push_back(InstrForm::TieLhs);
        out.unmitigated.push_back(i);
      }
      continue;
    }

    auto tie_ok = [&](VarId t) { return !hw[v] && !hw[t] && !report.has_hds(v, t); };
    if (tie_ok(def.lhs)) {
      low.tie(def, def.lhs, def.rhs);
      out.forms.push_back(InstrForm::TieLhs);
      continue;
    }
    if (tie_ok(def.rhs)) {
      low.tie(def, def.rhs, def.lhs);
      out.forms.push_back(InstrForm::TieRhs);
      continue;
    }

    // Memory destination: o's slot receives the result, r sits in a register.
    std::optional<int> best;
    bool overwrite_rhs = true;
    for (bool rhs_dest : {true, false}) {
      const VarId r = rhs_dest ? def.lhs : def.rhs;
      const VarId o = rhs_dest ? def.rhs : def.lhs;
      if (hw[r]) continue;
      const auto cost = low.mem_dest_cost(o, i, hw);
      if (cost && (!best || *cost < *best)) {
        best = cost;
        overwrite_rhs = rhs_dest;
      }
    }
    if (best) {
      if (overwrite_rhs) {
        low.mem_dest(def, i, def.lhs, def.rhs);
        out.forms.push_back(InstrForm::MemRhs);
      } else {
        low.mem_dest(def, i, def.rhs, def.lhs);
        out.forms.push_back(InstrForm::MemLhs);
      }
      continue;
    }

    low.tie(def, def.lhs, def.rhs);
    out.forms.push_back(InstrForm::TieLhs);
    out.unmitigated.push_back(i);
  }
  out.mf = low.finish();
  return out;
}

}  // namespace leakguard
