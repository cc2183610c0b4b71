#include "leakguard/backend/machine.hpp"

#include <algorithm>
#include <sstream>

namespace leakguard {

std::string_view to_string(MOpcode op) {
  switch (op) {
    case MOpcode::Mov: return "mov";
    case MOpcode::Xor: return "xor";
    case MOpcode::And: return "and";
    case MOpcode::Or: return "or";
    case MOpcode::Not: return "not";
    case MOpcode::Gmul: return "gmul";
  }
  return "?";
}

MOpcode machine_opcode(Opcode op) {
  switch (op) {
    case Opcode::Not: return MOpcode::Not;
    case Opcode::Xor: return MOpcode::Xor;
    case Opcode::And: return MOpcode::And;
    case Opcode::Or: return MOpcode::Or;
    case Opcode::Gmul: return MOpcode::Gmul;
  }
  return MOpcode::Mov;
}

std::uint32_t MachineFunction::new_vreg(bool pinned) {
  unspillable.push_back(pinned);
  return num_vregs++;
}

std::vector<std::vector<VarId>> MachineFunction::carried() const {
  std::vector<std::vector<VarId>> out(num_vregs);
  for (const auto& ins : code)
    if (ins.dst.is_vreg() && ins.value != kNoVar) out[ins.dst.id].push_back(ins.value);
  for (auto& vars : out) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  }
  return out;
}

std::string to_string(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::None: return "_";
    case Operand::Kind::VReg: return "vr" + std::to_string(o.id);
    case Operand::Kind::PReg: return "r" + std::to_string(o.id);
    case Operand::Kind::Slot: return "[s" + std::to_string(o.id) + "]";
  }
  return "?";
}

std::string to_string(const MachineInstr& ins) {
  std::string s(to_string(ins.op));
  s += ' ' + to_string(ins.dst);
  if (!ins.src.is_none()) s += ", " + to_string(ins.src);
  return s;
}

std::string dump(const MachineFunction& mf) {
  std::ostringstream os;
  for (std::size_t i = 0; i < mf.code.size(); ++i) os << i << ": " << to_string(mf.code[i]) << '\n';
  return os.str();
}

std::vector<std::string> check_form(const MachineFunction& mf) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < mf.code.size(); ++i) {
    const auto& ins = mf.code[i];
    auto bad = [&](const std::string& why) { out.push_back(std::to_string(i) + ": " + why); };
    if (ins.dst.is_none()) bad("missing destination");
    if (ins.op == MOpcode::Not) {
      if (!ins.src.is_none()) bad("not takes one operand");
      continue;
    }
    if (ins.src.is_none()) bad("missing source");
    if (ins.dst.is_mem() && ins.src.is_mem()) bad("two memory operands");
  }
  return out;
}

}  // namespace leakguard
