// Two-address machine code.
//
// Binary instructions compute dst <- dst op src; NOT negates dst in place;
// MOV copies src to dst. Operands are virtual registers before allocation,
// physical registers after, or stack slots. At most one operand of an
// instruction may be a slot.

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "leakguard/ir.hpp"

namespace leakguard {

inline constexpr VarId kNoVar = std::numeric_limits<VarId>::max();

enum class MOpcode : std::uint8_t { Mov, Xor, And, Or, Not, Gmul };

std::string_view to_string(MOpcode op);
MOpcode machine_opcode(Opcode op);

struct Operand {
  enum class Kind : std::uint8_t { None, VReg, PReg, Slot };

  Kind kind = Kind::None;
  std::uint32_t id = 0;

  static Operand vreg(std::uint32_t id) { return {Kind::VReg, id}; }
  static Operand preg(std::uint32_t id) { return {Kind::PReg, id}; }
  static Operand slot(std::uint32_t id) { return {Kind::Slot, id}; }

  bool is_none() const { return kind == Kind::None; }
  bool is_vreg() const { return kind == Kind::VReg; }
  bool is_reg() const { return kind == Kind::VReg || kind == Kind::PReg; }
  bool is_mem() const { return kind == Kind::Slot; }

  bool operator==(const Operand&) const = default;
};

struct MachineInstr {
  MOpcode op;
  Operand dst;
  Operand src;  // None for NOT
  /// IR variable whose value dst holds afterwards.
  VarId value = kNoVar;

  bool reads_dst() const { return op != MOpcode::Mov; }
};

struct SlotBinding {
  std::string name;
  VarId var;
  std::uint32_t slot;
};

struct MachineFunction {
  std::vector<MachineInstr> code;
  std::uint32_t num_vregs = 0;
  std::uint32_t num_slots = 0;
  /// Spill temporaries must stay in registers.
  std::vector<bool> unspillable;
  std::vector<SlotBinding> inputs;
  std::vector<SlotBinding> outputs;
  std::size_t num_vars = 0;

  std::uint32_t new_vreg(bool pinned = false);
  std::uint32_t new_slot() { return num_slots++; }

  /// IR variables held by each vreg over its lifetime, sorted.
  std::vector<std::vector<VarId>> carried() const;
};

std::string to_string(const Operand& o);
std::string to_string(const MachineInstr& ins);
std::string dump(const MachineFunction& mf);

/// Structural problems: two memory operands, missing operands, a NOT with
/// a source, a binary op writing a slot from a slot.
std::vector<std::string> check_form(const MachineFunction& mf);

}  // namespace leakguard
