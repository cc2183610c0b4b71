// IR to two-address machine code.
//
// Inputs live in slots s0..s(n-1) in input order. The plain lowering of
// v = op(a, c) is
//
//   mov vr, loc(a)
//   op  vr, loc(c)
//
// and outputs held in a register are stored to a fresh slot right after
// their definition.
//
// The mitigating lowering picks a form per instruction so that no register
// ever holds a UKD value and no register moves from an operand to a result
// through a leaky transition. When neither operand may be tied to the
// result, the result is computed in memory: the clean operand stays in a
// register and the other operand's slot is overwritten, e.g.
//
//   mov vr, [s_mask1]
//   xor [s_key], vr

#pragma once

#include <string>
#include <vector>

#include "leakguard/backend/machine.hpp"
#include "leakguard/hdleaks.hpp"

namespace leakguard {

enum class InstrForm : std::uint8_t {
  TieLhs,      // mov vr, a; op vr, c
  TieRhs,      // mov vr, c; op vr, a
  MemLhs,      // result written over a copy of lhs's slot, rhs in a register
  MemRhs,      // result written over a copy of rhs's slot, lhs in a register
  NotInPlace,  // not [s_a]
};

std::string_view to_string(InstrForm f);

struct LoweringResult {
  MachineFunction mf;
  /// Chosen form per IR instruction.
  std::vector<InstrForm> forms;
  /// Instructions for which no leak-free form exists; they fall back to the
  /// plain form. Indexed like Program::instructions().
  std::vector<std::size_t> unmitigated;
};

MachineFunction lower(const Program& p);

/// Lowers `p` so that the HDS pairs and HW variables of `report` never
/// appear in a register transition. HDD pairs are left to the allocator.
LoweringResult rewrite_hds(const Program& p, const LeakReport& report);

}  // namespace leakguard
