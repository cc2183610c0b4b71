// Assembly text.
//
//   ;! in  <name> s<N>      input <name> is preloaded into slot N
//   ;! out <name> s<N>      output <name> is read from slot N
//   mov <dst>, <src>
//   xor|and|or|gmul <dst>, <src>
//   not <dst>
//
// Operands are r0..r(k-1) or [sN]; `;` starts a comment.

#pragma once

#include <string>

#include "leakguard/backend/machine.hpp"
#include "leakguard/ir.hpp"

namespace leakguard {

/// `mf` must be register-assigned (no vregs left). With `p`, each line is
/// annotated with the variable its destination receives.
std::string emit(const MachineFunction& mf, const Program* p = nullptr);

}  // namespace leakguard
