#include "leakguard/backend/emit.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace leakguard {

std::string emit(const MachineFunction& mf, const Program* p) {
  std::ostringstream os;
  for (const auto& b : mf.inputs) os << ";! in " << b.name << " s" << b.slot << '\n';
  for (const auto& b : mf.outputs) os << ";! out " << b.name << " s" << b.slot << '\n';
  for (const auto& ins : mf.code) {
    if (ins.dst.is_vreg() || ins.src.is_vreg()) throw std::logic_error("emit: unallocated " + to_string(ins));
    std::string line = to_string(ins);
    if (p && ins.value != kNoVar) {
      line.resize(std::max<std::size_t>(line.size(), 20), ' ');
      line += " ; " + p->name(ins.value);
    }
    os << line << '\n';
  }
  return os.str();
}

}  // namespace leakguard
