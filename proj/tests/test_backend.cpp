#include <gtest/gtest.h>

#include "leakguard/asm.hpp"
#include "leakguard/backend/emit.hpp"
#include "leakguard/backend/lower.hpp"
#include "leakguard/backend/machine.hpp"
#include "leakguard/backend/regalloc.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"

using namespace leakguard;

namespace {

const char* kMaskedAnd =
    "in k secret\nin m1 random\nin m2 random\nin m3 random\n"
    "t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3\n";

const char* kSecXor =
    "in txt public\nin key secret\nin mask1 random\n"
    "mk = xor mask1 key\nt = xor txt mk\nout mask1, t\n";

Operand V(std::uint32_t i) { return Operand::vreg(i); }
Operand S(std::uint32_t i) { return Operand::slot(i); }

MachineInstr mov(Operand d, Operand s) { return {MOpcode::Mov, d, s, kNoVar}; }
MachineInstr bop(MOpcode op, Operand d, Operand s) { return {op, d, s, kNoVar}; }

// n loads into vr0..vr(n-1), then vr0 ^= vr1 ^ ... ^ vr(n-1), stored to slot n.
MachineFunction wide_xor(unsigned n) {
  MachineFunction mf;
  for (unsigned i = 0; i < n; ++i) {
    mf.new_vreg();
    mf.inputs.push_back({"i" + std::to_string(i), i, mf.new_slot()});
    mf.code.push_back(mov(V(i), S(i)));
  }
  for (unsigned i = 1; i < n; ++i) mf.code.push_back(bop(MOpcode::Xor, V(0), V(i)));
  const auto out = mf.new_slot();
  mf.outputs.push_back({"r", n, out});
  mf.code.push_back(mov(S(out), V(0)));
  mf.num_vars = n + 1;
  return mf;
}

std::string emitted(MachineFunction mf, unsigned k) {
  const auto a = allocate(mf, k);
  return emit(assign_registers(mf, a));
}

}  // namespace

TEST(Machine, Printing) {
  EXPECT_EQ(to_string(mov(V(0), S(5))), "mov vr0, [s5]");
  EXPECT_EQ(to_string(bop(MOpcode::Xor, S(1), Operand::preg(1))), "xor [s1], r1");
  EXPECT_EQ(machine_opcode(Opcode::Gmul), MOpcode::Gmul);
}

TEST(Machine, CheckForm) {
  MachineFunction mf;
  mf.new_vreg();
  mf.code.push_back(bop(MOpcode::Xor, S(0), S(1)));
  EXPECT_FALSE(check_form(mf).empty());
  mf.code = {mov(V(0), S(0))};
  mf.num_slots = 1;
  EXPECT_TRUE(check_form(mf).empty());
}

TEST(Liveness, Ranges) {
  const auto mf = wide_xor(3);
  const auto r = liveness(mf);
  EXPECT_EQ(r[0].def, 0);
  EXPECT_EQ(r[0].last, 5);
  EXPECT_EQ(r[1].def, 1);
  EXPECT_EQ(r[1].last, 3);
  EXPECT_EQ(r[2].def, 2);
  EXPECT_EQ(r[2].last, 4);
  EXPECT_TRUE(ranges_overlap(r[0], r[1]));
  EXPECT_TRUE(ranges_overlap(r[1], r[2]));
  // A use at the other's def does not overlap.
  EXPECT_FALSE(ranges_overlap({0, 3}, {3, 5}));
}

TEST(Liveness, UseBeforeDef) {
  MachineFunction mf;
  mf.new_vreg();
  mf.new_vreg();
  mf.num_slots = 1;
  mf.code = {mov(V(0), S(0)), bop(MOpcode::Xor, V(0), V(1))};
  EXPECT_THROW(liveness(mf), MalformedCode);
}

TEST(Interference, WideXorIsClique) {
  const auto mf = wide_xor(4);
  const auto g = build_interference(mf, liveness(mf));
  for (std::uint32_t a = 0; a < 4; ++a)
    for (std::uint32_t b = a + 1; b < 4; ++b) EXPECT_TRUE(g.live_interfere(a, b)) << a << "," << b;
}

TEST(Coalesce, MergesCopiesUnlessBanned) {
  MachineFunction mf;
  mf.new_vreg();
  mf.new_vreg();
  mf.num_slots = 2;
  mf.code = {mov(V(0), S(0)), mov(V(1), V(0)), bop(MOpcode::Not, V(1), V(1)), mov(S(1), V(1))};
  {
    auto copy = mf;
    auto g = build_interference(copy, liveness(copy));
    EXPECT_EQ(g.moves.size(), 1u);
    EXPECT_EQ(coalesce(g, copy), 1u);
    EXPECT_EQ(copy.code.size(), 3u);
  }
  {
    auto copy = mf;
    auto g = build_interference(copy, liveness(copy));
    g.ban(0, 1);
    EXPECT_EQ(coalesce(g, copy), 0u);
    EXPECT_EQ(copy.code.size(), 4u);
  }
}

TEST(Allocate, SingleValueGetsR0) {
  MachineFunction mf;
  mf.new_vreg();
  mf.num_slots = 2;
  mf.code = {mov(V(0), S(0)), mov(S(1), V(0))};
  const auto a = allocate(mf, 2);
  EXPECT_EQ(a.color[0], 0);
  EXPECT_EQ(a.spilled, 0u);
}

TEST(Allocate, SixLiveInFourRegistersSpills) {
  auto mf = wide_xor(6);
  const auto a = allocate(mf, 4);
  EXPECT_GE(a.spilled, 2u);
  EXPECT_TRUE(check_form(mf).empty());
  const auto code = assign_registers(mf, a);
  for (const auto& ins : code.code) {
    if (ins.dst.kind == Operand::Kind::PReg) {
      EXPECT_LT(ins.dst.id, 4u);
    }
  }
  // Same result as without pressure.
  const auto asm4 = parse_asm(emit(code));
  const auto asm8 = parse_asm(emitted(wide_xor(6), 8));
  std::map<std::string, std::uint32_t> in;
  for (unsigned i = 0; i < 6; ++i) in["i" + std::to_string(i)] = (i * 37 + 11) & 0xff;
  EXPECT_EQ(simulate_asm(asm4, in, 8, 4).outputs, simulate_asm(asm8, in, 8, 8).outputs);
}

TEST(Allocate, RejectsZeroRegisters) {
  auto mf = wide_xor(2);
  EXPECT_THROW(allocate(mf, 0), std::invalid_argument);
}

TEST(Allocate, LeakConstraintSeparatesCarriers) {
  // vr0 dies where vr1 is born, so plain allocation reuses r0 for both.
  MachineFunction mf;
  mf.new_vreg();
  mf.new_vreg();
  mf.num_slots = 3;
  mf.num_vars = 2;
  mf.code = {{MOpcode::Mov, V(0), S(0), 0}, {MOpcode::Mov, S(2), V(0), 0},
             {MOpcode::Mov, V(1), S(1), 1}, {MOpcode::Mov, S(2), V(1), 1}};
  auto plain = mf;
  EXPECT_EQ(allocate(plain, 2).color[1], 0);
  LeakReport r;
  r.hdd.push_back({0, 1});
  auto constrained = mf;
  const auto a = allocate(constrained, 2, [&](const MachineFunction&) { return r; });
  EXPECT_NE(a.color[0], a.color[1]);
}

TEST(Lower, PlainMaskedAnd) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto mf = lower(p);
  EXPECT_TRUE(check_form(mf).empty());
  ASSERT_EQ(mf.inputs.size(), 4u);
  EXPECT_EQ(mf.inputs[0].name, "k");
  EXPECT_EQ(mf.inputs[0].slot, 0u);
  ASSERT_EQ(mf.outputs.size(), 1u);
  EXPECT_EQ(to_string(mf.code[0]), "mov vr0, [s1]");
  EXPECT_EQ(to_string(mf.code[1]), "xor vr0, [s2]");
}

TEST(Lower, MitigatedKeepsUkdOutOfRegisters) {
  for (const char* text : {kMaskedAnd, kSecXor}) {
    const auto p = parse_program(text, 1);
    const auto a = analyze(p);
    const auto l = rewrite_hds(p, a.leaks);
    EXPECT_TRUE(l.unmitigated.empty());
    EXPECT_TRUE(check_form(l.mf).empty());
    for (const auto& ins : l.mf.code)
      if (ins.dst.is_vreg() && ins.value != kNoVar) EXPECT_FALSE(a.leaks.has_hw(ins.value)) << to_string(ins);
    const auto carried = l.mf.carried();
    for (const auto& h : a.leaks.hds)
      for (const auto& vars : carried) {
        const bool both = std::count(vars.begin(), vars.end(), h.dest) && std::count(vars.begin(), vars.end(), h.operand);
        EXPECT_FALSE(both) << p.name(h.dest) << "," << p.name(h.operand);
      }
  }
}

TEST(Lower, SecXorComputesShareInMemory) {
  const auto p = parse_program(kSecXor, 1);
  const auto l = rewrite_hds(p, analyze(p).leaks);
  ASSERT_EQ(l.forms.size(), 2u);
  EXPECT_EQ(l.forms[0], InstrForm::MemRhs);
  EXPECT_EQ(to_string(l.mf.code[0]), "mov vr0, [s2]");
  EXPECT_EQ(to_string(l.mf.code[1]), "xor [s1], vr0");
}

TEST(Emit, Directives) {
  const auto p = parse_program(kSecXor, 1);
  auto mf = lower(p);
  const auto a = allocate(mf, 2);
  const auto text = emit(assign_registers(mf, a), &p);
  EXPECT_NE(text.find(";! in txt s0\n"), std::string::npos);
  EXPECT_NE(text.find(";! in key s1\n"), std::string::npos);
  EXPECT_NE(text.find(";! out t "), std::string::npos);
  EXPECT_NE(text.find("; mk"), std::string::npos);
  EXPECT_THROW(emit(mf), std::logic_error);
  const auto back = parse_asm(text);
  EXPECT_EQ(back.inputs.size(), 3u);
  EXPECT_EQ(back.outputs.size(), 2u);
  EXPECT_LE(back.registers_used(), 2u);
}
