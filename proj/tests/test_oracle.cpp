#include <gtest/gtest.h>

#include "leakguard/asm.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"

using namespace leakguard;

namespace {

const char* kMaskedAnd =
    "in k secret\nin m1 random\nin m2 random\nin m3 random\n"
    "t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3\n";

// The unmitigated single-register code for the masked AND: t1 -> t2 in r0.
const char* kMaskedAndPlain =
    ";! in k s0\n;! in m1 s1\n;! in m2 s2\n;! in m3 s3\n;! out t3 s4\n"
    "mov r0, [s1]\nxor r0, [s2]\nxor r0, [s0]\nand r0, [s3]\nmov [s4], r0\n";

}  // namespace

TEST(Interpret, Examples) {
  const auto p = parse_program("in txt public\nin key secret\nt = xor txt key\nu = not t\n", 4);
  const auto v = interpret(p, {0b0011, 0b0101});
  EXPECT_EQ(v[p.id("t")], 0b0110u);
  EXPECT_EQ(v[p.id("u")], 0b1001u);
  const auto g = parse_program("in a public\nin b public\nc = gmul a b\n", 8);
  EXPECT_EQ(interpret(g, {0x02, 0x87})[2], 0x15u);
  EXPECT_EQ(apply(Opcode::Not, 1, 1, 1), 0u);
  EXPECT_EQ(word_mask(8), 0xffu);
  EXPECT_EQ(word_mask(32), 0xffffffffu);
  EXPECT_THROW(interpret(p, {1}), std::invalid_argument);
  EXPECT_THROW(interpret(p, {16, 1}), std::invalid_argument);
}

TEST(Distribution, MaskedAnd) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto t2 = distribution(p, p.id("t2"));
  EXPECT_EQ(t2.public_space, 1u);
  EXPECT_EQ(t2.secret_space, 2u);
  EXPECT_EQ(t2.samples, 8u);
  EXPECT_FALSE(t2.secret_dependence());
  EXPECT_FALSE(t2.non_uniformity());
  const auto t3 = distribution(p, p.id("t3"));
  EXPECT_FALSE(t3.secret_dependence());
  EXPECT_TRUE(t3.non_uniformity());
  const auto hd = distribution(p, xor_of(p.id("t1"), p.id("t2")));
  const auto w = hd.secret_dependence();
  ASSERT_TRUE(w);
  EXPECT_NE(w->k1, w->k2);
}

TEST(Distribution, Budget) {
  const auto p = parse_program("in a secret\nin b random\nin c public\nx = xor a b\n", 8);
  EXPECT_NO_THROW(distribution(p, p.id("x")));
  const auto q = parse_program("in a secret\nin b random\nin c random\nin d random\nx = xor a b\n", 8);
  EXPECT_THROW(distribution(q, q.id("x")), BudgetExceeded);
}

TEST(Soundness, DetectsWrongClaims) {
  const auto p = parse_program(kMaskedAnd, 1);
  TypeMap types(p.num_vars(), DistType::UKD);
  types[p.id("t3")] = DistType::RUD;  // secret-independent but not uniform
  types[p.id("t2")] = DistType::RUD;
  const auto verdicts = check_type_soundness(p, types);
  for (const auto& v : verdicts) {
    if (v.var == p.id("t3")) {
      EXPECT_FALSE(v.ok);
    }
    if (v.var == p.id("t2")) {
      EXPECT_TRUE(v.ok);
    }
  }
  EXPECT_FALSE(check_observable(p, xor_of(p.id("t1"), p.id("t2")), DistType::SID).ok);
  EXPECT_TRUE(check_observable(p, xor_of(p.id("t1"), p.id("t2")), DistType::UKD).ok);
}

TEST(TruthTable, MaskedAndColumns) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto t1 = p.id("t1"), t2 = p.id("t2"), t3 = p.id("t3");
  const auto tt = truth_table(p, {t1, t2, t3}, {{t1, t2}});
  EXPECT_EQ(tt.columns, (std::vector<std::string>{"k", "m1", "m2", "m3", "t1", "t2", "t3", "HD(t1,t2)"}));
  ASSERT_EQ(tt.rows.size(), 16u);
  EXPECT_EQ(tt.rows[9], (std::vector<std::uint32_t>{1, 0, 0, 1, 0, 1, 1, 1}));
  EXPECT_NE(tt.render().find("HD(t1,t2)"), std::string::npos);
  const auto big = parse_program("in a public\nin b public\nin c public\nc2 = xor a b\n", 8);
  EXPECT_THROW(truth_table(big, {}, {}), BudgetExceeded);
}

TEST(Asm, ParseAndSimulate) {
  const auto a = parse_asm(kMaskedAndPlain);
  EXPECT_EQ(a.code.size(), 5u);
  EXPECT_EQ(a.inputs.size(), 4u);
  EXPECT_EQ(a.registers_used(), 1u);
  const auto trace = simulate_asm(a, {{"k", 1}, {"m1", 1}, {"m2", 0}, {"m3", 1}}, 1, 1, true);
  ASSERT_EQ(trace.outputs.size(), 1u);
  EXPECT_EQ(trace.outputs[0], 0u);  // t2 = 1^0^1 = 0
  ASSERT_EQ(trace.steps.size(), 4u);
  EXPECT_EQ(trace.steps[2].old_value, 1u);  // t1
  EXPECT_EQ(trace.steps[2].new_value, 0u);  // t2
  EXPECT_EQ(trace.snapshots.size(), a.code.size());
  EXPECT_THROW(simulate_asm(a, {{"k", 1}}, 1, 1), AsmRuntimeError);
  EXPECT_THROW(simulate_asm(parse_asm("mov r0, [s0]\n"), {}, 1, 1), AsmRuntimeError);
  EXPECT_THROW(simulate_asm(parse_asm(";! in a s0\nmov r3, [s0]\n"), {{"a", 0}}, 1, 2), AsmRuntimeError);
}

TEST(Asm, ParseErrors) {
  EXPECT_THROW(parse_asm("mov r0\n"), AsmParseError);
  EXPECT_THROW(parse_asm("frob r0, r1\n"), AsmParseError);
  EXPECT_THROW(parse_asm("xor [s0], [s1]\n"), AsmParseError);
  try {
    parse_asm(";! in a s0\nmov r0, [s0]\nbad\n");
    FAIL();
  } catch (const AsmParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Certify, MaskedAndPlainLeaksAtTheKeyXor) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto c = certify_asm(parse_asm(kMaskedAndPlain), p, 1);
  EXPECT_FALSE(c.certified());
  const bool hd_at_xor = std::any_of(c.leaks.begin(), c.leaks.end(), [](const AsmLeak& l) {
    return l.instruction == 2 && l.observable == Leakage::HD;
  });
  EXPECT_TRUE(hd_at_xor);
  EXPECT_EQ(c.valuations, 16u);
}

TEST(Certify, MitigatedMaskedAndIsClean) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto c = compile(p);
  EXPECT_TRUE(c.mitigated());
  EXPECT_TRUE(certify_asm(parse_asm(c.assembly), p, 4).certified()) << c.assembly;
}

TEST(Certify, WrongResultIsAMismatch) {
  const auto p = parse_program(kMaskedAnd, 1);
  const char* wrong =
      ";! in k s0\n;! in m1 s1\n;! in m2 s2\n;! in m3 s3\n;! out t3 s4\n"
      "mov r0, [s1]\nxor r0, [s2]\nand r0, [s3]\nmov [s4], r0\n";
  EXPECT_THROW(certify_asm(parse_asm(wrong), p, 1), SemanticMismatch);
}
