// Randomized cross-module properties.

#include <gtest/gtest.h>

#include <random>

#include "leakguard/asm.hpp"
#include "leakguard/backend/emit.hpp"
#include "leakguard/generator.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"

using namespace leakguard;

namespace {

std::map<std::string, std::uint32_t> named_inputs(const Program& p, const Valuation& in) {
  std::map<std::string, std::uint32_t> out;
  for (std::size_t i = 0; i < in.size(); ++i) out[p.inputs()[i].name] = in[i];
  return out;
}

Valuation random_valuation(std::mt19937& rng, const Program& p) {
  Valuation in(p.num_inputs());
  for (auto& x : in) x = rng() & word_mask(p.width());
  return in;
}

}  // namespace

TEST(Property, ParsePrintRoundTrip) {
  std::mt19937 rng(41);
  for (int i = 0; i < 200; ++i) {
    MaskedProgramOptions o;
    o.width = 1 + rng() % 16;
    const auto p = random_masked_program(rng, o);
    const auto text = to_text(p);
    const auto q = parse_program(text, p.width());
    ASSERT_EQ(to_text(q), text);
    ASSERT_EQ(q.defs().size(), p.defs().size());
  }
}

// Compiled code computes the same outputs as the IR, mitigated or not, at
// every register count.
TEST(Property, CompiledCodeMatchesInterpreter) {
  std::mt19937 rng(43);
  for (int i = 0; i < 120; ++i) {
    MaskedProgramOptions o;
    o.width = i % 2 ? 8 : 1;
    const auto p = random_masked_program(rng, o);
    for (bool mitigate : {true, false}) {
      CompileOptions co;
      co.mitigate = mitigate;
      co.regs = 1 + rng() % 5;
      const auto c = compile(p, co);
      const auto a = parse_asm(c.assembly);
      ASSERT_LE(a.registers_used(), co.regs);
      for (int trial = 0; trial < 8; ++trial) {
        const auto in = random_valuation(rng, p);
        const auto values = interpret(p, in);
        const auto trace = simulate_asm(a, named_inputs(p, in), p.width(), co.regs);
        const auto outs = p.output_ids();
        ASSERT_EQ(trace.outputs.size(), outs.size());
        for (std::size_t j = 0; j < outs.size(); ++j)
          ASSERT_EQ(trace.outputs[j], values[outs[j]]) << to_text(p) << c.assembly;
      }
    }
  }
}

// Mitigated code keeps its guarantees at any register count.
TEST(Property, MitigatedCodeCertifies) {
  std::mt19937 rng(47);
  MaskedProgramOptions o;
  o.max_inputs = 8;
  o.max_instructions = 20;
  for (int i = 0; i < 80; ++i) {
    const auto p = random_masked_program(rng, o);
    CompileOptions co;
    co.regs = 1 + rng() % 4;
    const auto c = compile(p, co);
    ASSERT_TRUE(c.mitigated()) << to_text(p);
    for (const auto& ins : c.code.code)
      if (ins.value != kNoVar && !ins.dst.is_mem()) ASSERT_FALSE(c.analysis.leaks.has_hw(ins.value));
    const auto cert = certify_asm(parse_asm(c.assembly), p, co.regs);
    ASSERT_TRUE(cert.certified()) << to_text(p) << c.assembly;
  }
}

TEST(Property, CompileIsDeterministic) {
  std::mt19937 rng(53);
  for (int i = 0; i < 40; ++i) {
    const auto p = random_masked_program(rng);
    ASSERT_EQ(compile(p).assembly, compile(p).assembly);
  }
}

TEST(Property, AnalysisIsEncodingIndependent) {
  std::mt19937 rng(59);
  for (int i = 0; i < 60; ++i) {
    const auto p = random_masked_program(rng);
    AnalyzeOptions base;
    const auto ref = analyze(p, base);
    for (auto scheme : {EncodingScheme::element(), EncodingScheme::powerset(), EncodingScheme::segmented(1)}) {
      AnalyzeOptions o;
      o.encoding = scheme;
      const auto a = analyze(p, o);
      ASSERT_EQ(a.inference.types, ref.inference.types);
      ASSERT_EQ(a.leaks.hw, ref.leaks.hw);
      ASSERT_EQ(a.leaks.hdd.size(), ref.leaks.hdd.size());
      ASSERT_EQ(a.leaks.hds.size(), ref.leaks.hds.size());
    }
  }
}

TEST(Property, GeneratorKeepsUkdDiscipline) {
  std::mt19937 rng(61);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_masked_program(rng);
    const auto types = infer_types(p, compute_depsets(p), EncodingScheme::powerset()).types;
    ASSERT_TRUE(ukd_discipline(p, types)) << to_text(p);
  }
  const auto a = masked_corpus(20, 9);
  const auto b = masked_corpus(20, 9);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(to_text(a[i]), to_text(b[i]));
}

TEST(Property, ChainScales) {
  const auto p = masked_chain(500, 3);
  EXPECT_EQ(p.width(), 8u);
  EXPECT_GE(p.num_vars() - p.num_inputs(), 500u);
  const auto c = compile(p);
  // The chain reuses UKD values freely, so full mitigation is only expected
  // when it happens to keep the discipline.
  if (ukd_discipline(p, c.analysis.inference.types)) {
    EXPECT_TRUE(c.mitigated());
  } else {
    EXPECT_FALSE(c.unmitigated.empty());
  }
  std::mt19937 rng(67);
  const auto in = random_valuation(rng, p);
  const auto values = interpret(p, in);
  const auto trace = simulate_asm(parse_asm(c.assembly), named_inputs(p, in), 8, 4);
  const auto outs = p.output_ids();
  for (std::size_t j = 0; j < outs.size(); ++j) EXPECT_EQ(trace.outputs[j], values[outs[j]]);
}
