#include <gtest/gtest.h>

#include <random>

#include "leakguard/generator.hpp"
#include "leakguard/hdleaks.hpp"
#include "leakguard/oracle.hpp"

using namespace leakguard;

namespace {

struct Setup {
  Program p;
  DepSets d;
  TypeMap types;

  VarId id(const std::string& n) const { return p.id(n); }
  LeakReport detect_all() const { return detect(p, types, d, compute_share(p)); }
};

Setup setup(const std::string& text, unsigned width = 1) {
  Setup s{parse_program(text, width), {}, {}};
  s.d = compute_depsets(s.p);
  s.types = infer_types(s.p, s.d, EncodingScheme::segmented()).types;
  return s;
}

const char* kMaskedAnd =
    "in k secret\nin m1 random\nin m2 random\nin m3 random\n"
    "t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3\n";

const char* kSecXor =
    "in txt public\nin key secret\nin mask1 random\n"
    "mk = xor mask1 key\nt = xor txt mk\nout mask1, t\n";

const char* kSecXor2 =
    "in txt public\nin key secret\nin mask1 random\nin mask2 random\n"
    "mk = xor mask1 key\nt1 = xor txt mk\nt2 = xor t1 mask2\nt3 = xor t2 mask1\nout mask2, t3\n";

}  // namespace

TEST(Share, AllAndNone) {
  auto s = SharePairs::all(4);
  EXPECT_TRUE(s.unfiltered());
  EXPECT_TRUE(s.contains(0, 3));
  EXPECT_EQ(s.size(), 6u);
  auto n = SharePairs::none(4);
  EXPECT_FALSE(n.contains(1, 2));
  n.add(2, 1);
  EXPECT_TRUE(n.contains(1, 2));
  EXPECT_EQ(n.size(), 1u);
  EXPECT_EQ(n.pairs().size(), 1u);
}

TEST(Share, FilteredByCarriers) {
  const auto s = setup(kMaskedAnd);
  CarrierInfo info;
  info.carriers.resize(s.p.num_vars());
  // t1 and t2 in one vreg; m3 live alongside; k and m1, m2 never in a register.
  info.carriers[s.id("t1")] = {0};
  info.carriers[s.id("t2")] = {0};
  info.carriers[s.id("m3")] = {1};
  info.carriers[s.id("t3")] = {0};
  info.interferes = [](std::uint32_t a, std::uint32_t b) { return a != b; };
  const auto share = compute_share(s.p, info);
  EXPECT_FALSE(share.unfiltered());
  EXPECT_TRUE(share.contains(s.id("t1"), s.id("t3")));
  EXPECT_FALSE(share.contains(s.id("m3"), s.id("t1")));
  EXPECT_FALSE(share.contains(s.id("m1"), s.id("m2")));
  // (dest, operand) pairs are always in.
  EXPECT_TRUE(share.contains(s.id("t3"), s.id("m3")));
  EXPECT_TRUE(share.contains(s.id("t1"), s.id("m1")));

  CarrierInfo bad;
  bad.carriers.resize(2);
  bad.interferes = info.interferes;
  EXPECT_THROW(compute_share(s.p, bad), UnknownVariable);
}

TEST(Detect, MaskedAnd) {
  const auto s = setup(kMaskedAnd);
  const auto r = s.detect_all();
  EXPECT_TRUE(r.has_hw(s.id("k")));
  EXPECT_EQ(r.hw.size(), 1u);
  EXPECT_TRUE(r.has_hdd(s.id("t1"), s.id("t2")));
  EXPECT_TRUE(r.has_hdd(s.id("t2"), s.id("t1")));
  EXPECT_FALSE(r.has_hdd(s.id("t2"), s.id("t3")));
  EXPECT_TRUE(r.has_hds(s.id("t2"), s.id("t1")));
  EXPECT_FALSE(r.has_hds(s.id("t3"), s.id("t2")));
}

TEST(Detect, HdsRewrites) {
  const auto s = setup(kMaskedAnd + std::string("t4 = or t3 m1\nt5 = not t4\n"));
  const auto t3 = hds_transition(s.p, s.d, s.types, s.id("t3"), s.id("t2"));
  EXPECT_EQ(t3.rewrite, "t2 and not m3");
  EXPECT_EQ(t3.rewrite_type, DistType::SID);
  const auto t2 = hds_transition(s.p, s.d, s.types, s.id("t2"), s.id("t1"));
  EXPECT_EQ(t2.rewrite, "k");
  EXPECT_EQ(t2.rewrite_type, DistType::UKD);
  const auto t5 = hds_transition(s.p, s.d, s.types, s.id("t5"), s.id("t4"));
  EXPECT_EQ(t5.rewrite, "all-ones");
  EXPECT_EQ(t5.rewrite_type, DistType::SID);
  EXPECT_THROW(hds_transition(s.p, s.d, s.types, s.id("t5"), s.id("t1")), std::invalid_argument);
}

TEST(Detect, SecXor) {
  const auto s = setup(kSecXor);
  const auto r = s.detect_all();
  EXPECT_TRUE(r.has_hds(s.id("mk"), s.id("mask1")));
  EXPECT_TRUE(r.has_hdd(s.id("mask1"), s.id("mk")));
  EXPECT_EQ(xor_pair_type(s.p, s.d, s.types, s.id("mk"), s.id("mask1")), DistType::UKD);
}

TEST(Detect, SecXor2) {
  const auto s = setup(kSecXor2);
  const auto r = s.detect_all();
  EXPECT_TRUE(r.has_hdd(s.id("mask1"), s.id("mk")));
  EXPECT_TRUE(r.has_hdd(s.id("mask1"), s.id("t1")));
  EXPECT_TRUE(r.has_hdd(s.id("mask2"), s.id("t3")));
  EXPECT_FALSE(r.has_hdd(s.id("mask1"), s.id("mask2")));
}

TEST(Detect, DestOperandUsesBetterType) {
  // HD(t3, t2) for t3 = t2 and m3 is t2 and not m3, which is SID, even though
  // the synthetic XOR node of the pair is not typable.
  const auto s = setup(kMaskedAnd);
  EXPECT_EQ(xor_pair_type(s.p, s.d, s.types, s.id("t3"), s.id("t2")), DistType::SID);
}

TEST(Detect, PublicProgramIsClean) {
  const auto s = setup("in a public\nin b public\nc = and a b\nd = xor c a\nout d\n");
  EXPECT_TRUE(s.detect_all().clean());
}

TEST(DetectProperty, FilteredIsSubsetOfUnfiltered) {
  std::mt19937 rng(29);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_masked_program(rng);
    const auto d = compute_depsets(p);
    const auto types = infer_types(p, d, EncodingScheme::segmented()).types;
    const auto all = detect(p, types, d, compute_share(p));

    CarrierInfo info;
    info.carriers.resize(p.num_vars());
    for (VarId v = 0; v < p.num_vars(); ++v)
      if (rng() % 3) info.carriers[v] = {static_cast<std::uint32_t>(rng() % 4)};
    info.interferes = [](std::uint32_t a, std::uint32_t b) { return (a + b) % 2 == 1; };
    const auto filtered = detect(p, types, d, compute_share(p, info));

    EXPECT_EQ(filtered.hw, all.hw);
    for (const auto& l : filtered.hdd) ASSERT_TRUE(all.has_hdd(l.a, l.b));
    for (const auto& l : filtered.hds) ASSERT_TRUE(all.has_hds(l.dest, l.operand));
    // hds pairs do not depend on Share.
    EXPECT_EQ(filtered.hds.size(), all.hds.size());
  }
}

// Every pair the detector calls safe really has a secret-independent XOR.
TEST(DetectProperty, ClearedPairsAreSecretIndependent) {
  std::mt19937 rng(31);
  MaskedProgramOptions opts;
  opts.max_inputs = 7;
  opts.max_instructions = 12;
  for (int i = 0; i < 60; ++i) {
    const auto p = random_masked_program(rng, opts);
    const auto d = compute_depsets(p);
    const auto types = infer_types(p, d, EncodingScheme::segmented()).types;
    const auto r = detect(p, types, d, compute_share(p));
    for (VarId a = 0; a < p.num_vars(); ++a)
      for (VarId b = a + 1; b < p.num_vars(); ++b) {
        if (r.has_hdd(a, b)) continue;
        const auto t = xor_pair_type(p, d, types, a, b);
        ASSERT_NE(t, DistType::UKD);
        const auto v = check_observable(p, xor_of(a, b), t);
        ASSERT_TRUE(v.ok) << to_text(p) << p.name(a) << "," << p.name(b) << ": " << v.reason;
      }
  }
}
