#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "leakguard/asm.hpp"
#include "leakguard/generator.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"
#include "leakguard/report.hpp"

using namespace leakguard;
namespace fs = std::filesystem;

namespace {

const char* kMaskedAnd =
    "in k secret\nin m1 random\nin m2 random\nin m3 random\n"
    "t1 = xor m1 m2\nt2 = xor t1 k\nt3 = and t2 m3\nout t3\n";

std::string corpus(const std::string& name) { return (fs::path(LEAKGUARD_CORPUS) / name).string(); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int leakc(const std::string& args) {
  const auto cmd = std::string("'") + LEAKC_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("leakguard-test-" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(Analyze, PhasesAndShareModes) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto a = analyze(p);
  ASSERT_EQ(a.phases.size(), 4u);
  EXPECT_EQ(a.phases[0].name, "depsets");
  EXPECT_EQ(a.phases[3].name, "detect");
  EXPECT_FALSE(a.share.unfiltered());
  AnalyzeOptions all;
  all.share = ShareMode::All;
  const auto b = analyze(p, all);
  EXPECT_TRUE(b.share.unfiltered());
  EXPECT_GE(b.leaks.hdd.size(), a.leaks.hdd.size());
}

TEST(Compile, MaskedAndMitigatedCosts) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto c = compile(p);
  EXPECT_TRUE(c.mitigated());
  EXPECT_TRUE(c.violations.empty());
  CompileOptions off;
  off.mitigate = false;
  const auto u = compile(p, off);
  EXPECT_EQ(c.code.code.size(), 6u);
  EXPECT_EQ(u.code.code.size(), 5u);
  EXPECT_TRUE(certify_asm(parse_asm(c.assembly), p, 4).certified());
}

TEST(Compile, CheckConstraintsFlagsPlainCode) {
  const auto p = parse_program(kMaskedAnd, 1);
  CompileOptions off;
  off.mitigate = false;
  off.regs = 1;
  const auto u = compile(p, off);
  const auto all = detect(p, u.analysis.inference.types, u.analysis.depsets, compute_share(p));
  const auto v = check_constraints(p, u.code, all);
  ASSERT_FALSE(v.empty());
  const bool t1_to_t2 = std::any_of(v.begin(), v.end(), [](const std::string& s) {
    return s.find("leaky transition t1 -> t2") != std::string::npos;
  });
  EXPECT_TRUE(t1_to_t2);
}

TEST(Compile, CorpusCertifiesAtEveryRegisterCount) {
  for (const char* file : {"masked_and.ir", "secxor.ir", "secxor2.ir", "second_order_mul.ir", "remask.ir", "xor.ir"}) {
    const auto p = parse_program(slurp(corpus(file)), 1);
    for (unsigned k : {1u, 2u, 3u, 4u, 8u}) {
      CompileOptions o;
      o.regs = k;
      const auto c = compile(p, o);
      EXPECT_TRUE(c.mitigated()) << file << " k=" << k;
      EXPECT_TRUE(certify_asm(parse_asm(c.assembly), p, k).certified()) << file << " k=" << k << "\n" << c.assembly;
    }
  }
}

// Under heavy constraint pressure the allocator gives up separating some
// spill temps and the emitter clears their registers instead.
TEST(Compile, ClearsBreakTransitionsWhenConstraintsRelax) {
  const auto programs = masked_corpus(40, 20240611);
  std::size_t relaxed = 0;
  for (const auto& p : programs) {
    const auto c = compile(p);
    ASSERT_TRUE(c.mitigated()) << to_text(p);
    relaxed += c.allocation.relaxed;
    if (c.clears > 0) {
      EXPECT_NE(c.assembly.find("xor r"), std::string::npos);
    }
    ASSERT_TRUE(certify_asm(parse_asm(c.assembly), p, 4).certified()) << to_text(p) << c.assembly;
  }
  EXPECT_GT(relaxed, 0u);
}

TEST(Report, AnalysisJson) {
  const auto p = parse_program(kMaskedAnd, 1);
  const auto a = analyze(p);
  ReportContext ctx;
  ctx.program_path = "masked_and.ir";
  ctx.deterministic = true;
  const auto j = analysis_json(p, a, ctx);
  EXPECT_EQ(j["types"]["t3"], "SID");
  EXPECT_EQ(j["types"]["k"], "UKD");
  EXPECT_EQ(j["leaks"]["hw"], nlohmann::json::array({"k"}));
  EXPECT_EQ(j["leaks"]["hds"][0]["dest"], "t2");
  EXPECT_EQ(j["leaks"]["hds"][0]["operand"], "t1");
  EXPECT_FALSE(j.contains("timestamp"));
  for (const auto& ph : j["phases"]) EXPECT_EQ(ph["ms"], 0);
  ctx.deterministic = false;
  EXPECT_TRUE(analysis_json(p, a, ctx).contains("timestamp"));
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(leakc("analyze " + corpus("masked_and.ir") + " --width 1"), 2);
  EXPECT_EQ(leakc("analyze " + corpus("public.ir") + " --width 1"), 0);
  EXPECT_EQ(leakc("analyze /nonexistent.ir"), 1);
  EXPECT_EQ(leakc("bogus"), 1);
  EXPECT_EQ(leakc("compile " + corpus("second_order_gmul.ir") + " -o " + dir / "g.s"), 0);
  EXPECT_EQ(leakc("check " + dir / "g.s" + " " + corpus("second_order_gmul.ir")), 3);

  std::ofstream(dir / "bad.ir") << "in a public\nb = xor a c\n";
  EXPECT_EQ(leakc("analyze " + dir / "bad.ir"), 1);

  EXPECT_EQ(leakc("compile " + corpus("masked_and.ir") + " --width 1 -o " + dir / "t.s"), 0);
  EXPECT_EQ(leakc("check " + dir / "t.s" + " " + corpus("masked_and.ir") + " --width 1"), 0);
  EXPECT_EQ(leakc("compile " + corpus("masked_and.ir") + " --width 1 --no-mitigate --regs 1 -o " + dir / "u.s"), 0);
  EXPECT_EQ(leakc("check " + dir / "u.s" + " " + corpus("masked_and.ir") + " --width 1"), 2);
  // Checking against the wrong program is a semantic error.
  EXPECT_EQ(leakc("check " + dir / "t.s" + " " + corpus("secxor.ir") + " --width 1"), 1);
}

TEST(Cli, DeterministicJson) {
  TempDir dir;
  for (const char* sub : {"analyze", "compile"}) {
    const std::string base = std::string(sub) + " " + corpus("secxor2.ir") + " --width 1 --no-timestamp";
    const std::string extra = std::string(sub) == "compile" ? " -o " + dir / "x.s" : "";
    leakc(base + extra + " --json " + dir / "a.json");
    leakc(base + extra + " --json " + dir / "b.json");
    const auto a = slurp(dir / "a.json");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "b.json")) << sub;
    EXPECT_EQ(a.find("timestamp"), std::string::npos);
  }
}

TEST(Cli, Generate) {
  TempDir dir;
  EXPECT_EQ(leakc("gen masked --seed 5 -o " + dir / "g.ir"), 0);
  const auto text = slurp(dir / "g.ir");
  EXPECT_NO_THROW(parse_program(text, 1));
  EXPECT_EQ(leakc("gen masked --seed 5 -o " + dir / "h.ir"), 0);
  EXPECT_EQ(text, slurp(dir / "h.ir"));
}
