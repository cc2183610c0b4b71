// leakc: analyze, compile and certify masked straight-line programs.
//
// Exit codes: 0 clean, 1 usage/parse/semantic error, 2 leaks, 3 enumeration
// budget exceeded.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "leakguard/asm.hpp"
#include "leakguard/generator.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"
#include "leakguard/report.hpp"

namespace lg = leakguard;

namespace {

constexpr int kClean = 0;
constexpr int kError = 1;
constexpr int kLeaky = 2;
constexpr int kBudget = 3;

struct Common {
  unsigned width = 8;
  std::string encoding = "segmented:4";
  std::string share = "backend";
  std::string rules = "strict";
  std::string json_path;
  bool no_timestamp = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

lg::ReportContext context(const Common& c, const std::string& path) {
  lg::ReportContext ctx;
  ctx.program_path = path;
  ctx.options.encoding = lg::parse_encoding(c.encoding);
  ctx.options.share = c.share == "all" ? lg::ShareMode::All : lg::ShareMode::Backend;
  ctx.options.rules = c.rules == "literal" ? lg::RuleSet::Literal : lg::RuleSet::Strict;
  ctx.deterministic = c.no_timestamp;
  return ctx;
}

void write_json(const Common& c, const nlohmann::json& j) {
  if (!c.json_path.empty()) spit(c.json_path, j.dump(2) + "\n");
}

void add_common(CLI::App* cmd, Common& c, bool analysis_flags) {
  cmd->add_option("--width", c.width, "bits per word")->check(CLI::Range(1, 32));
  cmd->add_option("--json", c.json_path, "write a JSON report (`-` for stdout)");
  cmd->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp and zero phase timings");
  if (!analysis_flags) return;
  cmd->add_option("--encoding", c.encoding, "element | powerset | segmented[:S]");
  cmd->add_option("--share", c.share, "all | backend")->check(CLI::IsMember({"all", "backend"}));
  cmd->add_option("--rules", c.rules, "strict | literal")->check(CLI::IsMember({"strict", "literal"}));
}

void print_leaks(const lg::Program& p, const lg::LeakReport& r) {
  std::cout << "hw:";
  for (auto v : r.hw) std::cout << ' ' << p.name(v);
  std::cout << "\nhdd:";
  for (const auto& l : r.hdd) std::cout << " (" << p.name(l.a) << ", " << p.name(l.b) << ")";
  std::cout << "\nhds:";
  for (const auto& l : r.hds) std::cout << " (" << p.name(l.dest) << ", " << p.name(l.operand) << ")";
  std::cout << '\n';
}

int cmd_analyze(const std::string& file, const Common& c) {
  const auto p = lg::parse_program(slurp(file), c.width);
  const auto ctx = context(c, file);
  const auto a = lg::analyze(p, ctx.options);
  std::cout << "types: RUD=" << a.inference.count(lg::DistType::RUD) << " SID=" << a.inference.count(lg::DistType::SID)
            << " UKD=" << a.inference.count(lg::DistType::UKD) << '\n';
  for (lg::VarId v = 0; v < p.num_vars(); ++v)
    std::cout << "  " << std::left << std::setw(12) << p.name(v) << lg::to_string(a.inference.types[v]) << "  "
              << lg::to_string(a.inference.rules[v]) << '\n';
  print_leaks(p, a.leaks);
  write_json(c, lg::analysis_json(p, a, ctx));
  return a.leaks.clean() ? kClean : kLeaky;
}

int cmd_compile(const std::string& file, const std::string& out, unsigned regs, bool no_mitigate, const Common& c) {
  const auto p = lg::parse_program(slurp(file), c.width);
  const auto ctx = context(c, file);
  lg::CompileOptions opt;
  opt.analysis = ctx.options;
  opt.regs = regs;
  opt.mitigate = !no_mitigate;
  const auto comp = lg::compile(p, opt);
  spit(out, comp.assembly);
  for (auto i : comp.unmitigated)
    std::cerr << "warning: no leak-free form for '" << p.instructions()[i].dest << "'\n";
  for (const auto& v : comp.violations) std::cerr << "warning: " << v << '\n';
  write_json(c, lg::compile_json(p, comp, ctx, out == "-" ? std::nullopt : std::optional<std::string>(out)));
  return opt.mitigate && !comp.mitigated() ? kLeaky : kClean;
}

int cmd_check(const std::string& asm_file, const std::string& file, int regs, const Common& c) {
  const auto p = lg::parse_program(slurp(file), c.width);
  const auto asm_prog = lg::parse_asm(slurp(asm_file));
  const unsigned k = regs > 0 ? static_cast<unsigned>(regs) : std::max(1u, asm_prog.registers_used());
  const auto cert = lg::certify_asm(asm_prog, p, k);
  if (cert.certified()) {
    std::cout << "certified: no HW/HD leak over " << cert.valuations << " valuations\n";
  } else {
    for (const auto& l : cert.leaks)
      std::cout << "leak: instruction " << l.instruction << " (" << lg::to_string(asm_prog.code[l.instruction])
                << ") r" << l.reg << ' ' << lg::to_string(l.observable) << " x=" << l.witness.x
                << " k=" << l.witness.k1 << " vs k=" << l.witness.k2 << '\n';
  }
  write_json(c, lg::certification_json(p, asm_prog, cert, context(c, file)));
  return cert.certified() ? kClean : kLeaky;
}

int cmd_bench(const std::string& file, const Common& c) {
  const auto p = lg::parse_program(slurp(file), c.width);
  const auto ctx = context(c, file);
  const auto segment = ctx.options.encoding.kind == lg::Encoding::Segmented ? ctx.options.encoding.segment_width : 4;
  const auto d = lg::compute_depsets(p);
  const auto cmp = lg::compare_encodings(p, d, segment, {ctx.options.rules, false});
  std::cout << std::left << std::setw(14) << "encoding" << std::setw(10) << "supp" << std::setw(10) << "unq"
            << std::setw(10) << "dom" << "ms\n";
  for (const auto& r : cmp.runs)
    std::cout << std::setw(14) << lg::to_string(r.scheme) << std::setw(10) << r.set_facts[0] << std::setw(10)
              << r.set_facts[1] << std::setw(10) << r.set_facts[2] << std::fixed << std::setprecision(2)
              << (c.no_timestamp ? 0.0 : r.millis) << '\n';
  std::cout << "types identical across encodings (" << p.num_vars() << " variables)\n";
  write_json(c, lg::bench_json(p, cmp, ctx));
  return kClean;
}

int cmd_gen(const std::string& kind, std::size_t size, std::uint32_t seed, const std::string& out) {
  lg::Program p;
  if (kind == "chain") {
    p = lg::masked_chain(size, seed);
  } else {
    std::mt19937 rng(seed);
    lg::MaskedProgramOptions opt;
    opt.max_instructions = static_cast<unsigned>(size);
    p = lg::random_masked_program(rng, opt);
  }
  spit(out, lg::to_text(p));
  return kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leakage-aware compiler for masked straight-line programs"};
  app.require_subcommand(1);

  Common common;
  std::string file, asm_file, out = "-";
  unsigned regs = 4;
  int check_regs = 0;
  bool no_mitigate = false;

  auto* analyze = app.add_subcommand("analyze", "infer types and report HW/HD leaks");
  analyze->add_option("program", file, "IR file")->required();
  add_common(analyze, common, true);

  auto* compile = app.add_subcommand("compile", "emit leak-mitigated assembly");
  compile->add_option("program", file, "IR file")->required();
  compile->add_option("-o,--output", out, "assembly output (`-` for stdout)");
  compile->add_option("--regs", regs, "physical registers")->check(CLI::PositiveNumber);
  compile->add_flag("--no-mitigate", no_mitigate, "plain lowering and allocation");
  add_common(compile, common, true);

  auto* check = app.add_subcommand("check", "certify assembly against a program by enumeration");
  check->add_option("assembly", asm_file, "assembly file")->required();
  check->add_option("program", file, "IR file")->required();
  check->add_option("--regs", check_regs, "physical registers (default: as used)")->check(CLI::PositiveNumber);
  add_common(check, common, false);

  auto* bench = app.add_subcommand("bench", "compare the three fact encodings");
  bench->add_option("program", file, "IR file")->required();
  add_common(bench, common, true);

  std::string gen_kind = "masked";
  std::size_t gen_size = 30;
  std::uint32_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "print a generated program");
  gen->add_option("kind", gen_kind, "masked | chain")->check(CLI::IsMember({"masked", "chain"}));
  gen->add_option("--size", gen_size, "instructions");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("-o,--output", out, "output file (`-` for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kClean : kError;
  }

  try {
    if (*analyze) return cmd_analyze(file, common);
    if (*compile) return cmd_compile(file, out, regs, no_mitigate, common);
    if (*check) return cmd_check(asm_file, file, check_regs, common);
    if (*bench) return cmd_bench(file, common);
    if (*gen) return cmd_gen(gen_kind, gen_size, gen_seed, out);
  } catch (const lg::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const lg::ParseError& e) {
    std::cerr << file << ':' << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
