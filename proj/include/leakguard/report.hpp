// JSON reports for the command-line driver.

#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "leakguard/oracle.hpp"
#include "leakguard/pipeline.hpp"

namespace leakguard {

struct ReportContext {
  std::string program_path;
  AnalyzeOptions options;
  /// Deterministic output: no timestamp and zeroed phase timings.
  bool deterministic = false;
};

nlohmann::json analysis_json(const Program& p, const Analysis& a, const ReportContext& ctx);

nlohmann::json compile_json(const Program& p, const Compilation& c, const ReportContext& ctx,
                            const std::optional<std::string>& assembly_path);

nlohmann::json certification_json(const Program& p, const AsmProgram& asm_prog, const Certification& cert,
                                  const ReportContext& ctx);

nlohmann::json bench_json(const Program& p, const EncodingComparison& cmp, const ReportContext& ctx);

}  // namespace leakguard
