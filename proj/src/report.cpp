#include "leakguard/report.hpp"

#include <chrono>
#include <ctime>

namespace leakguard {

using nlohmann::json;

namespace {

json names(const Program& p, const InputSet& s) { return set_names(p, s); }

json phases_json(const std::vector<Phase>& phases, bool deterministic) {
  json out = json::array();
  for (const auto& ph : phases) out.push_back({{"name", ph.name}, {"ms", deterministic ? 0.0 : ph.ms}});
  return out;
}

void stamp(json& j, const ReportContext& ctx) {
  if (ctx.deterministic) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["timestamp"] = buf;
}

json header(const Program& p, const ReportContext& ctx) {
  return {{"program", ctx.program_path},
          {"width", p.width()},
          {"encoding", to_string(ctx.options.encoding)},
          {"share", to_string(ctx.options.share)},
          {"rules", ctx.options.rules == RuleSet::Strict ? "strict" : "literal"}};
}

json leaks_json(const Program& p, const LeakReport& r) {
  json hw = json::array(), hdd = json::array(), hds = json::array();
  for (VarId v : r.hw) hw.push_back(p.name(v));
  for (const auto& l : r.hdd) hdd.push_back({p.name(l.a), p.name(l.b)});
  for (const auto& l : r.hds)
    hds.push_back({{"dest", p.name(l.dest)},
                   {"operand", p.name(l.operand)},
                   {"rewrite", l.rewrite},
                   {"type", to_string(l.rewrite_type)}});
  return {{"hw", hw}, {"hdd", hdd}, {"hds", hds}};
}

}  // namespace

json analysis_json(const Program& p, const Analysis& a, const ReportContext& ctx) {
  json j = header(p, ctx);
  json types = json::object(), rules = json::object(), sets = json::object();
  for (VarId v = 0; v < p.num_vars(); ++v) {
    types[p.name(v)] = to_string(a.inference.types[v]);
    rules[p.name(v)] = to_string(a.inference.rules[v]);
    sets[p.name(v)] = {{"supp", names(p, a.depsets.supp[v])},
                       {"unq", names(p, a.depsets.unq[v])},
                       {"dom", names(p, a.depsets.dom[v])}};
  }
  j["types"] = types;
  j["counts"] = {{"RUD", a.inference.count(DistType::RUD)},
                 {"SID", a.inference.count(DistType::SID)},
                 {"UKD", a.inference.count(DistType::UKD)}};
  j["rules_fired"] = rules;
  j["depsets"] = sets;
  j["facts"] = {{"supp", a.inference.set_facts[0]},
                {"unq", a.inference.set_facts[1]},
                {"dom", a.inference.set_facts[2]},
                {"rounds", a.inference.fact_history}};
  j["share_pairs"] = a.share.size();
  j["leaks"] = leaks_json(p, a.leaks);
  j["phases"] = phases_json(a.phases, ctx.deterministic);
  stamp(j, ctx);
  return j;
}

json compile_json(const Program& p, const Compilation& c, const ReportContext& ctx,
                  const std::optional<std::string>& assembly_path) {
  json j = analysis_json(p, c.analysis, ctx);
  j.erase("timestamp");
  json unmitigated = json::array(), forms = json::object();
  for (auto i : c.unmitigated) unmitigated.push_back(p.instructions()[i].dest);
  for (std::size_t i = 0; i < c.forms.size(); ++i) forms[p.instructions()[i].dest] = to_string(c.forms[i]);
  j["mitigation"] = {{"enabled", c.mitigation},
                     {"forms", forms},
                     {"unmitigated", unmitigated},
                     {"violations", c.violations}};
  j["allocation"] = {{"registers", c.allocation.k},
                     {"rounds", c.allocation.rounds},
                     {"spilled", c.allocation.spilled},
                     {"coalesced", c.allocation.coalesced},
                     {"relaxed", c.allocation.relaxed},
                     {"clears", c.clears},
                     {"slots", c.code.num_slots}};
  j["instructions"] = c.code.code.size();
  json phases = j["phases"];
  for (const auto& ph : phases_json(c.phases, ctx.deterministic)) phases.push_back(ph);
  j["phases"] = phases;
  if (assembly_path) j["assembly"] = *assembly_path;
  stamp(j, ctx);
  return j;
}

json certification_json(const Program& p, const AsmProgram& asm_prog, const Certification& cert,
                        const ReportContext& ctx) {
  json j = header(p, ctx);
  j.erase("encoding");
  j.erase("share");
  j.erase("rules");
  json leaks = json::array();
  for (const auto& l : cert.leaks) {
    const auto& ins = asm_prog.code[l.instruction];
    leaks.push_back({{"instruction", l.instruction},
                     {"text", to_string(ins)},
                     {"register", "r" + std::to_string(l.reg)},
                     {"observable", to_string(l.observable)},
                     {"witness", {{"x", l.witness.x}, {"k1", l.witness.k1}, {"k2", l.witness.k2}}}});
  }
  j["certified"] = cert.certified();
  j["valuations"] = cert.valuations;
  j["instructions"] = asm_prog.code.size();
  j["leaks"] = leaks;
  stamp(j, ctx);
  return j;
}

json bench_json(const Program& p, const EncodingComparison& cmp, const ReportContext& ctx) {
  json j = header(p, ctx);
  j.erase("share");
  j["variables"] = p.num_vars();
  j["inputs"] = p.num_inputs();
  json runs = json::array();
  for (const auto& r : cmp.runs)
    runs.push_back({{"encoding", to_string(r.scheme)},
                    {"facts", {{"supp", r.set_facts[0]}, {"unq", r.set_facts[1]}, {"dom", r.set_facts[2]}}},
                    {"type_facts", r.type_facts},
                    {"ms", ctx.deterministic ? 0.0 : r.millis}});
  j["runs"] = runs;
  j["identical"] = true;
  std::size_t counts[3] = {0, 0, 0};
  for (auto t : cmp.types) ++counts[static_cast<int>(t)];
  j["counts"] = {{"RUD", counts[2]}, {"SID", counts[1]}, {"UKD", counts[0]}};
  stamp(j, ctx);
  return j;
}

}  // namespace leakguard
