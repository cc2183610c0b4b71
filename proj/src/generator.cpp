#include "leakguard/generator.hpp"

#include <algorithm>

#include "leakguard/depsets.hpp"

namespace leakguard {

namespace {

int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

TypeMap types_of(const Program& p) { return infer_types(p, compute_depsets(p), EncodingScheme::powerset()).types; }

}  // namespace

bool ukd_discipline(const Program& p, const TypeMap& types) {
  std::vector<int> consumed(p.num_vars(), 0);
  for (const auto& def : p.defs()) {
    const bool lhs_ukd = types[def.lhs] == DistType::UKD;
    if (is_unary(def.op)) {
      ++consumed[def.lhs];
      continue;
    }
    if (lhs_ukd && types[def.rhs] == DistType::UKD) return false;
    ++consumed[def.lhs];
    ++consumed[def.rhs];
  }
  for (VarId v : p.output_ids()) ++consumed[v];
  for (VarId v = 0; v < p.num_vars(); ++v)
    if (types[v] == DistType::UKD && consumed[v] > 1) return false;
  return true;
}

Program random_masked_program(std::mt19937& rng, const MaskedProgramOptions& options) {
  const int n_inputs = pick(rng, 3, static_cast<int>(std::max(3u, options.max_inputs)));
  const int n_secret = pick(rng, 1, std::max(1, n_inputs / 3));
  const int n_public = pick(rng, 0, std::min(2, n_inputs - 2 * n_secret));
  const int n_random = n_inputs - n_secret - n_public;

  std::vector<InputKind> kinds;
  kinds.insert(kinds.end(), static_cast<std::size_t>(n_secret), InputKind::Secret);
  kinds.insert(kinds.end(), static_cast<std::size_t>(n_public), InputKind::Public);
  kinds.insert(kinds.end(), static_cast<std::size_t>(n_random), InputKind::Random);
  std::shuffle(kinds.begin(), kinds.end(), rng);

  std::vector<Input> inputs;
  int counts[3] = {0, 0, 0};
  for (auto k : kinds) {
    const char* prefix = k == InputKind::Secret ? "k" : k == InputKind::Public ? "x" : "m";
    inputs.push_back({prefix + std::to_string(counts[static_cast<int>(k)]++), k});
  }

  std::vector<Instruction> ins;
  std::vector<std::string> pool;  // usable operands
  std::vector<std::string> fresh_masks;
  for (const auto& in : inputs) {
    if (in.kind == InputKind::Random) fresh_masks.push_back(in.name);
    if (in.kind != InputKind::Secret) pool.push_back(in.name);
  }
  std::shuffle(fresh_masks.begin(), fresh_masks.end(), rng);

  int tmp = 0;
  auto fresh_name = [&] { return "t" + std::to_string(tmp++); };
  for (const auto& in : inputs) {
    if (in.kind != InputKind::Secret) continue;
    const auto m = fresh_masks.back();
    fresh_masks.pop_back();
    auto name = fresh_name();
    ins.push_back({name, Opcode::Xor, {in.name, m}});
    pool.push_back(name);
  }
  const int target = pick(rng, static_cast<int>(ins.size()) + 1,
                          static_cast<int>(std::max<std::size_t>(ins.size() + 1, options.max_instructions)));

  auto rebuild = [&](const std::vector<Instruction>& body) { return Program(inputs, body, {}, options.width); };
  TypeMap types = types_of(rebuild(ins));

  auto operand = [&] {
    // Prefer recent values to get deeper dependence chains.
    const int n = static_cast<int>(pool.size());
    const int lo = rng() % 3 == 0 ? 0 : std::max(0, n - 6);
    return pool[static_cast<std::size_t>(pick(rng, lo, n - 1))];
  };

  int attempts = 0;
  while (static_cast<int>(ins.size()) < target && attempts < 400) {
    ++attempts;
    const int r = pick(rng, 0, 99);
    const Opcode op = r < 40 ? Opcode::Xor : r < 65 ? Opcode::And : r < 85 ? Opcode::Or : Opcode::Not;
    Instruction cand{fresh_name(), op, {operand()}};
    if (!is_unary(op)) cand.operands.push_back(operand());

    auto body = ins;
    body.push_back(cand);
    const Program trial = rebuild(body);
    const TypeMap trial_types = types_of(trial);
    if (!ukd_discipline(trial, trial_types)) {
      --tmp;
      continue;
    }
    ins = std::move(body);
    types = trial_types;
    pool.push_back(cand.dest);
  }

  // Outputs: values nobody consumes, at most three, latest first.
  const Program body = rebuild(ins);
  std::vector<int> consumers(body.num_vars(), 0);
  for (const auto& d : body.defs()) {
    ++consumers[d.lhs];
    if (d.rhs != d.lhs) ++consumers[d.rhs];
  }
  std::vector<std::string> outputs;
  for (VarId v = static_cast<VarId>(body.num_vars()); v-- > body.num_inputs() && outputs.size() < 3;)
    if (consumers[v] == 0) outputs.push_back(body.name(v));
  return Program(inputs, ins, outputs, options.width);
}

std::vector<Program> masked_corpus(std::size_t count, std::uint32_t seed, const MaskedProgramOptions& options) {
  std::mt19937 rng(seed);
  std::vector<Program> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_masked_program(rng, options));
  return out;
}

Program masked_chain(std::size_t instructions, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<Input> inputs;
  constexpr int kSecrets = 8, kPublic = 8, kRandom = 48;
  for (int i = 0; i < kSecrets; ++i) inputs.push_back({"k" + std::to_string(i), InputKind::Secret});
  for (int i = 0; i < kPublic; ++i) inputs.push_back({"x" + std::to_string(i), InputKind::Public});
  for (int i = 0; i < kRandom; ++i) inputs.push_back({"m" + std::to_string(i), InputKind::Random});

  std::vector<Instruction> ins;
  std::vector<std::string> values;
  for (int i = 0; i < kSecrets && ins.size() < instructions; ++i) {
    ins.push_back({"s" + std::to_string(i), Opcode::Xor, {"k" + std::to_string(i), "m" + std::to_string(i)}});
    values.push_back(ins.back().dest);
  }
  std::size_t n = 0;
  while (ins.size() < instructions) {
    const std::string prev = values.back();
    const int r = pick(rng, 0, 99);
    std::string other;
    if (r < 30) other = "m" + std::to_string(pick(rng, 0, kRandom - 1));
    else if (r < 40) other = "x" + std::to_string(pick(rng, 0, kPublic - 1));
    else other = values[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(values.size()) - 1))];
    const int o = pick(rng, 0, 99);
    const Opcode op = o < 45 ? Opcode::Xor : o < 65 ? Opcode::And : o < 80 ? Opcode::Or : o < 90 ? Opcode::Gmul
                                                                                          : Opcode::Not;
    Instruction i{"v" + std::to_string(n++), op, {prev}};
    if (!is_unary(op)) i.operands.push_back(other);
    ins.push_back(i);
    values.push_back(i.dest);
  }
  return Program(inputs, ins, {values.back()}, 8);
}

}  // namespace leakguard
