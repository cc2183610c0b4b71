// Random masked straight-line programs for property tests and benchmarks.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "leakguard/ir.hpp"
#include "leakguard/typeinfer.hpp"

namespace leakguard {

struct MaskedProgramOptions {
  unsigned max_inputs = 10;
  unsigned max_instructions = 30;
  unsigned width = 1;
};

/// Each secret is consumed exactly once, as `xor secret m` with a random m
/// that has not been used yet. The rest mixes the available values with
/// xor/and/or/not while keeping the UKD discipline below.
Program random_masked_program(std::mt19937& rng, const MaskedProgramOptions& options = {});

/// Every UKD variable is consumed at most once (being an output counts), and
/// no instruction has two UKD operands. Programs of this shape can always be
/// compiled without a UKD value entering a register.
bool ukd_discipline(const Program& p, const TypeMap& types);

std::vector<Program> masked_corpus(std::size_t count, std::uint32_t seed, const MaskedProgramOptions& options = {});

/// Large masked program: `instructions` instructions over a few dozen
/// inputs, for scale runs. Width 8.
Program masked_chain(std::size_t instructions, std::uint32_t seed = 1);

}  // namespace leakguard
