#pragma once

#include <cstdint>

namespace leakguard {

/// Multiplication in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1 (0x11B).
std::uint8_t gf256_mul(std::uint8_t a, std::uint8_t b);

}  // namespace leakguard
