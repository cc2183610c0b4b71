#include "leakguard/gf256.hpp"

#include <array>

namespace leakguard {
namespace {

// Log/antilog tables over generator 0x03.
struct Tables {
  std::array<std::uint8_t, 256> log{};
  std::array<std::uint8_t, 512> exp{};

  constexpr Tables() {
    std::uint8_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = x;
      log[x] = static_cast<std::uint8_t>(i);
      // x *= 3
      std::uint8_t hi = x & 0x80;
      std::uint8_t x2 = static_cast<std::uint8_t>(x << 1);
      if (hi) x2 ^= 0x1B;
      x = static_cast<std::uint8_t>(x2 ^ x);
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

constexpr Tables kTables;

}  // namespace

std::uint8_t gf256_mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return kTables.exp[kTables.log[a] + kTables.log[b]];
}

}  // namespace leakguard
