#include "volut/half.hpp"

#include <vector>

#include <cmath>

namespace volut {

std::uint16_t to_half(double value) {
  const std::uint16_t sign = std::signbit(value) ? 0x8000 : 0;
  if (std::isnan(value)) return sign | 0x7E00;
  const double a = std::fabs(value);
  // 65520 is the midpoint between the largest finite half and 2^16.
  if (a >= 65520.0) return sign | 0x7C00;
  if (a < 0x1.0p-14) {
    // Subnormal: a = m * 2^-24. A round-up to 1024 lands on the smallest
    // normal, which is exactly the right encoding.
    const auto m = static_cast<std::uint32_t>(std::nearbyint(a * 0x1.0p24));
    return static_cast<std::uint16_t>(sign | m);
  }
  int e = 0;
  const double f = std::frexp(a, &e);  // a = f * 2^e, f in [0.5, 1)
  auto mant = static_cast<std::uint32_t>(std::nearbyint((f * 2.0 - 1.0) * 1024.0));
  int exponent = e - 1;
  if (mant == 1024) {
    mant = 0;
    ++exponent;
  }
  if (exponent > 15) return sign | 0x7C00;
  return static_cast<std::uint16_t>(sign | ((exponent + 15) << 10) | mant);
}

namespace {

float decode_half(std::uint16_t bits) {
  const bool negative = bits & 0x8000;
  const int exponent = (bits >> 10) & 0x1F;
  const int mant = bits & 0x3FF;
  float v;
  if (exponent == 0) {
    v = std::ldexp(static_cast<float>(mant), -24);
  } else if (exponent == 31) {
    v = mant ? std::nanf("") : INFINITY;
  } else {
    v = std::ldexp(static_cast<float>(1024 + mant), exponent - 25);
  }
  return negative ? -v : v;
}

}  // namespace

float from_half(std::uint16_t bits) {
  static const std::vector<float> table = [] {
    std::vector<float> t(65536);
    for (std::uint32_t b = 0; b < 65536; ++b) t[b] = decode_half(static_cast<std::uint16_t>(b));
    return t;
  }();
  return table[bits];
}

}  // namespace volut
