#pragma once

#include <cstdint>

namespace volut {

// IEEE 754 binary16 encode/decode. Encoding rounds to nearest, ties to
// even, directly from double so there is no double rounding through float.
std::uint16_t to_half(double value);
float from_half(std::uint16_t bits);

}  // namespace volut
