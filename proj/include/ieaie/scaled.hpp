#pragma once

#include <cstdint>

namespace ieaie {

/// ceil(x * 10^decimal_exponent), computed exactly from the binary value of x
/// (no intermediate rounding of the product). x must be finite and >= 0,
/// decimal_exponent <= 19, and the result must fit in 64 bits.
std::uint64_t scaled_ceil(double x, unsigned decimal_exponent);

/// The integer conversion used throughout the cipher: ceil(x * 10^m) mod modulus.
std::uint64_t scaled_ceil_mod(double x, unsigned decimal_exponent, std::uint64_t modulus);

}  // namespace ieaie
