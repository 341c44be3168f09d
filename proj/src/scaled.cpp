#include "ieaie/scaled.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ieaie {

namespace {

using u128 = unsigned __int128;

u128 pow5(unsigned k) {
  u128 r = 1;
  for (unsigned i = 0; i < k; ++i) r *= 5;
  return r;
}

}  // namespace

std::uint64_t scaled_ceil(double x, unsigned decimal_exponent) {
  if (!std::isfinite(x) || x < 0.0) {
    throw std::domain_error("scaled_ceil needs a finite non-negative value");
  }
  if (decimal_exponent > 19) {
    throw std::domain_error("scaled_ceil supports decimal exponents up to 19");
  }
  if (x == 0.0) return 0;

  // x = mantissa * 2^exp exactly, mantissa < 2^53.
  int exp = 0;
  const double frac = std::frexp(x, &exp);
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  exp -= 53;

  // x * 10^k = mantissa * 5^k * 2^(exp + k); the product stays below 2^98.
  const u128 product = static_cast<u128>(mantissa) * pow5(decimal_exponent);
  const int shift = exp + static_cast<int>(decimal_exponent);

  u128 result;
  if (shift >= 0) {
    if (shift >= 64 || (shift > 0 && (product >> (128 - shift)) != 0)) {
      throw std::overflow_error("scaled_ceil result does not fit in 64 bits");
    }
    result = product << shift;
  } else {
    const int right = -shift;
    if (right >= 128) {
      result = 1;  // 0 < x * 10^k < 1
    } else {
      const u128 mask = (static_cast<u128>(1) << right) - 1;
      result = (product >> right) + ((product & mask) != 0 ? 1 : 0);
    }
  }
  if (result > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("scaled_ceil result does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t scaled_ceil_mod(double x, unsigned decimal_exponent, std::uint64_t modulus) {
  if (modulus == 0) {
    throw std::invalid_argument("modulus must be positive");
  }
  return scaled_ceil(x, decimal_exponent) % modulus;
}

}  // namespace ieaie
