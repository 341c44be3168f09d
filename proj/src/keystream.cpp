#include "ieaie/keystream.hpp"

#include <stdexcept>

#include "ieaie/scaled.hpp"

namespace ieaie {

namespace {

void require_even_area(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || (rows * cols) % 2 != 0) {
    throw std::invalid_argument("image area M*N must be positive and even");
  }
}

void require_denominator(double d) {
  if (!(d >= 1.0)) {
    throw std::logic_error("seed denominator below 1");
  }
}

}  // namespace

StateVector entropy_seed(const SecretKey& key, double s) {
  if (!(s >= 0.0 && s <= 8.0)) {
    throw std::domain_error("image entropy must lie in [0,8]");
  }
  const double dx = s + key.x0p() + key.y0p() + 1.0;
  const double dy = s + key.x0p() + key.y0p() + 2.0;
  require_denominator(dx);
  require_denominator(dy);
  return {mod1(key.x0() + (s + 1.0) / dx), mod1(key.y0() + (s + 2.0) / dy)};
}

StateVector k_seed(const SecretKey& key) {
  return {mod1(key.x0p() + 1.0 / (key.x0() + key.y0() + 1.0)),
          mod1(key.y0p() + 2.0 / (key.x0() + key.y0() + 2.0))};
}

RowColumnIndex compute_ab(const SecretKey& key, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("dimensions must be positive");
  }
  return {scaled_ceil_mod(key.x0() + key.y0() + 1.0, 7, rows) + 1,
          scaled_ceil_mod(key.x0p() + key.y0p() + 2.0, 7, cols) + 1};
}

Matrix<double> generate_chaos_matrix(StateVector seed, ControlParam mu, std::size_t rows,
                                     std::size_t cols) {
  require_even_area(rows, cols);
  return Matrix<double>(rows, cols, lasm_sequence(seed, mu, kTransientIterations, rows * cols / 2));
}

RawIndexVectors extract_uv(const Matrix<double>& chaos, RowColumnIndex ab, KeystreamOptions opts) {
  const std::size_t rows = chaos.rows();
  const std::size_t cols = chaos.cols();
  if (ab.a < 1 || ab.a > rows || ab.b < 1 || ab.b > cols) {
    throw std::out_of_range("row/column selector outside the chaos matrix");
  }
  if (opts.printed_modulus && rows != cols) {
    throw std::invalid_argument("printed u/v moduli only apply to square images");
  }
  const std::uint64_t u_mod = opts.printed_modulus ? rows : cols;
  const std::uint64_t v_mod = opts.printed_modulus ? cols : rows;

  RawIndexVectors out;
  out.u.reserve(cols);
  out.v.reserve(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    out.u.push_back(static_cast<std::uint32_t>(scaled_ceil_mod(chaos(ab.a - 1, j), 14, u_mod) + 1));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    out.v.push_back(static_cast<std::uint32_t>(scaled_ceil_mod(chaos(i, ab.b - 1), 14, v_mod) + 1));
  }
  return out;
}

std::vector<std::uint32_t> deduplicate(std::vector<std::uint32_t> vec, std::uint32_t range_max) {
  if (vec.size() != range_max) {
    throw std::invalid_argument("deduplicate needs a vector of length range_max");
  }
  std::vector<std::uint32_t> count(range_max + 1, 0);
  for (std::uint32_t x : vec) {
    if (x < 1 || x > range_max) {
      throw std::out_of_range("deduplicate entry outside 1..range_max");
    }
    ++count[x];
  }
  std::vector<bool> seen(range_max + 1, false);
  // Values only ever become present during the scan, so the least absent
  // value never moves backwards.
  std::uint32_t least_absent = 1;
  for (std::uint32_t& x : vec) {
    if (!seen[x]) {
      seen[x] = true;
      continue;
    }
    while (count[least_absent] != 0) ++least_absent;
    --count[x];
    x = least_absent;
    ++count[x];
    seen[x] = true;
  }
  return vec;
}

Matrix<std::uint8_t> generate_k_matrix(StateVector seed, ControlParam mu, std::size_t rows,
                                       std::size_t cols) {
  require_even_area(rows, cols);
  const std::vector<double> orbit = lasm_sequence(seed, mu, kTransientIterations, rows * cols / 2);
  std::vector<std::uint8_t> bytes(orbit.size());
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(scaled_ceil_mod(orbit[i], 14, 256));
  }
  return Matrix<std::uint8_t>(rows, cols, std::move(bytes));
}

Keystream derive_keystream(const SecretKey& key, double s, std::size_t rows, std::size_t cols,
                           KeystreamOptions opts) {
  require_even_area(rows, cols);
  Keystream ks;
  ks.chaos = generate_chaos_matrix(entropy_seed(key, s), key.mu(), rows, cols);
  ks.ab = compute_ab(key, rows, cols);
  ks.raw = extract_uv(ks.chaos, ks.ab, opts);
  ks.u = deduplicate(ks.raw.u, static_cast<std::uint32_t>(cols));
  ks.v = deduplicate(ks.raw.v, static_cast<std::uint32_t>(rows));
  ks.k = generate_k_matrix(k_seed(key), key.mu(), rows, cols);
  return ks;
}

}  // namespace ieaie
