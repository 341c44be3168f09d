#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ieaie/image.hpp"
#include "ieaie/lasm.hpp"

namespace ieaie {

/// Iterations discarded before any map output is used.
inline constexpr std::size_t kTransientIterations = 200;

struct KeystreamOptions {
  /// Reduce u by M and v by N as originally printed. Only coherent for
  /// square images; non-square dimensions are rejected in this mode.
  bool printed_modulus = false;
};

/// 1-based row index a and column index b selecting the chaos row/column.
struct RowColumnIndex {
  std::size_t a = 1;
  std::size_t b = 1;

  bool operator==(const RowColumnIndex&) const = default;
};

/// Raw (pre-deduplication) permutation vectors; values are 1-based.
struct RawIndexVectors {
  std::vector<std::uint32_t> u;  ///< length N
  std::vector<std::uint32_t> v;  ///< length M

  bool operator==(const RawIndexVectors&) const = default;
};

/// All key-dependent material for one image size and one entropy value.
struct Keystream {
  Matrix<double> chaos;          ///< M x N post-transient orbit, raster order
  RowColumnIndex ab;
  RawIndexVectors raw;
  std::vector<std::uint32_t> u;  ///< column targets, permutation of 1..N
  std::vector<std::uint32_t> v;  ///< row targets, permutation of 1..M
  Matrix<std::uint8_t> k;        ///< M x N byte matrix

  bool operator==(const Keystream&) const = default;
};

/// Seed of the permutation orbit, shifted by the plain-image entropy s.
StateVector entropy_seed(const SecretKey& key, double s);

/// Seed of the byte-matrix orbit. Does not depend on the image.
StateVector k_seed(const SecretKey& key);

RowColumnIndex compute_ab(const SecretKey& key, std::size_t rows, std::size_t cols);

/// rows*cols map outputs after the transient, (x, y) pairs in raster order.
/// Throws std::invalid_argument when rows*cols is odd.
Matrix<double> generate_chaos_matrix(StateVector seed, ControlParam mu, std::size_t rows,
                                     std::size_t cols);

/// u(j) = ceil(chaos(a, j) * 1e14) mod N + 1, v(i) = ceil(chaos(i, b) * 1e14) mod M + 1.
RawIndexVectors extract_uv(const Matrix<double>& chaos, RowColumnIndex ab,
                           KeystreamOptions opts = {});

/// Keeps the first occurrence of each value and replaces every later
/// duplicate with the least value of 1..range_max absent from the vector at
/// that moment. The result is a permutation of 1..range_max.
std::vector<std::uint32_t> deduplicate(std::vector<std::uint32_t> vec, std::uint32_t range_max);

/// K = ceil(orbit * 1e14) mod 256, raster order.
Matrix<std::uint8_t> generate_k_matrix(StateVector seed, ControlParam mu, std::size_t rows,
                                       std::size_t cols);

Keystream derive_keystream(const SecretKey& key, double s, std::size_t rows, std::size_t cols,
                           KeystreamOptions opts = {});

}  // namespace ieaie
