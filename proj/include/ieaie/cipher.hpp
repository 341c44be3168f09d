#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ieaie/image.hpp"
#include "ieaie/keystream.hpp"
#include "ieaie/lasm.hpp"

namespace ieaie {

/// Denominator used for p_i when taking the entropy of a column block R_j.
enum class EntropyDenominator {
  image_size,  ///< M*N, as the entropy formula is printed
  block_size,  ///< number of pixels in the block
};

struct CipherConfig {
  unsigned rounds = 2;
  EntropyDenominator denominator = EntropyDenominator::image_size;
  KeystreamOptions keystream;
};

/// entry(i, j) = destination of plain pixel (i, j) after both permutations.
using PermutationMap = Matrix<Position>;

/// Diffusion coefficients d_1..d_N (stored 0-based), each in 1..N.
using DiffusionParams = std::vector<std::uint32_t>;

/// Rejects dimensions the cipher cannot handle (M, N >= 2 and M*N even).
void validate_dimensions(std::size_t rows, std::size_t cols);

/// Output column u(j) = input column j. u holds 1-based targets.
Image permute_horizontal(const Image& img, std::span<const std::uint32_t> u);
Image unpermute_horizontal(const Image& img, std::span<const std::uint32_t> u);
/// Output row v(i) = input row i.
Image permute_vertical(const Image& img, std::span<const std::uint32_t> v);
Image unpermute_vertical(const Image& img, std::span<const std::uint32_t> v);

/// Single scatter map equivalent to horizontal then vertical permutation:
/// entry(i, j) = (v(i), u(j)).
PermutationMap compose_permutation(std::span<const std::uint32_t> u,
                                   std::span<const std::uint32_t> v);
bool is_bijection(const PermutationMap& map);
/// out(map(i, j)) = img(i, j)
Image scatter(const Image& img, const PermutationMap& map);
/// Inverse of scatter: out(i, j) = img(map(i, j)).
Image gather(const Image& img, const PermutationMap& map);

/// R(i, j) = B(i, j) + M*N + i + j (mod 256), 1-based i, j.
Image gray_shift(const Image& img);
Image gray_unshift(const Image& img);

/// d_j = ceil(H(R_j) * 1e14) mod N + 1 where R_j is columns j+1..N (1-based j).
std::uint32_t compute_dj(const Image& r, std::size_t j, EntropyDenominator denom);
/// All of d_1..d_N in one right-to-left sweep.
DiffusionParams compute_d(const Image& r, EntropyDenominator denom);

/// C(i,j) = R(i,j) + d_j C(i,j-1) + d_j K(i,j) + K(i,d_j) (mod 256), C(i,0) = 0.
Image diffuse(const Image& r, const Matrix<std::uint8_t>& k, const DiffusionParams& d);
Image undiffuse(const Image& c, const Matrix<std::uint8_t>& k, const DiffusionParams& d);

/// Intermediate matrices of one encryption round.
struct RoundTrace {
  Image b;  ///< after both permutations
  Image r;  ///< after the gray shift
  DiffusionParams d;
  Image c;
};

struct EncryptionTrace {
  double s = 0.0;
  Keystream keystream;
  std::vector<RoundTrace> rounds;
  Image cipher;
};

/// Rounds of the pipeline under a fixed keystream (test and oracle hook).
Image encrypt_with_keystream(const Image& img, const Keystream& ks, const CipherConfig& cfg,
                             std::vector<RoundTrace>* trace = nullptr);
Image decrypt_with_keystream(const Image& cipher, const Keystream& ks, const CipherConfig& cfg);

Image encrypt(const Image& img, const SecretKey& key, const CipherConfig& cfg);
EncryptionTrace encrypt_traced(const Image& img, const SecretKey& key, const CipherConfig& cfg);

/// s is the plain-image entropy, carried out of band. A wrong s yields a
/// wrong image; there is no integrity check.
Image decrypt(const Image& cipher, const SecretKey& key, const CipherConfig& cfg, double s);

}  // namespace ieaie
