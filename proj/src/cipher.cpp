#include "ieaie/cipher.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ieaie/metrics.hpp"
#include "ieaie/scaled.hpp"

namespace ieaie {

namespace {

constexpr unsigned kDecimalScale = 14;

void require_permutation(std::span<const std::uint32_t> p, std::size_t n, const char* what) {
  if (p.size() != n) {
    throw std::invalid_argument(std::string(what) + " has the wrong length");
  }
  std::vector<bool> hit(n + 1, false);
  for (std::uint32_t x : p) {
    if (x < 1 || x > n || hit[x]) {
      throw std::invalid_argument(std::string(what) + " is not a permutation of 1..n");
    }
    hit[x] = true;
  }
}

std::uint8_t byte(std::uint32_t x) { return static_cast<std::uint8_t>(x & 0xFFu); }

std::uint64_t denominator_for(const Histogram& h, std::size_t area, EntropyDenominator denom) {
  if (denom == EntropyDenominator::image_size) return area;
  return std::max<std::uint64_t>(1, h.total);
}

std::uint32_t dj_from(const Histogram& h, std::size_t rows, std::size_t cols,
                      EntropyDenominator denom) {
  const double hval = entropy(h, denominator_for(h, rows * cols, denom));
  return static_cast<std::uint32_t>(scaled_ceil_mod(hval, kDecimalScale, cols) + 1);
}

void add_column(Histogram& h, const Image& img, std::size_t col) {
  for (std::size_t i = 0; i < img.rows(); ++i) ++h.counts[img(i, col)];
  h.total += img.rows();
}

void require_diffusion_inputs(const Image& img, const Matrix<std::uint8_t>& k,
                              const DiffusionParams& d) {
  if (!img.same_shape(k)) {
    throw std::invalid_argument("byte matrix K does not match the image");
  }
  if (d.size() != img.cols()) {
    throw std::invalid_argument("need one diffusion coefficient per column");
  }
  for (std::uint32_t dj : d) {
    if (dj < 1 || dj > img.cols()) {
      throw std::invalid_argument("diffusion coefficient outside 1..N");
    }
  }
}

}  // namespace

void validate_dimensions(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("cipher images need M >= 2 and N >= 2");
  }
  if ((rows * cols) % 2 != 0) {
    throw std::invalid_argument("cipher images need an even pixel count M*N");
  }
}

Image permute_horizontal(const Image& img, std::span<const std::uint32_t> u) {
  require_permutation(u, img.cols(), "u");
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j) out(i, u[j] - 1) = img(i, j);
  return out;
}

Image unpermute_horizontal(const Image& img, std::span<const std::uint32_t> u) {
  require_permutation(u, img.cols(), "u");
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j) out(i, j) = img(i, u[j] - 1);
  return out;
}

Image permute_vertical(const Image& img, std::span<const std::uint32_t> v) {
  require_permutation(v, img.rows(), "v");
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i) {
    const auto src = img.row(i);
    std::copy(src.begin(), src.end(), out.row(v[i] - 1).begin());
  }
  return out;
}

Image unpermute_vertical(const Image& img, std::span<const std::uint32_t> v) {
  require_permutation(v, img.rows(), "v");
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i) {
    const auto src = img.row(v[i] - 1);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

PermutationMap compose_permutation(std::span<const std::uint32_t> u,
                                   std::span<const std::uint32_t> v) {
  require_permutation(u, u.size(), "u");
  require_permutation(v, v.size(), "v");
  PermutationMap map(v.size(), u.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) map(i, j) = {v[i] - 1, u[j] - 1};
  return map;
}

bool is_bijection(const PermutationMap& map) {
  std::vector<bool> hit(map.size(), false);
  for (const Position& p : map.data()) {
    if (p.row >= map.rows() || p.col >= map.cols()) return false;
    const std::size_t k = raster_index(p, map.cols());
    if (hit[k]) return false;
    hit[k] = true;
  }
  return true;
}

Image scatter(const Image& img, const PermutationMap& map) {
  if (!img.same_shape(map) || !is_bijection(map)) {
    throw std::invalid_argument("scatter needs a bijective map of the image's shape");
  }
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j) out[map(i, j)] = img(i, j);
  return out;
}

Image gather(const Image& img, const PermutationMap& map) {
  if (!img.same_shape(map) || !is_bijection(map)) {
    throw std::invalid_argument("gather needs a bijective map of the image's shape");
  }
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j) out(i, j) = img[map(i, j)];
  return out;
}

Image gray_shift(const Image& img) {
  const std::size_t area = img.size();
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j)
      out(i, j) = byte(static_cast<std::uint32_t>(img(i, j) + area + (i + 1) + (j + 1)));
  return out;
}

Image gray_unshift(const Image& img) {
  const std::size_t area = img.size();
  Image out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j)
      out(i, j) = byte(static_cast<std::uint32_t>(img(i, j) - (area + (i + 1) + (j + 1)) % 256));
  return out;
}

std::uint32_t compute_dj(const Image& r, std::size_t j, EntropyDenominator denom) {
  if (j < 1 || j > r.cols()) {
    throw std::out_of_range("column index j must lie in 1..N");
  }
  Histogram h;
  for (std::size_t col = j; col < r.cols(); ++col) add_column(h, r, col);
  return dj_from(h, r.rows(), r.cols(), denom);
}

DiffusionParams compute_d(const Image& r, EntropyDenominator denom) {
  const std::size_t cols = r.cols();
  DiffusionParams d(cols);
  Histogram h;
  for (std::size_t j = cols; j >= 1; --j) {
    d[j - 1] = dj_from(h, r.rows(), cols, denom);
    add_column(h, r, j - 1);
  }
  return d;
}

Image diffuse(const Image& r, const Matrix<std::uint8_t>& k, const DiffusionParams& d) {
  require_diffusion_inputs(r, k, d);
  Image c(r.rows(), r.cols());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    std::uint32_t prev = 0;
    for (std::size_t j = 0; j < r.cols(); ++j) {
      const std::uint32_t dj = d[j] & 0xFFu;
      prev = byte(r(i, j) + dj * prev + dj * k(i, j) + k(i, d[j] - 1));
      c(i, j) = static_cast<std::uint8_t>(prev);
    }
  }
  return c;
}

Image undiffuse(const Image& c, const Matrix<std::uint8_t>& k, const DiffusionParams& d) {
  require_diffusion_inputs(c, k, d);
  Image r(c.rows(), c.cols());
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const std::uint32_t dj = d[j] & 0xFFu;
      const std::uint32_t prev = j == 0 ? 0u : c(i, j - 1);
      r(i, j) = byte(c(i, j) - dj * prev - dj * k(i, j) - k(i, d[j] - 1));
    }
  }
  return r;
}

Image encrypt_with_keystream(const Image& img, const Keystream& ks, const CipherConfig& cfg,
                             std::vector<RoundTrace>* trace) {
  validate_dimensions(img.rows(), img.cols());
  if (cfg.rounds < 1) {
    throw std::invalid_argument("at least one round is required");
  }
  if (!ks.k.same_shape(img)) {
    throw std::invalid_argument("keystream was derived for a different image size");
  }
  Image state = img;
  for (unsigned round = 0; round < cfg.rounds; ++round) {
    Image b = permute_vertical(permute_horizontal(state, ks.u), ks.v);
    Image r = gray_shift(b);
    DiffusionParams d = compute_d(r, cfg.denominator);
    state = diffuse(r, ks.k, d);
    if (trace != nullptr) {
      trace->push_back({std::move(b), std::move(r), std::move(d), state});
    }
  }
  return state;
}

Image decrypt_with_keystream(const Image& cipher, const Keystream& ks, const CipherConfig& cfg) {
  validate_dimensions(cipher.rows(), cipher.cols());
  if (cfg.rounds < 1) {
    throw std::invalid_argument("at least one round is required");
  }
  if (!ks.k.same_shape(cipher)) {
    throw std::invalid_argument("keystream was derived for a different image size");
  }
  const std::size_t rows = cipher.rows();
  const std::size_t cols = cipher.cols();
  Image c = cipher;
  for (unsigned round = 0; round < cfg.rounds; ++round) {
    // d_j only looks at columns j+1..N of R, so recover R right to left.
    Image r(rows, cols);
    Histogram h;
    for (std::size_t j = cols; j >= 1; --j) {
      const std::uint32_t dj_full = dj_from(h, rows, cols, cfg.denominator);
      const std::uint32_t dj = dj_full & 0xFFu;
      for (std::size_t i = 0; i < rows; ++i) {
        const std::uint32_t prev = j == 1 ? 0u : c(i, j - 2);
        r(i, j - 1) = byte(c(i, j - 1) - dj * prev - dj * ks.k(i, j - 1) -
                           ks.k(i, dj_full - 1));
      }
      add_column(h, r, j - 1);
    }
    c = unpermute_horizontal(unpermute_vertical(gray_unshift(r), ks.v), ks.u);
  }
  return c;
}

Image encrypt(const Image& img, const SecretKey& key, const CipherConfig& cfg) {
  return encrypt_traced(img, key, cfg).cipher;
}

EncryptionTrace encrypt_traced(const Image& img, const SecretKey& key, const CipherConfig& cfg) {
  validate_dimensions(img.rows(), img.cols());
  EncryptionTrace t;
  t.s = entropy(img);
  t.keystream = derive_keystream(key, t.s, img.rows(), img.cols(), cfg.keystream);
  t.cipher = encrypt_with_keystream(img, t.keystream, cfg, &t.rounds);
  return t;
}

Image decrypt(const Image& cipher, const SecretKey& key, const CipherConfig& cfg, double s) {
  validate_dimensions(cipher.rows(), cipher.cols());
  const Keystream ks = derive_keystream(key, s, cipher.rows(), cipher.cols(), cfg.keystream);
  return decrypt_with_keystream(cipher, ks, cfg);
}

}  // namespace ieaie
