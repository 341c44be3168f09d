#include "ieaie/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <type_traits>
#include <stdexcept>

namespace ieaie {

Histogram histogram(std::span<const std::uint8_t> pixels) {
  Histogram h;
  for (std::uint8_t p : pixels) ++h.counts[p];
  h.total = pixels.size();
  return h;
}

double entropy(const Histogram& hist, std::uint64_t denominator) {
  if (denominator < std::max<std::uint64_t>(1, hist.total)) {
    throw std::invalid_argument("entropy denominator smaller than the block");
  }
  std::array<std::uint64_t, 256> nonzero{};
  std::size_t n = 0;
  for (std::uint64_t c : hist.counts) {
    if (c != 0) nonzero[n++] = c;
  }
  std::sort(nonzero.begin(), nonzero.begin() + static_cast<std::ptrdiff_t>(n));

  const double denom = static_cast<double>(denominator);
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = static_cast<double>(nonzero[i]) / denom;
    h -= p * std::log2(p);
  }
  return h;
}

double entropy(std::span<const std::uint8_t> block, std::uint64_t denominator) {
  return entropy(histogram(block), denominator);
}

double entropy(const Image& img) {
  return entropy(histogram(img), std::max<std::uint64_t>(1, img.size()));
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "value,count\n";
  for (std::size_t v = 0; v < h.counts.size(); ++v) {
    out += std::to_string(v) + "," + std::to_string(h.counts[v]) + "\n";
  }
  return out;
}

double histogram_variance(std::span<const std::uint64_t> counts) {
  if (counts.empty()) return 0.0;
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (std::uint64_t c : counts) mean += static_cast<double>(c);
  mean /= n;
  double acc = 0.0;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - mean;
    acc += d * d;
  }
  return acc / n;
}

Image flat_histogram_image(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  const std::size_t total = rows * cols;
  if (total == 0 || total % 256 != 0) {
    throw std::invalid_argument("flat histogram needs M*N divisible by 256");
  }
  std::vector<std::uint8_t> px(total);
  for (std::size_t i = 0; i < total; ++i) px[i] = static_cast<std::uint8_t>(i % 256);
  std::mt19937_64 rng(seed);
  std::shuffle(px.begin(), px.end(), rng);
  return Image(rows, cols, std::move(px));
}

namespace {

Image apply_positions(const Image& img, const PositionPermutation& perm) {
  const std::size_t n = img.size();
  if (perm.target.size() != n) {
    throw std::invalid_argument("position permutation length differs from pixel count");
  }
  std::vector<bool> hit(n, false);
  std::vector<std::uint8_t> out(n);
  const auto src = img.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = perm.target[k];
    if (t >= n || hit[t]) {
      throw std::invalid_argument("position map is not a bijection");
    }
    hit[t] = true;
    out[t] = src[k];
  }
  return Image(img.rows(), img.cols(), std::move(out));
}

Image apply_values(const Image& img, const ValueBijection& bij) {
  const Histogram h = histogram(img);
  std::array<bool, 256> used{};
  std::array<std::uint8_t, 256> table{};
  for (std::size_t v = 0; v < 256; ++v) {
    table[v] = static_cast<std::uint8_t>(v);
    if (h.counts[v] == 0) continue;
    if (!bij.map[v]) {
      throw std::invalid_argument("value map leaves a present value unmapped");
    }
    const std::uint8_t t = *bij.map[v];
    if (used[t]) {
      throw std::invalid_argument("value map merges two present values");
    }
    used[t] = true;
    table[v] = t;
  }
  return apply_value_map(img, table);
}

}  // namespace

Image entropy_preserving_transform(const Image& img, const EntropyPreservingMap& map) {
  return std::visit(
      [&](const auto& m) -> Image {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, PositionPermutation>) {
          return apply_positions(img, m);
        } else {
          return apply_values(img, m);
        }
      },
      map);
}

Image apply_value_map(const Image& img, const std::array<std::uint8_t, 256>& map) {
  Image out(img.rows(), img.cols());
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = map[src[i]];
  return out;
}

namespace {

struct Step {
  std::size_t dr;
  std::size_t dc;
};

Step step_of(Direction dir) {
  switch (dir) {
    case Direction::horizontal: return {0, 1};
    case Direction::vertical: return {1, 0};
    case Direction::diagonal: return {1, 1};
  }
  return {0, 1};
}

}  // namespace

Correlation adjacent_correlation(const Image& img, Direction dir, std::size_t sample_count,
                                 std::uint64_t seed) {
  const Step st = step_of(dir);
  if (img.rows() <= st.dr || img.cols() <= st.dc) {
    throw std::invalid_argument("image too small for the requested neighbour direction");
  }
  if (sample_count == 1) {
    throw std::invalid_argument("correlation needs at least two samples");
  }
  const std::size_t rows = img.rows() - st.dr;
  const std::size_t cols = img.cols() - st.dc;

  std::vector<double> xs;
  std::vector<double> ys;
  auto take = [&](std::size_t r, std::size_t c) {
    xs.push_back(img(r, c));
    ys.push_back(img(r + st.dr, c + st.dc));
  };
  if (sample_count == 0) {
    xs.reserve(rows * cols);
    ys.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) take(r, c);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, rows * cols - 1);
    for (std::size_t i = 0; i < sample_count; ++i) {
      const std::size_t k = pick(rng);
      take(k / cols, k % cols);
    }
  }

  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  Correlation out;
  out.pairs = xs.size();
  if (sxx == 0.0 || syy == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.value = sxy / std::sqrt(sxx * syy);
  return out;
}

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b) || a.empty()) {
    throw std::invalid_argument("images must be non-empty and of equal dimensions");
  }
}

}  // namespace

double npcr(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const auto pa = a.data();
  const auto pb = b.data();
  std::size_t changed = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) changed += pa[i] != pb[i];
  return 100.0 * static_cast<double>(changed) / static_cast<double>(pa.size());
}

double uaci(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const auto pa = a.data();
  const auto pb = b.data();
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    sum += static_cast<std::uint64_t>(std::abs(int{pa[i]} - int{pb[i]}));
  }
  return 100.0 * static_cast<double>(sum) / (255.0 * static_cast<double>(pa.size()));
}

BitDistance float_bit_distance(double a, double b, FloatFormat format) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("bit distance needs finite values");
  }
  BitDistance out;
  if (format == FloatFormat::binary32) {
    const float fa = static_cast<float>(a);
    const float fb = static_cast<float>(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) {
      throw std::domain_error("value not representable in binary32");
    }
    const std::uint32_t diff = std::bit_cast<std::uint32_t>(fa) ^ std::bit_cast<std::uint32_t>(fb);
    out.fraction_bits = static_cast<unsigned>(std::popcount(diff & 0x007FFFFFu));
    out.exponent_bits = static_cast<unsigned>(std::popcount(diff & 0x7F800000u));
    out.sign_differs = (diff >> 31) != 0;
  } else {
    const std::uint64_t diff = std::bit_cast<std::uint64_t>(a) ^ std::bit_cast<std::uint64_t>(b);
    out.fraction_bits = static_cast<unsigned>(std::popcount(diff & 0x000FFFFFFFFFFFFFull));
    out.exponent_bits = static_cast<unsigned>(std::popcount(diff & 0x7FF0000000000000ull));
    out.sign_differs = (diff >> 63) != 0;
  }
  return out;
}

Rational utilization_ratio(unsigned m, std::uint64_t modulus) {
  if (m < 1 || modulus < 2) {
    throw std::invalid_argument("utilization ratio needs m >= 1 and D >= 2");
  }
  const std::uint64_t useful = static_cast<std::uint64_t>(std::bit_width(modulus - 1));
  constexpr std::uint64_t kBitsPerDecimalDigit = 4;  // ceil(log2 10)
  const std::uint64_t spent = std::uint64_t{m} * kBitsPerDecimalDigit;
  const std::uint64_t g = std::gcd(useful, spent);
  return {useful / g, spent / g};
}

MetricsReport audit(const Image& img, const Image* other, std::size_t sample_count,
                    std::uint64_t seed) {
  MetricsReport r;
  const Histogram h = histogram(img);
  r.entropy = entropy(h, std::max<std::uint64_t>(1, img.size()));
  r.hist_variance = histogram_variance(h);
  r.horizontal = adjacent_correlation(img, Direction::horizontal, sample_count, seed);
  r.vertical = adjacent_correlation(img, Direction::vertical, sample_count, seed + 1);
  r.diagonal = adjacent_correlation(img, Direction::diagonal, sample_count, seed + 2);
  if (other != nullptr) {
    r.npcr = npcr(img, *other);
    r.uaci = uaci(img, *other);
  }
  return r;
}

}  // namespace ieaie
