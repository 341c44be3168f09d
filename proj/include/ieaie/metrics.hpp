#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ieaie/image.hpp"

namespace ieaie {

/// Per-tonal-value pixel counts of an 8-bit block.
struct Histogram {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  bool operator==(const Histogram&) const = default;
};

Histogram histogram(std::span<const std::uint8_t> pixels);
inline Histogram histogram(const Image& img) { return histogram(img.data()); }

/// Information entropy -sum p_i log2 p_i with p_i = count_i / denominator.
///
/// The sum runs over the nonzero counts in ascending order, so the result is
/// a function of the count multiset alone: relabelling tonal values or
/// moving pixels around gives a bit-identical value. Empty histograms give 0.
/// Requires denominator >= max(1, total).
double entropy(const Histogram& hist, std::uint64_t denominator);
double entropy(std::span<const std::uint8_t> block, std::uint64_t denominator);
/// Entropy of a whole image (denominator = pixel count).
double entropy(const Image& img);

/// "value,count" lines for all 256 bins, with a header row.
std::string histogram_csv(const Histogram& h);

/// Population variance of a list of bin counts.
double histogram_variance(std::span<const std::uint64_t> counts);
inline double histogram_variance(const Histogram& h) { return histogram_variance(h.counts); }

/// M x N image in which every tonal value occurs exactly M*N/256 times, laid
/// out by a seeded shuffle. Throws std::invalid_argument unless 256 | M*N.
Image flat_histogram_image(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Position permutation: pixel at raster index k moves to raster index target[k].
struct PositionPermutation {
  std::vector<std::size_t> target;
};

/// Tonal relabelling restricted to the values present in the image.
struct ValueBijection {
  std::array<std::optional<std::uint8_t>, 256> map{};
};

using EntropyPreservingMap = std::variant<PositionPermutation, ValueBijection>;

/// Applies a map that cannot change entropy. Rejects (std::invalid_argument)
/// position maps that are not bijections, value maps that leave a present
/// value unmapped, and value maps that send two present values to one target.
Image entropy_preserving_transform(const Image& img, const EntropyPreservingMap& map);

/// Unchecked pointwise value map.
Image apply_value_map(const Image& img, const std::array<std::uint8_t, 256>& map);

enum class Direction { horizontal, vertical, diagonal };

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  ///< one side of the sample had zero variance
  std::size_t pairs = 0;
};

/// Pearson correlation of adjacent pixel pairs. sample_count == 0 uses every
/// pair; otherwise sample_count pairs are drawn with a generator seeded by
/// `seed`. Zero-variance samples report value 0 with `degenerate` set.
Correlation adjacent_correlation(const Image& img, Direction dir, std::size_t sample_count,
                                 std::uint64_t seed);

/// Number of pixels change rate, percent. Standard definition (not from the
/// analysed scheme): 100 * #{C1 != C2} / (M*N).
double npcr(const Image& a, const Image& b);
/// Unified averaged changed intensity, percent: 100 * sum|C1 - C2| / (255 * M*N).
double uaci(const Image& a, const Image& b);

enum class FloatFormat { binary32, binary64 };

struct BitDistance {
  unsigned fraction_bits = 0;
  unsigned exponent_bits = 0;
  bool sign_differs = false;
};

/// Differing bits between the IEEE encodings of a and b (each rounded to the
/// format first).
BitDistance float_bit_distance(double a, double b, FloatFormat format);

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  bool operator==(const Rational&) const = default;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// ceil(log2 D) / (m * ceil(log2 10)), reduced: the share of a decimal
/// scale-by-10^m conversion that survives a final mod D.
Rational utilization_ratio(unsigned m, std::uint64_t modulus);

struct MetricsReport {
  double entropy = 0.0;
  double hist_variance = 0.0;
  Correlation horizontal;
  Correlation vertical;
  Correlation diagonal;
  std::optional<double> npcr;
  std::optional<double> uaci;
};

/// Single-image metrics plus NPCR/UACI when a second image is supplied.
MetricsReport audit(const Image& img, const Image* other, std::size_t sample_count,
                    std::uint64_t seed);

}  // namespace ieaie
