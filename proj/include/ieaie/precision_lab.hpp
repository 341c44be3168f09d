#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ieaie/image.hpp"
#include "ieaie/lasm.hpp"

namespace ieaie {

/// Grid-point budget (states squared) for enumeration and graph builds.
inline constexpr std::uint64_t kDefaultGridCap = std::uint64_t{1} << 26;

/// Thrown when a format would produce more grid points than the cap allows.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Low-precision number format used to quantize map states.
///
/// Fixed: the values i / 2^n for i in [0, 2^n).
/// Floating: IEEE-style positive values with `exponent_bits` exponent bits,
/// `mantissa_bits` fraction bits and the given bias; exponent field 0 encodes
/// subnormals and the all-ones exponent field is reserved (inf/NaN).
struct NumberFormat {
  enum class Kind { fixed, floating };

  Kind kind = Kind::fixed;
  unsigned n_bits = 3;
  unsigned exponent_bits = 0;
  unsigned mantissa_bits = 0;
  int bias = 0;

  static NumberFormat fixed(unsigned n_bits);
  /// Bias defaults to 2^(e-1) - 1.
  static NumberFormat floating(unsigned exponent_bits, unsigned mantissa_bits);
  static NumberFormat floating(unsigned exponent_bits, unsigned mantissa_bits, int bias);
  /// "fixed:N" or "float:E:M[:BIAS]".
  static NumberFormat parse(std::string_view text);

  std::string to_string() const;
};

enum class QuantizeMode { floor, round, ceil };

QuantizeMode parse_quantize_mode(std::string_view text);
std::string_view to_string(QuantizeMode mode);

/// Sorted representable values of `format` inside [0, 1].
std::vector<double> enumerate_states(const NumberFormat& format,
                                     std::uint64_t grid_cap = kDefaultGridCap);

/// The enumerated value set of one format with quantization lookups.
class StateGrid {
 public:
  explicit StateGrid(const NumberFormat& format, std::uint64_t grid_cap = kDefaultGridCap);

  const NumberFormat& format() const { return format_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::optional<std::size_t> index_of(double v) const;
  /// Index of the representable value chosen for v: nearest below (floor),
  /// nearest above (ceil) or nearest with ties going up (round). Values past
  /// either end of the set saturate.
  std::size_t quantize_index(double v, QuantizeMode mode) const;
  double quantize(double v, QuantizeMode mode) const { return values_[quantize_index(v, mode)]; }

 private:
  NumberFormat format_;
  std::vector<double> values_;
};

/// Exact binary64 map step followed by per-component quantization.
/// Throws std::domain_error if `state` is not representable in the grid.
StateVector quantized_step(StateVector state, ControlParam mu, const StateGrid& grid,
                           QuantizeMode mode);
StateVector quantized_step(StateVector state, ControlParam mu, const NumberFormat& format,
                           QuantizeMode mode);

struct NodeInfo {
  std::uint32_t component = 0;
  std::uint32_t tail = 0;   ///< steps until the orbit first lands on a cycle
  std::uint32_t cycle = 0;  ///< length of that cycle

  bool operator==(const NodeInfo&) const = default;
};

/// Out-degree-one graph over a side x side grid of states. Node id
/// i * side + j stands for the state (axis[i], axis[j]).
class FunctionalGraph {
 public:
  /// Takes a successor table and decomposes it into cycles and trees.
  FunctionalGraph(std::vector<std::uint32_t> successor, std::size_t side,
                  std::vector<double> axis = {});

  std::size_t node_count() const { return successor_.size(); }
  std::size_t side() const { return side_; }
  std::span<const double> axis() const { return axis_; }
  std::span<const std::uint32_t> successors() const { return successor_; }
  std::uint32_t successor(std::size_t node) const { return successor_[node]; }
  const NodeInfo& info(std::size_t node) const { return info_[node]; }
  std::span<const NodeInfo> infos() const { return info_; }
  std::size_t component_count() const { return component_count_; }

  Position coordinates(std::size_t node) const { return {node / side_, node % side_}; }
  /// Only for graphs built from a state grid.
  StateVector state(std::size_t node) const;

 private:
  void decompose();

  std::vector<std::uint32_t> successor_;
  std::size_t side_;
  std::vector<double> axis_;
  std::vector<NodeInfo> info_;
  std::size_t component_count_ = 0;
};

/// Successors are evaluated over `threads` workers (0 = hardware
/// concurrency); the result does not depend on the thread count.
FunctionalGraph build_functional_graph(ControlParam mu, const NumberFormat& format,
                                       QuantizeMode mode, std::uint64_t grid_cap = kDefaultGridCap,
                                       unsigned threads = 0);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t components = 0;
  std::vector<std::size_t> component_sizes;  ///< indexed by component id
  std::vector<std::size_t> cycle_lengths;    ///< one per component, ascending
  std::size_t max_tail = 0;
  std::size_t self_loops = 0;
};

GraphStats graph_stats(const FunctionalGraph& graph);

/// Graphviz text: one node per state labelled "(i, j)", one edge per node.
std::string export_dot(const FunctionalGraph& graph);

}  // namespace ieaie
