#include "ieaie/precision_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ieaie {

NumberFormat NumberFormat::fixed(unsigned n_bits) {
  if (n_bits < 1) {
    throw std::invalid_argument("fixed-point format needs n >= 1");
  }
  NumberFormat f;
  f.kind = Kind::fixed;
  f.n_bits = n_bits;
  return f;
}

NumberFormat NumberFormat::floating(unsigned exponent_bits, unsigned mantissa_bits) {
  if (exponent_bits < 1) {
    throw std::invalid_argument("floating-point format needs e >= 1");
  }
  return floating(exponent_bits, mantissa_bits, (1 << (exponent_bits - 1)) - 1);
}

NumberFormat NumberFormat::floating(unsigned exponent_bits, unsigned mantissa_bits, int bias) {
  if (exponent_bits < 1 || exponent_bits > 16) {
    throw std::invalid_argument("floating-point format needs 1 <= e <= 16");
  }
  if (mantissa_bits > 30) {
    throw std::invalid_argument("floating-point format supports m <= 30");
  }
  NumberFormat f;
  f.kind = Kind::floating;
  f.n_bits = 0;
  f.exponent_bits = exponent_bits;
  f.mantissa_bits = mantissa_bits;
  f.bias = bias;
  return f;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number in format spec: '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

NumberFormat NumberFormat::parse(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "fixed") {
    return fixed(parse_number<unsigned>(parts[1]));
  }
  if ((parts.size() == 3 || parts.size() == 4) && parts[0] == "float") {
    const auto e = parse_number<unsigned>(parts[1]);
    const auto m = parse_number<unsigned>(parts[2]);
    if (parts.size() == 4) return floating(e, m, parse_number<int>(parts[3]));
    return floating(e, m);
  }
  throw std::invalid_argument("format must be fixed:N or float:E:M[:BIAS], got '" +
                              std::string(text) + "'");
}

std::string NumberFormat::to_string() const {
  std::ostringstream os;
  if (kind == Kind::fixed) {
    os << "fixed:" << n_bits;
  } else {
    os << "float:" << exponent_bits << ':' << mantissa_bits << ':' << bias;
  }
  return os.str();
}

QuantizeMode parse_quantize_mode(std::string_view text) {
  if (text == "floor") return QuantizeMode::floor;
  if (text == "round") return QuantizeMode::round;
  if (text == "ceil") return QuantizeMode::ceil;
  throw std::invalid_argument("quantizer must be floor, round or ceil");
}

std::string_view to_string(QuantizeMode mode) {
  switch (mode) {
    case QuantizeMode::floor: return "floor";
    case QuantizeMode::round: return "round";
    case QuantizeMode::ceil: return "ceil";
  }
  return "?";
}

std::vector<double> enumerate_states(const NumberFormat& format, std::uint64_t grid_cap) {
  std::vector<double> values;
  if (format.kind == NumberFormat::Kind::fixed) {
    if (format.n_bits < 1) {
      throw std::invalid_argument("fixed-point format needs n >= 1");
    }
    if (format.n_bits >= 32 || (std::uint64_t{1} << (2 * format.n_bits)) > grid_cap) {
      throw CapExceeded("fixed:" + std::to_string(format.n_bits) + " exceeds the grid cap");
    }
    const std::uint64_t count = std::uint64_t{1} << format.n_bits;
    values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      values.push_back(std::ldexp(static_cast<double>(i), -static_cast<int>(format.n_bits)));
    }
    return values;
  }

  if (format.exponent_bits < 1 || format.exponent_bits > 16 || format.mantissa_bits > 30) {
    throw std::invalid_argument("unsupported floating-point format");
  }
  const std::uint64_t fields = std::uint64_t{1} << format.exponent_bits;
  const std::uint64_t fractions = std::uint64_t{1} << format.mantissa_bits;
  const int m = static_cast<int>(format.mantissa_bits);
  values.push_back(0.0);
  for (std::uint64_t e = 0; e + 1 < fields; ++e) {
    for (std::uint64_t f = 0; f < fractions; ++f) {
      // subnormal: 0.f * 2^(1-bias); normal: 1.f * 2^(e-bias)
      const std::uint64_t significand = e == 0 ? f : (fractions | f);
      const int exp = (e == 0 ? 1 : static_cast<int>(e)) - format.bias - m;
      const double v = std::ldexp(static_cast<double>(significand), exp);
      if (v <= 1.0) values.push_back(v);
    }
    if (values.size() * values.size() > grid_cap) {
      throw CapExceeded(format.to_string() + " exceeds the grid cap");
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (static_cast<std::uint64_t>(values.size()) * values.size() > grid_cap) {
    throw CapExceeded(format.to_string() + " exceeds the grid cap");
  }
  return values;
}

StateGrid::StateGrid(const NumberFormat& format, std::uint64_t grid_cap)
    : format_(format), values_(enumerate_states(format, grid_cap)) {}

std::optional<std::size_t> StateGrid::index_of(double v) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), v);
  if (it == values_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - values_.begin());
}

std::size_t StateGrid::quantize_index(double v, QuantizeMode mode) const {
  const std::size_t last = values_.size() - 1;
  const auto it = std::lower_bound(values_.begin(), values_.end(), v);
  const std::size_t above = static_cast<std::size_t>(it - values_.begin());  // first >= v
  if (above <= last && values_[above] == v) return above;
  if (above == 0) return 0;
  if (above > last) return last;
  const std::size_t below = above - 1;
  switch (mode) {
    case QuantizeMode::floor: return below;
    case QuantizeMode::ceil: return above;
    case QuantizeMode::round:
      return (v - values_[below] < values_[above] - v) ? below : above;
  }
  return below;
}

StateVector quantized_step(StateVector state, ControlParam mu, const StateGrid& grid,
                           QuantizeMode mode) {
  if (!grid.index_of(state.x) || !grid.index_of(state.y)) {
    throw std::domain_error("state is not representable in " + grid.format().to_string());
  }
  const StateVector next = lasm_step(state, mu);
  return {grid.quantize(next.x, mode), grid.quantize(next.y, mode)};
}

StateVector quantized_step(StateVector state, ControlParam mu, const NumberFormat& format,
                           QuantizeMode mode) {
  return quantized_step(state, mu, StateGrid(format), mode);
}

FunctionalGraph::FunctionalGraph(std::vector<std::uint32_t> successor, std::size_t side,
                                 std::vector<double> axis)
    : successor_(std::move(successor)), side_(side), axis_(std::move(axis)) {
  if (side_ == 0 || side_ * side_ != successor_.size()) {
    throw std::invalid_argument("successor table must cover a side x side grid");
  }
  if (!axis_.empty() && axis_.size() != side_) {
    throw std::invalid_argument("axis length must equal the grid side");
  }
  for (std::uint32_t s : successor_) {
    if (s >= successor_.size()) {
      throw std::invalid_argument("successor index out of range");
    }
  }
  decompose();
}

StateVector FunctionalGraph::state(std::size_t node) const {
  if (axis_.empty()) {
    throw std::logic_error("graph has no state axis");
  }
  const Position p = coordinates(node);
  return {axis_[p.row], axis_[p.col]};
}

void FunctionalGraph::decompose() {
  const std::size_t n = successor_.size();
  info_.assign(n, NodeInfo{});

  // Peel in-degree-zero nodes; whatever survives lies on a cycle.
  std::vector<std::uint32_t> indegree(n, 0);
  for (std::uint32_t s : successor_) ++indegree[s];
  std::vector<std::uint32_t> peeled;
  peeled.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) peeled.push_back(static_cast<std::uint32_t>(v));
  }
  for (std::size_t head = 0; head < peeled.size(); ++head) {
    const std::uint32_t s = successor_[peeled[head]];
    if (--indegree[s] == 0) peeled.push_back(s);
  }
  std::vector<bool> on_tree(n, false);
  for (std::uint32_t v : peeled) on_tree[v] = true;

  std::vector<bool> done(n, false);
  component_count_ = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (on_tree[v] || done[v]) continue;
    const auto id = static_cast<std::uint32_t>(component_count_++);
    std::uint32_t length = 0;
    std::size_t w = v;
    do {
      ++length;
      w = successor_[w];
    } while (w != v);
    w = v;
    do {
      info_[w] = {id, 0, length};
      done[w] = true;
      w = successor_[w];
    } while (w != v);
  }

  // A peeled node's successor is peeled later or sits on a cycle.
  for (auto it = peeled.rbegin(); it != peeled.rend(); ++it) {
    const NodeInfo& next = info_[successor_[*it]];
    info_[*it] = {next.component, next.tail + 1, next.cycle};
  }
}

FunctionalGraph build_functional_graph(ControlParam mu, const NumberFormat& format,
                                       QuantizeMode mode, std::uint64_t grid_cap,
                                       unsigned threads) {
  const StateGrid grid(format, grid_cap);
  const std::size_t side = grid.size();
  const std::size_t n = side * side;
  const auto axis = grid.values();
  std::vector<std::uint32_t> successor(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t node = begin; node < end; ++node) {
      const StateVector next = lasm_step({axis[node / side], axis[node % side]}, mu);
      successor[node] = static_cast<std::uint32_t>(grid.quantize_index(next.x, mode) * side +
                                                   grid.quantize_index(next.y, mode));
    }
  };

  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n / 4096)));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n + workers - 1) / workers;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            work(std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return FunctionalGraph(std::move(successor), side, std::vector<double>(axis.begin(), axis.end()));
}

GraphStats graph_stats(const FunctionalGraph& graph) {
  GraphStats st;
  st.nodes = graph.node_count();
  st.components = graph.component_count();
  st.component_sizes.assign(st.components, 0);
  st.cycle_lengths.assign(st.components, 0);
  for (std::size_t v = 0; v < st.nodes; ++v) {
    const NodeInfo& info = graph.info(v);
    ++st.component_sizes[info.component];
    st.cycle_lengths[info.component] = info.cycle;
    st.max_tail = std::max<std::size_t>(st.max_tail, info.tail);
    st.self_loops += graph.successor(v) == v;
  }
  std::sort(st.cycle_lengths.begin(), st.cycle_lengths.end());
  return st;
}

std::string export_dot(const FunctionalGraph& graph) {
  std::ostringstream os;
  os << "digraph functional_graph {\n";
  os << "  node [shape=circle];\n";
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const Position p = graph.coordinates(v);
    os << "  n" << v << " [label=\"(" << p.row << ", " << p.col << ")\"];\n";
  }
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    os << "  n" << v << " -> n" << graph.successor(v) << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ieaie
