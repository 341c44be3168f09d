#pragma once

#include <cstddef>
#include <vector>

namespace ieaie {

/// Point of the two-dimensional Logistic-adjusted-Sine map. Both components
/// stay in [0, 1].
struct StateVector {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const StateVector&) const = default;
};

/// Control parameter mu, restricted to [0.37, 0.38] u [0.4, 0.42] u [0.44, 0.93].
class ControlParam {
 public:
  explicit ControlParam(double mu);

  static bool valid(double mu);
  double value() const { return mu_; }

  bool operator==(const ControlParam&) const = default;

 private:
  double mu_;
};

/// The cipher key: two initial conditions of the map plus mu.
class SecretKey {
 public:
  SecretKey(double x0, double y0, double x0p, double y0p, ControlParam mu);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x0p() const { return x0p_; }
  double y0p() const { return y0p_; }
  ControlParam mu() const { return mu_; }

  bool operator==(const SecretKey&) const = default;

 private:
  double x0_;
  double y0_;
  double x0p_;
  double y0p_;
  ControlParam mu_;
};

/// One simultaneous map step in binary64:
///   x' = sin(pi * mu * (y + 3) * x * (1 - x))
///   y' = sin(pi * mu * (x + 3) * y * (1 - y))
/// Throws std::domain_error for a state outside the unit square and
/// std::logic_error if an output escapes [0, 1].
StateVector lasm_step(StateVector state, ControlParam mu);

/// x - floor(x), in [0, 1). Throws std::domain_error for non-finite input.
double mod1(double x);

/// Iterates skip + n steps from `seed` and returns the last n states
/// interleaved as x, y, x, y, ... (length 2n).
std::vector<double> lasm_sequence(StateVector seed, ControlParam mu, std::size_t skip, std::size_t n);

}  // namespace ieaie
