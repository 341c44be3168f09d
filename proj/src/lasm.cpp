#include "ieaie/lasm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ieaie {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void require_state(StateVector s) {
  if (!in_unit(s.x) || !in_unit(s.y)) {
    throw std::domain_error("map state outside [0,1]^2: (" + std::to_string(s.x) + ", " +
                            std::to_string(s.y) + ")");
  }
}

}  // namespace

ControlParam::ControlParam(double mu) : mu_(mu) {
  if (!valid(mu)) {
    throw std::domain_error("mu = " + std::to_string(mu) +
                            " is outside [0.37,0.38] u [0.4,0.42] u [0.44,0.93]");
  }
}

bool ControlParam::valid(double mu) {
  return (mu >= 0.37 && mu <= 0.38) || (mu >= 0.4 && mu <= 0.42) || (mu >= 0.44 && mu <= 0.93);
}

SecretKey::SecretKey(double x0, double y0, double x0p, double y0p, ControlParam mu)
    : x0_(x0), y0_(y0), x0p_(x0p), y0p_(y0p), mu_(mu) {
  if (!in_unit(x0) || !in_unit(y0) || !in_unit(x0p) || !in_unit(y0p)) {
    throw std::domain_error("key initial conditions must lie in [0,1]");
  }
}

StateVector lasm_step(StateVector state, ControlParam mu) {
  require_state(state);
  const double pm = std::numbers::pi * mu.value();
  const StateVector next{std::sin(pm * (state.y + 3.0) * state.x * (1.0 - state.x)),
                         std::sin(pm * (state.x + 3.0) * state.y * (1.0 - state.y))};
  if (!in_unit(next.x) || !in_unit(next.y)) {
    throw std::logic_error("map output left [0,1]^2");
  }
  return next;
}

double mod1(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("mod1 of a non-finite value");
  }
  const double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  return r < 1.0 ? r : std::nextafter(1.0, 0.0);
}

std::vector<double> lasm_sequence(StateVector seed, ControlParam mu, std::size_t skip, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("lasm_sequence needs n >= 1");
  }
  StateVector s = seed;
  for (std::size_t i = 0; i < skip; ++i) {
    s = lasm_step(s, mu);
  }
  std::vector<double> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s = lasm_step(s, mu);
    out.push_back(s.x);
    out.push_back(s.y);
  }
  return out;
}

}  // namespace ieaie
