#include "frontflow/oracles.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <stdexcept>

namespace frontflow {

namespace {

using State = std::array<double, 2>;

// Integrates from x = 0 until U reaches the cap, then closes the last stretch
// with the U* tail; returns the blow-up abscissa.
double blowup(int theta, double cap, State y) {
  namespace ode = boost::numeric::odeint;
  auto rhs = [theta](const State& s, State& d, double) {
    d[0] = s[1];
    d[1] = 2.0 * theta * std::pow(s[0], 2 * theta - 1);
  };
  auto stepper = ode::make_dense_output(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y, 0.0, 1e-3);
  while (stepper.current_state()[0] < cap) {
    if (stepper.current_time() > 10.0) return INFINITY;
    stepper.do_step(rhs);
  }
  double a = stepper.previous_time(), b = stepper.current_time();
  State s;
  for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
    const double m = 0.5 * (a + b);
    stepper.calc_state(m, s);
    (s[0] < cap ? a : b) = m;
  }
  return b + 1.0 / ((theta - 1) * std::sqrt(2.0) * std::pow(cap, theta - 1));
}

double cap_for(int theta) {
  if (theta < 2) throw std::invalid_argument("shooting oracle: theta must be >= 2");
  return theta == 2 ? 1e5 : 1e3;
}

}  // namespace

double shooting_A(int theta) {
  const double cap = cap_for(theta);
  double lo = 0.1, hi = 3.0;  // blow-up abscissa decreases in m
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double m = 0.5 * (lo + hi);
    (blowup(theta, cap, {m, 0.0}) > 1.0 ? lo : hi) = m;
  }
  return std::pow(0.5 * (lo + hi), 2 * theta);
}

double shooting_B(int theta) {
  const double cap = cap_for(theta);
  double lo = 0.01, hi = 10.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double b = 0.5 * (lo + hi);
    (blowup(theta, cap, {0.0, std::sqrt(2.0 * b)}) > 1.0 ? lo : hi) = b;
  }
  return 0.5 * (lo + hi);
}

}  // namespace frontflow
