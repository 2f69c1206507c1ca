#include "frontflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace frontflow {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

// Root of sum_j 1/(u - sigma_j) on (a, b): the unique critical point of |P|
// between two consecutive roots. The log-derivative decreases monotonically
// from +inf to -inf there, so plain bisection converges to machine precision.
double interior_maximum(const std::vector<double>& roots, double a, double b) {
  auto g = [&](double u) {
    double s = 0.0;
    for (double r : roots) s += 1.0 / (u - r);
    return s;
  };
  double lo = a, hi = b;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Potential::Potential(Family family, int theta, std::vector<double> wells, double scale)
    : family_(family), theta_(theta), scale_(scale) {
  if (theta < 2) throw std::invalid_argument("potential: theta must be an integer >= 2");
  if (wells.size() < 2) throw std::invalid_argument("potential: at least two wells are required");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("potential: scale must be positive");
  for (std::size_t i = 0; i < wells.size(); ++i) {
    if (!std::isfinite(wells[i])) throw std::invalid_argument("potential: non-finite well");
    if (i > 0 && !(wells[i] > wells[i - 1]))
      throw std::invalid_argument("potential: wells must be strictly increasing");
  }

  for (std::size_t i = 0; i < wells.size(); ++i) {
    double lam = scale;
    for (std::size_t j = 0; j < wells.size(); ++j)
      if (j != i) lam *= ipow(wells[i] - wells[j], 2 * theta);
    wells_.push_back({wells[i], lam});
  }
  for (std::size_t i = 0; i + 1 < wells.size(); ++i)
    separators_.push_back(interior_maximum(wells, wells[i], wells[i + 1]));

  mu0_ = select_mu0(*this);
}

std::string Potential::family_name() const {
  switch (family_) {
    case Family::double_well: return "double_well";
    case Family::triple_well: return "triple_well";
    case Family::polynomial: return "polynomial";
  }
  return "polynomial";
}

double Potential::omega() const { return double(theta_ + 1) / double(theta_ - 1); }

void Potential::poly(double u, double& p, double& dp, double& d2p) const {
  p = 1.0;
  dp = 0.0;
  d2p = 0.0;
  for (const Well& w : wells_) {
    double f = u - w.sigma;
    d2p = d2p * f + 2.0 * dp;
    dp = dp * f + p;
    p = p * f;
  }
}

double Potential::V(double u) const {
  double p, dp, d2p;
  poly(u, p, dp, d2p);
  return scale_ * ipow(p, 2 * theta_);
}

double Potential::dV(double u) const {
  double p, dp, d2p;
  poly(u, p, dp, d2p);
  return scale_ * 2.0 * theta_ * ipow(p, 2 * theta_ - 1) * dp;
}

double Potential::d2V(double u) const {
  double p, dp, d2p;
  poly(u, p, dp, d2p);
  const int m = 2 * theta_;
  return scale_ * m * ((m - 1) * ipow(p, m - 2) * dp * dp + ipow(p, m - 1) * d2p);
}

double Potential::sqrt2V(double u) const {
  double p, dp, d2p;
  poly(u, p, dp, d2p);
  return std::sqrt(2.0 * scale_) * ipow(std::abs(p), theta_);
}

std::size_t Potential::nearest_well(double u) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < wells_.size(); ++i)
    if (std::abs(u - wells_[i].sigma) < std::abs(u - wells_[best].sigma)) best = i;
  return best;
}

double Potential::distance_to_wells(double u) const {
  return std::abs(u - wells_[nearest_well(u)].sigma);
}

double Potential::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < wells_.size(); ++i)
    g = std::min(g, wells_[i + 1].sigma - wells_[i].sigma);
  return g;
}

bool mu0_chain_holds(const Potential& p, double mu) {
  constexpr int samples = 1000;
  const double th = p.theta();
  const double slack = 1e-12;
  for (const Well& w : p.wells()) {
    for (int k = 0; k < samples; ++k) {
      double t = mu * (2.0 * k / (samples - 1) - 1.0);
      double u = w.sigma + t;
      double lead = w.lambda * std::pow(t, 2.0 * th);
      double V = p.V(u);
      double mid = p.dV(u) * t / th;
      double tolv = slack * (lead + V);
      if (0.5 * lead > V + tolv) return false;
      if (V > mid + tolv) return false;
      if (mid > 4.0 * V + tolv) return false;
      if (4.0 * V > 8.0 * lead + tolv) return false;
    }
  }
  return true;
}

double select_mu0(const Potential& p) {
  const double base = p.min_gap() / 4.0;
  for (int j = 0; j <= 20; ++j) {
    double mu = base * std::ldexp(1.0, -j);
    if (mu0_chain_holds(p, mu)) return mu;
  }
  throw std::runtime_error("select_mu0: no admissible mu0 in the search grid (malformed potential)");
}

Potential make_double_well(int theta) {
  return Potential(Potential::Family::double_well, theta, {-1.0, 1.0});
}

Potential make_triple_well(int theta) {
  return Potential(Potential::Family::triple_well, theta, {-1.0, 0.0, 1.0});
}

Potential make_polynomial_potential(int theta, std::vector<double> wells, double scale) {
  return Potential(Potential::Family::polynomial, theta, std::move(wells), scale);
}

}  // namespace frontflow
