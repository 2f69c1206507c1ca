#include "frontflow/singular_profiles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "frontflow/detail/numerics.hpp"

namespace frontflow {

namespace {

void check_theta(int theta) {
  if (theta < 2) throw std::invalid_argument("theta must be >= 2, got " + std::to_string(theta));
}

double tanh_sinh_ab(const std::function<double(double)>& f, double a, double b, const char* what) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0, l1 = 0.0;
  const double q = ts.integrate(f, a, b, 1e-12, &err, &l1);
  if (!std::isfinite(q) || err > 1e-10 * std::max(1.0, l1))
    throw std::runtime_error(std::string(what) + ": quadrature did not converge");
  return q;
}

double gk(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 5, 1e-15);
}

// sum_{j<n} w^j, so that w^n - 1 = (w - 1) * geometric_sum(w, n)
double geometric_sum(double w, int n) {
  double s = 0.0, p = 1.0;
  for (int j = 0; j < n; ++j, p *= w) s += p;
  return s;
}

}  // namespace

double singular_integral_I(int theta) {
  check_theta(theta);
  // v = 1/t; on [1/2, 1] the endpoint singularity is moved to u = 1 - t = 0 so
  // that the nodes resolve it in absolute precision
  auto lower = [theta](double t) {
    return std::pow(t, theta - 2) / std::sqrt(2.0 * (1.0 - std::pow(t, 2 * theta)));
  };
  auto upper = [theta](double u) {
    const double t = 1.0 - u;
    return std::pow(t, theta - 2) / std::sqrt(2.0 * u * geometric_sum(t, 2 * theta));
  };
  return tanh_sinh_ab(lower, 0.0, 0.5, "I_theta") + tanh_sinh_ab(upper, 0.0, 0.5, "I_theta");
}

double singular_integral_J(int theta) {
  check_theta(theta);
  auto inner = [theta](double w) { return 1.0 / std::sqrt(2.0 * (std::pow(w, 2 * theta) + 1.0)); };
  auto outer = [theta](double t) {
    return std::pow(t, theta - 2) / std::sqrt(2.0 * (1.0 + std::pow(t, 2 * theta)));
  };
  return tanh_sinh_ab(inner, 0.0, 1.0, "J_theta") + tanh_sinh_ab(outer, 0.0, 1.0, "J_theta");
}

double compute_A(int theta) {
  return std::pow(singular_integral_I(theta), 2.0 * theta / (theta - 1.0));
}

double compute_B(int theta) {
  return std::pow(singular_integral_J(theta), 2.0 * theta / (theta - 1.0));
}

InteractionConstants interaction_constants(int theta) {
  InteractionConstants c;
  c.theta = theta;
  c.omega = (theta + 1.0) / (theta - 1.0);
  c.A = compute_A(theta);
  c.B = compute_B(theta);
  return c;
}

double u_star(int theta, double x) {
  check_theta(theta);
  if (!(x > 0.0)) throw std::domain_error("u_star requires x > 0");
  return std::pow(std::sqrt(2.0) * (theta - 1) * x, -1.0 / (theta - 1));
}

double comparison_lower_bound(int theta, double x, double r) {
  if (!(std::abs(x) < r)) throw std::domain_error("comparison bound requires |x| < r");
  return std::max(u_star(theta, r - x), u_star(theta, r + x));
}

double comparison_upper_bound(int theta, double x, double r) {
  if (!(std::abs(x) < r)) throw std::domain_error("comparison bound requires |x| < r");
  return u_star(theta, r - x) + u_star(theta, r + x);
}

// Both profiles are written as U = c w with c = |Xi|^{1/(2 theta)}, so that
// x(w) = c^{1-theta} int dw / sqrt(2 (w^{2 theta} + s)), s = -1 (vee) or +1 (odd).
// Near the center the integral is taken in w (odd) or y = sqrt(w - 1) (vee);
// near the boundary the distance 1 - x is taken in q = 1/w.
namespace {

struct HalfMap {
  int theta;
  double s;        // -1 or +1
  double c;        // U scale
  double xscale;   // c^{1-theta}
  double center_end;  // upper limit of the center variable (y or w)
  double q_end;       // upper limit of q on the boundary side
  double x_switch;

  double center_integrand(double v) const {
    if (s < 0.0) {
      const double w = 1.0 + v * v;
      return std::sqrt(2.0 / geometric_sum(w, 2 * theta));
    }
    return 1.0 / std::sqrt(2.0 * (std::pow(v, 2 * theta) + 1.0));
  }
  double boundary_integrand(double q) const {
    return std::pow(q, theta - 2) / std::sqrt(2.0 * (1.0 + s * std::pow(q, 2 * theta)));
  }
  double x_center(double v) const {
    return xscale * gk([this](double t) { return center_integrand(t); }, 0.0, v);
  }
  double rho_boundary(double q) const {
    return xscale * gk([this](double t) { return boundary_integrand(t); }, 0.0, q);
  }
  double w_from_center(double v) const { return s < 0.0 ? 1.0 + v * v : v; }

  // U(x) for 0 <= x < 1
  double u_at(double x) const {
    if (x <= x_switch) {
      const double v = detail::solve_monotone([this](double t) { return x_center(t); },
                                              [this](double t) { return xscale * center_integrand(t); },
                                              0.0, center_end, x);
      return c * w_from_center(v);
    }
    const double rho = 1.0 - x;
    const double q = detail::solve_monotone([this](double t) { return rho_boundary(t); },
                                            [this](double t) { return xscale * boundary_integrand(t); },
                                            0.0, q_end, rho, 1e-15 * rho);
    return c / q;
  }
};

HalfMap make_half_map(SingularProfile::Kind kind, int theta, double abs_xi) {
  HalfMap h;
  h.theta = theta;
  h.s = kind == SingularProfile::Kind::vee_min ? -1.0 : 1.0;
  h.c = std::pow(abs_xi, 1.0 / (2.0 * theta));
  h.xscale = std::pow(h.c, 1.0 - theta);
  if (h.s < 0.0) {
    h.center_end = 1.0;  // w = 2
    h.q_end = 0.5;
  } else {
    h.center_end = 1.0;  // w = 1
    h.q_end = 1.0;
  }
  h.x_switch = h.x_center(h.center_end);
  return h;
}

}  // namespace

SingularProfile::SingularProfile(Kind kind, int theta) : kind_(kind), theta_(theta) {
  check_theta(theta);
  if (kind == Kind::vee_min) {
    const double A = compute_A(theta);
    xi_ = -A;
    center_ = std::pow(A, 1.0 / (2.0 * theta));
  } else {
    const double B = compute_B(theta);
    xi_ = B;
    center_ = std::sqrt(2.0 * B);
  }
  // Nodes cluster geometrically toward the blow-up at x = 1.
  const std::size_t n = 2001;
  tx_.resize(n);
  tu_.resize(n);
  const HalfMap h = make_half_map(kind_, theta_, std::abs(xi_));
  for (std::size_t k = 0; k < n; ++k) {
    const double rho = std::pow(kTruncation, static_cast<double>(k) / (n - 1));
    const double x = k == 0 ? 0.0 : 1.0 - rho;
    tx_[k] = x;
    tu_[k] = h.u_at(x);
  }
  if (kind_ == Kind::odd) tu_[0] = 0.0;
}

double SingularProfile::half_value(double x) const {
  if (x >= 1.0 - kTruncation) return u_star(theta_, 1.0 - x);
  if (x == 0.0) return kind_ == Kind::vee_min ? center_ : 0.0;
  const HalfMap h = make_half_map(kind_, theta_, std::abs(xi_));
  return h.u_at(x);
}

double SingularProfile::value(double x) const {
  if (!(std::abs(x) < 1.0)) throw std::domain_error("singular profile evaluated outside (-1, 1)");
  const double u = half_value(std::abs(x));
  return (kind_ == Kind::odd && x < 0.0) ? -u : u;
}

double SingularProfile::derivative(double x) const {
  if (!(std::abs(x) < 1.0)) throw std::domain_error("singular profile evaluated outside (-1, 1)");
  const double ax = std::abs(x);
  double du;
  if (ax >= 1.0 - kTruncation) {
    du = std::sqrt(2.0) * std::pow(u_star(theta_, 1.0 - ax), theta_);
  } else {
    const double u = half_value(ax);
    du = std::sqrt(std::max(0.0, 2.0 * (std::pow(u, 2 * theta_) + xi_)));
  }
  if (kind_ == Kind::vee_min && x < 0.0) return -du;
  return du;
}

ScaledProfile::ScaledProfile(const SingularProfile& base, double r, double lambda)
    : base_(&base), r_(r), lambda_(lambda) {
  if (!(r > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("scaled profile requires r > 0 and lambda > 0");
  const int th = base.theta();
  amplitude_ = std::pow(lambda, -1.0 / (2.0 * (th - 1))) * std::pow(r, -1.0 / (th - 1));
}

double ScaledProfile::operator()(double x) const { return amplitude_ * base_->value(x / r_); }

double ScaledProfile::derivative(double x) const {
  return amplitude_ / r_ * base_->derivative(x / r_);
}

double ScaledProfile::xi() const {
  const int th = base_->theta();
  const double omega = (th + 1.0) / (th - 1.0);
  return std::pow(lambda_, -1.0 / (th - 1)) * std::pow(r_, -(omega + 1.0)) * base_->xi();
}

ScaledProfile scaled_profile(const SingularProfile& profile, double r, double lambda) {
  return ScaledProfile(profile, r, lambda);
}

}  // namespace frontflow
