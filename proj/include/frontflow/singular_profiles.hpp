#pragma once

#include <vector>

namespace frontflow {

/// Constants of the singular boundary value problems
///   -U'' + 2 theta U^{2 theta - 1} = 0 on (-1, 1), U(+-1) infinite,
/// that drive front interactions. Both are reported as positive numbers.
struct InteractionConstants {
  int theta = 2;
  double omega = 3.0;
  double A = 0.0;  ///< |discrepancy| of the even solution (attraction)
  double B = 0.0;  ///< discrepancy of the odd solution (repulsion)
};

/// I_theta = int_1^inf dv / sqrt(2 (v^{2 theta} - 1)).
double singular_integral_I(int theta);
/// J_theta = int_0^inf dw / sqrt(2 (w^{2 theta} + 1)).
double singular_integral_J(int theta);

/// A_theta = I_theta^{2 theta / (theta - 1)}. Throws std::invalid_argument for theta < 2.
double compute_A(int theta);
/// B_theta = J_theta^{2 theta / (theta - 1)}. Throws std::invalid_argument for theta < 2.
double compute_B(int theta);
InteractionConstants interaction_constants(int theta);

/// Explicit solution [sqrt(2) (theta - 1) x]^{-1/(theta-1)} on x > 0.
/// Throws std::domain_error for x <= 0.
double u_star(int theta, double x);

/// Comparison bounds on (-r, r): any solution of the equation with infinite
/// data at both ends lies between these two.
double comparison_lower_bound(int theta, double x, double r = 1.0);
double comparison_upper_bound(int theta, double x, double r = 1.0);

/// Tabulated solution of the singular problem on (-1, 1).
class SingularProfile {
 public:
  enum class Kind {
    vee_min,  ///< even, +inf at both ends, minimum m at 0
    odd       ///< odd, -inf to +inf, slope s0 at 0
  };

  /// Built from the first integral U'^2/2 - U^{2 theta} = Xi by quadrature in U
  /// and inversion; tabulated on |x| <= 1 - 1e-4, extended beyond by the U*
  /// boundary layer.
  SingularProfile(Kind kind, int theta);

  Kind kind() const { return kind_; }
  int theta() const { return theta_; }
  /// m = U(0) for vee_min, U'(0) for odd.
  double center_value() const { return center_; }
  /// U'^2/2 - U^{2 theta}: -A for vee_min, +B for odd.
  double xi() const { return xi_; }

  double value(double x) const;
  double derivative(double x) const;
  double operator()(double x) const { return value(x); }

  /// Tabulated nodes on [0, 1 - 1e-4]; the profile is extended by symmetry.
  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<double>& table_u() const { return tu_; }

  static constexpr double kTruncation = 1e-4;

 private:
  double half_value(double x) const;  // x in [0, 1)
  double distance_to_boundary(double U) const;
  double x_of(double U) const;

  Kind kind_;
  int theta_;
  double center_;
  double xi_;
  std::vector<double> tx_;
  std::vector<double> tu_;
};

/// U_{r,lambda}(x) = lambda^{-1/(2(theta-1))} r^{-1/(theta-1)} U(x / r), the
/// solution on (-r, r) of -U'' + 2 lambda theta U^{2theta-1} = 0.
class ScaledProfile {
 public:
  ScaledProfile(const SingularProfile& base, double r, double lambda);
  double operator()(double x) const;
  double derivative(double x) const;
  /// U'^2/2 - lambda U^{2 theta} = lambda^{-1/(theta-1)} r^{-(omega+1)} Xi.
  double xi() const;
  double r() const { return r_; }
  double lambda() const { return lambda_; }

 private:
  const SingularProfile* base_;
  double r_;
  double lambda_;
  double amplitude_;
};

ScaledProfile scaled_profile(const SingularProfile& profile, double r, double lambda);

}  // namespace frontflow
