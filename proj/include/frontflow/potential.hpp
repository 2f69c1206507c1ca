#pragma once

#include <string>
#include <vector>

namespace frontflow {

/// A zero of the potential: location and leading coefficient of V near it,
/// V(u) ~ lambda (u - sigma)^{2 theta}.
struct Well {
  double sigma = 0.0;
  double lambda = 1.0;
};

struct PotentialValue {
  double V = 0.0;
  double dV = 0.0;
};

/// Multi-well potential of factored form
///   V(u) = c * prod_j (u - sigma_j)^{2 theta},
/// with a shared integer degeneracy theta >= 2. The double and triple well
/// families are instances. Immutable once constructed.
class Potential {
 public:
  enum class Family { double_well, triple_well, polynomial };

  /// Throws std::invalid_argument on theta < 2, fewer than two wells,
  /// non-increasing wells or non-positive scale, and std::runtime_error when
  /// no admissible mu0 exists.
  Potential(Family family, int theta, std::vector<double> wells, double scale = 1.0);

  Family family() const { return family_; }
  std::string family_name() const;
  int theta() const { return theta_; }
  double scale() const { return scale_; }
  /// (theta + 1) / (theta - 1)
  double omega() const;

  std::size_t well_count() const { return wells_.size(); }
  const std::vector<Well>& wells() const { return wells_; }
  const Well& well(std::size_t i) const { return wells_.at(i); }
  /// Separator between wells i and i+1 (0-based transition index).
  double separator(std::size_t i) const { return separators_.at(i); }
  const std::vector<double>& separators() const { return separators_; }
  double mu0() const { return mu0_; }

  double V(double u) const;
  double dV(double u) const;
  double d2V(double u) const;
  PotentialValue eval(double u) const { return {V(u), dV(u)}; }

  /// sqrt(2 V(u)) computed without forming V (exact for the product form).
  double sqrt2V(double u) const;

  /// Index of the well closest to u.
  std::size_t nearest_well(double u) const;
  double distance_to_wells(double u) const;
  double min_gap() const;

 private:
  Family family_;
  int theta_;
  double scale_;
  std::vector<Well> wells_;
  std::vector<double> separators_;
  double mu0_ = 0.0;

  // P(u) = prod (u - sigma_j) and its first two derivatives.
  void poly(double u, double& p, double& dp, double& d2p) const;
};

/// V(u) = (1 - u^2)^{2 theta}: wells at -1, +1, separator 0.
Potential make_double_well(int theta);
/// V(u) = u^{2 theta} (1 - u^2)^{2 theta}: wells at -1, 0, +1.
Potential make_triple_well(int theta);
Potential make_polynomial_potential(int theta, std::vector<double> wells, double scale = 1.0);

/// Checks the four-sided control
///   (lambda/2) t^{2theta} <= V <= V'(u) t / theta <= 4 V <= 8 lambda t^{2theta},
/// t = u - sigma_i, at 1000 samples of |t| <= mu for every well.
bool mu0_chain_holds(const Potential& p, double mu);

/// Largest mu in {gap/4 * 2^-j, j = 0..20} satisfying mu0_chain_holds.
double select_mu0(const Potential& p);

}  // namespace frontflow
