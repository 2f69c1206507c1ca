#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frontflow/chain.hpp"
#include "frontflow/field.hpp"
#include "frontflow/potential.hpp"

namespace frontflow {

namespace detail {
class TransitionMap;
}

/// A point on a stationary front: the value u and its distances to the two
/// wells bounding the transition, both kept to full relative precision.
struct ProfilePoint {
  double u = 0.0;
  double t_left = 0.0;   ///< u - sigma_i
  double t_right = 0.0;  ///< sigma_{i+1} - u
};

/// Stationary heteroclinic front zeta between wells i and i+1, normalized by
/// zeta(0) = z_i. The increasing front (Orientation::plus) is the inverse of
///   gamma(u) = int_{z_i}^{u} ds / sqrt(2 V(s));
/// the decreasing one is zeta^-(x) = zeta^+(-x). Copies share the table.
class FrontProfile {
 public:
  FrontProfile(const Potential& potential, std::size_t transition,
               Orientation orientation = Orientation::plus);

  std::size_t transition() const;
  Orientation orientation() const { return orientation_; }
  FrontProfile with_orientation(Orientation o) const;

  int theta() const;
  double lambda_left() const;
  double lambda_right() const;
  double sigma_left() const;
  double sigma_right() const;
  double separator() const;
  /// Energy of the front, int sqrt(2V) over the transition.
  double energy() const;
  /// Energy of the unscaled profile outside [-R, R].
  double energy_outside(double R) const;

  double zeta(double x) const { return locate(x).u; }
  double dzeta(double x) const;
  ProfilePoint locate(double x) const;

  /// Leading tail asymptotics sigma -/+ ((theta-1) sqrt(2 lambda) |x|)^{-1/(theta-1)}.
  double tail_asymptote(double x) const;

  /// Tabulated nodes of the increasing profile (x = gamma(u), u).
  const std::vector<double>& table_x() const;
  const std::vector<double>& table_u() const;

 private:
  FrontProfile(std::shared_ptr<const detail::TransitionMap> map, Orientation o)
      : map_(std::move(map)), orientation_(o) {}
  std::shared_ptr<const detail::TransitionMap> map_;
  Orientation orientation_;
};

/// gamma_i(u) for u strictly inside (sigma_i, sigma_{i+1}); throws
/// std::domain_error otherwise.
double gamma(const Potential& potential, std::size_t transition, double u);

/// Energy of the stationary front between wells i and i+1.
double front_energy(const Potential& potential, std::size_t transition);

/// int_{-r}^{r} e_eps(zeta(x / eps)) dx.
double window_energy(const FrontProfile& profile, double eps, double r);

/// One increasing profile per transition of a potential.
class ProfileSet {
 public:
  explicit ProfileSet(const Potential& potential);
  const Potential& potential() const { return potential_; }
  FrontProfile profile(std::size_t transition, Orientation o) const {
    return profiles_.at(transition).with_orientation(o);
  }
  double energy(std::size_t transition) const { return profiles_.at(transition).energy(); }

 private:
  Potential potential_;
  std::vector<FrontProfile> profiles_;
};

struct GluedField {
  Field field;
  /// Exact x-derivative of the glued profile at the nodes.
  std::vector<double> dvdx;
  /// max_k |v(a_k) - z_{i(k)}|, evaluated with the exact profiles.
  double tail_overlap = 0.0;
};

/// Telescoping superposition of translated stationary fronts:
///   v(x) = sigma_{l_0} + sum_k [ zeta_k((x - a_k)/eps) - sigma_{l_k} ].
/// Throws std::invalid_argument if two fronts are closer than 20 eps or the
/// grid leaves less than max(1, 5 * max gap) of margin around the chain.
GluedField glue_chain(const ProfileSet& profiles, const ChainSpec& chain, double eps,
                      const Grid1D& grid);
GluedField glue_chain(const Potential& potential, const ChainSpec& chain, double eps,
                      const Grid1D& grid);

/// Writes x, zeta, zeta' on [-x_range, x_range].
void write_profile_csv(const FrontProfile& profile, double x_range, std::size_t samples,
                       const std::string& path);

}  // namespace frontflow
