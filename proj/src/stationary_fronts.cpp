#include "frontflow/stationary_fronts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "frontflow/detail/numerics.hpp"

namespace frontflow {

namespace detail {

namespace {

constexpr std::size_t kTableSize = 4096;
constexpr std::size_t kSeriesTerms = 48;

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

/// Behavior of 1/sqrt(2V) near one well of a transition, in the distance
/// t to that well. With s = sigma_w + dir * t,
///   sqrt(2V(s)) = sqrt(2c) t^theta prod_j |d_j + dir t|^theta,  d_j = sigma_w - sigma_j,
/// so 1/sqrt(2V) = h(t) / (sqrt(2c) t^theta) with h analytic for t < min |d_j|.
class EndExpansion {
 public:
  EndExpansion() = default;
  EndExpansion(const Potential& p, std::size_t well, int dir) : theta_(p.theta()), dir_(dir) {
    sqrt2c_ = std::sqrt(2.0 * p.scale());
    const double sw = p.well(well).sigma;
    for (std::size_t j = 0; j < p.well_count(); ++j)
      if (j != well) d_.push_back(sw - p.well(j).sigma);

    // Taylor coefficients of h(t) = prod_j |d_j|^-theta (1 + e_j t)^-theta, e_j = dir / d_j.
    h_.assign(kSeriesTerms, 0.0);
    h_[0] = 1.0;
    for (double dj : d_) {
      const double e = dir / dj;
      std::vector<double> factor(kSeriesTerms);
      double binom = 1.0;  // C(theta + k - 1, k)
      double epow = 1.0;
      for (std::size_t k = 0; k < kSeriesTerms; ++k) {
        factor[k] = binom * epow;
        binom *= double(theta_ + k) / double(k + 1);
        epow *= -e;
      }
      std::vector<double> prod(kSeriesTerms, 0.0);
      for (std::size_t a = 0; a < kSeriesTerms; ++a)
        for (std::size_t b = 0; a + b < kSeriesTerms; ++b) prod[a + b] += h_[a] * factor[b];
      const double norm = std::pow(std::abs(dj), -theta_);
      for (double& c : prod) c *= norm;
      h_ = std::move(prod);
    }
    double lam = p.well(well).lambda;
    lambda_ = lam;
  }

  double sqrt2V(double t) const {
    double r = sqrt2c_ * ipow(t, theta_);
    for (double dj : d_) r *= ipow(std::abs(dj + dir_ * t), theta_);
    return r;
  }
  double integrand(double t) const { return 1.0 / sqrt2V(t); }

  /// Antiderivative of integrand in t, from the termwise-integrated series.
  double antiderivative(double t) const {
    double sum = 0.0;
    const double lt = std::log(t);
    for (std::size_t k = 0; k < h_.size(); ++k) {
      const int p = int(k) - theta_ + 1;
      if (p == 0)
        sum += h_[k] * lt;
      else
        sum += h_[k] * std::exp(p * lt) / p;
    }
    return sum / sqrt2c_;
  }

  double lambda() const { return lambda_; }

 private:
  int theta_ = 2;
  int dir_ = 1;
  double sqrt2c_ = 1.0;
  double lambda_ = 1.0;
  std::vector<double> d_;
  std::vector<double> h_;
};

class TransitionMap {
 public:
  TransitionMap(const Potential& p, std::size_t i) : potential_(p), index_(i) {
    if (i + 1 >= p.well_count()) throw std::out_of_range("FrontProfile: transition index out of range");
    sl_ = p.well(i).sigma;
    sr_ = p.well(i + 1).sigma;
    z_ = p.separator(i);
    theta_ = p.theta();
    width_ = sr_ - sl_;
    tau_ = std::min({0.5 * p.mu0(), 0.5 * (z_ - sl_), 0.5 * (sr_ - z_)});
    left_ = EndExpansion(p, i, +1);
    right_ = EndExpansion(p, i + 1, -1);
    GLtau_ = left_.antiderivative(tau_);
    GRtau_ = right_.antiderivative(tau_);
    gamma_left_split_ = middle_integral(z_, sl_ + tau_);
    gamma_right_split_ = middle_integral(z_, sr_ - tau_);

    auto s2v = [&](double u) { return potential_.sqrt2V(u); };
    energy_ = integrate(s2v, sl_, sr_);

    const double mid = 0.5 * (sl_ + sr_);
    const double hw = 0.5 * width_;
    tu_.resize(kTableSize);
    tx_.resize(kTableSize);
    tl_.resize(kTableSize);
    tr_.resize(kTableSize);
    for (std::size_t k = 0; k < kTableSize; ++k) {
      const double ang = std::numbers::pi * double(2 * k + 1) / double(2 * kTableSize);
      const double sh = std::sin(0.5 * ang), ch = std::cos(0.5 * ang);
      tl_[k] = 2.0 * hw * sh * sh;
      tr_[k] = 2.0 * hw * ch * ch;
      tu_[k] = mid - hw * std::cos(ang);
      tx_[k] = gamma_of({tu_[k], tl_[k], tr_[k]}, /*use_table=*/false);
    }
  }

  double gamma_of(const ProfilePoint& q, bool use_table = true) const {
    if (q.t_left <= tau_) return gamma_left_split_ - (GLtau_ - left_.antiderivative(q.t_left));
    if (q.t_right <= tau_) return gamma_right_split_ + (GRtau_ - right_.antiderivative(q.t_right));
    if (use_table) {
      std::size_t k = nearest_node(q.u);
      return tx_[k] + middle_integral(tu_[k], q.u);
    }
    return middle_integral(z_, q.u);
  }

  double integrand(const ProfilePoint& q) const {
    if (q.t_left <= tau_) return left_.integrand(q.t_left);
    if (q.t_right <= tau_) return right_.integrand(q.t_right);
    return 1.0 / potential_.sqrt2V(q.u);
  }

  double sqrt2V(const ProfilePoint& q) const {
    if (q.t_left <= tau_) return left_.sqrt2V(q.t_left);
    if (q.t_right <= tau_) return right_.sqrt2V(q.t_right);
    return potential_.sqrt2V(q.u);
  }

  ProfilePoint from_left(double t) const { return {sl_ + t, t, width_ - t}; }
  ProfilePoint from_right(double t) const { return {sr_ - t, width_ - t, t}; }
  ProfilePoint from_u(double u) const { return {u, u - sl_, sr_ - u}; }

  /// Point of the increasing profile at x.
  ProfilePoint locate(double x) const {
    const std::size_t n = tx_.size();
    if (x <= tx_.front()) return left_tail(x);
    if (x >= tx_.back()) return right_tail(x);
    const std::size_t k = std::size_t(std::upper_bound(tx_.begin(), tx_.end(), x) - tx_.begin()) - 1;
    const std::size_t k1 = std::min(k + 1, n - 1);
    if (tl_[k1] <= tau_) {
      double t = solve_monotone([&](double t) { return gamma_of(from_left(t)); },
                                [&](double t) { return left_.integrand(t); }, tl_[k], tl_[k1], x);
      return from_left(t);
    }
    if (tr_[k] <= tau_) {
      // gamma decreases in the distance to the right well.
      double t = solve_monotone([&](double t) { return -gamma_of(from_right(t)); },
                                [&](double t) { return right_.integrand(t); }, tr_[k1], tr_[k], -x);
      return from_right(t);
    }
    double u = solve_monotone([&](double u) { return tx_[k] + middle_integral(tu_[k], u); },
                              [&](double u) { return 1.0 / potential_.sqrt2V(u); }, tu_[k], tu_[k1], x);
    return from_u(u);
  }

  double tail_asymptote_distance(double x, bool left) const {
    const double lam = left ? left_.lambda() : right_.lambda();
    return std::pow((theta_ - 1) * std::sqrt(2.0 * lam) * std::abs(x), -1.0 / (theta_ - 1));
  }

  /// int_0^t sqrt(2V) in the distance to the left (or right) well.
  double tail_energy(double t, bool left) const {
    if (t <= 0.0) return 0.0;
    const EndExpansion& e = left ? left_ : right_;
    return integrate([&](double s) { return e.sqrt2V(s); }, 0.0, t);
  }

  const Potential& potential() const { return potential_; }
  std::size_t index() const { return index_; }
  int theta() const { return theta_; }
  double sigma_left() const { return sl_; }
  double sigma_right() const { return sr_; }
  double separator() const { return z_; }
  double energy() const { return energy_; }
  double lambda_left() const { return left_.lambda(); }
  double lambda_right() const { return right_.lambda(); }
  const std::vector<double>& tx() const { return tx_; }
  const std::vector<double>& tu() const { return tu_; }

 private:
  template <class F>
  static double integrate(F f, double a, double b) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
      std::swap(a, b);
      sign = -1.0;
    }
    double err = 0.0;
    double r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13, &err);
    return sign * r;
  }

  double middle_integral(double a, double b) const {
    return integrate([&](double s) { return 1.0 / potential_.sqrt2V(s); }, a, b);
  }

  std::size_t nearest_node(double u) const {
    auto it = std::lower_bound(tu_.begin(), tu_.end(), u);
    std::size_t k = std::size_t(it - tu_.begin());
    if (k == tu_.size()) return k - 1;
    if (k > 0 && std::abs(tu_[k - 1] - u) < std::abs(tu_[k] - u)) return k - 1;
    return k;
  }

  ProfilePoint left_tail(double x) const {
    double hi = tl_.front();
    double lo = std::min(hi, tail_asymptote_distance(x, true));
    while (gamma_of(from_left(lo)) > x) lo *= 0.5;
    double t = solve_monotone([&](double t) { return gamma_of(from_left(t)); },
                              [&](double t) { return left_.integrand(t); }, lo, hi, x);
    return from_left(t);
  }

  ProfilePoint right_tail(double x) const {
    double hi = tr_.back();
    double lo = std::min(hi, tail_asymptote_distance(x, false));
    while (gamma_of(from_right(lo)) < x) lo *= 0.5;
    double t = solve_monotone([&](double t) { return -gamma_of(from_right(t)); },
                              [&](double t) { return right_.integrand(t); }, lo, hi, -x);
    return from_right(t);
  }

  Potential potential_;
  std::size_t index_;
  double sl_ = 0, sr_ = 0, z_ = 0, width_ = 0, tau_ = 0;
  int theta_ = 2;
  EndExpansion left_, right_;
  double GLtau_ = 0, GRtau_ = 0;
  double gamma_left_split_ = 0, gamma_right_split_ = 0;
  double energy_ = 0;
  std::vector<double> tu_, tx_, tl_, tr_;
};

}  // namespace detail

FrontProfile::FrontProfile(const Potential& potential, std::size_t transition, Orientation orientation)
    : map_(std::make_shared<const detail::TransitionMap>(potential, transition)),
      orientation_(orientation) {}

std::size_t FrontProfile::transition() const { return map_->index(); }
FrontProfile FrontProfile::with_orientation(Orientation o) const { return FrontProfile(map_, o); }
int FrontProfile::theta() const { return map_->theta(); }
double FrontProfile::lambda_left() const { return map_->lambda_left(); }
double FrontProfile::lambda_right() const { return map_->lambda_right(); }
double FrontProfile::sigma_left() const { return map_->sigma_left(); }
double FrontProfile::sigma_right() const { return map_->sigma_right(); }
double FrontProfile::separator() const { return map_->separator(); }
double FrontProfile::energy() const { return map_->energy(); }
const std::vector<double>& FrontProfile::table_x() const { return map_->tx(); }
const std::vector<double>& FrontProfile::table_u() const { return map_->tu(); }

ProfilePoint FrontProfile::locate(double x) const {
  return map_->locate(orientation_ == Orientation::plus ? x : -x);
}

double FrontProfile::dzeta(double x) const {
  const double xs = orientation_ == Orientation::plus ? x : -x;
  const double d = map_->sqrt2V(map_->locate(xs));
  return orientation_ == Orientation::plus ? d : -d;
}

double FrontProfile::tail_asymptote(double x) const {
  const double xs = orientation_ == Orientation::plus ? x : -x;
  if (xs < 0.0) return map_->sigma_left() + map_->tail_asymptote_distance(xs, true);
  return map_->sigma_right() - map_->tail_asymptote_distance(xs, false);
}

double gamma(const Potential& potential, std::size_t transition, double u) {
  if (transition + 1 >= potential.well_count())
    throw std::domain_error("gamma: transition index out of range");
  const double sl = potential.well(transition).sigma, sr = potential.well(transition + 1).sigma;
  if (!(u > sl && u < sr)) throw std::domain_error("gamma: u must lie strictly between the wells");
  detail::TransitionMap map(potential, transition);
  return map.gamma_of(map.from_u(u));
}

double front_energy(const Potential& potential, std::size_t transition) {
  if (transition + 1 >= potential.well_count())
    throw std::out_of_range("front_energy: transition index out of range");
  const double a = potential.well(transition).sigma, b = potential.well(transition + 1).sigma;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double u) { return potential.sqrt2V(u); }, a, b, 8, 1e-13, &err);
}

double FrontProfile::energy_outside(double R) const {
  if (!(R > 0.0)) return energy();
  const ProfilePoint lo = map_->locate(-R);
  const ProfilePoint hi = map_->locate(R);
  return map_->tail_energy(lo.t_left, true) + map_->tail_energy(hi.t_right, false);
}

double window_energy(const FrontProfile& profile, double eps, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("window_energy: r must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("window_energy: eps must lie in (0,1)");
  // e_eps(zeta(x/eps)) dx = sqrt(2V(u)) du: the window misses two tail pieces.
  return profile.energy() - profile.energy_outside(r / eps);
}

ProfileSet::ProfileSet(const Potential& potential) : potential_(potential) {
  for (std::size_t i = 0; i + 1 < potential.well_count(); ++i) profiles_.emplace_back(potential, i);
}

GluedField glue_chain(const Potential& potential, const ChainSpec& chain, double eps,
                      const Grid1D& grid) {
  return glue_chain(ProfileSet(potential), chain, eps, grid);
}

GluedField glue_chain(const ProfileSet& profiles, const ChainSpec& chain, double eps,
                      const Grid1D& grid) {
  const Potential& pot = profiles.potential();
  validate_chain(chain, pot.well_count());
  if (!(eps > 0.0)) throw std::invalid_argument("glue_chain: eps must be positive");
  const std::size_t l = chain.size();
  double max_gap = 0.0;
  for (std::size_t k = 0; k + 1 < l; ++k) {
    const double g = chain.positions[k + 1] - chain.positions[k];
    if (g < 20.0 * eps) throw std::invalid_argument("glue_chain: fronts closer than 20 eps overlap");
    max_gap = std::max(max_gap, g);
  }
  if (l > 0) {
    const double margin = std::max(1.0, 5.0 * max_gap);
    if (chain.positions.front() - grid.x_min < margin || grid.x_max - chain.positions.back() < margin)
      throw std::invalid_argument("glue_chain: grid margin around the chain is below max(1, 5 max gap)");
  }

  std::vector<FrontProfile> fronts;
  for (std::size_t k = 0; k < l; ++k)
    fronts.push_back(profiles.profile(std::size_t(chain.transition(k)), chain.orientation(k)));

  GluedField out;
  out.field.grid = grid;
  out.field.eps = eps;
  out.field.values.assign(grid.n, pot.well(std::size_t(chain.labels.front())).sigma);
  out.dvdx.assign(grid.n, 0.0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    double v = out.field.values[j];
    double dv = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
      const double y = (x - chain.positions[k]) / eps;
      const ProfilePoint q = fronts[k].locate(y);
      // Offset from the well on the left of front k, kept in distance form.
      v += fronts[k].orientation() == Orientation::plus ? q.t_left : -q.t_right;
      dv += fronts[k].dzeta(y) / eps;
    }
    out.field.values[j] = v;
    out.dvdx[j] = dv;
  }

  for (std::size_t k = 0; k < l; ++k) {
    double v = pot.well(std::size_t(chain.labels.front())).sigma;
    for (std::size_t m = 0; m < l; ++m) {
      const ProfilePoint q = fronts[m].locate((chain.positions[k] - chain.positions[m]) / eps);
      v += fronts[m].orientation() == Orientation::plus ? q.t_left : -q.t_right;
    }
    out.tail_overlap = std::max(out.tail_overlap, std::abs(v - fronts[k].separator()));
  }
  return out;
}

void write_profile_csv(const FrontProfile& profile, double x_range, std::size_t samples,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_profile_csv: cannot open " + path);
  os.imbue(std::locale::classic());
  os << "x,zeta,dzeta\n" << std::setprecision(17);
  for (std::size_t j = 0; j < samples; ++j) {
    const double x = -x_range + 2.0 * x_range * double(j) / double(samples - 1);
    os << x << ',' << profile.zeta(x) << ',' << profile.dzeta(x) << '\n';
  }
}

void validate_chain(const ChainSpec& chain, std::size_t wells) {
  if (chain.labels.size() != chain.positions.size() + 1)
    throw std::invalid_argument("chain: labels must have one more entry than positions");
  for (int lab : chain.labels)
    if (lab < 0 || std::size_t(lab) >= wells) throw std::invalid_argument("chain: label outside the well range");
  for (std::size_t k = 0; k + 1 < chain.labels.size(); ++k)
    if (std::abs(chain.labels[k + 1] - chain.labels[k]) != 1)
      throw std::invalid_argument("chain: adjacent labels must differ by exactly one");
  for (std::size_t k = 0; k + 1 < chain.positions.size(); ++k)
    if (!(chain.positions[k + 1] > chain.positions[k]))
      throw std::invalid_argument("chain: positions must be strictly increasing");
  for (double a : chain.positions)
    if (!std::isfinite(a)) throw std::invalid_argument("chain: non-finite position");
}

Grid1D Grid1D::with_spacing(double lo, double hi, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("Grid1D: spacing must be positive");
  const std::size_t n = std::size_t(std::ceil((hi - lo) / h)) + 1;
  return Grid1D(lo, hi, std::max<std::size_t>(n, 64));
}

}  // namespace frontflow
