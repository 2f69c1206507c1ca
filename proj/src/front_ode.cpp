#include "frontflow/front_ode.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "frontflow/stationary_fronts.hpp"

namespace frontflow {

double default_prefactor(double omega) { return std::pow(2.0, omega); }

std::vector<double> build_couplings(const Potential& potential, const InteractionConstants& constants,
                                    const std::vector<int>& labels, double prefactor) {
  std::vector<double> b;
  if (labels.size() < 3) return b;
  const int th = potential.theta();
  for (std::size_t k = 0; k + 2 < labels.size(); ++k) {
    const int left = labels[k], mid = labels[k + 1], right = labels[k + 2];
    const double lam = potential.well(static_cast<std::size_t>(mid)).lambda;
    const double scale = prefactor * std::pow(lam, -1.0 / (th - 1));
    // same orientation iff the path keeps climbing (or descending) through mid
    const bool attractive = left == right;
    b.push_back(attractive ? scale * constants.A : -scale * constants.B);
  }
  return b;
}

FrontModel::FrontModel(const Potential& potential, double prefactor)
    : FrontModel(potential, interaction_constants(potential.theta()), prefactor) {}

FrontModel::FrontModel(const Potential& potential, const InteractionConstants& constants, double prefactor)
    : potential_(potential), constants_(constants) {
  if (constants.theta != potential.theta())
    throw std::invalid_argument("FrontModel: constants computed for a different theta");
  prefactor_ = std::isfinite(prefactor) ? prefactor : default_prefactor(constants.omega);
  if (!(prefactor_ > 0.0)) throw std::invalid_argument("FrontModel: prefactor must be positive");
  for (std::size_t i = 0; i + 1 < potential.well_count(); ++i) masses_.push_back(front_energy(potential, i));
}

FrontSystem FrontModel::system(const std::vector<int>& labels) const {
  ChainSpec probe;
  probe.labels = labels;
  probe.positions.resize(labels.empty() ? 0 : labels.size() - 1);
  for (std::size_t k = 0; k < probe.positions.size(); ++k) probe.positions[k] = double(k);
  validate_chain(probe, potential_.well_count());
  FrontSystem s;
  s.labels = labels;
  s.omega = constants_.omega;
  for (std::size_t k = 0; k < probe.size(); ++k) s.masses.push_back(masses_.at(std::size_t(probe.transition(k))));
  s.couplings = build_couplings(potential_, constants_, labels, prefactor_);
  return s;
}

namespace {

void check_sizes(const FrontSystem& sys, const std::vector<double>& a) {
  if (a.size() != sys.size()) throw std::invalid_argument("front system: position count mismatch");
}

double gap_force(double coupling, double gap, double omega) {
  if (!(gap > 0.0)) throw std::domain_error("front system: non-positive gap");
  return coupling * std::pow(gap, -(omega + 1.0));
}

}  // namespace

std::vector<double> rhs(const FrontSystem& sys, const std::vector<double>& a) {
  check_sizes(sys, a);
  const std::size_t n = a.size();
  std::vector<double> v(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double f = gap_force(sys.couplings[k], a[k + 1] - a[k], sys.omega);
    v[k] += f;
    v[k + 1] -= f;
  }
  for (std::size_t k = 0; k < n; ++k) v[k] /= sys.masses[k];
  return v;
}

double lyapunov_F(const FrontSystem& sys, const std::vector<double>& a) {
  check_sizes(sys, a);
  double F = 0.0;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const double g = a[k + 1] - a[k];
    if (!(g > 0.0)) throw std::domain_error("front system: non-positive gap");
    F -= sys.couplings[k] * std::pow(g, -sys.omega) / sys.omega;
  }
  return F;
}

std::vector<double> grad_F(const FrontSystem& sys, const std::vector<double>& a) {
  check_sizes(sys, a);
  std::vector<double> g(a.size(), 0.0);
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const double f = gap_force(sys.couplings[k], a[k + 1] - a[k], sys.omega);
    g[k] -= f;
    g[k + 1] += f;
  }
  return g;
}

double min_attractive_gap(const FrontSystem& sys, const std::vector<double>& a) {
  double m = INFINITY;
  for (std::size_t k = 0; k + 1 < a.size(); ++k)
    if (sys.couplings[k] > 0.0) m = std::min(m, a[k + 1] - a[k]);
  return m;
}

double min_repulsive_gap(const FrontSystem& sys, const std::vector<double>& a) {
  double m = INFINITY;
  for (std::size_t k = 0; k + 1 < a.size(); ++k)
    if (sys.couplings[k] < 0.0) m = std::min(m, a[k + 1] - a[k]);
  return m;
}

double two_body_collision_time(double gap, double coupling, double m1, double m2, double omega) {
  if (!(coupling > 0.0)) return INFINITY;
  return std::pow(gap, omega + 2.0) / ((omega + 2.0) * coupling * (1.0 / m1 + 1.0 / m2));
}

double two_body_gap(double gap0, double coupling, double m1, double m2, double omega, double s) {
  const double p = std::pow(gap0, omega + 2.0) - (omega + 2.0) * coupling * (1.0 / m1 + 1.0 / m2) * s;
  return p > 0.0 ? std::pow(p, 1.0 / (omega + 2.0)) : 0.0;
}

// ---------------------------------------------------------------------------
// Trajectory queries

const TrajectorySegment& Trajectory::segment_at(double s) const {
  if (segments.empty()) throw std::logic_error("empty trajectory");
  for (std::size_t i = segments.size(); i-- > 0;)
    if (s >= segments[i].s_begin) return segments[i];
  return segments.front();
}

ChainSpec Trajectory::state_at(double s) const {
  const TrajectorySegment& seg = segment_at(s);
  ChainSpec c;
  c.labels = seg.system.labels;
  const auto& smp = seg.samples;
  if (smp.empty()) return c;
  if (s <= smp.front().s || smp.size() == 1) {
    c.positions = smp.front().positions;
    return c;
  }
  if (s >= smp.back().s) {
    c.positions = smp.back().positions;
    return c;
  }
  auto it = std::upper_bound(smp.begin(), smp.end(), s, [](double v, const TrajectorySample& q) { return v < q.s; });
  const TrajectorySample& q1 = *it;
  const TrajectorySample& q0 = *(it - 1);
  const double h = q1.s - q0.s;
  const double t = (s - q0.s) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  c.positions.resize(q0.positions.size());
  for (std::size_t k = 0; k < c.positions.size(); ++k)
    c.positions[k] = h00 * q0.positions[k] + h10 * h * q0.velocities[k] + h01 * q1.positions[k] +
                     h11 * h * q1.velocities[k];
  return c;
}

double Trajectory::first_collision() const { return events.empty() ? INFINITY : events.front().s; }

// ---------------------------------------------------------------------------
// Integration

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool ordered(const std::vector<double>& a) {
  for (std::size_t k = 0; k + 1 < a.size(); ++k)
    if (!(a[k + 1] > a[k])) return false;
  return true;
}

std::vector<double> axpy(const std::vector<double>& y, double h,
                         std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
  std::vector<double> r = y;
  for (const auto& [c, k] : terms)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * c * (*k)[i];
  return r;
}

double step_cap(const FrontSystem& sys, const std::vector<double>& a) {
  if (a.size() < 2) return INFINITY;
  double gmin = INFINITY, bmax = 0.0;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    gmin = std::min(gmin, a[k + 1] - a[k]);
    bmax = std::max(bmax, std::abs(sys.couplings[k]));
  }
  const double mmin = *std::min_element(sys.masses.begin(), sys.masses.end());
  const double w = sys.omega;
  return 0.02 * std::pow(gmin, w + 2.0) * mmin / (bmax * (w + 2.0));
}

// Fronts k..j with every gap attractive and below g_stop.
struct Cluster {
  std::size_t first, last;
};

std::vector<Cluster> find_clusters(const FrontSystem& sys, const std::vector<double>& a, double g_stop) {
  std::vector<Cluster> out;
  std::size_t k = 0;
  while (k + 1 < a.size()) {
    if (sys.couplings[k] > 0.0 && a[k + 1] - a[k] < g_stop) {
      std::size_t j = k + 1;
      while (j + 1 < a.size() && sys.couplings[j] > 0.0 && a[j + 1] - a[j] < g_stop) ++j;
      out.push_back({k, j});
      k = j + 1;
    } else {
      ++k;
    }
  }
  return out;
}

TrajectorySample make_sample(const FrontSystem& sys, double s, const std::vector<double>& a) {
  TrajectorySample q;
  q.s = s;
  q.positions = a;
  q.velocities = a.size() > 1 ? rhs(sys, a) : std::vector<double>(a.size(), 0.0);
  q.F = a.size() > 1 ? lyapunov_F(sys, a) : 0.0;
  return q;
}

}  // namespace

Trajectory integrate(const FrontModel& model, const ChainSpec& chain, double s_end, const OdeOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("integrate: tol must be positive");
  if (!(s_end >= 0.0)) throw std::invalid_argument("integrate: s_end must be nonnegative");
  validate_chain(chain, model.potential().well_count());

  Trajectory traj;
  FrontSystem sys = model.system(chain.labels);
  std::vector<double> a = chain.positions;
  double s = 0.0;
  const double w = model.omega();
  const double stop_ratio = std::max(1e-4, std::pow(opt.tol, 1.0 / (w + 2.0)));
  std::size_t steps = 0;

  for (;;) {
    TrajectorySegment seg;
    seg.system = sys;
    seg.s_begin = s;
    const double g0 = min_attractive_gap(sys, a);
    seg.g_stop = std::isfinite(g0) ? stop_ratio * g0 : 0.0;
    seg.samples.push_back(make_sample(sys, s, a));

    if (a.size() < 2) {
      if (s_end > s) seg.samples.push_back(make_sample(sys, s_end, a));
      seg.s_end = std::max(s, s_end);
      traj.segments.push_back(std::move(seg));
      break;
    }

    std::vector<double> k1 = rhs(sys, a);
    double h = std::min({step_cap(sys, a), opt.max_step, s_end - s});
    std::vector<Cluster> clusters;
    while (s < s_end) {
      if (++steps > opt.max_steps) throw std::runtime_error("integrate: step limit exceeded");
      const double cap = std::min(step_cap(sys, a), opt.max_step);
      h = std::min({h, cap, s_end - s});
      if (h <= 4.0 * DBL_EPSILON * std::abs(s) || h < DBL_MIN) throw std::runtime_error("integrate: step size underflow");

      std::vector<double> k2, k3, k4, k5, k6, k7, y5;
      try {
        k2 = rhs(sys, axpy(a, h, {{a21, &k1}}));
        k3 = rhs(sys, axpy(a, h, {{a31, &k1}, {a32, &k2}}));
        k4 = rhs(sys, axpy(a, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        k5 = rhs(sys, axpy(a, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        k6 = rhs(sys, axpy(a, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        y5 = axpy(a, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        if (!ordered(y5)) throw std::domain_error("crossing");
        k7 = rhs(sys, y5);
      } catch (const std::domain_error&) {
        h *= 0.25;
        continue;
      }
      // error relative to the local gap scale of each front
      double err = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double scale = INFINITY;
        if (i > 0) scale = std::min(scale, a[i] - a[i - 1]);
        if (i + 1 < a.size()) scale = std::min(scale, a[i + 1] - a[i]);
        err = std::max(err, std::abs(e) / (opt.tol * scale));
      }
      if (err > 1.0) {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        continue;
      }
      s = (s_end - s - h <= 1e-15 * std::max(1.0, s_end)) ? s_end : s + h;
      a = std::move(y5);
      k1 = std::move(k7);
      TrajectorySample q;
      q.s = s;
      q.positions = a;
      q.velocities = k1;
      q.F = lyapunov_F(sys, a);
      seg.samples.push_back(std::move(q));
      h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;

      const double rep = min_repulsive_gap(sys, a);
      if (rep <= 1e-12 * (1.0 + std::abs(a.back() - a.front())))
        throw std::runtime_error("integrate: repulsive gap collapsed");
      clusters = find_clusters(sys, a, seg.g_stop);
      if (!clusters.empty()) break;
    }

    if (clusters.empty()) {
      seg.s_end = s;
      traj.segments.push_back(std::move(seg));
      break;
    }

    // Finish each cluster with the two-body law; the rest of the chain is
    // carried to the latest collision time with its current velocities.
    const std::vector<double> v = rhs(sys, a);
    double tau_max = 0.0;
    std::vector<double> taus;
    for (const Cluster& c : clusters) {
      double tau = 0.0;
      for (std::size_t k = c.first; k < c.last; ++k)
        tau = std::max(tau, two_body_collision_time(a[k + 1] - a[k], sys.couplings[k], sys.masses[k],
                                                    sys.masses[k + 1], w));
      taus.push_back(tau);
      tau_max = std::max(tau_max, tau);
    }
    const double s_restart = s + tau_max;

    std::vector<int> labels;
    std::vector<double> next;
    std::size_t ci = 0;
    labels.push_back(sys.labels[0]);
    for (std::size_t k = 0; k < a.size();) {
      if (ci < clusters.size() && clusters[ci].first == k) {
        const Cluster& c = clusters[ci];
        CollisionEvent ev;
        ev.s = s + taus[ci];
        ev.labels_before = sys.labels;
        double mw = 0.0, msum = 0.0;
        for (std::size_t j = c.first; j <= c.last; ++j) {
          mw += sys.masses[j] * a[j];
          msum += sys.masses[j];
        }
        ev.location = mw / msum;
        const std::size_t n = c.last - c.first + 1;
        const std::size_t middle = c.first + n / 2;
        for (std::size_t j = c.first; j <= c.last; ++j)
          if (n % 2 == 0 || j != middle) ev.removed.push_back(j);
        if (n % 2 == 1) {
          ev.survivor = int(next.size());
          next.push_back(ev.location);
          labels.push_back(sys.labels[c.last + 1]);
        }
        traj.events.push_back(std::move(ev));
        k = c.last + 1;
        ++ci;
      } else {
        next.push_back(a[k] + v[k] * tau_max);
        labels.push_back(sys.labels[k + 1]);
        ++k;
      }
    }
    for (std::size_t e = traj.events.size() - clusters.size(); e < traj.events.size(); ++e)
      traj.events[e].labels_after = labels;

    seg.s_end = s;
    traj.segments.push_back(std::move(seg));
    if (!ordered(next)) throw std::runtime_error("integrate: fronts crossed while finishing a collision");
    sys = model.system(labels);
    a = std::move(next);
    s = std::min(s_restart, std::max(s_end, s));
    if (s >= s_end && a.size() >= 2) {
      TrajectorySegment last;
      last.system = sys;
      last.s_begin = last.s_end = s;
      last.samples.push_back(make_sample(sys, s, a));
      traj.segments.push_back(std::move(last));
      break;
    }
  }
  traj.s_final = traj.segments.back().s_end;
  return traj;
}

ChainSpec split_initial(const std::vector<double>& points, const std::vector<int>& multiplicities, int left_label,
                        double offset, std::size_t wells) {
  if (points.size() != multiplicities.size())
    throw std::invalid_argument("split_initial: points and multiplicities differ in length");
  if (!(offset > 0.0)) throw std::invalid_argument("split_initial: offset must be positive");
  ChainSpec c;
  c.labels.push_back(left_label);
  int label = left_label;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const int m = multiplicities[j];
    const int n = std::abs(m);
    for (int p = 0; p < n; ++p) {
      c.positions.push_back(points[j] + offset * (p - 0.5 * (n - 1)));
      label += m > 0 ? 1 : -1;
      c.labels.push_back(label);
    }
  }
  validate_chain(c, wells);
  return c;
}

std::vector<MaximalChain> chain_decompose(const ChainSpec& chain) {
  std::vector<MaximalChain> out;
  const std::size_t n = chain.size();
  std::size_t k = 0;
  while (k + 1 < n) {
    const bool att = chain.attractive(k);
    std::size_t j = k + 1;
    while (j + 1 < n && chain.attractive(j) == att) ++j;
    out.push_back({att, k, j});
    k = j;
  }
  return out;
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_affine: need two or more samples");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  AffineFit f;
  f.samples = x.size();
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

EnvelopeReport envelope_check(const Trajectory& traj) {
  if (traj.segments.empty() || traj.segments.front().samples.size() < 20)
    throw std::invalid_argument("envelope_check: at least 20 samples are required");
  const TrajectorySegment& seg = traj.segments.front();
  const double p = seg.system.omega + 2.0;
  std::vector<double> s, dm, dp;
  for (const TrajectorySample& q : seg.samples) {
    s.push_back(q.s);
    dm.push_back(std::pow(min_attractive_gap(seg.system, q.positions), p));
    dp.push_back(std::pow(min_repulsive_gap(seg.system, q.positions), p));
  }
  EnvelopeReport r;
  r.has_attractive = std::isfinite(dm.front());
  r.has_repulsive = std::isfinite(dp.front());
  r.consistent = true;
  if (r.has_attractive) {
    r.minus = fit_affine(s, dm);
    r.consistent = r.consistent && r.minus.slope < 0.0;
  }
  if (r.has_repulsive) {
    r.plus = fit_affine(s, dp);
    r.consistent = r.consistent && r.plus.slope > 0.0;
  }
  r.unbounded = !r.has_attractive && traj.events.empty();
  return r;
}

void write_trajectory_csv(const Trajectory& traj, const std::vector<double>& times, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  os.imbue(std::locale::classic());
  std::size_t L = 0;
  for (const auto& seg : traj.segments) L = std::max(L, seg.system.size());
  os << "s,l";
  for (std::size_t k = 1; k <= L; ++k) os << ",a_" << k;
  os << '\n' << std::setprecision(17);
  auto row = [&](double s, const std::vector<double>& a) {
    os << s << ',' << a.size();
    for (std::size_t k = 0; k < L; ++k) {
      os << ',';
      if (k < a.size()) os << a[k];
      else os << "nan";
    }
    os << '\n';
  };
  if (times.empty()) {
    for (const auto& seg : traj.segments)
      for (const auto& q : seg.samples) row(q.s, q.positions);
  } else {
    for (double s : times) row(s, traj.state_at(s).positions);
  }
}

void write_events_json(const Trajectory& traj, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const CollisionEvent& e : traj.events) {
    j.push_back({{"S_col", e.s},
                 {"removed", e.removed},
                 {"b", e.location},
                 {"labels_before", e.labels_before},
                 {"labels_after", e.labels_after},
                 {"survivor", e.survivor}});
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_events_json: cannot open " + path);
  os << j.dump(2) << '\n';
}

}  // namespace frontflow
