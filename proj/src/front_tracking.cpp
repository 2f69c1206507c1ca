#include "frontflow/front_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <stdexcept>

#include "frontflow/pgl_sim.hpp"

namespace frontflow {

namespace {

// Cubic through the nodes j0..j0+3 (clamped to the grid).
struct LocalCubic {
  double x[4], y[4];
  LocalCubic(const Field& f, std::size_t j) {
    const std::size_t n = f.size();
    std::size_t j0 = j > 0 ? j - 1 : 0;
    if (j0 + 3 >= n) j0 = n - 4;
    for (int k = 0; k < 4; ++k) {
      x[k] = f.grid.x(j0 + k);
      y[k] = f.values[j0 + k];
    }
  }
  double operator()(double t) const {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      double l = 1.0;
      for (int k = 0; k < 4; ++k)
        if (k != i) l *= (t - x[k]) / (x[i] - x[k]);
      s += y[i] * l;
    }
    return s;
  }
};

double crossing_point(const Field& f, std::size_t j, double z) {
  const LocalCubic c(f, j);
  double lo = f.grid.x(j), hi = f.grid.x(j + 1);
  const double sl = f.values[j] - z;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((c(mid) - z > 0.0) == (sl > 0.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Crossing {
  double a;
  int separator;
  bool upward;
};

}  // namespace

ChainSpec TrackedFronts::chain() const {
  ChainSpec c;
  c.labels = labels;
  for (const auto& p : points) c.positions.push_back(p.a);
  return c;
}

std::vector<FrontInterval> front_set(const Potential& p, const Field& f, double mu0, double merge_eps) {
  if (!std::isfinite(mu0)) mu0 = p.mu0();
  std::vector<FrontInterval> runs;
  const std::size_t n = f.size();
  for (std::size_t j = 0; j < n;) {
    if (p.distance_to_wells(f.values[j]) < mu0) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k + 1 < n && p.distance_to_wells(f.values[k + 1]) >= mu0) ++k;
    runs.push_back({f.grid.x(j), f.grid.x(k), j, k});
    j = k + 1;
  }
  std::vector<FrontInterval> out;
  for (const auto& r : runs) {
    if (!out.empty() && r.lo - out.back().hi < merge_eps * f.eps) {
      out.back().hi = r.hi;
      out.back().last = r.last;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

TrackedFronts front_points(const Potential& p, const Field& f, double mu0) {
  TrackedFronts t;
  t.s = f.s;
  t.intervals = front_set(p, f, mu0);
  const std::size_t n = f.size();
  const auto& seps = p.separators();
  int label = int(p.nearest_well(f.values.front()));
  t.labels.push_back(label);

  for (std::size_t m = 0; m < t.intervals.size(); ++m) {
    const FrontInterval& iv = t.intervals[m];
    const int left = int(p.nearest_well(f.values[iv.first > 0 ? iv.first - 1 : iv.first]));
    const int right = int(p.nearest_well(f.values[iv.last + 1 < n ? iv.last + 1 : iv.last]));
    const std::size_t j0 = iv.first > 0 ? iv.first - 1 : 0;
    const std::size_t j1 = std::min(iv.last + 1, n - 1);
    std::vector<Crossing> cs;
    std::vector<int> count(seps.size(), 0);
    for (std::size_t i = 0; i < seps.size(); ++i) {
      for (std::size_t j = j0; j < j1; ++j) {
        const double a = f.values[j] - seps[i], b = f.values[j + 1] - seps[i];
        if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
          cs.push_back({crossing_point(f, j, seps[i]), int(i), b > a});
          ++count[i];
        }
      }
    }
    std::sort(cs.begin(), cs.end(), [](const Crossing& x, const Crossing& y) { return x.a < y.a; });
    bool ok = !cs.empty() && left == label;
    for (int c : count) ok = ok && c <= 1;
    int cur = left;
    if (ok) {
      for (const auto& c : cs) {
        if (c.upward && cur == c.separator) cur = c.separator + 1;
        else if (!c.upward && cur == c.separator + 1) cur = c.separator;
        else ok = false;
      }
      ok = ok && cur == right;
    }
    if (!ok) {
      t.ambiguous.push_back(m);
      // continue the path with the well on the right of the interval
      if (right != label) t.consistent = false;
      label = right;
      continue;
    }
    for (const auto& c : cs) {
      t.points.push_back({c.a, c.separator, c.upward ? Orientation::plus : Orientation::minus});
      label = c.upward ? c.separator + 1 : c.separator;
      t.labels.push_back(label);
    }
  }
  if (label != int(p.nearest_well(f.values.back()))) t.consistent = false;

  const double big = f.grid.length();
  t.d_min = t.d_min_plus = t.d_min_minus = big;
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    const double g = t.points[k + 1].a - t.points[k].a;
    t.d_min = std::min(t.d_min, g);
    if (t.points[k].orientation == t.points[k + 1].orientation) t.d_min_plus = std::min(t.d_min_plus, g);
    else t.d_min_minus = std::min(t.d_min_minus, g);
  }
  return t;
}

std::vector<double> wpi_distance(const ProfileSet& profiles, const Field& f, const TrackedFronts& t, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("wpi_distance: delta must be positive");
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    const double a = t.points[k].a;
    if (a - delta < f.grid.x_min || a + delta > f.grid.x_max)
      throw std::invalid_argument("wpi_distance: window leaves the domain");
    if (k + 1 < t.points.size() && t.points[k + 1].a - a <= 2 * delta)
      throw std::invalid_argument("wpi_distance: windows overlap");
  }
  const double eps = f.eps, h = f.h();
  const std::size_t n = f.size();
  std::vector<double> out;
  for (const auto& q : t.points) {
    const FrontProfile z = profiles.profile(std::size_t(q.transition), q.orientation);
    const auto lo = std::size_t(std::max(0.0, std::ceil((q.a - delta - f.grid.x_min) / h - 1e-9)));
    const auto hi = std::min(n - 1, std::size_t(std::floor((q.a + delta - f.grid.x_min) / h + 1e-9)));
    double worst = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double y = (f.grid.x(j) - q.a) / eps;
      double dv;
      if (j == 0) dv = (-3 * f.values[0] + 4 * f.values[1] - f.values[2]) / (2 * h);
      else if (j + 1 == n) dv = (3 * f.values[n - 1] - 4 * f.values[n - 2] + f.values[n - 3]) / (2 * h);
      else dv = (f.values[j + 1] - f.values[j - 1]) / (2 * h);
      worst = std::max(worst, std::abs(f.values[j] - z.zeta(y)) + eps * std::abs(dv - z.dzeta(y) / eps));
    }
    out.push_back(worst);
  }
  return out;
}

WpoReport wpo_energy(const Potential& p, const Field& f, const TrackedFronts& t, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("wpo_energy: delta must be positive");
  std::vector<double> chi(f.size(), 1.0);
  for (std::size_t j = 0; j < f.size(); ++j)
    for (const auto& q : t.points)
      if (std::abs(f.grid.x(j) - q.a) <= delta) chi[j] = 0.0;
  WpoReport r;
  r.energy = localized_energy(p, f, chi);
  r.scale = std::pow(f.eps / delta, p.omega());
  r.ratio = r.energy / r.scale;
  return r;
}

void write_tracked_csv(const std::vector<TrackedFronts>& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_tracked_csv: cannot open " + path);
  os.imbue(std::locale::classic());
  std::size_t L = 0;
  for (const auto& t : series) L = std::max(L, t.points.size());
  os << "s,l,merging,d_min,d_min_plus,d_min_minus";
  for (std::size_t k = 1; k <= L; ++k) os << ",a_" << k << ",i_" << k << ",dag_" << k;
  os << '\n' << std::setprecision(17);
  for (const auto& t : series) {
    os << t.s << ',' << t.points.size() << ',' << (t.merging() ? 1 : 0) << ',' << t.d_min << ',' << t.d_min_plus
       << ',' << t.d_min_minus;
    for (std::size_t k = 0; k < L; ++k) {
      if (k < t.points.size())
        os << ',' << t.points[k].a << ',' << t.points[k].transition << ',' << sign_of(t.points[k].orientation);
      else
        os << ",,,";
    }
    os << '\n';
  }
}

}  // namespace frontflow
