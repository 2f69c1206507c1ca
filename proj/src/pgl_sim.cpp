#include "frontflow/pgl_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <stdexcept>

#include "frontflow/detail/numerics.hpp"

namespace frontflow {

namespace {

std::vector<double> node_derivative(const Field& f) {
  const std::size_t n = f.size();
  const double h = f.h();
  const auto& v = f.values;
  std::vector<double> d(n);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (v[j + 1] - v[j - 1]) / (2 * h);
  d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
  d[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
  return d;
}

double trapezoid(const std::vector<double>& y, double h) {
  if (y.empty()) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t j = 1; j + 1 < y.size(); ++j) s += y[j];
  return s * h;
}

double weight(std::size_t j, std::size_t n) { return (j == 0 || j + 1 == n) ? 0.5 : 1.0; }

void check_field(const Field& f) {
  if (f.values.size() != f.grid.n) throw std::invalid_argument("field size does not match its grid");
  if (!(f.eps > 0.0)) throw std::invalid_argument("field eps must be positive");
}

// (v - v_old)/dt - Lap v + eps^-2 V'(v), with mirrored ghost nodes.
void residual(const Potential& p, const std::vector<double>& v, const std::vector<double>& vo, double dt, double h,
              double eps, std::vector<double>& r) {
  const std::size_t n = v.size();
  const double ih2 = 1.0 / (h * h), ie2 = 1.0 / (eps * eps);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j == 0 ? v[1] : v[j - 1];
    const double right = j + 1 == n ? v[n - 2] : v[j + 1];
    // neighbor differences are exact for close values, which keeps the
    // rounding noise of the Laplacian far below eps_mach / h^2
    r[j] = (v[j] - vo[j]) / dt - ((left - v[j]) + (right - v[j])) * ih2 + ie2 * p.dV(v[j]);
  }
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double y : x) m = std::max(m, std::abs(y));
  return m;
}

// Newton on the backward Euler system; false on divergence or no convergence.
bool newton(const Potential& p, const std::vector<double>& vo, double dt, double h, double eps,
            const StepOptions& opt, std::vector<double>& v, int& iterations) {
  const std::size_t n = vo.size();
  const double ih2 = 1.0 / (h * h), ie2 = 1.0 / (eps * eps);
  v = vo;
  std::vector<double> r(n), lo(n), di(n), up(n);
  double prev = INFINITY;
  for (int it = 1; it <= opt.newton_max_iter; ++it) {
    iterations = it;
    residual(p, v, vo, dt, h, eps, r);
    for (std::size_t j = 0; j < n; ++j) {
      di[j] = 1.0 / dt + 2 * ih2 + ie2 * p.d2V(v[j]);
      lo[j] = (j + 1 == n) ? -2 * ih2 : -ih2;
      up[j] = (j == 0) ? -2 * ih2 : -ih2;
      r[j] = -r[j];
    }
    try {
      detail::solve_tridiagonal_twisted(lo, di, up, r);
    } catch (const std::runtime_error&) {
      return false;
    }
    double dmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      v[j] += r[j];
      dmax = std::max(dmax, std::abs(r[j]));
    }
    if (!std::isfinite(dmax)) return false;
    const double scale = std::max(1.0, max_abs(v));
    if (dmax <= opt.newton_tol * scale) return true;
    // Stalled at the rounding floor of the translation modes, whose
    // eigenvalue is only 1/dt.
    if (dmax <= 1e-9 * scale && dmax > 0.25 * prev) return true;
    prev = dmax;
  }
  return false;
}

}  // namespace

std::vector<double> energy_density(const Potential& p, const Field& f) {
  check_field(f);
  return energy_density(p, f, node_derivative(f));
}

std::vector<double> energy_density(const Potential& p, const Field& f, const std::vector<double>& d) {
  check_field(f);
  if (d.size() != f.size()) throw std::invalid_argument("energy_density: derivative size mismatch");
  std::vector<double> e(f.size());
  for (std::size_t j = 0; j < e.size(); ++j) e[j] = 0.5 * f.eps * d[j] * d[j] + p.V(f.values[j]) / f.eps;
  return e;
}

std::vector<double> discrepancy_field(const Potential& p, const Field& f) {
  check_field(f);
  return discrepancy_field(p, f, node_derivative(f));
}

std::vector<double> discrepancy_field(const Potential& p, const Field& f, const std::vector<double>& d) {
  check_field(f);
  if (d.size() != f.size()) throw std::invalid_argument("discrepancy_field: derivative size mismatch");
  std::vector<double> xi(f.size());
  for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = 0.5 * f.eps * d[j] * d[j] - p.V(f.values[j]) / f.eps;
  return xi;
}

std::vector<double> renormalized_discrepancy(const Potential& p, const Field& f) {
  auto xi = discrepancy_field(p, f);
  const double scale = std::pow(f.eps, -p.omega());
  for (double& x : xi) x *= scale;
  return xi;
}

double energy(const Potential& p, const Field& f) { return trapezoid(energy_density(p, f), f.h()); }

double energy(const Potential& p, const Field& f, const std::vector<double>& dvdx) {
  return trapezoid(energy_density(p, f, dvdx), f.h());
}

double localized_energy(const Potential& p, const Field& f, const std::vector<double>& chi) {
  if (chi.size() != f.size()) throw std::invalid_argument("localized_energy: chi must be sampled on the grid");
  auto e = energy_density(p, f);
  for (std::size_t j = 0; j < e.size(); ++j) e[j] *= chi[j];
  return trapezoid(e, f.h());
}

double discrete_energy(const Potential& p, const Field& f) {
  check_field(f);
  const double h = f.h(), eps = f.eps;
  const auto& v = f.values;
  double grad = 0.0, pot = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) grad += (v[j + 1] - v[j]) * (v[j + 1] - v[j]);
  for (std::size_t j = 0; j < v.size(); ++j) pot += weight(j, v.size()) * p.V(v[j]);
  return 0.5 * eps * grad / h + h * pot / eps;
}

Field step(const Potential& p, const Field& f, double dt, const StepOptions& opt, StepInfo* info) {
  check_field(f);
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const double h = f.h();
  std::vector<double> v;
  int halvings = 0, iterations = 0;
  while (!newton(p, f.values, dt, h, f.eps, opt, v, iterations)) {
    if (++halvings > opt.max_halvings) throw std::runtime_error("step: dt underflow after repeated Newton failures");
    dt *= 0.5;
  }
  Field out = f;
  out.values = std::move(v);
  out.t_phys = f.t_phys + dt;
  out.s = std::pow(f.eps, p.omega()) * out.t_phys;
  if (info) *info = {dt, halvings, iterations};
  return out;
}

RunResult run(const Potential& p, const Field& initial, double s_max, const std::vector<double>& times,
              const RunOptions& opt, const SnapshotCallback& on_snapshot) {
  check_field(initial);
  if (!(s_max >= 0.0)) throw std::invalid_argument("run: s_max must be nonnegative");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || times[i] > s_max) throw std::invalid_argument("run: output time outside [0, s_max]");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("run: output times must increase");
  }
  const double eps = initial.eps, w = p.omega();
  const double eps_w = std::pow(eps, w);
  const double t_end = s_max / eps_w;
  const double h = initial.h();
  const std::size_t n = initial.size();

  RunResult res;
  Field cur = initial;
  cur.t_phys = 0.0;
  cur.s = 0.0;
  const double E0 = discrete_energy(p, cur);
  double E = E0, dissip = 0.0;
  res.diagnostics.push_back({0.0, 0.0, 0.0, E0, 0.0, 0.0});
  res.max_energy_increase = -INFINITY;

  std::size_t next = 0;
  auto emit = [&](Field snap) {
    if (on_snapshot) on_snapshot(snap);
    if (opt.keep_snapshots) res.snapshots.push_back(std::move(snap));
  };
  while (next < times.size() && times[next] <= 0.0) {
    Field snap = cur;
    snap.s = times[next];
    snap.t_phys = times[next] / eps_w;
    emit(std::move(snap));
    ++next;
  }

  double dt = std::isfinite(opt.dt_initial) ? opt.dt_initial : 0.25 * eps * eps;
  const double dt_floor = 1e-12 * eps * eps;
  while (cur.t_phys < t_end) {
    if (res.steps >= opt.max_steps) throw std::runtime_error("run: step limit exceeded");
    double dt_try = std::min({dt, opt.dt_max, t_end - cur.t_phys});
    const bool last = dt_try >= t_end - cur.t_phys;
    StepInfo info;
    Field nxt = step(p, cur, dt_try, opt.step, &info);
    if (last && info.halvings == 0) {
      nxt.t_phys = t_end;
      nxt.s = s_max;
    }
    const double En = discrete_energy(p, nxt);
    double dv = 0.0, dsq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = nxt.values[j] - cur.values[j];
      dv = std::max(dv, std::abs(d));
      dsq += weight(j, n) * d * d;
    }
    const double cap = opt.energy_fraction * std::max(E, opt.energy_floor * E0) + 1e-12;
    if (En > E + 1e-12 || E - En > cap || dv > opt.max_dv) {
      dt = 0.5 * info.dt;
      if (dt < dt_floor) throw std::runtime_error("run: time step underflow");
      continue;
    }
    const double used = nxt.t_phys - cur.t_phys;
    dissip += eps * h * dsq / used;
    res.max_energy_increase = std::max(res.max_energy_increase, En - E);
    ++res.steps;
    res.diagnostics.push_back({nxt.s, nxt.t_phys, used, En, dissip, E0 > 0 ? std::abs(En + dissip - E0) / E0 : 0.0});

    while (next < times.size() && times[next] / eps_w <= nxt.t_phys) {
      const double tq = times[next] / eps_w;
      const double th = (tq - cur.t_phys) / used;
      Field snap = nxt;
      for (std::size_t j = 0; j < n; ++j) snap.values[j] = (1 - th) * cur.values[j] + th * nxt.values[j];
      snap.t_phys = tq;
      snap.s = times[next];
      emit(std::move(snap));
      ++next;
    }

    const bool easy = info.halvings == 0 && E - En < 0.5 * cap && dv < 0.5 * opt.max_dv;
    dt = easy ? info.dt * opt.growth : info.dt;
    E = En;
    cur = std::move(nxt);
  }
  if (res.steps == 0) res.max_energy_increase = 0.0;
  res.energy_identity_residual = res.diagnostics.back().residual;
  return res;
}

double energy_identity_residual(const RunResult& r) {
  if (r.diagnostics.size() < 2) return 0.0;
  return r.diagnostics.back().residual;
}

void write_snapshot_csv(const Field& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_snapshot_csv: cannot open " + path);
  os.imbue(std::locale::classic());
  os << "x,v\n" << std::setprecision(17);
  for (std::size_t j = 0; j < f.size(); ++j) os << f.grid.x(j) << ',' << f.values[j] << '\n';
}

void write_diagnostics_csv(const RunResult& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
  os.imbue(std::locale::classic());
  os << "s,t,dt,E,dissip,residual\n" << std::setprecision(17);
  for (const auto& d : r.diagnostics)
    os << d.s << ',' << d.t_phys << ',' << d.dt << ',' << d.energy << ',' << d.dissipation << ',' << d.residual
       << '\n';
}

}  // namespace frontflow
