#include "frontflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "frontflow/singular_profiles.hpp"
#include "frontflow/stationary_fronts.hpp"

namespace frontflow {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
  return x;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> integers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void positive(double x, const std::string& where) {
  if (!(x > 0.0)) throw ConfigError(where + ": must be positive");
}

}  // namespace

Potential PotentialSpec::make() const {
  if (family == "double_well") return make_double_well(theta);
  if (family == "triple_well") return make_triple_well(theta);
  if (family == "polynomial") return make_polynomial_potential(theta, wells, scale);
  throw ConfigError("potential.family: unknown family '" + family + "'");
}

RunConfig parse_config(const json& j) {
  require_keys(j, "config", {"experiment", "potential", "eps", "chain", "multiplicity", "s_max", "samples", "grid", "ode",
                             "prefactor", "event_window", "half_gap", "relax_time", "output_dir"});
  RunConfig c;
  if (!j.contains("experiment") || !j["experiment"].is_string()) throw ConfigError("experiment: required string");
  c.experiment = j["experiment"].get<std::string>();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");

  if (j.contains("potential")) {
    const json& p = j["potential"];
    require_keys(p, "potential", {"family", "theta", "wells", "scale"});
    if (p.contains("family")) {
      if (!p["family"].is_string()) throw ConfigError("potential.family: expected a string");
      c.potential.family = p["family"].get<std::string>();
    }
    if (p.contains("theta")) c.potential.theta = integer(p["theta"], "potential.theta");
    if (p.contains("wells")) c.potential.wells = numbers(p["wells"], "potential.wells");
    if (p.contains("scale")) c.potential.scale = number(p["scale"], "potential.scale");
    if (c.potential.family == "polynomial" && c.potential.wells.empty())
      throw ConfigError("potential.wells: required for the polynomial family");
    if (c.potential.family != "polynomial" && !c.potential.wells.empty())
      throw ConfigError("potential.wells: only allowed for the polynomial family");
  }
  if (c.potential.theta < 2 || c.potential.theta > 10) throw ConfigError("potential.theta: must be in [2, 10]");
  std::size_t wells = 0;
  try {
    wells = c.potential.make().well_count();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }

  if (j.contains("eps")) {
    c.eps = j["eps"].is_array() ? numbers(j["eps"], "eps") : std::vector<double>{number(j["eps"], "eps")};
    if (c.eps.empty()) throw ConfigError("eps: at least one value is required");
    for (double e : c.eps)
      if (!(e > 0.0 && e <= 0.5)) throw ConfigError("eps: values must lie in (0, 0.5]");
    if (std::set<double>(c.eps.begin(), c.eps.end()).size() != c.eps.size()) throw ConfigError("eps: duplicate values");
  }
  if (j.contains("chain")) {
    const json& ch = j["chain"];
    require_keys(ch, "chain", {"positions", "labels"});
    if (!ch.contains("positions") || !ch.contains("labels")) throw ConfigError("chain: positions and labels required");
    ChainSpec s{numbers(ch["positions"], "chain.positions"), integers(ch["labels"], "chain.labels")};
    try {
      validate_chain(s, wells);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("chain: ") + e.what());
    }
    c.chain = s;
  }
  if (j.contains("multiplicity")) {
    const json& m = j["multiplicity"];
    require_keys(m, "multiplicity", {"points", "multiplicities", "left_label", "offsets"});
    MultiplicitySpec s;
    if (!m.contains("points") || !m.contains("multiplicities"))
      throw ConfigError("multiplicity: points and multiplicities required");
    s.points = numbers(m["points"], "multiplicity.points");
    s.multiplicities = integers(m["multiplicities"], "multiplicity.multiplicities");
    if (m.contains("left_label")) s.left_label = integer(m["left_label"], "multiplicity.left_label");
    if (m.contains("offsets")) s.offsets = numbers(m["offsets"], "multiplicity.offsets");
    if (s.points.size() != s.multiplicities.size() || s.points.empty())
      throw ConfigError("multiplicity: points and multiplicities must have the same nonzero length");
    for (std::size_t i = 0; i + 1 < s.points.size(); ++i)
      if (!(s.points[i] < s.points[i + 1])) throw ConfigError("multiplicity.points: must increase");
    if (s.offsets.size() < 2) throw ConfigError("multiplicity.offsets: at least two values");
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      positive(s.offsets[i], "multiplicity.offsets");
      if (i > 0 && !(s.offsets[i] < s.offsets[i - 1])) throw ConfigError("multiplicity.offsets: must decrease");
    }
    try {
      split_initial(s.points, s.multiplicities, s.left_label, s.offsets.front(), wells);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("multiplicity: ") + e.what());
    }
    c.multiplicity = s;
  }
  if (j.contains("s_max")) {
    c.s_max = number(j["s_max"], "s_max");
    positive(c.s_max, "s_max");
  }
  if (j.contains("samples")) {
    const int n = integer(j["samples"], "samples");
    if (n < 10 || n > 100000) throw ConfigError("samples: must be in [10, 100000]");
    c.samples = std::size_t(n);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    require_keys(g, "grid", {"cells_per_eps", "margin"});
    if (g.contains("cells_per_eps")) c.cells_per_eps = number(g["cells_per_eps"], "grid.cells_per_eps");
    if (g.contains("margin")) {
      c.margin = number(g["margin"], "grid.margin");
      positive(c.margin, "grid.margin");
    }
    if (c.cells_per_eps < 8.0) throw ConfigError("grid.cells_per_eps: must be at least 8");
  }
  if (j.contains("ode")) {
    const json& o = j["ode"];
    require_keys(o, "ode", {"tol"});
    if (o.contains("tol")) c.ode_tol = number(o["tol"], "ode.tol");
    if (!(c.ode_tol > 0.0 && c.ode_tol <= 1e-2)) throw ConfigError("ode.tol: must lie in (0, 1e-2]");
  }
  if (j.contains("prefactor")) {
    const json& p = j["prefactor"];
    if (p.is_string()) {
      const std::string s = p.get<std::string>();
      if (s == "resolve") c.resolve_prefactor = true;
      else if (s != "default") throw ConfigError("prefactor: expected a number, \"default\" or \"resolve\"");
    } else {
      c.prefactor = number(p, "prefactor");
      positive(*c.prefactor, "prefactor");
    }
  }
  if (j.contains("event_window")) {
    c.event_window = number(j["event_window"], "event_window");
    if (!(c.event_window > 0.0 && c.event_window < 0.5)) throw ConfigError("event_window: must lie in (0, 0.5)");
  }
  if (j.contains("half_gap")) {
    c.half_gap = number(j["half_gap"], "half_gap");
    positive(c.half_gap, "half_gap");
  }
  if (j.contains("relax_time")) {
    c.relax_time = number(j["relax_time"], "relax_time");
    positive(c.relax_time, "relax_time");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
      throw ConfigError("output_dir: expected a nonempty string");
    c.output_dir = j["output_dir"].get<std::string>();
  }

  const std::set<std::string> needs_chain{"pde_vs_ode", "annihilation", "speed_scaling", "quantization"};
  if (needs_chain.count(c.experiment) && !c.chain) throw ConfigError(c.experiment + ": chain is required");
  if (c.experiment == "ode_only" && !c.chain && !c.multiplicity)
    throw ConfigError("ode_only: chain or multiplicity is required");
  if (c.experiment == "splitting" && !c.multiplicity) throw ConfigError("splitting: multiplicity is required");
  if (c.experiment == "annihilation" && c.chain->size() < 3)
    throw ConfigError("annihilation: chain needs at least three fronts");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["potential"] = {{"family", c.potential.family}, {"theta", c.potential.theta}};
  if (c.potential.family == "polynomial") {
    j["potential"]["wells"] = c.potential.wells;
    j["potential"]["scale"] = c.potential.scale;
  }
  j["eps"] = c.eps;
  if (c.chain) j["chain"] = {{"positions", c.chain->positions}, {"labels", c.chain->labels}};
  if (c.multiplicity)
    j["multiplicity"] = {{"points", c.multiplicity->points},
                         {"multiplicities", c.multiplicity->multiplicities},
                         {"left_label", c.multiplicity->left_label},
                         {"offsets", c.multiplicity->offsets}};
  if (c.s_max > 0.0) j["s_max"] = c.s_max;
  j["samples"] = c.samples;
  j["grid"] = {{"cells_per_eps", c.cells_per_eps}};
  if (c.margin > 0.0) j["grid"]["margin"] = c.margin;
  j["ode"] = {{"tol", c.ode_tol}};
  if (c.resolve_prefactor) j["prefactor"] = "resolve";
  else if (c.prefactor) j["prefactor"] = *c.prefactor;
  else j["prefactor"] = "default";
  j["event_window"] = c.event_window;
  j["half_gap"] = c.half_gap;
  j["relax_time"] = c.relax_time;
  j["output_dir"] = c.output_dir;
  return j;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_samples) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (x.size() < std::max<std::size_t>(min_samples, 2))
    throw std::invalid_argument("fit_power_law: not enough samples");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: data must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: x values must not all coincide");
  PowerLawFit f;
  f.samples = n;
  f.exponent = sxy / sxx;
  f.prefactor = std::exp(my - f.exponent * mx);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (my + f.exponent * (lx[i] - mx));
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.exponent_stderr = n > 2 ? std::sqrt(sse / double(n - 2) / sxx) : 0.0;
  return f;
}

namespace {

bool clean(const TrackedFronts& t, std::size_t count) { return !t.merging() && t.consistent && t.size() == count; }

// Zero of the attractive gap^{omega+2}, fitted on up to four clean samples
// ending at index `last`, clamped to [s_last, s_after].
double extrapolate_collision(const std::vector<TrackedFronts>& series, std::size_t first, std::size_t last,
                             double s_after, double omega) {
  const std::size_t lo = last >= first + 3 ? last - 3 : first;
  std::vector<double> xs, ys;
  for (std::size_t i = lo; i <= last; ++i) {
    const auto& pts = series[i].points;
    bool attractive = false;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) attractive = attractive || pts[k].orientation != pts[k + 1].orientation;
    if (!attractive) continue;
    xs.push_back(series[i].s);
    ys.push_back(std::pow(series[i].d_min_minus, omega + 2));
  }
  const double s_last = series[last].s;
  if (xs.size() < 2) return 0.5 * (s_last + s_after);
  const AffineFit f = fit_affine(xs, ys);
  if (!(f.slope < 0.0)) return 0.5 * (s_last + s_after);
  return std::clamp(-f.intercept / f.slope, s_last, s_after);
}

std::vector<double> tracked_events(const std::vector<TrackedFronts>& series, double omega) {
  std::vector<double> ev;
  if (series.empty()) return ev;
  std::size_t count = series[0].size();
  std::size_t run_start = 0, last_clean = 0;
  bool have_clean = clean(series[0], count);
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (clean(series[i], count)) {
      last_clean = i;
      have_clean = true;
      continue;
    }
    if (series[i].merging() || !series[i].consistent) continue;
    if (series[i].size() < count) {
      ev.push_back(have_clean ? extrapolate_collision(series, run_start, last_clean, series[i].s, omega)
                              : series[i].s);
      count = series[i].size();
      run_start = last_clean = i;
      have_clean = true;
    } else if (series[i].size() > count) {
      // splitting or a front re-emerging: restart the bookkeeping
      count = series[i].size();
      run_start = last_clean = i;
    }
  }
  return ev;
}

}  // namespace

double tracked_collision_time(const std::vector<TrackedFronts>& series, double omega) {
  const auto ev = tracked_events(series, omega);
  return ev.empty() ? std::numeric_limits<double>::infinity() : ev.front();
}

Curve curve_from_tracked(const std::vector<TrackedFronts>& series, double omega) {
  Curve c;
  for (const auto& t : series) {
    c.s.push_back(t.s);
    std::vector<double> a;
    for (const auto& q : t.points) a.push_back(q.a);
    c.positions.push_back(std::move(a));
    c.merging.push_back(t.merging() || !t.consistent);
  }
  c.events = tracked_events(series, omega);
  return c;
}

Curve curve_from_trajectory(const Trajectory& tr, const std::vector<double>& times) {
  Curve c;
  for (double s : times) {
    c.s.push_back(s);
    c.positions.push_back(tr.state_at(s).positions);
    c.merging.push_back(0);
  }
  for (const auto& e : tr.events) c.events.push_back(e.s);
  return c;
}

ComparisonReport compare_trajectories(const Curve& a, const Curve& b, double window) {
  if (a.s.size() != b.s.size()) throw std::invalid_argument("compare_trajectories: sample counts differ");
  for (std::size_t i = 0; i < a.s.size(); ++i)
    if (std::abs(a.s[i] - b.s[i]) > 1e-12 * std::max(1.0, std::abs(a.s[i])))
      throw std::invalid_argument("compare_trajectories: sample times differ");
  ComparisonReport r;
  r.window = window;
  auto near_event = [&](double s) {
    for (const auto* c : {&a, &b})
      for (double e : c->events)
        if (std::abs(s - e) <= window) return true;
    return false;
  };
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    if (near_event(a.s[i]) || a.merging[i] || b.merging[i]) {
      ++r.masked;
      continue;
    }
    const auto& pa = a.positions[i];
    const auto& pb = b.positions[i];
    if (pa.size() != pb.size()) {
      ++r.count_mismatch;
      continue;
    }
    ++r.compared;
    if (r.per_front.size() < pa.size()) r.per_front.resize(pa.size(), 0.0);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      const double d = std::abs(pa[k] - pb[k]);
      r.per_front[k] = std::max(r.per_front[k], d);
      r.sup_error = std::max(r.sup_error, d);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  r.s_col_a = a.events.empty() ? inf : a.events.front();
  r.s_col_b = b.events.empty() ? inf : b.events.front();
  r.collision_rel_error = (a.events.empty() || b.events.empty()) ? std::numeric_limits<double>::quiet_NaN()
                                                                   : std::abs(r.s_col_a - r.s_col_b) / r.s_col_b;
  return r;
}

bool ExperimentResult::failed() const {
  return std::any_of(criteria.begin(), criteria.end(), [](const CriterionStatus& c) { return c.status == "fail"; });
}

json ExperimentResult::summary() const {
  json j;
  j["experiment"] = experiment;
  j["status"] = failed() ? "fail" : "pass";
  json cs = json::array();
  for (const auto& c : criteria)
    cs.push_back({{"id", c.id}, {"name", c.name}, {"status", c.status}, {"metrics", c.metrics}});
  j["criteria"] = cs;
  j["details"] = details;
  return j;
}

json constants_json(int theta) {
  const InteractionConstants k = interaction_constants(theta);
  json j;
  j["theta"] = theta;
  j["omega"] = k.omega;
  j["A"] = k.A;
  j["B"] = k.B;
  j["I"] = singular_integral_I(theta);
  j["J"] = singular_integral_J(theta);
  j["front_energy"] = {{"double_well", front_energy(make_double_well(theta), 0)},
                       {"triple_well", front_energy(make_triple_well(theta), 0)}};
  return j;
}

}  // namespace frontflow
