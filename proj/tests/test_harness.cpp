#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "frontflow/harness.hpp"
#include "frontflow/pgl_sim.hpp"
#include "frontflow/stationary_fronts.hpp"

using namespace frontflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("frontflow_" + name);
  fs::remove_all(p);
  return p;
}

json base(const std::string& experiment) {
  return {{"experiment", experiment}, {"potential", {{"family", "double_well"}, {"theta", 2}}}};
}

}  // namespace

TEST(FitPowerLaw, ExactCube) {
  std::vector<double> x, y;
  for (int i = 1; i <= 8; ++i) {
    x.push_back(0.5 * i);
    y.push_back(std::pow(0.5 * i, 3));
  }
  const PowerLawFit f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 3.0, 1e-9);
  EXPECT_NEAR(f.prefactor, 1.0, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.samples, 8u);
}

TEST(FitPowerLaw, NoisyFifthRoot) {
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    const double xi = std::pow(10.0, -3.0 + 0.1 * i);
    x.push_back(xi);
    y.push_back(2.0 * std::pow(xi, 0.2) * (1.0 + noise(rng)));
  }
  const PowerLawFit f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 0.2, 0.02);
  EXPECT_GT(f.r2, 0.9);
  EXPECT_GT(f.exponent_stderr, 0.0);
}

TEST(FitPowerLaw, ConstantAndErrors) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y(5, 4.2);
  const PowerLawFit f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 0.0, 1e-9);
  EXPECT_NEAR(f.prefactor, 4.2, 1e-9);
  EXPECT_THROW(fit_power_law({1, 2, 3, 4}, {1, 2, 3, 4}), std::invalid_argument);
  EXPECT_THROW(fit_power_law({1, 2, 3, 4, 5}, {1, 2, 0, 4, 5}), std::invalid_argument);
  EXPECT_THROW(fit_power_law({1, 2, -3, 4, 5}, {1, 2, 3, 4, 5}), std::invalid_argument);
  EXPECT_NO_THROW(fit_power_law({1, 2, 3}, {1, 2, 3}, 3));
}

TEST(Compare, TrajectoryAgainstItselfIsZero) {
  const FrontModel m(make_double_well(2));
  const Trajectory t = integrate(m, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, 0.6);
  std::vector<double> s;
  for (int i = 0; i <= 100; ++i) s.push_back(0.006 * i);
  const Curve c = curve_from_trajectory(t, s);
  const ComparisonReport r = compare_trajectories(c, c, 0.02 * t.first_collision());
  EXPECT_EQ(r.sup_error, 0.0);
  EXPECT_EQ(r.count_mismatch, 0u);
  EXPECT_GT(r.masked, 0u);
  EXPECT_GT(r.compared, 50u);
  EXPECT_EQ(r.collision_rel_error, 0.0);

  Curve shifted = c;
  shifted.s.back() += 1e-3;
  EXPECT_THROW(compare_trajectories(c, shifted, 0.0), std::invalid_argument);
}

TEST(Compare, SingleFrontErrorIsPdeDrift) {
  const Potential p = make_double_well(2);
  const double eps = 0.04;
  const GluedField g = glue_chain(p, ChainSpec{{0.0}, {0, 1}}, eps, Grid1D::with_spacing(-2.0, 2.0, eps / 16));
  std::vector<double> s;
  for (int i = 0; i <= 20; ++i) s.push_back(0.005 * i);
  std::vector<TrackedFronts> series;
  RunOptions o;
  o.keep_snapshots = false;
  run(p, g.field, 0.1, s, o, [&](const Field& f) { series.push_back(front_points(p, f)); });
  const Curve pde = curve_from_tracked(series, p.omega());
  const Curve ode = curve_from_trajectory(integrate(FrontModel(p), ChainSpec{{0.0}, {0, 1}}, 0.1), s);
  double drift = 0.0;
  for (const auto& t : series) drift = std::max(drift, std::abs(t.points[0].a));
  const ComparisonReport r = compare_trajectories(pde, ode, 0.0);
  EXPECT_DOUBLE_EQ(r.sup_error, drift);
  EXPECT_EQ(r.compared, s.size());
  EXPECT_TRUE(std::isnan(r.collision_rel_error));
}

TEST(Compare, CountMismatchIsReportedNotCompared) {
  Curve a, b;
  for (int i = 0; i < 10; ++i) {
    a.s.push_back(0.1 * i);
    b.s.push_back(0.1 * i);
    a.positions.push_back(i < 5 ? std::vector<double>{-1.0, 1.0} : std::vector<double>{});
    b.positions.push_back({-1.0, 1.0});
    a.merging.push_back(0);
    b.merging.push_back(0);
  }
  a.events = {0.45};
  const ComparisonReport r = compare_trajectories(a, b, 0.01);
  EXPECT_EQ(r.compared, 5u);
  EXPECT_EQ(r.count_mismatch, 5u);
  EXPECT_EQ(r.sup_error, 0.0);
  EXPECT_TRUE(std::isinf(r.s_col_b));
}

TEST(TrackedCollision, BracketedByTheSamples) {
  const Potential p = make_double_well(2);
  const double eps = 0.04;
  const GluedField g = glue_chain(p, ChainSpec{{-0.5, 0.5}, {0, 1, 0}}, eps, Grid1D::with_spacing(-5.5, 5.5, eps / 16));
  std::vector<double> s;
  for (int i = 0; i <= 40; ++i) s.push_back(0.005 * i);
  std::vector<TrackedFronts> series;
  RunOptions o;
  o.keep_snapshots = false;
  run(p, g.field, 0.2, s, o, [&](const Field& f) { series.push_back(front_points(p, f)); });
  const double sc = tracked_collision_time(series, p.omega());
  std::size_t i = 0;
  while (series[i].size() == 2 && !series[i].merging()) ++i;
  EXPECT_GE(sc, series[i - 1].s);
  std::size_t j = i;
  while (series[j].merging()) ++j;
  EXPECT_LE(sc, series[j].s);
  EXPECT_EQ(series.back().size(), 0u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config(json::array()), ConfigError);
  EXPECT_THROW(parse_config({{"experiment", "warp_drive"}}), ConfigError);
  json j = base("constants");
  j["colour"] = "blue";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = base("pde_vs_ode");
  EXPECT_THROW(parse_config(j), ConfigError);  // chain missing
  j["chain"] = {{"positions", {0.5, -0.5}}, {"labels", {0, 1, 0}}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["chain"] = {{"positions", {-0.5, 0.5}}, {"labels", {0, 1, 0}}};
  EXPECT_NO_THROW(parse_config(j));
  j["eps"] = {0.01, -0.02};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["eps"] = 0.01;
  j["grid"] = {{"cells_per_eps", 4}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["grid"] = {{"cells_per_eps", 16}};
  j["prefactor"] = "guess";
  EXPECT_THROW(parse_config(j), ConfigError);
  j["prefactor"] = 16;
  EXPECT_EQ(*parse_config(j).prefactor, 16.0);
  j["potential"] = {{"family", "double_well"}, {"theta", 1}};
  EXPECT_THROW(parse_config(j), ConfigError);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{\"experiment\": ";
  EXPECT_THROW(load_config(bad.string()), ConfigError);
  EXPECT_THROW(load_config((scratch("missing") / "none.json").string()), ConfigError);
}

TEST(Config, ShippedConfigsParseAndRoundTrip) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(FRONTFLOW_SOURCE_DIR "/configs")) {
    if (e.path().extension() != ".json") continue;
    const RunConfig c = load_config(e.path().string());
    const RunConfig back = parse_config(to_json(c));
    EXPECT_EQ(back.experiment, c.experiment);
    EXPECT_EQ(back.eps, c.eps);
    EXPECT_EQ(back.resolve_prefactor, c.resolve_prefactor);
    ++n;
  }
  EXPECT_EQ(n, experiment_names().size());
}

TEST(Experiment, ConstantsJson) {
  const json c = constants_json(2);
  EXPECT_EQ(c["omega"].get<double>(), 3.0);
  EXPECT_NEAR(c["A"].get<double>(), 0.738565313004820, 1e-13);
  EXPECT_NEAR(c["B"].get<double>(), 2.954261252019279, 1e-12);
  EXPECT_NEAR(c["front_energy"]["double_well"].get<double>(), 16.0 * std::sqrt(2.0) / 15.0, 1e-9);
  EXPECT_NEAR(c["front_energy"]["triple_well"].get<double>(), 8.0 * std::sqrt(2.0) / 105.0, 1e-9);

  json j = base("constants");
  j["output_dir"] = scratch("constants").string();
  const ExperimentResult r = run_experiment(parse_config(j));
  EXPECT_FALSE(r.failed());
  EXPECT_EQ(r.criteria[0].status, "pass");
  const json f = json::parse(slurp(fs::path(j["output_dir"].get<std::string>()) / "constants" / "constants.json"));
  EXPECT_EQ(f["theta"], 2);
}

TEST(Experiment, OdeOnlyPairHasOneCollision) {
  json j = base("ode_only");
  j["chain"] = {{"positions", {-0.5, 0.5}}, {"labels", {0, 1, 0}}};
  const fs::path out = scratch("ode_only");
  j["output_dir"] = out.string();
  const ExperimentResult r = run_experiment(parse_config(j));
  const json ev = json::parse(slurp(out / "ode_only" / "events.json"));
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_NEAR(ev[0]["S_col"].get<double>(), 0.408493179945, 1e-6);

  const json s = json::parse(slurp(out / "summary.json"));
  ASSERT_EQ(s["criteria"].size(), 10u);
  for (int id = 1; id <= 10; ++id) {
    const json& c = s["criteria"][std::size_t(id - 1)];
    EXPECT_EQ(c["id"], id);
    const std::string st = c["status"];
    EXPECT_TRUE(st == "pass" || st == "fail" || st == "skipped");
  }
  for (int id : {2, 3, 4}) EXPECT_EQ(s["criteria"][std::size_t(id - 1)]["status"], "pass") << id;
  EXPECT_EQ(s["criteria"][0]["status"], "skipped");
}

TEST(Experiment, RerunsAreByteIdentical) {
  json j = base("ode_only");
  j["chain"] = {{"positions", {-2.0, -1.1, 0.0, 0.4, 1.3, 2.9}}, {"labels", {0, 1, 0, 1, 0, 1, 0}}};
  j["s_max"] = 2.0;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  j["output_dir"] = a.string();
  run_experiment(parse_config(j));
  j["output_dir"] = b.string();
  run_experiment(parse_config(j));
  for (const char* f : {"trajectory.csv", "events.json"})
    EXPECT_EQ(slurp(a / "ode_only" / f), slurp(b / "ode_only" / f)) << f;
  EXPECT_FALSE(slurp(a / "ode_only" / "trajectory.csv").empty());
}

TEST(Experiment, QuantizationOutputs) {
  json j = base("quantization");
  j["eps"] = {0.02, 0.01};
  j["chain"] = {{"positions", {-0.5, 0.5}}, {"labels", {0, 1, 0}}};
  const fs::path out = scratch("quant");
  j["output_dir"] = out.string();
  const ExperimentResult r = run_experiment(parse_config(j));
  EXPECT_EQ(r.criteria[6].status, "pass");
  std::ifstream in(out / "quantization" / "quantization.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "eps,E,E_fd,sum_S,rel_err");
}

TEST(Prefactor, MeasuredVelocitySelectsDoubledPrefactor) {
  const PrefactorEstimate e = estimate_prefactor(make_double_well(2), 0.02);
  EXPECT_EQ(e.resolved, 16.0);
  EXPECT_GT(e.measured, 12.0);
  EXPECT_LT(e.measured, 24.0);
  EXPECT_EQ(estimate_prefactor(make_double_well(2), 0.02).measured, e.measured);
}

TEST(Plot, WritesOneSvgPerCsv) {
  json j = base("ode_only");
  j["chain"] = {{"positions", {-0.5, 0.5}}, {"labels", {0, 1, 0}}};
  const fs::path out = scratch("plot");
  j["output_dir"] = out.string();
  run_experiment(parse_config(j));
  EXPECT_EQ(plot_directory(out.string()), 1u);
  const std::string svg = slurp(out / "ode_only" / "trajectory.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<path"), std::string::npos);
  EXPECT_THROW(plot_directory((out / "nope").string()), std::invalid_argument);
}
