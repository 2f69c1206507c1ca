#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "frontflow/harness.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int cmd_run(const std::string& path, const std::string& outdir) {
  frontflow::RunConfig cfg;
  try {
    cfg = frontflow::load_config(path);
  } catch (const frontflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }
  if (!outdir.empty()) cfg.output_dir = outdir;
  try {
    const frontflow::ExperimentResult r = frontflow::run_experiment(cfg);
    for (const auto& c : r.criteria)
      if (c.status != "skipped") std::cout << "criterion " << c.id << " (" << c.name << "): " << c.status << '\n';
    std::cout << "summary: " << cfg.output_dir << "/summary.json\n";
    return r.failed() ? kFail : kPass;
  } catch (const frontflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frontflow: slow front motion in degenerate-well gradient flows"};
  app.require_subcommand(1);

  std::string config, outdir;
  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  run->add_option("config", config, "config file")->required();
  run->add_option("-o,--output-dir", outdir, "override output_dir");

  int theta = 2;
  auto* constants = app.add_subcommand("constants", "print interaction constants as JSON");
  constants->add_option("--theta", theta, "degeneracy of the wells")->required();

  std::string dir;
  auto* plot = app.add_subcommand("plot", "write an SVG next to every CSV under a directory");
  plot->add_option("artifact-dir", dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*run) return cmd_run(config, outdir);
  if (*constants) {
    if (theta < 2) {
      std::cerr << "--theta must be at least 2\n";
      return kUsage;
    }
    std::cout << frontflow::constants_json(theta).dump(2) << '\n';
    return kPass;
  }
  if (*plot) {
    try {
      std::cout << frontflow::plot_directory(dir) << " plots written\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << e.what() << '\n';
      return kUsage;
    }
  }
  return kPass;
}
