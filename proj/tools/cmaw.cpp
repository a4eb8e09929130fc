// cmaw: characteristic-mode and conformal-array workbench.
//
//   cmaw <modes|bend-study|nulls|pattern|array-scan|active-vswr> --config study.json [--out DIR]
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
// CMAW_WORKERS (or --workers) bounds the worker pool.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cmaw/cmaw.hpp"

namespace {

using Pipeline = std::function<void(const cmaw::StudyConfig&, cmaw::StudyOutput&)>;

int run(const std::string& config_path, const std::string& out_override, const Pipeline& pipeline) {
  const std::string started = cmaw::detail::utc_now();
  const cmaw::StudyConfig cfg = cmaw::load_config(config_path);
  cmaw::StudyOutput out;
  pipeline(cfg, out);
  const std::string dir = out_override.empty() ? cfg.output_dir : out_override;
  const auto written = cmaw::write_outputs(dir, out, cfg, started);
  for (const auto& p : written) std::cout << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic-mode and conformal-array workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cmaw::kVersion);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  long long seed = 0;

  const std::map<std::string, std::pair<std::string, Pipeline>> commands = {
      {"modes", {"MS sweeps and resonance tables per section count",
                 [](const auto& c, auto& o) { cmaw::run_modes(c, o); }}},
      {"bend-study", {"Resonances at each curvature and FV against the planar strip",
                      [](const auto& c, auto& o) { cmaw::run_bend_study(c, o); }}},
      {"nulls", {"Current nulls and near-field maxima of the resonant modes",
                 [](const auto& c, auto& o) { cmaw::run_nulls(c, o); }}},
      {"pattern", {"Far-field patterns, power and directivity of characteristic modes",
                   [](const auto& c, auto& o) { cmaw::run_pattern(c, o); }}},
      {"array-scan", {"Scanned array cuts, scan reports and optional active VSWR",
                      [](const auto& c, auto& o) { cmaw::run_array_scan(c, o); }}},
      {"active-vswr", {"Active reflection and VSWR per port from Touchstone data",
                       [](const auto& c, auto& o) { cmaw::run_active_vswr(c, o); }}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", config_path, "Study configuration (JSON)")->required();
    sub->add_option("-o,--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("-j,--workers", workers, "Worker threads (overrides CMAW_WORKERS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Reserved; no stage is stochastic");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (workers > 0) setenv("CMAW_WORKERS", std::to_string(workers).c_str(), 1);

  const auto* chosen = app.get_subcommands().front();
  try {
    return run(config_path, out_dir, commands.at(chosen->get_name()).second);
  } catch (const cmaw::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cmaw::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const cmaw::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
