#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cholsim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAborted = 1;
constexpr int kExitConfigError = 2;

int cmd_run(const std::string& config_path, std::optional<int> trials,
            std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir, bool dump_masks) {
  cholsim::ScenarioConfig config;
  try {
    config = cholsim::load_scenario(config_path);
    if (trials) config.trials = *trials;
    if (seed) config.base_seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    config.validate();
  } catch (const cholsim::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const cholsim::ScenarioSummary summary =
        cholsim::run_scenario(config, dump_masks);
    std::cout << cholsim::summary_to_json_text(config, summary);
    return summary.aborted_trials > 0 ? kExitAborted : kExitOk;
  } catch (const cholsim::Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_plot(const std::string& logs_glob, const std::string& out_path) {
  try {
    const std::vector<std::string> paths = cholsim::expand_glob(logs_glob);
    if (paths.empty()) {
      std::cerr << "no logs match: " << logs_glob << "\n";
      return kExitConfigError;
    }
    cholsim::plot_boundary_distribution(paths, out_path);
    std::cout << "wrote " << out_path << " from " << paths.size()
              << " log(s)\n";
    return kExitOk;
  } catch (const cholsim::Error& e) {
    std::cerr << "plot failed: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_replay(const std::string& log_path) {
  try {
    const cholsim::TrialMetrics metrics = cholsim::replay_log(log_path);
    std::cout << cholsim::metrics_to_json_text(metrics);
    return metrics.aborted ? kExitAborted : kExitOk;
  } catch (const cholsim::Error& e) {
    std::cerr << "replay failed: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic gallbladder-dissection simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool dump_masks = false;
  CLI::App* run = app.add_subcommand("run", "Run a batch of trials");
  run->add_option("--config", config_path, "Scenario config JSON")->required();
  run->add_option("--trials", trials, "Override trial count");
  run->add_option("--seed", seed, "Override base seed");
  run->add_option("--out", out_dir, "Override output directory");
  run->add_flag("--dump-masks", dump_masks, "Also write label masks as PGM");

  std::string logs_glob;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "Plot boundary distribution");
  plot->add_option("--logs", logs_glob, "Glob of trial logs")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  std::string log_path;
  CLI::App* replay = app.add_subcommand("replay", "Recompute metrics");
  replay->add_option("--log", log_path, "Trial log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  if (run->parsed()) return cmd_run(config_path, trials, seed, out_dir,
                                    dump_masks);
  if (plot->parsed()) return cmd_plot(logs_glob, plot_out);
  return cmd_replay(log_path);
}
