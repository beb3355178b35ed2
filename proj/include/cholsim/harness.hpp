#pragma once

#include <string>
#include <vector>

#include "cholsim/metrics.hpp"
#include "cholsim/scenario.hpp"
#include "cholsim/trial_log.hpp"

namespace cholsim {

struct ScenarioSummary {
  std::vector<TrialMetrics> trials;
  std::vector<std::string> log_paths;
  int aborted_trials = 0;
  double mean_rmse_mm = 0.0;
  double std_rmse_mm = 0.0;
  double mean_distance_mm = 0.0;
  double std_distance_mm = 0.0;
  double mean_duration_s = 0.0;
  double std_duration_s = 0.0;
};

// Runs config.trials trials sequentially (seed = base_seed + index), writes
// trial_<i>.jsonl logs and summary.json into config.output_dir, optionally
// dumps initial/final label masks as PGM. Completed-trial metrics feed the
// mean/std aggregates; aborted trials are counted and marked.
ScenarioSummary run_scenario(const ScenarioConfig& config,
                             bool dump_masks = false);

std::string summary_to_json_text(const ScenarioConfig& config,
                                 const ScenarioSummary& summary);

// Recomputes metrics for one stored log (replay path).
TrialMetrics replay_log(const std::string& log_path);
std::string metrics_to_json_text(const TrialMetrics& metrics);

// Scatter plot of every boundary sample in the logs, colored by tick, with
// the fitted spline overlaid, written as deterministic standalone SVG.
void plot_boundary_distribution(const std::vector<std::string>& log_paths,
                                const std::string& out_path);

// Expands a shell-style glob (POSIX glob) into sorted paths.
std::vector<std::string> expand_glob(const std::string& pattern);

double mean_of(const std::vector<double>& xs);
double stddev_of(const std::vector<double>& xs);  // population

}  // namespace cholsim
