#include "cholsim/harness.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cholsim/controller.hpp"
#include "json.hpp"

namespace cholsim {
namespace {

using nlohmann::json;

json metrics_json(const TrialMetrics& m) {
  return json{{"rmse_mm", m.rmse_mm},
              {"outliers_removed", m.outliers_removed},
              {"distance_mm", m.distance_mm},
              {"duration_ticks", m.duration_ticks},
              {"duration_s", m.duration_s},
              {"aborted", m.aborted},
              {"abort_reason", m.abort_reason}};
}

std::string format_mm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick fraction -> #rrggbb on a fixed blue-to-orange ramp.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + t * (230 - 40)));
  const int g = static_cast<int>(std::lround(90 + t * (140 - 90)));
  const int b = static_cast<int>(std::lround(200 - t * (200 - 30)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (const double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

ScenarioSummary run_scenario(const ScenarioConfig& config, bool dump_masks) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);
  const std::string hash = config_hash(config);

  ScenarioSummary summary;
  std::vector<double> rmses, distances, durations;
  for (int i = 0; i < config.trials; ++i) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    Simulation sim(config.phantom, config.noise, config.controller, seed);
    if (dump_masks)
      write_pgm(render_labels(sim.phantom()),
                config.output_dir + "/trial_" + std::to_string(i) +
                    "_labels_initial.pgm");
    TrialLog log = sim.run();
    log.config_hash = hash;
    const std::string path =
        config.output_dir + "/trial_" + std::to_string(i) + ".jsonl";
    write_trial_log(log, path);
    if (dump_masks)
      write_pgm(render_labels(sim.phantom()),
                config.output_dir + "/trial_" + std::to_string(i) +
                    "_labels_final.pgm");

    const TrialMetrics metrics = metrics_from_log(log);
    summary.trials.push_back(metrics);
    summary.log_paths.push_back(path);
    if (metrics.aborted) {
      ++summary.aborted_trials;
    } else {
      rmses.push_back(metrics.rmse_mm);
      distances.push_back(metrics.distance_mm);
      durations.push_back(metrics.duration_s);
    }
  }
  summary.mean_rmse_mm = mean_of(rmses);
  summary.std_rmse_mm = stddev_of(rmses);
  summary.mean_distance_mm = mean_of(distances);
  summary.std_distance_mm = stddev_of(distances);
  summary.mean_duration_s = mean_of(durations);
  summary.std_duration_s = stddev_of(durations);

  std::ofstream out(config.output_dir + "/summary.json", std::ios::binary);
  if (!out) throw IoError("cannot write summary.json");
  out << summary_to_json_text(config, summary);
  return summary;
}

std::string summary_to_json_text(const ScenarioConfig& config,
                                 const ScenarioSummary& summary) {
  json trials = json::array();
  for (std::size_t i = 0; i < summary.trials.size(); ++i) {
    json t = metrics_json(summary.trials[i]);
    t["seed"] = config.base_seed + i;
    if (i < summary.log_paths.size()) t["log"] = summary.log_paths[i];
    trials.push_back(std::move(t));
  }
  const json j{{"config", json::parse(scenario_to_json_text(config))},
               {"config_hash", config_hash(config)},
               {"trials", trials},
               {"aborted_trials", summary.aborted_trials},
               {"aggregates",
                {{"mean_rmse_mm", summary.mean_rmse_mm},
                 {"std_rmse_mm", summary.std_rmse_mm},
                 {"mean_distance_mm", summary.mean_distance_mm},
                 {"std_distance_mm", summary.std_distance_mm},
                 {"mean_duration_s", summary.mean_duration_s},
                 {"std_duration_s", summary.std_duration_s}}}};
  return j.dump(2) + "\n";
}

TrialMetrics replay_log(const std::string& log_path) {
  return metrics_from_log(read_trial_log(log_path));
}

std::string metrics_to_json_text(const TrialMetrics& metrics) {
  return metrics_json(metrics).dump(2) + "\n";
}

void plot_boundary_distribution(const std::vector<std::string>& log_paths,
                                const std::string& out_path) {
  if (log_paths.empty()) throw InvalidConfig("no logs to plot");
  std::vector<BoundarySample> samples;
  for (const std::string& path : log_paths) {
    const TrialLog log = read_trial_log(path);
    const auto trial_samples = dissection_samples(log);
    samples.insert(samples.end(), trial_samples.begin(), trial_samples.end());
  }
  // Logs without dissection-phase snapshots still yield a valid (empty) plot:
  // background and axes only, with a fixed default view box.
  int min_tick = samples.empty() ? 0 : samples.front().tick;
  int max_tick = min_tick;
  double min_x = 0.0, max_x = 10.0, min_y = 0.0, max_y = 10.0;
  if (!samples.empty()) {
    min_x = min_y = 1e300;
    max_x = max_y = -1e300;
    for (const BoundarySample& s : samples) {
      min_tick = std::min(min_tick, s.tick);
      max_tick = std::max(max_tick, s.tick);
      for (const Vec3& p : s.points_mm) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
      }
    }
  }
  const double pad = 2.0;
  min_x -= pad, max_x += pad, min_y -= pad, max_y += pad;
  const double width = 640.0, height = 480.0;
  const double scale = std::min(width / (max_x - min_x),
                                height / (max_y - min_y));
  auto sx = [&](double x) { return (x - min_x) * scale; };
  auto sy = [&](double y) { return (y - min_y) * scale; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_mm(width) + "\" height=\"" + format_mm(height) +
         "\" viewBox=\"0 0 " + format_mm(width) + " " + format_mm(height) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<line x1=\"0.5\" y1=\"0\" x2=\"0.5\" y2=\"" + format_mm(height) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"0\" y1=\"" + format_mm(height - 0.5) + "\" x2=\"" +
         format_mm(width) + "\" y2=\"" + format_mm(height - 0.5) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  const double tick_span = std::max(1, max_tick - min_tick);
  for (const BoundarySample& s : samples) {
    const std::string color = ramp_color((s.tick - min_tick) / tick_span);
    for (const Vec3& p : s.points_mm)
      svg += "<circle cx=\"" + format_mm(sx(p.x())) + "\" cy=\"" +
             format_mm(sy(p.y())) + "\" r=\"1.5\" fill=\"" + color +
             "\" fill-opacity=\"0.6\"/>\n";
  }
  try {
    const PointSet3 curve = fitted_spline_curve(samples);
    std::string path_d;
    for (std::size_t i = 0; i < curve.size(); ++i)
      path_d += (i == 0 ? "M" : " L") + format_mm(sx(curve[i].x())) + " " +
                format_mm(sy(curve[i].y()));
    svg += "<path d=\"" + path_d +
           "\" fill=\"none\" stroke=\"#1040c0\" stroke-width=\"1.5\"/>\n";
  } catch (const TooFewPoints&) {
    // Too few points for a curve; the scatter alone is still valid output.
  }
  svg += "</svg>\n";

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + out_path);
  out << svg;
  if (!out) throw IoError("write failed: " + out_path);
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t result{};
  std::vector<std::string> paths;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &result);
  if (rc == 0)
    for (std::size_t i = 0; i < result.gl_pathc; ++i)
      paths.emplace_back(result.gl_pathv[i]);
  ::globfree(&result);
  if (rc != 0 && rc != GLOB_NOMATCH)
    throw IoError("glob failed for pattern: " + pattern);
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace cholsim
