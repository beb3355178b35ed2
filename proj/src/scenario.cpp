#include "cholsim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cholsim {
namespace {

using nlohmann::json;

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec2_from(const json& j) {
  return Vec2(j.at(0).get<double>(), j.at(1).get<double>());
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_phantom(const json& j, PhantomConfig& p) {
  read_if(j, "grid_width", p.grid_width);
  read_if(j, "grid_height", p.grid_height);
  read_if(j, "mm_per_pixel", p.mm_per_pixel);
  if (j.contains("gallbladder_center"))
    p.gallbladder_center = vec2_from(j.at("gallbladder_center"));
  if (j.contains("gallbladder_radii"))
    p.gallbladder_radii = vec2_from(j.at("gallbladder_radii"));
  if (j.contains("attachment_arc")) {
    p.attachment_arc.clear();
    for (const auto& e : j.at("attachment_arc"))
      p.attachment_arc.push_back(vec2_from(e));
  }
  read_if(j, "initial_waviness_amplitude", p.initial_waviness_amplitude);
  read_if(j, "depth_base", p.depth_base);
  read_if(j, "depth_bulge", p.depth_bulge);
  read_if(j, "rng_seed", p.rng_seed);
  read_if(j, "max_pull_step", p.max_pull_step);
  read_if(j, "pull_to_straight", p.pull_to_straight);
  read_if(j, "deform_jitter", p.deform_jitter);
}

void parse_noise(const json& j, NoiseProfile& n) {
  if (j.is_string()) {
    const std::uint64_t seed = n.rng_seed;
    n = NoiseProfile::preset(j.get<std::string>());
    n.rng_seed = seed;
    return;
  }
  read_if(j, "boundary_jitter_px", n.boundary_jitter_px);
  read_if(j, "pixel_flip_rate", n.pixel_flip_rate);
  read_if(j, "keypoint_sigma_px", n.keypoint_sigma_px);
  read_if(j, "keypoint_dropout", n.keypoint_dropout);
  read_if(j, "rng_seed", n.rng_seed);
}

void parse_controller(const json& j, ControllerParams& c) {
  read_if(j, "deviation_stop_mm", c.deviation_stop_mm);
  read_if(j, "max_step_mm", c.max_step_mm);
  read_if(j, "termination_dist_mm", c.termination_dist_mm);
  read_if(j, "position_tolerance_mm", c.position_tolerance_mm);
  read_if(j, "instrument_speed_mm_per_tick", c.instrument_speed_mm_per_tick);
  read_if(j, "grasp_offset_mm", c.grasp_offset_mm);
  read_if(j, "reach_timeout_ticks", c.reach_timeout_ticks);
  read_if(j, "energy_radius_mm", c.energy_radius_mm);
  read_if(j, "pch_standoff_mm", c.pch_standoff_mm);
  read_if(j, "min_component_area_px", c.min_component_area_px);
}

}  // namespace

void ScenarioConfig::validate() const {
  phantom.validate();
  noise.validate();
  controller.validate();
  if (trials < 1) throw InvalidConfig("trials must be at least 1");
  if (output_dir.empty()) throw InvalidConfig("output_dir must be non-empty");
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("invalid config JSON: ") + e.what());
  }
  ScenarioConfig config;
  try {
    if (j.contains("phantom")) parse_phantom(j.at("phantom"), config.phantom);
    if (j.contains("noise")) parse_noise(j.at("noise"), config.noise);
    if (j.contains("controller"))
      parse_controller(j.at("controller"), config.controller);
    read_if(j, "trials", config.trials);
    read_if(j, "base_seed", config.base_seed);
    read_if(j, "output_dir", config.output_dir);
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("bad config field: ") + e.what());
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const ScenarioConfig& config) {
  const PhantomConfig& p = config.phantom;
  json arc = json::array();
  for (const Vec2& v : p.attachment_arc) arc.push_back(vec2_json(v));
  const NoiseProfile& n = config.noise;
  const ControllerParams& c = config.controller;
  const json j{
      {"phantom",
       {{"grid_width", p.grid_width},
        {"grid_height", p.grid_height},
        {"mm_per_pixel", p.mm_per_pixel},
        {"gallbladder_center", vec2_json(p.gallbladder_center)},
        {"gallbladder_radii", vec2_json(p.gallbladder_radii)},
        {"attachment_arc", arc},
        {"initial_waviness_amplitude", p.initial_waviness_amplitude},
        {"depth_base", p.depth_base},
        {"depth_bulge", p.depth_bulge},
        {"rng_seed", p.rng_seed},
        {"max_pull_step", p.max_pull_step},
        {"pull_to_straight", p.pull_to_straight},
        {"deform_jitter", p.deform_jitter}}},
      {"noise",
       {{"boundary_jitter_px", n.boundary_jitter_px},
        {"pixel_flip_rate", n.pixel_flip_rate},
        {"keypoint_sigma_px", n.keypoint_sigma_px},
        {"keypoint_dropout", n.keypoint_dropout},
        {"rng_seed", n.rng_seed}}},
      {"controller",
       {{"deviation_stop_mm", c.deviation_stop_mm},
        {"max_step_mm", c.max_step_mm},
        {"termination_dist_mm", c.termination_dist_mm},
        {"position_tolerance_mm", c.position_tolerance_mm},
        {"instrument_speed_mm_per_tick", c.instrument_speed_mm_per_tick},
        {"grasp_offset_mm", c.grasp_offset_mm},
        {"reach_timeout_ticks", c.reach_timeout_ticks},
        {"energy_radius_mm", c.energy_radius_mm},
        {"pch_standoff_mm", c.pch_standoff_mm},
        {"min_component_area_px", c.min_component_area_px}}},
      {"trials", config.trials},
      {"base_seed", config.base_seed},
      {"output_dir", config.output_dir}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& config) {
  // FNV-1a 64-bit over the canonical serialized form.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : scenario_to_json_text(config)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace cholsim
