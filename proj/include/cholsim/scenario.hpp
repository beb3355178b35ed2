#pragma once

#include <string>

#include "cholsim/controller.hpp"
#include "cholsim/perception.hpp"
#include "cholsim/phantom.hpp"

namespace cholsim {

// Batch experiment description; trial i runs with seed base_seed + i.
struct ScenarioConfig {
  PhantomConfig phantom;
  NoiseProfile noise;  // or a named preset in the config file
  ControllerParams controller;
  int trials = 5;
  std::uint64_t base_seed = 42;
  std::string output_dir = "out";

  void validate() const;
};

// JSON round-trip. Parsing accepts partial documents (missing fields keep
// defaults) and a "noise" string preset. Throws ConfigParseError.
ScenarioConfig scenario_from_json_text(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);  // throws IoError too
std::string scenario_to_json_text(const ScenarioConfig& config);

// FNV-1a hash of the canonical JSON form, as fixed-width hex.
std::string config_hash(const ScenarioConfig& config);

}  // namespace cholsim
