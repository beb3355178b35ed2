#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cholsim/geometry.hpp"

namespace cholsim {

enum class Phase {
  AlignFbf,
  ApproachGrasp,
  Grasp,
  Pull,
  AlignPch,
  SelectTarget,
  MoveToTarget,
  ApplyEnergy,
  Done,
  Aborted,
};

enum class AbortReason {
  PullTimeout,
  ReachTimeout,
  PerceptionLoss,
};

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);
std::string to_string(AbortReason reason);
AbortReason abort_reason_from_string(const std::string& name);

bool is_dissection_phase(Phase phase);

// True when `to` may follow `from` between consecutive ticks (self-loops are
// legal for multi-tick phases).
bool is_legal_transition(Phase from, Phase to);

struct EnergyEvent {
  Vec3 point_mm = Vec3::Zero();
  double radius_mm = 0.0;
};

struct TickRecord {
  int tick = 0;
  Phase phase = Phase::AlignFbf;
  Frame fbf_pose;
  Frame pch_pose;
  bool jaw_open = true;
  bool energy_on = false;
  std::optional<EnergyEvent> energy_event;
  std::optional<PointSet3> boundary_snapshot;
  std::optional<double> deviation_mm;
};

struct TrialLog {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<TickRecord> records;
  Phase outcome = Phase::Done;
  std::optional<AbortReason> abort_reason;

  bool aborted() const { return outcome == Phase::Aborted; }
};

// One JSON object per line: a meta line, then one line per tick.
std::string to_jsonl(const TrialLog& log);
TrialLog trial_log_from_jsonl(const std::string& text);  // throws ConfigParseError

void write_trial_log(const TrialLog& log, const std::string& path);
TrialLog read_trial_log(const std::string& path);  // throws IoError

}  // namespace cholsim
