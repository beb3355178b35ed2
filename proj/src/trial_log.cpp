#include "cholsim/trial_log.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cholsim {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json frame_to_json(const Frame& f) {
  json axes = json::array();
  for (int r = 0; r < 3; ++r)
    axes.push_back({f.axes(r, 0), f.axes(r, 1), f.axes(r, 2)});
  return json{{"origin", {f.origin.x(), f.origin.y(), f.origin.z()}},
              {"axes", axes}};
}

Frame frame_from_json(const json& j) {
  Frame f;
  for (int i = 0; i < 3; ++i) f.origin(i) = j.at("origin").at(i).get<double>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      f.axes(r, c) = j.at("axes").at(r).at(c).get<double>();
  return f;
}

json points_to_json(const PointSet3& pts) {
  json arr = json::array();
  for (const Vec3& p : pts) arr.push_back({p.x(), p.y(), p.z()});
  return arr;
}

PointSet3 points_from_json(const json& j) {
  PointSet3 pts;
  for (const auto& e : j)
    pts.emplace_back(e.at(0).get<double>(), e.at(1).get<double>(),
                     e.at(2).get<double>());
  return pts;
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::AlignFbf: return "align_fbf";
    case Phase::ApproachGrasp: return "approach_grasp";
    case Phase::Grasp: return "grasp";
    case Phase::Pull: return "pull";
    case Phase::AlignPch: return "align_pch";
    case Phase::SelectTarget: return "select_target";
    case Phase::MoveToTarget: return "move_to_target";
    case Phase::ApplyEnergy: return "apply_energy";
    case Phase::Done: return "done";
    case Phase::Aborted: return "aborted";
  }
  throw InvalidConfig("unknown phase value");
}

Phase phase_from_string(const std::string& name) {
  for (const Phase p :
       {Phase::AlignFbf, Phase::ApproachGrasp, Phase::Grasp, Phase::Pull,
        Phase::AlignPch, Phase::SelectTarget, Phase::MoveToTarget,
        Phase::ApplyEnergy, Phase::Done, Phase::Aborted})
    if (to_string(p) == name) return p;
  throw ConfigParseError("unknown phase name: " + name);
}

std::string to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::PullTimeout: return "pull_timeout";
    case AbortReason::ReachTimeout: return "reach_timeout";
    case AbortReason::PerceptionLoss: return "perception_loss";
  }
  throw InvalidConfig("unknown abort reason value");
}

AbortReason abort_reason_from_string(const std::string& name) {
  for (const AbortReason r : {AbortReason::PullTimeout,
                              AbortReason::ReachTimeout,
                              AbortReason::PerceptionLoss})
    if (to_string(r) == name) return r;
  throw ConfigParseError("unknown abort reason: " + name);
}

bool is_dissection_phase(Phase phase) {
  return phase == Phase::SelectTarget || phase == Phase::MoveToTarget ||
         phase == Phase::ApplyEnergy;
}

bool is_legal_transition(Phase from, Phase to) {
  if (to == Phase::Aborted) return from != Phase::Done && from != Phase::Aborted;
  // Every phase that inspects the scene can find the dissection already
  // complete; only the blind approach/grasp steps cannot end the trial.
  if (to == Phase::Done)
    return from != Phase::ApproachGrasp && from != Phase::Grasp &&
           from != Phase::Done && from != Phase::Aborted;
  switch (from) {
    case Phase::AlignFbf:
      return to == Phase::AlignFbf || to == Phase::ApproachGrasp;
    case Phase::ApproachGrasp:
      return to == Phase::ApproachGrasp || to == Phase::Grasp;
    case Phase::Grasp:
      return to == Phase::Pull;
    case Phase::Pull:
      return to == Phase::Pull || to == Phase::AlignPch;
    case Phase::AlignPch:
      return to == Phase::AlignPch || to == Phase::SelectTarget;
    case Phase::SelectTarget:
      return to == Phase::MoveToTarget;
    case Phase::MoveToTarget:
      return to == Phase::MoveToTarget || to == Phase::ApplyEnergy;
    case Phase::ApplyEnergy:
      return to == Phase::SelectTarget;
    case Phase::Done:
    case Phase::Aborted:
      return false;
  }
  return false;
}

std::string to_jsonl(const TrialLog& log) {
  std::ostringstream out;
  json meta{{"type", "meta"},
            {"schema", kSchemaVersion},
            {"seed", log.seed},
            {"config_hash", log.config_hash},
            {"outcome", to_string(log.outcome)}};
  if (log.abort_reason) meta["abort_reason"] = to_string(*log.abort_reason);
  out << meta.dump() << '\n';

  for (const TickRecord& r : log.records) {
    json line{{"type", "tick"},
              {"tick", r.tick},
              {"phase", to_string(r.phase)},
              {"fbf", frame_to_json(r.fbf_pose)},
              {"pch", frame_to_json(r.pch_pose)},
              {"jaw_open", r.jaw_open},
              {"energy_on", r.energy_on}};
    if (r.energy_event)
      line["energy_event"] = {
          {"point", {r.energy_event->point_mm.x(), r.energy_event->point_mm.y(),
                     r.energy_event->point_mm.z()}},
          {"radius", r.energy_event->radius_mm}};
    if (r.boundary_snapshot)
      line["boundary"] = points_to_json(*r.boundary_snapshot);
    if (r.deviation_mm) line["deviation"] = *r.deviation_mm;
    out << line.dump() << '\n';
  }
  return out.str();
}

TrialLog trial_log_from_jsonl(const std::string& text) {
  TrialLog log;
  std::istringstream in(text);
  std::string line;
  bool saw_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigParseError(std::string("bad log line: ") + e.what());
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (type == "meta") {
        saw_meta = true;
        log.seed = j.at("seed").get<std::uint64_t>();
        log.config_hash = j.at("config_hash").get<std::string>();
        log.outcome = phase_from_string(j.at("outcome").get<std::string>());
        if (j.contains("abort_reason"))
          log.abort_reason =
              abort_reason_from_string(j.at("abort_reason").get<std::string>());
      } else if (type == "tick") {
        TickRecord r;
        r.tick = j.at("tick").get<int>();
        r.phase = phase_from_string(j.at("phase").get<std::string>());
        r.fbf_pose = frame_from_json(j.at("fbf"));
        r.pch_pose = frame_from_json(j.at("pch"));
        r.jaw_open = j.at("jaw_open").get<bool>();
        r.energy_on = j.at("energy_on").get<bool>();
        if (j.contains("energy_event")) {
          EnergyEvent e;
          const json& je = j.at("energy_event");
          for (int i = 0; i < 3; ++i)
            e.point_mm(i) = je.at("point").at(i).get<double>();
          e.radius_mm = je.at("radius").get<double>();
          r.energy_event = e;
        }
        if (j.contains("boundary"))
          r.boundary_snapshot = points_from_json(j.at("boundary"));
        if (j.contains("deviation"))
          r.deviation_mm = j.at("deviation").get<double>();
        log.records.push_back(std::move(r));
      } else {
        throw ConfigParseError("unknown log line type: " + type);
      }
    } catch (const json::exception& e) {
      throw ConfigParseError(std::string("bad log field: ") + e.what());
    }
  }
  if (!saw_meta) throw ConfigParseError("log has no meta line");
  return log;
}

void write_trial_log(const TrialLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << to_jsonl(log);
  if (!out) throw IoError("write failed: " + path);
}

TrialLog read_trial_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return trial_log_from_jsonl(ss.str());
}

}  // namespace cholsim
