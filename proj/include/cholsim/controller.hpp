#pragma once

#include <optional>

#include "cholsim/frames.hpp"
#include "cholsim/mask_geometry.hpp"
#include "cholsim/perception.hpp"
#include "cholsim/phantom.hpp"
#include "cholsim/trial_log.hpp"

namespace cholsim {

struct ControllerParams {
  double deviation_stop_mm = 0.5;    // pull ends below this boundary deviation
  double max_step_mm = 10.0;         // furthest admissible dissection target
  double termination_dist_mm = 1.0;  // dissection ends at or below this
  double position_tolerance_mm = 0.5;
  double instrument_speed_mm_per_tick = 2.0;
  double grasp_offset_mm = 5.0;
  int reach_timeout_ticks = 500;
  // Dissection footprint per energy event. Must exceed half of max_step_mm,
  // or the farthest-candidate sweep leaves uncut strands between events; the
  // extra 2 mm over that floor absorbs the offset between a point's position
  // when cut (straightened) and its initial (wavy) position, so the event set
  // covers the initial attachment at this same radius.
  double energy_radius_mm = 7.0;
  double pch_standoff_mm = 5.0;   // hover distance above the first target
  int min_component_area_px = kDefaultMinAreaPx;

  void validate() const;  // throws InvalidConfig
};

struct InstrumentState {
  Frame pose;          // origin is the tool tip
  bool jaw_open = true;   // grasper only
  bool energy_on = false; // hook only
};

// Midpoint of the skeleton and boundary centroids, displaced grasp_offset
// along -normal. Throws EmptyInput when either polyline is empty.
Vec3 compute_grasp_point(const SkeletonPolyline& skeleton,
                         const BoundaryPolyline& boundary,
                         const SurfaceFrame& surface, double grasp_offset_mm);

// Next dissection target. First call (no motion_dir): the first boundary
// point. Otherwise: among boundary points p with (p - current) . motion_dir
// strictly positive and |p - current| <= max_step, the one farthest from
// current (ties: earliest in boundary order). Returns nullopt (terminate)
// when no candidate lies strictly beyond termination_dist. Throws EmptyInput
// on an empty boundary.
std::optional<Vec3> select_target(const BoundaryPolyline& boundary,
                                  const Vec3& current,
                                  const std::optional<Vec3>& motion_dir,
                                  const ControllerParams& params);

// Home poses for the instruments; defaults hover above the scene.
struct InstrumentHomes {
  Frame fbf;
  Frame pch;
  static InstrumentHomes defaults_for(const PhantomConfig& config);
};

// Tick-driven bimanual procedure over one phantom:
// AlignFbf -> ApproachGrasp -> Grasp -> Pull -> AlignPch ->
// (SelectTarget -> MoveToTarget -> ApplyEnergy)* -> Done, any phase may abort.
// Instruments servo on keypoint-estimated tip positions, so perception noise
// feeds back into the motion.
class Simulation {
 public:
  Simulation(const PhantomConfig& phantom_config, const NoiseProfile& noise,
             const ControllerParams& params, std::uint64_t seed);

  // Starts from an explicit tissue state instead of generating one;
  // `phantom_config` must describe the grid the state was built on.
  Simulation(const PhantomConfig& phantom_config, PhantomState initial_state,
             const NoiseProfile& noise, const ControllerParams& params,
             std::uint64_t seed);

  // Runs until Done or Aborted and returns the full log.
  TrialLog run();

  // Single tick; returns false once terminal.
  bool step();

  Phase phase() const { return phase_; }
  int tick() const { return tick_; }
  const PhantomState& phantom() const { return phantom_; }
  const TrialLog& log() const { return log_; }
  const InstrumentState& fbf() const { return fbf_; }
  const InstrumentState& pch() const { return pch_; }
  const CameraModel& camera() const { return camera_; }
  const std::vector<EnergyEvent>& energy_events() const {
    return energy_events_;
  }

  // Drives ticks until the pull phase completes (deviation < stop) or the
  // trial leaves the pull pipeline; returns the last measured deviation.
  // Requires the sim to still be at or before the pull phase.
  double pull_until_straight();

  // Drives ticks through the dissection cycle until Done/Aborted.
  void dissect_round();

 private:
  struct SceneView {
    SegObservation seg;
    BinaryMask gall_component;
    BoundaryPolyline boundary;
  };

  bool observe_scene(SceneView& out);  // false = perception failure handled
  SkeletonPolyline scene_skeleton(const BinaryMask& gall_component) const;
  Vec3 estimate_tip(const InstrumentLandmarks& landmarks,
                    const InstrumentState& actual, Vec3& last_estimate);
  void move_toward(InstrumentState& inst, const Vec3& goal, const Vec3& from);
  void abort(AbortReason reason);
  void finish();
  void on_perception_failure();

  PhantomConfig phantom_config_;
  NoiseProfile noise_;
  ControllerParams params_;
  CameraModel camera_;
  PhantomState phantom_;
  InstrumentState fbf_;
  InstrumentState pch_;
  InstrumentLandmarks fbf_landmarks_;
  InstrumentLandmarks pch_landmarks_;
  Rng depth_noise_rng_;

  Phase phase_ = Phase::AlignFbf;
  int tick_ = 0;
  int ticks_in_phase_ = 0;
  std::uint64_t seed_ = 0;

  Vec3 grasp_point_ = Vec3::Zero();
  Vec3 hover_point_ = Vec3::Zero();
  std::optional<Vec3> current_target_;
  std::optional<Vec3> previous_target_;
  std::optional<Vec3> motion_dir_;
  Vec3 fbf_tip_estimate_ = Vec3::Zero();
  Vec3 pch_tip_estimate_ = Vec3::Zero();
  int perception_failures_ = 0;

  std::vector<EnergyEvent> energy_events_;
  TrialLog log_;
  TickRecord pending_record_;
};

}  // namespace cholsim
