#include "cholsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cholsim/metrics.hpp"

namespace cholsim {
namespace {

constexpr std::uint64_t kPhantomStream = 0;
constexpr std::uint64_t kDepthStream = 3;
constexpr double kAlignHoverMm = 8.0;      // grasper pre-approach height
constexpr int kMaxPerceptionFailures = 25; // consecutive bad observations
constexpr double kPullBudgetFactor = 3.0;  // x pull_to_straight before abort

PhantomConfig reseeded(PhantomConfig config, std::uint64_t seed) {
  config.rng_seed = seed;
  return config;
}

}  // namespace

void ControllerParams::validate() const {
  if (!(deviation_stop_mm > 0.0))
    throw InvalidConfig("deviation_stop_mm must be positive");
  if (!(max_step_mm > 0.0)) throw InvalidConfig("max_step_mm must be positive");
  if (!(termination_dist_mm > 0.0) || termination_dist_mm >= max_step_mm)
    throw InvalidConfig("termination_dist_mm must be in (0, max_step_mm)");
  if (!(position_tolerance_mm > 0.0))
    throw InvalidConfig("position_tolerance_mm must be positive");
  if (!(instrument_speed_mm_per_tick > 0.0))
    throw InvalidConfig("instrument_speed_mm_per_tick must be positive");
  if (grasp_offset_mm < 0.0)
    throw InvalidConfig("grasp_offset_mm must be non-negative");
  if (reach_timeout_ticks < 1)
    throw InvalidConfig("reach_timeout_ticks must be at least 1");
  if (!(energy_radius_mm > 0.0))
    throw InvalidConfig("energy_radius_mm must be positive");
  if (pch_standoff_mm < 0.0)
    throw InvalidConfig("pch_standoff_mm must be non-negative");
  if (min_component_area_px < 1)
    throw InvalidConfig("min_component_area_px must be at least 1");
}

Vec3 compute_grasp_point(const SkeletonPolyline& skeleton,
                         const BoundaryPolyline& boundary,
                         const SurfaceFrame& surface, double grasp_offset_mm) {
  const Vec3 mid =
      0.5 * (centroid(skeleton.points3d) + centroid(boundary.points3d));
  return mid - grasp_offset_mm * surface.normal_axis();
}

std::optional<Vec3> select_target(const BoundaryPolyline& boundary,
                                  const Vec3& current,
                                  const std::optional<Vec3>& motion_dir,
                                  const ControllerParams& params) {
  if (boundary.points3d.empty())
    throw EmptyInput("select_target on empty boundary");
  if (!motion_dir) return boundary.points3d.front();

  std::optional<Vec3> best;
  double best_dist = 0.0;
  for (const Vec3& p : boundary.points3d) {
    const Vec3 d = p - current;
    const double dist = d.norm();
    if (d.dot(*motion_dir) <= 0.0) continue;
    if (dist > params.max_step_mm) continue;
    if (dist > best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  if (!best || best_dist <= params.termination_dist_mm) return std::nullopt;
  return best;
}

InstrumentHomes InstrumentHomes::defaults_for(const PhantomConfig& config) {
  const double half_w = config.grid_width / 2.0 * config.mm_per_pixel;
  const double half_h = config.grid_height / 2.0 * config.mm_per_pixel;
  const double z = std::max(10.0, config.depth_base - 40.0);
  InstrumentHomes homes;
  homes.fbf.origin = Vec3(-0.45 * half_w, -0.4 * half_h, z);
  homes.pch.origin = Vec3(0.45 * half_w, -0.4 * half_h, z);
  return homes;
}

Simulation::Simulation(const PhantomConfig& phantom_config,
                       const NoiseProfile& noise,
                       const ControllerParams& params, std::uint64_t seed)
    : Simulation(phantom_config,
                 generate_phantom(
                     reseeded(phantom_config, mix_seed(seed, kPhantomStream))),
                 noise, params, seed) {}

Simulation::Simulation(const PhantomConfig& phantom_config,
                       PhantomState initial_state, const NoiseProfile& noise,
                       const ControllerParams& params, std::uint64_t seed)
    : phantom_config_(phantom_config),
      noise_(noise),
      params_(params),
      fbf_landmarks_(fbf_landmarks()),
      pch_landmarks_(pch_landmarks()),
      depth_noise_rng_(mix_seed(seed, kDepthStream)),
      seed_(seed) {
  params_.validate();
  noise_.validate();
  phantom_config_.rng_seed = mix_seed(seed, kPhantomStream);
  noise_.rng_seed = seed;
  camera_ = camera_for(phantom_config_);
  phantom_ = std::move(initial_state);

  const InstrumentHomes homes = InstrumentHomes::defaults_for(phantom_config_);
  fbf_.pose = homes.fbf;
  pch_.pose = homes.pch;
  fbf_tip_estimate_ = fbf_.pose.origin;
  pch_tip_estimate_ = pch_.pose.origin;
  log_.seed = seed;
}

bool Simulation::observe_scene(SceneView& out) {
  try {
    out.seg = observe_segmentation(render_labels(phantom_), noise_, tick_);
    out.gall_component =
        largest_component(out.seg.gallbladder, params_.min_component_area_px);
    out.boundary = extract_boundary(out.seg.gallbladder, out.seg.liver,
                                    out.seg.liver_bed, render_depth(phantom_),
                                    camera_, params_.min_component_area_px);
    perception_failures_ = 0;
    return true;
  } catch (const EmptyBoundary&) {
    // No gall/liver interface left: with nothing still attached that is the
    // success condition, otherwise the view is bad like any other failure.
    if (phantom_.attachment.empty())
      finish();
    else
      on_perception_failure();
    return false;
  } catch (const Error&) {
    on_perception_failure();
    return false;
  }
}

SkeletonPolyline Simulation::scene_skeleton(
    const BinaryMask& gall_component) const {
  return skeletonize(gall_component, render_depth(phantom_), camera_);
}

Vec3 Simulation::estimate_tip(const InstrumentLandmarks& landmarks,
                              const InstrumentState& actual,
                              Vec3& last_estimate) {
  const KeypointObservation obs = observe_keypoints(
      actual.pose, landmarks, camera_, phantom_config_.grid_width,
      phantom_config_.grid_height, noise_, tick_);
  // Depths stand in for the instrument's own stereo point cloud: the true
  // landmark depth plus noise on the same scale as the pixel noise.
  const double depth_sigma =
      noise_.keypoint_sigma_px * phantom_config_.mm_per_pixel;
  std::vector<double> depths(landmarks.offsets_mm.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    depths[i] = actual.pose.to_world(landmarks.offsets_mm[i]).z();
    if (depth_sigma > 0.0)
      depths[i] += depth_noise_rng_.gaussian() * depth_sigma;
  }
  if (const auto fit =
          fit_instrument_pose(obs, landmarks, depths, camera_))
    last_estimate = fit->origin;
  return last_estimate;
}

void Simulation::move_toward(InstrumentState& inst, const Vec3& goal,
                             const Vec3& from) {
  const Vec3 d = goal - from;
  const double dist = d.norm();
  if (dist == 0.0) return;
  const double step = std::min(params_.instrument_speed_mm_per_tick, dist);
  inst.pose.origin += step / dist * d;
}

void Simulation::abort(AbortReason reason) {
  phase_ = Phase::Aborted;
  log_.abort_reason = reason;
}

void Simulation::finish() { phase_ = Phase::Done; }

void Simulation::on_perception_failure() {
  if (++perception_failures_ >= kMaxPerceptionFailures)
    abort(AbortReason::PerceptionLoss);
}

bool Simulation::step() {
  if (phase_ == Phase::Done || phase_ == Phase::Aborted) {
    if (!log_.records.empty() && log_.records.back().phase == phase_)
      return false;  // terminal record already emitted
    TickRecord r;
    r.tick = tick_;
    r.phase = phase_;
    r.fbf_pose = fbf_.pose;
    r.pch_pose = pch_.pose;
    r.jaw_open = fbf_.jaw_open;
    r.energy_on = pch_.energy_on;
    log_.records.push_back(std::move(r));
    log_.outcome = phase_;
    ++tick_;
    return false;
  }

  const Phase executing = phase_;
  pending_record_ = TickRecord{};
  pending_record_.tick = tick_;
  pending_record_.phase = executing;

  if (ticks_in_phase_ >= params_.reach_timeout_ticks) {
    abort(executing == Phase::Pull ? AbortReason::PullTimeout
                                   : AbortReason::ReachTimeout);
  } else {
    switch (executing) {
      case Phase::AlignFbf: {
        SceneView view;
        if (observe_scene(view)) {
          try {
            const SkeletonPolyline skel = scene_skeleton(view.gall_component);
            const SurfaceFrame surf = orient_surface_frame(
                skel.points3d, view.boundary.points3d,
                back_project(view.gall_component, render_depth(phantom_),
                             camera_),
                camera_.view_direction);
            grasp_point_ = compute_grasp_point(skel, view.boundary, surf,
                                               params_.grasp_offset_mm);
            const Vec3 align_goal =
                grasp_point_ - kAlignHoverMm * surf.normal_axis();
            fbf_.pose.axes = fbf_goal_from_surface(surf, align_goal).axes;
            const Vec3 est =
                estimate_tip(fbf_landmarks_, fbf_, fbf_tip_estimate_);
            if ((align_goal - est).norm() <= params_.position_tolerance_mm)
              phase_ = Phase::ApproachGrasp;
            else
              move_toward(fbf_, align_goal, est);
          } catch (const Error&) {
            on_perception_failure();
          }
        }
        break;
      }
      case Phase::ApproachGrasp: {
        const Vec3 est = estimate_tip(fbf_landmarks_, fbf_, fbf_tip_estimate_);
        if ((grasp_point_ - est).norm() <= params_.position_tolerance_mm)
          phase_ = Phase::Grasp;
        else
          move_toward(fbf_, grasp_point_, est);
        break;
      }
      case Phase::Grasp: {
        fbf_.jaw_open = false;
        phantom_ = attach_grasp(std::move(phantom_), grasp_point_);
        phase_ = Phase::Pull;
        break;
      }
      case Phase::Pull: {
        if (phantom_.grasp &&
            phantom_.grasp->cumulative_pull_mm >
                kPullBudgetFactor * phantom_config_.pull_to_straight) {
          abort(AbortReason::PullTimeout);
          break;
        }
        SceneView view;
        if (observe_scene(view)) {
          try {
            const SkeletonPolyline skel = scene_skeleton(view.gall_component);
            const SurfaceFrame surf = orient_surface_frame(
                skel.points3d, view.boundary.points3d,
                back_project(view.gall_component, render_depth(phantom_),
                             camera_),
                camera_.view_direction);
            const double deviation =
                boundary_deviation(view.boundary.points3d);
            pending_record_.deviation_mm = deviation;
            pending_record_.boundary_snapshot = view.boundary.points3d;
            if (deviation < params_.deviation_stop_mm) {
              phase_ = Phase::AlignPch;
            } else {
              const double step_mm =
                  std::min(params_.instrument_speed_mm_per_tick,
                           phantom_config_.max_pull_step);
              const Vec3 pull = -step_mm * surf.secondary_axis();
              phantom_ = apply_pull(std::move(phantom_), pull);
              fbf_.pose.origin += pull;  // tip follows the grasped tissue
            }
          } catch (const Error&) {
            on_perception_failure();
          }
        }
        break;
      }
      case Phase::AlignPch: {
        SceneView view;
        if (observe_scene(view)) {
          try {
            const SkeletonPolyline skel = scene_skeleton(view.gall_component);
            const SurfaceFrame surf = orient_surface_frame(
                skel.points3d, view.boundary.points3d,
                back_project(view.gall_component, render_depth(phantom_),
                             camera_),
                camera_.view_direction);
            hover_point_ = view.boundary.points3d.front() -
                           params_.pch_standoff_mm * surf.normal_axis();
            pch_.pose.axes = pch_goal_from_surface(surf, hover_point_).axes;
            const Vec3 est =
                estimate_tip(pch_landmarks_, pch_, pch_tip_estimate_);
            if ((hover_point_ - est).norm() <= params_.position_tolerance_mm)
              phase_ = Phase::SelectTarget;
            else
              move_toward(pch_, hover_point_, est);
          } catch (const Error&) {
            on_perception_failure();
          }
        }
        break;
      }
      case Phase::SelectTarget: {
        if (phantom_.attachment.empty()) {
          finish();  // nothing left to dissect
          break;
        }
        SceneView view;
        if (observe_scene(view)) {
          pending_record_.boundary_snapshot = view.boundary.points3d;
          std::optional<Vec3> dir;
          if (previous_target_ && current_target_) {
            const Vec3 d = *current_target_ - *previous_target_;
            if (d.norm() > 0.0) dir = d.normalized();
          } else if (current_target_) {
            // Second selection: follow the boundary's own local direction at
            // its start.
            const std::size_t n = view.boundary.points3d.size();
            const Vec3 d = view.boundary.points3d[std::min<std::size_t>(5, n - 1)] -
                           view.boundary.points3d[0];
            if (d.norm() > 0.0) dir = d.normalized();
          }
          const Vec3 current =
              current_target_ ? *current_target_ : pch_tip_estimate_;
          const std::optional<Vec3> target =
              select_target(view.boundary, current, dir, params_);
          if (!target) {
            finish();
          } else {
            previous_target_ = current_target_;
            current_target_ = target;
            phase_ = Phase::MoveToTarget;
          }
        }
        break;
      }
      case Phase::MoveToTarget: {
        SceneView view;
        if (observe_scene(view))
          pending_record_.boundary_snapshot = view.boundary.points3d;
        if (phase_ != executing) break;  // the observation ended the trial
        const Vec3 est = estimate_tip(pch_landmarks_, pch_, pch_tip_estimate_);
        if ((*current_target_ - est).norm() <= params_.position_tolerance_mm)
          phase_ = Phase::ApplyEnergy;
        else
          move_toward(pch_, *current_target_, est);
        break;
      }
      case Phase::ApplyEnergy: {
        pch_.energy_on = true;
        EnergyEvent event;
        event.point_mm = pch_.pose.origin;  // energy acts at the true tip
        event.radius_mm = params_.energy_radius_mm;
        phantom_ =
            apply_dissection(std::move(phantom_), event.point_mm,
                             event.radius_mm);
        energy_events_.push_back(event);
        pending_record_.energy_event = event;
        SceneView view;
        if (observe_scene(view))
          pending_record_.boundary_snapshot = view.boundary.points3d;
        // The observation right after the cut can end the trial (last strand
        // detached, or too many bad views); only a live trial loops back.
        if (phase_ == executing) phase_ = Phase::SelectTarget;
        break;
      }
      case Phase::Done:
      case Phase::Aborted:
        break;
    }
  }

  if (phase_ == Phase::Aborted) {
    // The aborted tick's partial work is not logged; emit the terminal record.
    TickRecord r;
    r.tick = tick_;
    r.phase = Phase::Aborted;
    r.fbf_pose = fbf_.pose;
    r.pch_pose = pch_.pose;
    r.jaw_open = fbf_.jaw_open;
    r.energy_on = pch_.energy_on;
    log_.records.push_back(std::move(r));
    log_.outcome = Phase::Aborted;
    ++tick_;
    return false;
  }

  pending_record_.fbf_pose = fbf_.pose;
  pending_record_.pch_pose = pch_.pose;
  pending_record_.jaw_open = fbf_.jaw_open;
  pending_record_.energy_on = pch_.energy_on;
  log_.records.push_back(pending_record_);
  pch_.energy_on = false;  // energy pulses for a single tick

  ++tick_;
  if (phase_ == executing)
    ++ticks_in_phase_;
  else
    ticks_in_phase_ = 0;
  return true;
}

TrialLog Simulation::run() {
  while (step()) {
  }
  return log_;
}

double Simulation::pull_until_straight() {
  auto in_pull_pipeline = [this] {
    return phase_ == Phase::AlignFbf || phase_ == Phase::ApproachGrasp ||
           phase_ == Phase::Grasp || phase_ == Phase::Pull;
  };
  while (in_pull_pipeline()) {
    if (!step()) break;
  }
  for (auto it = log_.records.rbegin(); it != log_.records.rend(); ++it)
    if (it->deviation_mm) return *it->deviation_mm;
  return std::numeric_limits<double>::infinity();
}

void Simulation::dissect_round() {
  while (step()) {
  }
}

}  // namespace cholsim
