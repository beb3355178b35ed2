#pragma once

#include <optional>
#include <vector>

#include "cholsim/camera.hpp"
#include "cholsim/geometry.hpp"
#include "cholsim/grid.hpp"
#include "cholsim/rng.hpp"

namespace cholsim {

// Synthetic deformable scene: an elliptical gallbladder attached to the liver
// along a wavy near-vertical interface curve, viewed top-down by a pinhole
// camera. Planar coordinates are mm in the camera frame at depth_base, i.e.
// pixel (u, v) sits at ((u - cx) * mm_per_pixel, (v - cy) * mm_per_pixel).
struct PhantomConfig {
  int grid_width = 160;
  int grid_height = 120;
  double mm_per_pixel = 0.5;

  Vec2 gallbladder_center = Vec2(-8.0, 0.0);  // mm
  Vec2 gallbladder_radii = Vec2(16.0, 20.0);  // mm, semi-axes (x, y)

  // Base interface curve, a polyline in mm; the default is a vertical line
  // slightly right of the gallbladder center.
  std::vector<Vec2> attachment_arc = {Vec2(-6.0, -17.0), Vec2(-6.0, 17.0)};

  double initial_waviness_amplitude = 3.0;  // mm, peak lateral offset

  double depth_base = 110.0;  // mm, liver plane depth
  double depth_bulge = 6.0;   // mm, gallbladder mound height

  std::uint64_t rng_seed = 1;

  double max_pull_step = 5.0;     // mm, per-call pull limit
  double pull_to_straight = 12.0; // mm of cumulative pull that flattens waves
  double deform_jitter = 0.3;     // mm, per-event attachment perturbation cap

  void validate() const;  // throws InvalidConfig
};

struct GraspState {
  Vec3 point_mm = Vec3::Zero();   // anchor in camera-frame mm
  double cumulative_pull_mm = 0.0;
  Vec2 pull_accum_xy = Vec2::Zero();

  bool operator==(const GraspState& o) const {
    return point_mm == o.point_mm && cumulative_pull_mm == o.cumulative_pull_mm &&
           pull_accum_xy == o.pull_accum_xy;
  }
};

struct PhantomState {
  PhantomConfig config;
  LabelMask labels;
  DepthMap depth;
  // Attachment points still connecting gallbladder to liver, ordered top to
  // bottom, exact (sub-pixel) planar mm positions.
  std::vector<Vec2> attachment;
  std::optional<GraspState> grasp;
  Rng deformation_rng;

  // One entry per interface row that can carry attachment. Detached rows
  // freeze their lateral position so later pulls cannot move liver-bed.
  struct CurveRow {
    int row_px = 0;
    double y_mm = 0.0;
    double base_x_mm = 0.0;
    double wave_mm = 0.0;    // full-amplitude wave offset at generation
    double jitter_mm = 0.0;  // accumulated dissection perturbation
    bool attached = true;
    double frozen_x_mm = 0.0;     // interface x at detachment time
    double band_target_mm = 0.0;  // liver-bed depth once fully retracted
  };
  std::vector<CurveRow> rows;

  bool operator==(const PhantomState& other) const;
};

// Builds the initial scene. Deterministic for a fixed config (rng_seed draws
// the waviness phase and cycle count). Throws InvalidConfig.
PhantomState generate_phantom(const PhantomConfig& config);

// Applies one pull step (mm, camera frame). Scales the attachment waviness by
// max(0, 1 - cumulative_pull / pull_to_straight) and stretches the grasped
// side of the gallbladder toward the pull, decaying with distance from the
// grasp row. Throws NoGrasp / PullExceedsLimit. A zero vector is a no-op.
PhantomState apply_pull(PhantomState state, const Vec3& pull_mm);

// Detaches every attachment point within energy_radius_mm (3D) of point_mm
// and converts the local gallbladder-side band to liver-bed. Remaining
// attachment points receive a perpendicular perturbation of magnitude at most
// deform_jitter drawn from deformation_rng. If no point is in range the state
// is returned unchanged (no draws consumed).
PhantomState apply_dissection(PhantomState state, const Vec3& point_mm,
                              double energy_radius_mm);

// Records the grasp anchor; later pulls stretch tissue around it.
PhantomState attach_grasp(PhantomState state, const Vec3& grasp_point_mm);

// Pure view of the current grids.
const LabelMask& render_labels(const PhantomState& state);
const DepthMap& render_depth(const PhantomState& state);

// Camera whose back-projection reproduces the phantom's planar mm frame at
// depth_base: focal = depth_base / mm_per_pixel, principal point at center.
CameraModel camera_for(const PhantomConfig& config);

// Attachment point i lifted to camera-frame 3D via the canonical camera.
Vec3 attachment_point_3d(const PhantomState& state, std::size_t index);

}  // namespace cholsim
