#pragma once

#include "cholsim/geometry.hpp"

namespace cholsim {

constexpr double kPcaRankTolerance = 1e-8;  // mm^2

struct PcaResult {
  Vec3 centroid = Vec3::Zero();
  Mat3 axes = Mat3::Identity();   // columns, descending variance
  Vec3 variances = Vec3::Zero();  // descending
};

// Principal axes of a 3D point set (population covariance). Axis signs are
// canonical: each column's largest-magnitude coordinate is positive. Throws
// TooFewPoints (< 3 points) and DegeneratePointSet (second variance below
// kPcaRankTolerance).
PcaResult pca_axes(const PointSet3& points);

// Right-handed surface frame over the region between skeleton and boundary.
// Columns: x = secondary (middle variance, oriented from the skeleton mean
// toward the boundary mean), z = normal (least variance, oriented along the
// view direction), y = primary = normal x secondary.
struct SurfaceFrame {
  Frame frame;

  Vec3 secondary_axis() const { return frame.x(); }
  Vec3 primary_axis() const { return frame.y(); }
  Vec3 normal_axis() const { return frame.z(); }
};

SurfaceFrame orient_surface_frame(const PointSet3& skeleton_points,
                                  const PointSet3& boundary_points,
                                  const PointSet3& surface_points,
                                  const Vec3& view_direction);

// Grasper goal: +x along the surface normal, +z along the secondary axis (so
// pulling along -z retracts away from the boundary), y = z cross x.
Frame fbf_goal_from_surface(const SurfaceFrame& surface, const Vec3& origin);

// Hook goal: the surface frame translated to the target; the hook shaft runs
// along -z = -normal, into the tissue.
Frame pch_goal_from_surface(const SurfaceFrame& surface, const Vec3& target);

}  // namespace cholsim
