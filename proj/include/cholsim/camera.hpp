#pragma once

#include "cholsim/geometry.hpp"
#include "cholsim/grid.hpp"

namespace cholsim {

// Pinhole camera looking along +z; pixel (u, v) has its center at integer
// coordinates, so back_project_pixel(project(p)) == p on pixel centers.
struct CameraModel {
  double focal_px = 220.0;
  Vec2 principal_px = Vec2(80.0, 60.0);
  Vec3 view_direction = Vec3(0.0, 0.0, 1.0);

  void validate() const;
};

// Projects a camera-frame point (mm, z > 0) to pixel coordinates.
Vec2 project(const CameraModel& camera, const Vec3& point_mm);

// Inverse pinhole for one pixel at the given depth (mm).
Vec3 back_project_pixel(const CameraModel& camera, double u, double v,
                        double depth_mm);

// Lifts every set pixel of `mask` using the per-pixel depth, row-major order.
// Throws DimensionMismatch if the grids disagree; empty mask gives {}.
PointSet3 back_project(const BinaryMask& mask, const DepthMap& depth,
                       const CameraModel& camera);

}  // namespace cholsim
