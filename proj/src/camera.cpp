#include "cholsim/camera.hpp"

#include <cmath>

namespace cholsim {

void CameraModel::validate() const {
  if (!(focal_px > 0.0) || !std::isfinite(focal_px))
    throw InvalidConfig("camera focal length must be positive");
  if (std::abs(view_direction.norm() - 1.0) > 1e-9)
    throw InvalidConfig("camera view direction must be a unit vector");
}

Vec2 project(const CameraModel& camera, const Vec3& point_mm) {
  if (!(point_mm.z() > 0.0))
    throw InvalidConfig("projected point must have positive depth");
  return Vec2(camera.focal_px * point_mm.x() / point_mm.z() +
                  camera.principal_px.x(),
              camera.focal_px * point_mm.y() / point_mm.z() +
                  camera.principal_px.y());
}

Vec3 back_project_pixel(const CameraModel& camera, double u, double v,
                        double depth_mm) {
  return Vec3((u - camera.principal_px.x()) * depth_mm / camera.focal_px,
              (v - camera.principal_px.y()) * depth_mm / camera.focal_px,
              depth_mm);
}

PointSet3 back_project(const BinaryMask& mask, const DepthMap& depth,
                       const CameraModel& camera) {
  if (mask.width() != depth.width() || mask.height() != depth.height())
    throw DimensionMismatch("mask and depth map differ in shape");
  PointSet3 points;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y))
        points.push_back(back_project_pixel(camera, x, y, depth.at(x, y)));
  return points;
}

}  // namespace cholsim
