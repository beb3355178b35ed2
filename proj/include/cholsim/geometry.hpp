#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cholsim/errors.hpp"

namespace cholsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointSet3 = std::vector<Vec3>;

// Rigid pose: origin in mm plus a rotation whose columns are the x, y, z axes.
struct Frame {
  Vec3 origin = Vec3::Zero();
  Mat3 axes = Mat3::Identity();

  Vec3 x() const { return axes.col(0); }
  Vec3 y() const { return axes.col(1); }
  Vec3 z() const { return axes.col(2); }

  static Frame identity() { return Frame{}; }

  // Orthonormal within tol and determinant +1 within tol.
  bool is_right_handed(double tol = 1e-9) const {
    const Mat3 gram = axes.transpose() * axes;
    return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(axes.determinant() - 1.0) <= tol;
  }

  Vec3 to_world(const Vec3& local) const { return origin + axes * local; }

  bool operator==(const Frame& other) const {
    return origin == other.origin && axes == other.axes;
  }
};

inline Vec3 centroid(const PointSet3& pts) {
  if (pts.empty()) throw EmptyInput("centroid of empty point set");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

// Math angle of p about origin o in y-down image coordinates: the image y
// axis is negated so that decreasing angle sweeps clockwise on screen.
inline double image_angle(double px, double py, double ox, double oy) {
  return std::atan2(-(py - oy), px - ox);
}

}  // namespace cholsim
