#include "cholsim/frames.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace cholsim {
namespace {

// Flip each column so its largest-magnitude coordinate is positive; the first
// maximal coordinate decides when magnitudes tie.
void canonicalize_signs(Mat3& axes) {
  for (int c = 0; c < 3; ++c) {
    int arg = 0;
    for (int r = 1; r < 3; ++r)
      if (std::abs(axes(r, c)) > std::abs(axes(arg, c))) arg = r;
    if (axes(arg, c) < 0.0) axes.col(c) = -axes.col(c);
  }
}

}  // namespace

PcaResult pca_axes(const PointSet3& points) {
  if (points.size() < 3)
    throw TooFewPoints("pca needs at least 3 points, got " +
                       std::to_string(points.size()));
  PcaResult out;
  out.centroid = centroid(points);
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - out.centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  if (solver.info() != Eigen::Success)
    throw DegeneratePointSet("eigendecomposition failed");
  // Solver returns ascending eigenvalues; flip to descending.
  for (int i = 0; i < 3; ++i) {
    out.variances(i) = std::max(0.0, solver.eigenvalues()(2 - i));
    out.axes.col(i) = solver.eigenvectors().col(2 - i);
  }
  canonicalize_signs(out.axes);
  if (out.variances(1) <= kPcaRankTolerance)
    throw DegeneratePointSet("points are collinear within tolerance");
  return out;
}

SurfaceFrame orient_surface_frame(const PointSet3& skeleton_points,
                                  const PointSet3& boundary_points,
                                  const PointSet3& surface_points,
                                  const Vec3& view_direction) {
  const PcaResult pca = pca_axes(surface_points);
  const Vec3 toward_boundary =
      centroid(boundary_points) - centroid(skeleton_points);

  Vec3 normal = pca.axes.col(2);
  if (normal.dot(view_direction) < 0.0) normal = -normal;
  Vec3 secondary = pca.axes.col(1);
  if (secondary.dot(toward_boundary) < 0.0) secondary = -secondary;

  SurfaceFrame out;
  out.frame.origin = pca.centroid;
  out.frame.axes.col(0) = secondary;
  out.frame.axes.col(1) = normal.cross(secondary);
  out.frame.axes.col(2) = normal;
  return out;
}

Frame fbf_goal_from_surface(const SurfaceFrame& surface, const Vec3& origin) {
  Frame goal;
  goal.origin = origin;
  goal.axes.col(0) = surface.normal_axis();
  goal.axes.col(2) = surface.secondary_axis();
  goal.axes.col(1) = goal.axes.col(2).cross(goal.axes.col(0));
  return goal;
}

Frame pch_goal_from_surface(const SurfaceFrame& surface, const Vec3& target) {
  Frame goal = surface.frame;
  goal.origin = target;
  return goal;
}

}  // namespace cholsim
