#pragma once

#include <vector>

#include "cholsim/camera.hpp"
#include "cholsim/geometry.hpp"
#include "cholsim/grid.hpp"

namespace cholsim {

constexpr int kDefaultMinAreaPx = 100;

struct SkeletonPolyline {
  std::vector<PixelCoord> pixels;  // row-major order
  PointSet3 points3d;              // back-projected, same order
};

struct BoundaryPolyline {
  std::vector<PixelCoord> pixels;  // clockwise order
  PointSet3 points3d;              // same order
  Vec2 ordering_origin = Vec2::Zero();  // pixel-space centroid used to sort

  double arc_length_mm() const;
};

// Largest 8-connected component of the mask. Ties resolve to the component
// whose first pixel comes first in row-major order. Throws MaskTooSmall when
// the mask is empty or the largest component is below min_area_px.
BinaryMask largest_component(const BinaryMask& mask,
                             int min_area_px = kDefaultMinAreaPx);

// Topology-preserving medial thinning: four directional subpasses per
// iteration (north, south, east, west). Each subpass first marks, on the
// mask as it stands when the subpass begins, the pixels whose neighbour in
// its direction is background, that have at least two foreground neighbours
// (line ends are never marked), and that are 8-simple; it then deletes the
// marked pixels sequentially in row-major order, re-checking only
// 8-simplicity against the evolving mask. Freezing the candidate set keeps
// each subpass one layer deep so erosion stays balanced from all four sides
// and elongated shapes reduce to their medial line; sequential deletion with
// a live simplicity check preserves the 8-connected component count.
// Iterates until a full round of subpasses removes nothing. Idempotent (the
// result is a fixed point). Total on any mask, including empty ones.
BinaryMask thin_mask(const BinaryMask& mask);

// thin_mask plus 3D lift. Throws MaskTooSmall on an empty mask and
// DimensionMismatch when mask and depth disagree.
SkeletonPolyline skeletonize(const BinaryMask& mask, const DepthMap& depth,
                             const CameraModel& camera);

// Gallbladder pixels 8-adjacent to liver or liver-bed, restricted to the
// largest gallbladder component. When several 8-connected boundary runs
// exist, keeps the largest run on the side of the skeleton indicated by the
// dominant 2D axis from skeleton toward boundary. The run is ordered by
// decreasing math angle (clockwise on screen) about the gallbladder
// component's pixel centroid. Throws MaskTooSmall (gallbladder component) and
// EmptyBoundary (no adjacency anywhere).
BoundaryPolyline extract_boundary(const BinaryMask& gallbladder,
                                  const BinaryMask& liver,
                                  const BinaryMask& liver_bed,
                                  const DepthMap& depth,
                                  const CameraModel& camera,
                                  int min_area_px = kDefaultMinAreaPx);

// Sorts points by decreasing math angle about origin in y-down image
// coordinates; ties break by squared radius then row-major order. A single
// point is returned unchanged.
std::vector<PixelCoord> order_clockwise(std::vector<PixelCoord> points,
                                        const Vec2& origin_px);

}  // namespace cholsim
