#include "cholsim/mask_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <tuple>
#include <vector>

namespace cholsim {
namespace {

// 3x3 neighbourhood bit layout around a pixel (x, y):
//   0 1 2
//   3 . 4
//   5 6 7
constexpr std::array<int, 8> kDx = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {-1, -1, -1, 0, 0, 1, 1, 1};

bool ring_adjacent(int a, int b, bool diagonal) {
  const int dx = std::abs(kDx[a] - kDx[b]);
  const int dy = std::abs(kDy[a] - kDy[b]);
  if (dx > 1 || dy > 1 || (dx == 0 && dy == 0)) return false;
  return diagonal || dx + dy == 1;
}

int ring_components(unsigned config, bool diagonal) {
  std::array<int, 8> comp{};
  comp.fill(-1);
  int count = 0;
  for (int i = 0; i < 8; ++i) {
    if (!(config & (1u << i)) || comp[i] >= 0) continue;
    comp[i] = count;
    std::queue<int> q;
    q.push(i);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (int b = 0; b < 8; ++b) {
        if (!(config & (1u << b)) || comp[b] >= 0) continue;
        if (ring_adjacent(a, b, diagonal)) {
          comp[b] = count;
          q.push(b);
        }
      }
    }
    ++count;
  }
  return count;
}

// A foreground pixel is 8-simple when removing it keeps both the local
// foreground 8-topology and the local background 4-topology intact: exactly
// one 8-connected foreground component in the ring, and exactly one
// 4-connected background component that touches an edge neighbour.
bool config_is_simple(unsigned config) {
  if (ring_components(config, true) != 1) return false;
  const unsigned bg = ~config & 0xffu;
  std::array<int, 8> comp{};
  comp.fill(-1);
  int touching = 0;
  for (int i = 0; i < 8; ++i) {
    if (!(bg & (1u << i)) || comp[i] >= 0) continue;
    const int id = i;
    bool touches_edge = false;
    std::queue<int> q;
    q.push(i);
    comp[i] = id;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      if (a == 1 || a == 3 || a == 4 || a == 6) touches_edge = true;
      for (int b = 0; b < 8; ++b) {
        if (!(bg & (1u << b)) || comp[b] >= 0) continue;
        if (ring_adjacent(a, b, false)) {
          comp[b] = id;
          q.push(b);
        }
      }
    }
    if (touches_edge) ++touching;
  }
  return touching == 1;
}

const std::array<bool, 256>& simple_lut() {
  static const std::array<bool, 256> lut = [] {
    std::array<bool, 256> t{};
    for (unsigned c = 0; c < 256; ++c) t[c] = config_is_simple(c);
    return t;
  }();
  return lut;
}

unsigned neighbourhood_config(const BinaryMask& m, int x, int y) {
  unsigned config = 0;
  for (int i = 0; i < 8; ++i)
    if (m.get_or(x + kDx[i], y + kDy[i], 0)) config |= 1u << i;
  return config;
}

int popcount8(unsigned config) {
  int n = 0;
  for (int i = 0; i < 8; ++i)
    if (config & (1u << i)) ++n;
  return n;
}

// Breadth-first distances over the 8-connected pixels of one run. Returns the
// farthest pixel (row-major smallest on ties) and fills parent links.
PixelCoord bfs_farthest(const std::vector<PixelCoord>& run,
                        const Grid<int>& index_of, const PixelCoord& start,
                        std::vector<int>* parent) {
  std::vector<int> dist(run.size(), -1);
  parent->assign(run.size(), -1);
  std::queue<int> q;
  const int s = index_of.at(start.x, start.y);
  dist[s] = 0;
  q.push(s);
  int best = s;
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    if (dist[a] > dist[best] ||
        (dist[a] == dist[best] &&
         std::tie(run[a].y, run[a].x) < std::tie(run[best].y, run[best].x)))
      best = a;
    for (int i = 0; i < 8; ++i) {
      const int nx = run[a].x + kDx[i];
      const int ny = run[a].y + kDy[i];
      if (!index_of.in_bounds(nx, ny)) continue;
      const int b = index_of.at(nx, ny);
      if (b < 0 || dist[b] >= 0) continue;
      dist[b] = dist[a] + 1;
      (*parent)[b] = a;
      q.push(b);
    }
  }
  return run[best];
}

// Orders one 8-connected run as a traversable chain: take the longest
// shortest path through the run (its graph diameter, dropping short noise
// spurs), so consecutive ordered pixels are always 8-neighbours, then walk it
// in the direction that sweeps clockwise about origin_px (the end with the
// larger image-plane angle comes first). A plain angle sort cannot give a
// connected order here: where the curve runs radially away from the origin,
// consecutive chain pixels share a ray and the sort interleaves them.
std::vector<PixelCoord> order_run_clockwise(const std::vector<PixelCoord>& run,
                                            const Vec2& origin_px) {
  if (run.size() <= 1) return run;
  int min_x = run[0].x, max_x = run[0].x, min_y = run[0].y, max_y = run[0].y;
  for (const PixelCoord& p : run) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  Grid<int> index_of(max_x - min_x + 3, max_y - min_y + 3, -1);
  std::vector<PixelCoord> local(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) {
    local[i] = {run[i].x - min_x + 1, run[i].y - min_y + 1};
    index_of.at(local[i].x, local[i].y) = static_cast<int>(i);
  }
  std::vector<int> parent;
  const PixelCoord a = bfs_farthest(local, index_of, local[0], &parent);
  const PixelCoord b = bfs_farthest(local, index_of, a, &parent);
  std::vector<PixelCoord> path;
  for (int i = index_of.at(b.x, b.y); i >= 0; i = parent[i])
    path.push_back({local[i].x + min_x - 1, local[i].y + min_y - 1});
  // path now runs from b back to a.
  const PixelCoord& first = path.front();
  const PixelCoord& last = path.back();
  const double angle_first =
      image_angle(first.x, first.y, origin_px.x(), origin_px.y());
  const double angle_last =
      image_angle(last.x, last.y, origin_px.x(), origin_px.y());
  if (angle_first < angle_last ||
      (angle_first == angle_last &&
       std::tie(last.y, last.x) < std::tie(first.y, first.x)))
    std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

double BoundaryPolyline::arc_length_mm() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points3d.size(); ++i)
    total += (points3d[i] - points3d[i - 1]).norm();
  return total;
}

BinaryMask largest_component(const BinaryMask& mask, int min_area_px) {
  const int w = mask.width();
  const int h = mask.height();
  Grid<int> comp(w, h, -1);
  int best_id = -1;
  int best_size = 0;
  int next_id = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || comp.at(x, y) >= 0) continue;
      const int id = next_id++;
      int size = 0;
      std::queue<PixelCoord> q;
      q.push({x, y});
      comp.at(x, y) = id;
      while (!q.empty()) {
        const PixelCoord p = q.front();
        q.pop();
        ++size;
        for (int i = 0; i < 8; ++i) {
          const int nx = p.x + kDx[i];
          const int ny = p.y + kDy[i];
          if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) continue;
          if (comp.at(nx, ny) >= 0) continue;
          comp.at(nx, ny) = id;
          q.push({nx, ny});
        }
      }
      if (size > best_size) {
        best_size = size;
        best_id = id;
      }
    }
  }
  if (best_size < std::max(min_area_px, 1))
    throw MaskTooSmall("largest component has " + std::to_string(best_size) +
                       " px, need " + std::to_string(min_area_px));
  BinaryMask out(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (comp.at(x, y) == best_id) out.at(x, y) = 1;
  return out;
}

BinaryMask thin_mask(const BinaryMask& mask) {
  BinaryMask m = mask;
  const auto& lut = simple_lut();
  // Border direction per subpass: the named neighbour must be background.
  constexpr std::array<int, 4> kBorderBit = {1, 6, 4, 3};  // N, S, E, W
  bool removed_any = true;
  std::vector<PixelCoord> candidates;
  while (removed_any) {
    removed_any = false;
    for (const int border : kBorderBit) {
      // Candidates are judged on the mask as it stands when the subpass
      // begins: on this border, at least two foreground neighbours (so real
      // line ends are never candidates), and 8-simple. Freezing the set here
      // keeps each subpass one layer deep and the erosion balanced from all
      // four sides, which is what makes the result medial.
      candidates.clear();
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
          if (!m.at(x, y)) continue;
          if (m.get_or(x + kDx[border], y + kDy[border], 0)) continue;
          const unsigned config = neighbourhood_config(m, x, y);
          if (popcount8(config) < 2) continue;  // endpoint or isolated
          if (!lut[config]) continue;
          candidates.push_back({x, y});
        }
      // Deletion is sequential; only simplicity is re-checked against the
      // evolving mask, so connectivity can never break. A candidate whose
      // neighbours were just removed may now be a bare tip; deleting it is
      // safe (still simple) and stops border retreat from leaving spurs.
      for (const PixelCoord& p : candidates) {
        if (!lut[neighbourhood_config(m, p.x, p.y)]) continue;
        m.at(p.x, p.y) = 0;
        removed_any = true;
      }
    }
  }
  return m;
}

SkeletonPolyline skeletonize(const BinaryMask& mask, const DepthMap& depth,
                             const CameraModel& camera) {
  if (mask.width() != depth.width() || mask.height() != depth.height())
    throw DimensionMismatch("mask and depth sizes differ");
  if (count_set(mask) == 0) throw MaskTooSmall("skeletonize on empty mask");
  const BinaryMask thin = thin_mask(mask);
  SkeletonPolyline out;
  for (int y = 0; y < thin.height(); ++y)
    for (int x = 0; x < thin.width(); ++x)
      if (thin.at(x, y)) {
        out.pixels.push_back({x, y});
        out.points3d.push_back(
            back_project_pixel(camera, x, y, depth.at(x, y)));
      }
  return out;
}

std::vector<PixelCoord> order_clockwise(std::vector<PixelCoord> points,
                                        const Vec2& origin_px) {
  auto key = [&origin_px](const PixelCoord& p) {
    const double dx = p.x - origin_px.x();
    const double dy = p.y - origin_px.y();
    return std::tuple<double, double, int, int>(
        -image_angle(p.x, p.y, origin_px.x(), origin_px.y()), dx * dx + dy * dy,
        p.y, p.x);
  };
  std::sort(points.begin(), points.end(),
            [&key](const PixelCoord& a, const PixelCoord& b) {
              return key(a) < key(b);
            });
  return points;
}

BoundaryPolyline extract_boundary(const BinaryMask& gallbladder,
                                  const BinaryMask& liver,
                                  const BinaryMask& liver_bed,
                                  const DepthMap& depth,
                                  const CameraModel& camera, int min_area_px) {
  const int w = gallbladder.width();
  const int h = gallbladder.height();
  if (liver.width() != w || liver.height() != h || liver_bed.width() != w ||
      liver_bed.height() != h || depth.width() != w || depth.height() != h)
    throw DimensionMismatch("tissue masks and depth sizes differ");

  const BinaryMask gall = largest_component(gallbladder, min_area_px);

  BinaryMask boundary(w, h, 0);
  int boundary_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!gall.at(x, y)) continue;
      for (int i = 0; i < 8; ++i) {
        const int nx = x + kDx[i];
        const int ny = y + kDy[i];
        if (liver.get_or(nx, ny, 0) || liver_bed.get_or(nx, ny, 0)) {
          boundary.at(x, y) = 1;
          ++boundary_count;
          break;
        }
      }
    }
  }
  if (boundary_count == 0)
    throw EmptyBoundary("no gallbladder pixel touches liver or liver-bed");

  // Noisy masks make the adjacency band locally two pixels thick, and an
  // angle sort would interleave the two rails. Thinning keeps a medial
  // one-pixel chain (still a subset of the band, so every pixel keeps the
  // adjacency property) whose angular neighbours are also chain neighbours.
  boundary = thin_mask(boundary);
  boundary_count = count_set(boundary);

  // Split the boundary pixels into 8-connected runs.
  Grid<int> run_id(w, h, -1);
  struct Run {
    std::vector<PixelCoord> pixels;
    Vec2 centroid = Vec2::Zero();
  };
  std::vector<Run> runs;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!boundary.at(x, y) || run_id.at(x, y) >= 0) continue;
      const int id = static_cast<int>(runs.size());
      runs.emplace_back();
      std::queue<PixelCoord> q;
      q.push({x, y});
      run_id.at(x, y) = id;
      while (!q.empty()) {
        const PixelCoord p = q.front();
        q.pop();
        runs[id].pixels.push_back(p);
        runs[id].centroid += Vec2(p.x, p.y);
        for (int i = 0; i < 8; ++i) {
          const int nx = p.x + kDx[i];
          const int ny = p.y + kDy[i];
          if (!boundary.in_bounds(nx, ny) || !boundary.at(nx, ny)) continue;
          if (run_id.at(nx, ny) >= 0) continue;
          run_id.at(nx, ny) = id;
          q.push({nx, ny});
        }
      }
      runs[id].centroid /= static_cast<double>(runs[id].pixels.size());
    }
  }

  std::size_t chosen = 0;
  if (runs.size() > 1) {
    // Side selection: dominant image axis from the skeleton centroid toward
    // the boundary centroid; prefer the largest run on that side.
    const BinaryMask thin = thin_mask(gall);
    Vec2 skel_centroid = Vec2::Zero();
    int skel_count = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (thin.at(x, y)) {
          skel_centroid += Vec2(x, y);
          ++skel_count;
        }
    skel_centroid /= static_cast<double>(std::max(skel_count, 1));
    Vec2 boundary_centroid = Vec2::Zero();
    for (const Run& r : runs)
      boundary_centroid +=
          r.centroid * static_cast<double>(r.pixels.size());
    boundary_centroid /= static_cast<double>(boundary_count);
    const Vec2 toward = boundary_centroid - skel_centroid;
    Vec2 axis(0.0, 0.0);
    if (std::abs(toward.x()) >= std::abs(toward.y()))
      axis.x() = toward.x() >= 0.0 ? 1.0 : -1.0;
    else
      axis.y() = toward.y() >= 0.0 ? 1.0 : -1.0;

    bool have_positive = false;
    std::size_t best = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const bool positive = (runs[i].centroid - skel_centroid).dot(axis) > 0.0;
      if (positive && !have_positive) {
        have_positive = true;
        best = i;
      } else if (positive == have_positive &&
                 runs[i].pixels.size() > runs[best].pixels.size()) {
        best = i;
      }
    }
    chosen = best;
  }

  Vec2 gall_centroid = Vec2::Zero();
  int gall_count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (gall.at(x, y)) {
        gall_centroid += Vec2(x, y);
        ++gall_count;
      }
  gall_centroid /= static_cast<double>(gall_count);

  BoundaryPolyline out;
  out.ordering_origin = gall_centroid;
  out.pixels = order_run_clockwise(runs[chosen].pixels, gall_centroid);
  for (const PixelCoord& p : out.pixels)
    out.points3d.push_back(
        back_project_pixel(camera, p.x, p.y, depth.at(p.x, p.y)));
  return out;
}

}  // namespace cholsim
