#pragma once
// Reference implementations used only by the tests. Everything here is coded
// from first principles over plain std containers — no Eigen, no library
// headers — so that agreement with the library is evidence, not tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Binary mask on a plain vector.
// ---------------------------------------------------------------------------
struct Mask {
  int w = 0;
  int h = 0;
  std::vector<char> v;

  Mask() = default;
  Mask(int width, int height) : w(width), h(height), v(width * height, 0) {}

  bool at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  void set(int x, int y, bool b) {
    v[static_cast<std::size_t>(y) * w + x] = b ? 1 : 0;
  }
  bool in(int x, int y) const { return x >= 0 && x < w && y >= 0 && y < h; }
  int count() const {
    return static_cast<int>(std::count(v.begin(), v.end(), 1));
  }
  bool operator==(const Mask& o) const {
    return w == o.w && h == o.h && v == o.v;
  }
};

// Number of foreground components under 8-connectivity.
inline int components8(const Mask& m) {
  std::vector<char> seen(m.v.size(), 0);
  int count = 0;
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) {
      if (!m.at(x, y) || seen[static_cast<std::size_t>(y) * m.w + x]) continue;
      ++count;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      seen[static_cast<std::size_t>(y) * m.w + x] = 1;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!dx && !dy) continue;
            int nx = cx + dx, ny = cy + dy;
            if (!m.in(nx, ny) || !m.at(nx, ny)) continue;
            char& s = seen[static_cast<std::size_t>(ny) * m.w + nx];
            if (!s) {
              s = 1;
              q.push({nx, ny});
            }
          }
      }
    }
  return count;
}

// Number of background components under 4-connectivity, with the mask
// embedded in an infinite background (simulated by a one-pixel border).
inline int background_components4(const Mask& m) {
  const int w = m.w + 2, h = m.h + 2;
  auto bg = [&](int x, int y) {
    int ox = x - 1, oy = y - 1;
    return !(m.in(ox, oy) && m.at(ox, oy));
  };
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  int count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!bg(x, y) || seen[static_cast<std::size_t>(y) * w + x]) continue;
      ++count;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      seen[static_cast<std::size_t>(y) * w + x] = 1;
      const int dx4[] = {1, -1, 0, 0};
      const int dy4[] = {0, 0, 1, -1};
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        for (int k = 0; k < 4; ++k) {
          int nx = cx + dx4[k], ny = cy + dy4[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h || !bg(nx, ny)) continue;
          char& s = seen[static_cast<std::size_t>(ny) * w + nx];
          if (!s) {
            s = 1;
            q.push({nx, ny});
          }
        }
      }
    }
  return count;
}

// A foreground pixel is simple when deleting it changes neither the number of
// 8-connected foreground components nor the number of 4-connected background
// components of the whole image. This is the definitional (global) test; it
// deliberately avoids any neighborhood lookup table.
inline bool simple_pixel(const Mask& m, int x, int y) {
  Mask d = m;
  d.set(x, y, false);
  return components8(d) == components8(m) &&
         background_components4(d) == background_components4(m);
}

inline int neighbor_count(const Mask& m, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (!dx && !dy) continue;
      if (m.in(x + dx, y + dy) && m.at(x + dx, y + dy)) ++n;
    }
  return n;
}

// Reference directional thinning: per iteration, four subpasses whose border
// directions are north, south, east, west. Each subpass first collects, on
// the subpass-start image, the foreground pixels whose directional neighbor
// is background, that have at least two foreground neighbors, and that are
// simple; it then deletes them in row-major order, re-checking only
// simplicity against the live image. Repeats until an iteration deletes
// nothing.
inline Mask reference_thin(Mask m) {
  const std::array<std::pair<int, int>, 4> dirs = {
      {{0, -1}, {0, 1}, {1, 0}, {-1, 0}}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [bx, by] : dirs) {
      const Mask snap = m;
      std::vector<std::pair<int, int>> cand;
      for (int y = 0; y < snap.h; ++y)
        for (int x = 0; x < snap.w; ++x) {
          if (!snap.at(x, y)) continue;
          int nx = x + bx, ny = y + by;
          bool border = !(snap.in(nx, ny) && snap.at(nx, ny));
          if (!border) continue;
          if (neighbor_count(snap, x, y) < 2) continue;
          if (!simple_pixel(snap, x, y)) continue;
          cand.push_back({x, y});
        }
      for (const auto& [x, y] : cand) {
        if (!simple_pixel(m, x, y)) continue;
        m.set(x, y, false);
        changed = true;
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Small linear algebra over std::array.
// ---------------------------------------------------------------------------
using V3 = std::array<double, 3>;
using M3 = std::array<std::array<double, 3>, 3>;

inline double dot(const V3& a, const V3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const V3& a) { return std::sqrt(dot(a, a)); }

inline V3 mean_point(const std::vector<V3>& pts) {
  V3 m = {0, 0, 0};
  for (const V3& p : pts)
    for (int i = 0; i < 3; ++i) m[i] += p[i];
  for (int i = 0; i < 3; ++i) m[i] /= static_cast<double>(pts.size());
  return m;
}

// Population covariance matrix.
inline M3 covariance(const std::vector<V3>& pts) {
  const V3 c = mean_point(pts);
  M3 cov = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  for (const V3& p : pts)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        cov[i][j] += (p[i] - c[i]) * (p[j] - c[j]);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov[i][j] /= static_cast<double>(pts.size());
  return cov;
}

// Eigenvalues and eigenvectors of a symmetric 3x3 matrix by cyclic Jacobi
// rotations. Returns eigenvalues in descending order; eigenvectors in the
// matching columns of `vectors`.
struct Eigen3 {
  V3 values;
  M3 vectors;  // vectors[r][c]: component r of eigenvector c
};

inline Eigen3 jacobi_eigen(M3 a) {
  M3 v = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-18) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a[i][i] > a[j][j]; });
  Eigen3 out;
  for (int c = 0; c < 3; ++c) {
    out.values[c] = a[order[c]][order[c]];
    for (int r = 0; r < 3; ++r) out.vectors[r][c] = v[r][order[c]];
  }
  return out;
}

// RMS perpendicular distance of the points to their best total-least-squares
// line: variance not explained by the dominant direction, i.e.
// sqrt(trace(C) - lambda_max).
inline double tls_line_rms(const std::vector<V3>& pts) {
  const M3 c = covariance(pts);
  const Eigen3 e = jacobi_eigen(c);
  const double trace = c[0][0] + c[1][1] + c[2][2];
  return std::sqrt(std::max(0.0, trace - e.values[0]));
}

// ---------------------------------------------------------------------------
// Clockwise ordering in y-down image coordinates.
// ---------------------------------------------------------------------------
// Returns the input indices sorted by decreasing angle atan2(-(y-oy), x-ox),
// ties by squared radius, then row-major position.
inline std::vector<std::size_t> clockwise_order(
    const std::vector<std::pair<double, double>>& pts, double ox, double oy) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ax = pts[a].first - ox, ay = pts[a].second - oy;
    const double bx = pts[b].first - ox, by = pts[b].second - oy;
    const double aa = std::atan2(-ay, ax), ab = std::atan2(-by, bx);
    if (aa != ab) return aa > ab;
    const double ra = ax * ax + ay * ay, rb = bx * bx + by * by;
    if (ra != rb) return ra < rb;
    if (pts[a].second != pts[b].second) return pts[a].second < pts[b].second;
    return pts[a].first < pts[b].first;
  });
  return idx;
}

// ---------------------------------------------------------------------------
// Statistics.
// ---------------------------------------------------------------------------
inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

inline double stddev_population(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// Average ranks (1-based), ties shared.
inline std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = shared;
    i = j + 1;
  }
  return r;
}

// Spearman rank correlation.
inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  const std::vector<double> rx = ranks(xs), ry = ranks(ys);
  const double mx = mean(rx), my = mean(ry);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// Fraction of cross pairs where a > b (ties count half): the direction
// statistic of a Mann-Whitney rank-sum comparison.
inline double fraction_pairs_greater(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  if (a.empty() || b.empty()) return 0.5;
  double wins = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y) wins += 1.0;
      else if (x == y) wins += 0.5;
    }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace oracles
