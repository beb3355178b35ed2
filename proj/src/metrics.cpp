#include "cholsim/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cholsim/spline.hpp"

namespace cholsim {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double m = v[n / 2];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    m = 0.5 * (m + v[n / 2 - 1]);
  }
  return m;
}

// Descending-eigenvalue axes of the population covariance, signs made
// deterministic (largest-magnitude coordinate positive). Tolerates rank
// deficiency, unlike pca_axes.
Mat3 covariance_axes(const PointSet3& points, const Vec3& center) {
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - center;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  Mat3 axes;
  for (int i = 0; i < 3; ++i) axes.col(i) = solver.eigenvectors().col(2 - i);
  for (int c = 0; c < 3; ++c) {
    int arg = 0;
    for (int r = 1; r < 3; ++r)
      if (std::abs(axes(r, c)) > std::abs(axes(arg, c))) arg = r;
    if (axes(arg, c) < 0.0) axes.col(c) = -axes.col(c);
  }
  return axes;
}

struct OrderedPool {
  PointSet3 points;            // angle-ordered
  std::vector<double> params;  // chord-length parameters
};

// Clockwise angular ordering in the pooled set's own dominant plane. The
// angle origin sits off the arc along the in-plane minor axis (twice the data
// extent away), where the sweep is monotone along any function-like arc; all
// quantities are intrinsic, so rigid motions of the whole set cannot change
// the order beyond a full reversal.
OrderedPool order_pool(const PointSet3& pooled) {
  const Vec3 center = centroid(pooled);
  const Mat3 axes = covariance_axes(pooled, center);
  const Vec3 e0 = axes.col(0);
  const Vec3 e1 = axes.col(1);

  double extent = 0.0;
  for (const Vec3& p : pooled)
    extent = std::max(extent, std::abs((p - center).dot(e0)));
  const double offset = std::max(2.0 * extent, 1.0);

  struct Entry {
    double angle;
    double radius2;
    std::size_t index;
  };
  std::vector<Entry> entries(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const Vec3 d = pooled[i] - center;
    const double a = d.dot(e0);
    const double b = d.dot(e1) + offset;
    entries[i] = {std::atan2(b, a), a * a + b * b, i};
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.angle != y.angle) return x.angle > y.angle;  // clockwise sweep
    if (x.radius2 != y.radius2) return x.radius2 < y.radius2;
    return x.index < y.index;
  });

  OrderedPool out;
  out.points.reserve(pooled.size());
  for (const Entry& e : entries) out.points.push_back(pooled[e.index]);
  out.params.resize(pooled.size(), 0.0);
  for (std::size_t i = 1; i < out.points.size(); ++i)
    out.params[i] =
        out.params[i - 1] + (out.points[i] - out.points[i - 1]).norm();
  if (out.params.back() == 0.0)  // all points coincide
    std::iota(out.params.begin(), out.params.end(), 0.0);
  return out;
}

std::vector<double> spline_residuals(const OrderedPool& pool, int num_knots) {
  std::array<std::vector<double>, 3> coords;
  for (int c = 0; c < 3; ++c) {
    coords[c].reserve(pool.points.size());
    for (const Vec3& p : pool.points) coords[c].push_back(p(c));
  }
  std::array<NaturalCubicSpline, 3> fits = {
      fit_least_squares_spline(pool.params, coords[0], num_knots),
      fit_least_squares_spline(pool.params, coords[1], num_knots),
      fit_least_squares_spline(pool.params, coords[2], num_knots)};
  std::vector<double> residuals(pool.points.size());
  for (std::size_t i = 0; i < pool.points.size(); ++i) {
    Vec3 fit(fits[0].evaluate(pool.params[i]), fits[1].evaluate(pool.params[i]),
             fits[2].evaluate(pool.params[i]));
    residuals[i] = (fit - pool.points[i]).norm();
  }
  return residuals;
}

double rms_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

double boundary_deviation(const PointSet3& points_mm) {
  if (points_mm.size() < 2)
    throw TooFewPoints("deviation needs at least two points");
  const Vec3 center = centroid(points_mm);
  const Vec3 dir = covariance_axes(points_mm, center).col(0);
  double sum = 0.0;
  for (const Vec3& p : points_mm) {
    const Vec3 d = p - center;
    const double along = d.dot(dir);
    sum += std::max(0.0, d.squaredNorm() - along * along);
  }
  return std::sqrt(sum / static_cast<double>(points_mm.size()));
}

SplineFitResult spline_rmse(const std::vector<BoundarySample>& samples,
                            int num_knots) {
  PointSet3 pooled;
  for (const BoundarySample& s : samples)
    pooled.insert(pooled.end(), s.points_mm.begin(), s.points_mm.end());
  if (pooled.size() < 4)
    throw TooFewPoints("spline fit needs at least 4 pooled points");
  // Small pools get fewer knots rather than an error: the fit stays defined
  // for any pool of at least four points.
  const int knots = std::min(num_knots, static_cast<int>(pooled.size()));

  OrderedPool pool = order_pool(pooled);
  std::vector<double> residuals = spline_residuals(pool, knots);

  const double med = median_of(residuals);
  std::vector<double> abs_dev(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i)
    abs_dev[i] = std::abs(residuals[i] - med);
  const double threshold = med + 3.0 * median_of(abs_dev);

  PointSet3 kept;
  for (std::size_t i = 0; i < pool.points.size(); ++i)
    if (residuals[i] <= threshold) kept.push_back(pool.points[i]);

  SplineFitResult out;
  out.outliers_removed = static_cast<int>(pool.points.size() - kept.size());
  if (out.outliers_removed == 0 ||
      kept.size() < static_cast<std::size_t>(knots)) {
    out.outliers_removed = 0;
    out.samples_used = pool.points.size();
    out.rmse_mm = rms_of(residuals);
    return out;
  }
  OrderedPool refit_pool = order_pool(kept);
  out.samples_used = kept.size();
  out.rmse_mm = rms_of(spline_residuals(refit_pool, knots));
  return out;
}

PointSet3 fitted_spline_curve(const std::vector<BoundarySample>& samples,
                              int num_knots, int resolution) {
  PointSet3 pooled;
  for (const BoundarySample& s : samples)
    pooled.insert(pooled.end(), s.points_mm.begin(), s.points_mm.end());
  if (pooled.size() < 4)
    throw TooFewPoints("spline fit needs at least 4 pooled points");
  if (resolution < 2) throw InvalidConfig("resolution must be at least 2");
  const int knots = std::min(num_knots, static_cast<int>(pooled.size()));

  const OrderedPool pool = order_pool(pooled);
  std::array<std::vector<double>, 3> coords;
  for (int c = 0; c < 3; ++c)
    for (const Vec3& p : pool.points) coords[c].push_back(p(c));
  const std::array<NaturalCubicSpline, 3> fits = {
      fit_least_squares_spline(pool.params, coords[0], knots),
      fit_least_squares_spline(pool.params, coords[1], knots),
      fit_least_squares_spline(pool.params, coords[2], knots)};
  PointSet3 curve;
  curve.reserve(resolution);
  const double span = pool.params.back() - pool.params.front();
  for (int i = 0; i < resolution; ++i) {
    const double t = pool.params.front() + span * i / (resolution - 1);
    curve.emplace_back(fits[0].evaluate(t), fits[1].evaluate(t),
                       fits[2].evaluate(t));
  }
  return curve;
}

double travel_distance(const TrialLog& log) {
  double total = 0.0;
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    const TickRecord& prev = log.records[i - 1];
    const TickRecord& cur = log.records[i];
    if (is_dissection_phase(prev.phase) && is_dissection_phase(cur.phase))
      total += (cur.pch_pose.origin - prev.pch_pose.origin).norm();
  }
  return total;
}

int duration_ticks(const TrialLog& log) {
  for (const TickRecord& r : log.records)
    if (r.phase == Phase::AlignPch)
      return log.records.back().tick - r.tick;
  return 0;
}

std::vector<BoundarySample> dissection_samples(const TrialLog& log) {
  std::vector<BoundarySample> out;
  for (const TickRecord& r : log.records)
    if (is_dissection_phase(r.phase) && r.boundary_snapshot)
      out.push_back({r.tick, *r.boundary_snapshot});
  return out;
}

TrialMetrics metrics_from_log(const TrialLog& log) {
  TrialMetrics m;
  m.aborted = log.aborted();
  if (m.aborted && log.abort_reason)
    m.abort_reason = to_string(*log.abort_reason);
  try {
    const SplineFitResult fit = spline_rmse(dissection_samples(log));
    m.rmse_mm = fit.rmse_mm;
    m.outliers_removed = fit.outliers_removed;
  } catch (const TooFewPoints&) {
    m.rmse_mm = 0.0;
    m.outliers_removed = 0;
  }
  m.distance_mm = travel_distance(log);
  m.duration_ticks = duration_ticks(log);
  m.duration_s = m.duration_ticks * kSecondsPerTick;
  return m;
}

}  // namespace cholsim
