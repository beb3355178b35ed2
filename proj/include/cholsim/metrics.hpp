#pragma once

#include <vector>

#include "cholsim/geometry.hpp"
#include "cholsim/trial_log.hpp"

namespace cholsim {

constexpr double kSecondsPerTick = 0.1;
constexpr int kSplineKnots = 10;

// Root-mean-square perpendicular distance of the points to their own
// total-least-squares 3D line. Throws TooFewPoints (< 2).
double boundary_deviation(const PointSet3& points_mm);

struct BoundarySample {
  int tick = 0;
  PointSet3 points_mm;
};

struct SplineFitResult {
  double rmse_mm = 0.0;
  int outliers_removed = 0;
  std::size_t samples_used = 0;
};

// Pools all sample points, orders them by angle in their own dominant plane
// (so the result is invariant under rigid motion of the whole set), fits a
// least-squares natural cubic spline with num_knots knots per coordinate over
// chord-length parameters, removes residuals above median + 3*MAD once,
// refits, and reports the RMS residual. Small pools clamp the knot count to
// the pool size; throws TooFewPoints below 4 pooled points.
SplineFitResult spline_rmse(const std::vector<BoundarySample>& samples,
                            int num_knots = kSplineKnots);

// The fitted spline of spline_rmse (before outlier removal) sampled at
// `resolution` evenly spaced parameters; used by plotting.
PointSet3 fitted_spline_curve(const std::vector<BoundarySample>& samples,
                              int num_knots = kSplineKnots,
                              int resolution = 200);

// Sum of hook displacements between consecutive ticks that both belong to
// dissection phases (SelectTarget / MoveToTarget / ApplyEnergy).
double travel_distance(const TrialLog& log);

// Ticks from the first AlignPch record to the trial's last record.
int duration_ticks(const TrialLog& log);

struct TrialMetrics {
  double rmse_mm = 0.0;
  int outliers_removed = 0;
  double distance_mm = 0.0;
  int duration_ticks = 0;
  double duration_s = 0.0;
  bool aborted = false;
  std::string abort_reason;  // empty when completed
};

// All summary metrics recomputed from the log alone.
TrialMetrics metrics_from_log(const TrialLog& log);

// Dissection-phase boundary snapshots pooled for the spline fit.
std::vector<BoundarySample> dissection_samples(const TrialLog& log);

}  // namespace cholsim
