#include "cholsim/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cholsim {
namespace {

// Fixed scene-response constants; config fields cover everything a scenario
// needs to vary.
constexpr double kStretchGain = 0.25;      // mm lateral per mm of pull
constexpr double kStretchDecayMm = 15.0;   // pull influence falloff
constexpr double kAttachMarginMm = 1.0;    // support overshoot beyond curve
constexpr int kWavinessCyclesLo = 2;
constexpr int kWavinessCyclesHi = 3;
constexpr double kWaveShape = 8.0;  // tanh squaring of the wave profile
constexpr double kBedAdjacencyMm = 1.0;    // band depth that still glues (2 px)
constexpr double kMaxGapMm = 1.5;          // background gap at full retraction
constexpr double kBumpOffsetXMm = -8.0;    // mound center left of gallbladder
constexpr double kBumpSigmaXMm = 4.0;
constexpr double kBumpSigmaYMm = 7.0;

double pixel_to_mm_x(const PhantomConfig& c, int u) {
  return (u - c.grid_width / 2) * c.mm_per_pixel;
}
double pixel_to_mm_y(const PhantomConfig& c, int v) {
  return (v - c.grid_height / 2) * c.mm_per_pixel;
}
int mm_to_pixel_x(const PhantomConfig& c, double x) {
  return static_cast<int>(std::lround(x / c.mm_per_pixel)) + c.grid_width / 2;
}
int mm_to_pixel_y(const PhantomConfig& c, double y) {
  return static_cast<int>(std::lround(y / c.mm_per_pixel)) + c.grid_height / 2;
}

// Base interface curve x at height y: piecewise-linear through the arc
// control points, clamped beyond the ends.
double base_curve_x(const PhantomConfig& c, double y) {
  const auto& arc = c.attachment_arc;
  if (y <= arc.front().y()) return arc.front().x();
  if (y >= arc.back().y()) return arc.back().x();
  for (std::size_t i = 1; i < arc.size(); ++i) {
    if (y <= arc[i].y()) {
      const double t = (y - arc[i - 1].y()) / (arc[i].y() - arc[i - 1].y());
      return arc[i - 1].x() + t * (arc[i].x() - arc[i - 1].x());
    }
  }
  return arc.back().x();
}

double ellipse_halfwidth(const PhantomConfig& c, double y) {
  const double dy = (y - c.gallbladder_center.y()) / c.gallbladder_radii.y();
  const double t = 1.0 - dy * dy;
  return t <= 0.0 ? -1.0 : c.gallbladder_radii.x() * std::sqrt(t);
}

double wave_scale(const PhantomState& s) {
  if (!s.grasp) return 1.0;
  return std::max(0.0, 1.0 - s.grasp->cumulative_pull_mm /
                            s.config.pull_to_straight);
}

// Lateral stretch of the grasped tissue at height y (mm, toward -x).
double stretch_delta(const PhantomState& s, double y_mm) {
  if (!s.grasp) return 0.0;
  const double toward_minus_x = std::max(0.0, -s.grasp->pull_accum_xy.x());
  if (toward_minus_x == 0.0) return 0.0;
  const double fall =
      std::exp(-std::abs(y_mm - s.grasp->point_mm.y()) / kStretchDecayMm);
  return kStretchGain * toward_minus_x * fall;
}

bool in_support(const PhantomConfig& c, double x_mm, double y_mm,
                double delta_mm) {
  const double dx = (x_mm + delta_mm - c.gallbladder_center.x()) /
                    c.gallbladder_radii.x();
  const double dy = (y_mm - c.gallbladder_center.y()) / c.gallbladder_radii.y();
  return dx * dx + dy * dy <= 1.0;
}

struct RowRender {
  double curve_x = 0.0;  // current interface position
  double band = 0.0;     // liver-bed depth (mm), 0 when attached
  double gap = 0.0;      // background gap between gallbladder and bed
  bool attached = true;
};

// Current interface position of an attached row.
double attached_row_x(const PhantomState& s, const PhantomState::CurveRow& r) {
  return r.base_x_mm + r.wave_mm * wave_scale(s) + r.jitter_mm;
}

std::vector<RowRender> render_rows(const PhantomState& s) {
  const double px = s.config.mm_per_pixel;
  std::vector<RowRender> out(s.rows.size());
  // Distance (pixel rows) from each detached row to the nearest attached one
  // drives the retraction taper: the band deepens 1 px per row.
  std::vector<double> dist(s.rows.size(),
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    if (s.rows[i].attached) dist[i] = 0.0;
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    dist[i] = std::min(dist[i], dist[i - 1] + 1.0);
  for (std::size_t i = s.rows.size(); i-- > 1;)
    dist[i - 1] = std::min(dist[i - 1], dist[i] + 1.0);

  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    RowRender& rr = out[i];
    rr.attached = r.attached;
    if (r.attached) {
      rr.curve_x = attached_row_x(s, r);
      continue;
    }
    rr.curve_x = r.frozen_x_mm;
    const double target = r.band_target_mm;
    const double taper_rows = std::max(1.0, target / px);
    const double reach = std::isinf(dist[i])
                             ? 1.0
                             : std::min(1.0, dist[i] / taper_rows);
    rr.band = target * reach;
    rr.gap = std::clamp(rr.band - kBedAdjacencyMm, 0.0, kMaxGapMm);
  }
  return out;
}

void rebuild_grids(PhantomState& s) {
  const PhantomConfig& c = s.config;
  const std::vector<RowRender> rr = render_rows(s);
  const int row0 = s.rows.empty() ? 0 : s.rows.front().row_px;
  const int row1 = s.rows.empty() ? -1 : s.rows.back().row_px;
  const double setback = 2.0 * c.mm_per_pixel;

  s.labels = LabelMask(c.grid_width, c.grid_height, TissueClass::Background);
  s.depth = DepthMap(c.grid_width, c.grid_height, c.depth_base);

  const double bump_cx = c.gallbladder_center.x() + kBumpOffsetXMm;
  const double bump_cy = c.gallbladder_center.y();

  for (int v = 0; v < c.grid_height; ++v) {
    const double y = pixel_to_mm_y(c, v);
    const double delta = stretch_delta(s, y);
    const bool on_curve = !s.rows.empty() && v >= row0 && v <= row1;

    double curve_x, gall_limit;
    bool detached = false;
    double band = 0.0, gap = 0.0;
    if (on_curve) {
      const RowRender& r = rr[static_cast<std::size_t>(v - row0)];
      curve_x = r.curve_x;
      detached = !r.attached;
      band = r.band;
      gap = r.gap;
      gall_limit = detached ? curve_x - band - gap : curve_x;
    } else {
      curve_x = base_curve_x(c, y);
      // Beyond the interface rows the edge keeps the end row's retraction so
      // a detached scene leaves no stray adjacency at the seam.
      double continuation = 0.0;
      if (!s.rows.empty()) {
        const RowRender& end = (v < row0) ? rr.front() : rr.back();
        if (!end.attached) continuation = end.band + end.gap;
      }
      gall_limit = curve_x - setback - continuation;
    }

    for (int u = 0; u < c.grid_width; ++u) {
      const double x = pixel_to_mm_x(c, u);
      TissueClass cls = TissueClass::Background;
      if (x > curve_x) {
        cls = TissueClass::Liver;
      } else if (detached && x > curve_x - band) {
        cls = TissueClass::LiverBed;
      } else if (x <= gall_limit && in_support(c, x, y, delta)) {
        cls = TissueClass::Gallbladder;
      }
      s.labels.at(u, v) = cls;

      const double bx = (x - bump_cx) / kBumpSigmaXMm;
      const double by = (y - bump_cy) / kBumpSigmaYMm;
      s.depth.at(u, v) =
          c.depth_base + c.depth_bulge * std::exp(-0.5 * (bx * bx + by * by));
    }
  }

  s.attachment.clear();
  for (const auto& r : s.rows)
    if (r.attached) s.attachment.emplace_back(attached_row_x(s, r), r.y_mm);
}

}  // namespace

void PhantomConfig::validate() const {
  if (grid_width < 64 || grid_height < 64)
    throw InvalidConfig("grid must be at least 64x64");
  if (!(mm_per_pixel > 0.0) || !std::isfinite(mm_per_pixel))
    throw InvalidConfig("mm_per_pixel must be positive");
  if (!(gallbladder_radii.x() > 0.0) || !(gallbladder_radii.y() > 0.0))
    throw InvalidConfig("gallbladder radii must be positive");
  if (attachment_arc.size() < 2)
    throw InvalidConfig("attachment arc needs at least two control points");
  for (std::size_t i = 1; i < attachment_arc.size(); ++i)
    if (!(attachment_arc[i].y() > attachment_arc[i - 1].y()))
      throw InvalidConfig("attachment arc must have strictly increasing y");
  const double margin = 2.0;
  const double x_lo = (0 - grid_width / 2) * mm_per_pixel + margin;
  const double x_hi = (grid_width - 1 - grid_width / 2) * mm_per_pixel - margin;
  const double y_lo = (0 - grid_height / 2) * mm_per_pixel + margin;
  const double y_hi =
      (grid_height - 1 - grid_height / 2) * mm_per_pixel - margin;
  for (const Vec2& p : attachment_arc)
    if (p.x() < x_lo || p.x() > x_hi || p.y() < y_lo || p.y() > y_hi)
      throw InvalidConfig("attachment arc must stay 2 mm inside the grid");
  if (initial_waviness_amplitude < 0.0 ||
      !std::isfinite(initial_waviness_amplitude))
    throw InvalidConfig("waviness amplitude must be non-negative");
  if (!(depth_base > 0.0)) throw InvalidConfig("depth_base must be positive");
  if (depth_bulge < 0.0 || depth_bulge >= depth_base)
    throw InvalidConfig("depth_bulge must be in [0, depth_base)");
  if (!(max_pull_step > 0.0))
    throw InvalidConfig("max_pull_step must be positive");
  if (!(pull_to_straight > 0.0))
    throw InvalidConfig("pull_to_straight must be positive");
  if (deform_jitter < 0.0 || !std::isfinite(deform_jitter))
    throw InvalidConfig("deform_jitter must be non-negative");
}

PhantomState generate_phantom(const PhantomConfig& config) {
  config.validate();

  PhantomState s;
  s.config = config;
  s.deformation_rng = Rng(config.rng_seed);

  const double phase = s.deformation_rng.uniform(0.0, 2.0 * M_PI);
  // A whole number of wave cycles keeps the window balanced around the base
  // curve for every phase, so the line-fit deviation of the attachment stays
  // pinned near the amplitude instead of varying with the drawn phase.  At
  // least two cycles, because a single cycle still correlates with a linear
  // ramp (its fundamental has a nonzero first moment), letting the fitted
  // line tilt into the wave and absorb up to half of its variance.
  const int cycles =
      s.deformation_rng.uniform_int(kWavinessCyclesLo, kWavinessCyclesHi);

  // Rows that can carry attachment: the elliptical support must overshoot the
  // curve by every lateral excursion the scene can produce.
  const double overshoot = config.initial_waviness_amplitude +
                           kStretchGain * config.pull_to_straight +
                           kAttachMarginMm;
  const double y_arc_lo = config.attachment_arc.front().y();
  const double y_arc_hi = config.attachment_arc.back().y();
  std::vector<int> row_pixels;
  for (int v = 0; v < config.grid_height; ++v) {
    const double y = pixel_to_mm_y(config, v);
    if (y < y_arc_lo || y > y_arc_hi) continue;
    const double half = ellipse_halfwidth(config, y);
    if (half < 0.0) continue;
    const double rel = base_curve_x(config, y) - config.gallbladder_center.x();
    if (half >= rel + overshoot) row_pixels.push_back(v);
  }
  if (row_pixels.size() < 2)
    throw InvalidConfig(
        "attachment arc and gallbladder geometry leave no attachable rows");
  for (std::size_t i = 1; i < row_pixels.size(); ++i)
    if (row_pixels[i] != row_pixels[i - 1] + 1)
      throw InvalidConfig("attachable rows are not contiguous");

  const double n = static_cast<double>(row_pixels.size() - 1);
  for (std::size_t i = 0; i < row_pixels.size(); ++i) {
    PhantomState::CurveRow r;
    r.row_px = row_pixels[i];
    r.y_mm = pixel_to_mm_y(config, r.row_px);
    r.base_x_mm = base_curve_x(config, r.y_mm);
    const double t = n > 0.0 ? static_cast<double>(i) / n : 0.0;
    // Squared-up sine: the tanh shaping keeps the peak exactly at the
    // configured amplitude (so the support-overshoot bound above stays valid)
    // while raising the RMS lateral deviation to ~0.95x the amplitude; a pure
    // sine's RMS is only 0.71x, which would leave the line-fit deviation of
    // the generated attachment well below the amplitude parameter.
    const double ridge = std::sin(2.0 * M_PI * cycles * t + phase);
    r.wave_mm = config.initial_waviness_amplitude *
                std::tanh(kWaveShape * ridge) / std::tanh(kWaveShape);
    s.rows.push_back(r);
  }

  rebuild_grids(s);
  return s;
}

PhantomState apply_pull(PhantomState state, const Vec3& pull_mm) {
  if (!state.grasp) throw NoGrasp("apply_pull without an established grasp");
  const double magnitude = pull_mm.norm();
  if (magnitude > state.config.max_pull_step)
    throw PullExceedsLimit("pull step exceeds max_pull_step");
  if (magnitude == 0.0) return state;

  state.grasp->cumulative_pull_mm += magnitude;
  state.grasp->pull_accum_xy += Vec2(pull_mm.x(), pull_mm.y());
  rebuild_grids(state);
  return state;
}

PhantomState apply_dissection(PhantomState state, const Vec3& point_mm,
                              double energy_radius_mm) {
  if (!(energy_radius_mm > 0.0))
    throw InvalidConfig("energy radius must be positive");

  std::vector<std::size_t> hit;
  std::size_t attach_index = 0;
  for (std::size_t i = 0; i < state.rows.size(); ++i) {
    if (!state.rows[i].attached) continue;
    const Vec3 p = attachment_point_3d(state, attach_index++);
    if ((p - point_mm).norm() <= energy_radius_mm) hit.push_back(i);
  }
  if (hit.empty()) return state;

  for (const std::size_t i : hit) {
    auto& r = state.rows[i];
    r.attached = false;
    r.frozen_x_mm = attached_row_x(state, r);
    r.band_target_mm = energy_radius_mm;
  }
  // Remaining connected tissue shifts slightly: perpendicular perturbation of
  // magnitude at most deform_jitter per event.
  for (auto& r : state.rows) {
    if (!r.attached) continue;
    r.jitter_mm += state.deformation_rng.uniform(-state.config.deform_jitter,
                                                 state.config.deform_jitter);
  }
  rebuild_grids(state);
  return state;
}

PhantomState attach_grasp(PhantomState state, const Vec3& grasp_point_mm) {
  GraspState g;
  g.point_mm = grasp_point_mm;
  state.grasp = g;
  rebuild_grids(state);
  return state;
}

const LabelMask& render_labels(const PhantomState& state) {
  return state.labels;
}
const DepthMap& render_depth(const PhantomState& state) { return state.depth; }

CameraModel camera_for(const PhantomConfig& config) {
  CameraModel cam;
  cam.focal_px = config.depth_base / config.mm_per_pixel;
  cam.principal_px =
      Vec2(config.grid_width / 2.0, config.grid_height / 2.0);
  cam.view_direction = Vec3(0.0, 0.0, 1.0);
  return cam;
}

Vec3 attachment_point_3d(const PhantomState& state, std::size_t index) {
  if (index >= state.attachment.size())
    throw EmptyInput("attachment index out of range");
  const Vec2& p = state.attachment[index];
  const PhantomConfig& c = state.config;
  const int u = std::clamp(mm_to_pixel_x(c, p.x()), 0, c.grid_width - 1);
  const int v = std::clamp(mm_to_pixel_y(c, p.y()), 0, c.grid_height - 1);
  const double z = state.depth.at(u, v);
  return Vec3(p.x() * z / c.depth_base, p.y() * z / c.depth_base, z);
}

bool PhantomState::operator==(const PhantomState& other) const {
  auto row_eq = [](const CurveRow& a, const CurveRow& b) {
    return a.row_px == b.row_px && a.y_mm == b.y_mm &&
           a.base_x_mm == b.base_x_mm && a.wave_mm == b.wave_mm &&
           a.jitter_mm == b.jitter_mm && a.attached == b.attached &&
           a.frozen_x_mm == b.frozen_x_mm &&
           a.band_target_mm == b.band_target_mm;
  };
  if (rows.size() != other.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!row_eq(rows[i], other.rows[i])) return false;
  return labels == other.labels && depth == other.depth &&
         attachment == other.attachment && grasp == other.grasp &&
         deformation_rng == other.deformation_rng;
}

}  // namespace cholsim
