#include "cholsim/perception.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>

#include "cholsim/rng.hpp"

namespace cholsim {
namespace {

constexpr std::uint64_t kSegStream = 1;
constexpr std::uint64_t kKeypointStream = 2;

constexpr std::array<int, 4> kDx4 = {0, -1, 1, 0};
constexpr std::array<int, 4> kDy4 = {-1, 0, 0, 1};

// One jitter step: for every unordered class pair a random winner dilates one
// pixel into the loser along their shared border, each border pixel flipping
// with probability 1/2 so edges turn ragged instead of shifting rigidly.
void jitter_once(LabelMask& labels, Rng& rng) {
  // eats[a][b]: class a converts border pixels of class b this step.
  bool eats[4][4] = {};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      if (rng.uniform() < 0.5)
        eats[a][b] = true;
      else
        eats[b][a] = true;
    }
  const LabelMask snapshot = labels;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const int own = static_cast<int>(snapshot.at(x, y));
      for (int winner = 0; winner < 4; ++winner) {
        if (winner == own || !eats[winner][own]) continue;
        bool adjacent = false;
        for (int i = 0; i < 4 && !adjacent; ++i) {
          const int nx = x + kDx4[i];
          const int ny = y + kDy4[i];
          if (snapshot.in_bounds(nx, ny) &&
              static_cast<int>(snapshot.at(nx, ny)) == winner)
            adjacent = true;
        }
        if (!adjacent) continue;
        if (rng.uniform() < 0.5)
          labels.at(x, y) = static_cast<TissueClass>(winner);
        break;
      }
    }
  }
}

LabelMask majority_smooth(const LabelMask& labels) {
  LabelMask out = labels;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      std::array<int, 4> counts{};
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (labels.in_bounds(nx, ny))
            ++counts[static_cast<int>(labels.at(nx, ny))];
        }
      const int best = *std::max_element(counts.begin(), counts.end());
      const int center = static_cast<int>(labels.at(x, y));
      if (counts[center] == best) continue;  // keep center on ties
      for (int c = 0; c < 4; ++c)
        if (counts[c] == best) {
          out.at(x, y) = static_cast<TissueClass>(c);
          break;
        }
    }
  }
  return out;
}

}  // namespace

NoiseProfile NoiseProfile::zero() { return NoiseProfile{}; }

NoiseProfile NoiseProfile::low() {
  NoiseProfile p;
  p.boundary_jitter_px = 1;
  p.pixel_flip_rate = 0.002;
  p.keypoint_sigma_px = 1.0;
  p.keypoint_dropout = 0.01;
  return p;
}

NoiseProfile NoiseProfile::high() {
  NoiseProfile p;
  p.boundary_jitter_px = 3;
  p.pixel_flip_rate = 0.01;
  p.keypoint_sigma_px = 3.0;
  p.keypoint_dropout = 0.10;
  return p;
}

NoiseProfile NoiseProfile::preset(const std::string& name) {
  if (name == "zero") return zero();
  if (name == "low") return low();
  if (name == "high") return high();
  throw InvalidConfig("unknown noise preset: " + name);
}

void NoiseProfile::validate() const {
  if (boundary_jitter_px < 0)
    throw InvalidConfig("boundary_jitter_px must be non-negative");
  if (pixel_flip_rate < 0.0 || pixel_flip_rate > 1.0)
    throw InvalidConfig("pixel_flip_rate must be in [0, 1]");
  if (keypoint_sigma_px < 0.0 || !std::isfinite(keypoint_sigma_px))
    throw InvalidConfig("keypoint_sigma_px must be non-negative");
  if (keypoint_dropout < 0.0 || keypoint_dropout > 1.0)
    throw InvalidConfig("keypoint_dropout must be in [0, 1]");
}

SegObservation observe_segmentation(const LabelMask& labels,
                                    const NoiseProfile& noise, int tick) {
  noise.validate();
  SegObservation obs;
  obs.tick = tick;

  LabelMask work = labels;
  if (!noise.is_zero()) {
    Rng rng(mix_seed(noise.rng_seed, kSegStream,
                     static_cast<std::uint64_t>(tick)));
    for (int step = 0; step < noise.boundary_jitter_px; ++step)
      jitter_once(work, rng);
    if (noise.pixel_flip_rate > 0.0) {
      for (int y = 0; y < work.height(); ++y)
        for (int x = 0; x < work.width(); ++x)
          if (rng.uniform() < noise.pixel_flip_rate)
            work.at(x, y) = static_cast<TissueClass>(rng.uniform_int(0, 3));
    }
    work = majority_smooth(work);
  }

  obs.liver = class_mask(work, TissueClass::Liver);
  obs.gallbladder = class_mask(work, TissueClass::Gallbladder);
  obs.liver_bed = class_mask(work, TissueClass::LiverBed);
  return obs;
}

InstrumentLandmarks fbf_landmarks() {
  InstrumentLandmarks lm;
  lm.instrument = "fbf";
  lm.names = {"tip", "jaw_left", "jaw_right", "wrist"};
  lm.offsets_mm = {Vec3(0.0, 0.0, 0.0), Vec3(2.5, 0.0, -4.0),
                   Vec3(-2.5, 0.0, -4.0), Vec3(0.0, 3.0, -10.0)};
  return lm;
}

InstrumentLandmarks pch_landmarks() {
  InstrumentLandmarks lm;
  lm.instrument = "pch";
  lm.names = {"tip", "heel", "shaft_a", "shaft_b"};
  lm.offsets_mm = {Vec3(0.0, 0.0, 0.0), Vec3(0.0, 2.5, -5.0),
                   Vec3(2.0, 0.0, -9.0), Vec3(-2.0, 0.5, -14.0)};
  return lm;
}

KeypointObservation observe_keypoints(const Frame& pose,
                                      const InstrumentLandmarks& landmarks,
                                      const CameraModel& camera,
                                      int image_width, int image_height,
                                      const NoiseProfile& noise, int tick) {
  noise.validate();
  Rng rng(mix_seed(noise.rng_seed, kKeypointStream,
                   static_cast<std::uint64_t>(tick)));
  KeypointObservation obs;
  obs.instrument = landmarks.instrument;
  obs.tick = tick;

  auto inside = [&](const Vec2& p) {
    return p.x() >= 0.0 && p.x() <= image_width - 1.0 && p.y() >= 0.0 &&
           p.y() <= image_height - 1.0;
  };

  for (std::size_t i = 0; i < landmarks.offsets_mm.size(); ++i) {
    // Draw every landmark's noise regardless of visibility so the stream does
    // not shift when an instrument leaves the image.
    const double nx = rng.gaussian() * noise.keypoint_sigma_px;
    const double ny = rng.gaussian() * noise.keypoint_sigma_px;
    const double drop_draw = rng.uniform();

    Keypoint kp;
    kp.name = landmarks.names[i];
    const Vec2 truth = project(camera, pose.to_world(landmarks.offsets_mm[i]));
    kp.px = truth + Vec2(nx, ny);
    kp.dropped = drop_draw < noise.keypoint_dropout || !inside(truth) ||
                 !inside(kp.px);
    kp.confidence =
        kp.dropped ? 0.0 : 1.0 / (1.0 + (kp.px - truth).norm());
    obs.keypoints.push_back(std::move(kp));
  }
  return obs;
}

std::optional<Frame> fit_instrument_pose(const KeypointObservation& obs,
                                         const InstrumentLandmarks& landmarks,
                                         const std::vector<double>& depths_mm,
                                         const CameraModel& camera) {
  if (obs.keypoints.size() != landmarks.offsets_mm.size() ||
      depths_mm.size() != landmarks.offsets_mm.size())
    throw DimensionMismatch("keypoints, landmarks and depths must align");

  std::vector<int> kept;
  for (std::size_t i = 0; i < obs.keypoints.size(); ++i)
    if (!obs.keypoints[i].dropped) kept.push_back(static_cast<int>(i));
  if (kept.size() < 3) return std::nullopt;

  Eigen::Matrix3Xd src(3, kept.size());
  Eigen::Matrix3Xd dst(3, kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const int i = kept[k];
    src.col(k) = landmarks.offsets_mm[i];
    dst.col(k) = back_project_pixel(camera, obs.keypoints[i].px.x(),
                                    obs.keypoints[i].px.y(), depths_mm[i]);
  }

  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, false);
  Frame pose;
  pose.axes = t.block<3, 3>(0, 0);
  pose.origin = t.block<3, 1>(0, 3);
  return pose;
}

}  // namespace cholsim
