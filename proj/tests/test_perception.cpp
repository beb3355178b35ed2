#include <algorithm>
#include <cmath>
#include <vector>

#include "cholsim/errors.hpp"
#include "cholsim/mask_geometry.hpp"
#include "cholsim/perception.hpp"
#include "cholsim/phantom.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cholsim;

namespace {

double iou(const BinaryMask& a, const BinaryMask& b) {
  int inter = 0, uni = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const bool pa = a.at(x, y), pb = b.at(x, y);
      inter += pa && pb;
      uni += pa || pb;
    }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

bool masks_equal(const BinaryMask& a, const BinaryMask& b) {
  return a == b;
}

}  // namespace

TEST_SUITE("perception") {

TEST_CASE("zero profile reproduces the true masks exactly") {
  const PhantomState st = generate_phantom(PhantomConfig{});
  const LabelMask& labels = render_labels(st);
  const SegObservation obs =
      observe_segmentation(labels, NoiseProfile::zero(), 0);
  CHECK(masks_equal(obs.gallbladder,
                    class_mask(labels, TissueClass::Gallbladder)));
  CHECK(masks_equal(obs.liver, class_mask(labels, TissueClass::Liver)));
  CHECK(masks_equal(obs.liver_bed, class_mask(labels, TissueClass::LiverBed)));
}

TEST_CASE("border jitter keeps per-class overlap high") {
  const PhantomState st = generate_phantom(PhantomConfig{});
  const LabelMask& labels = render_labels(st);
  const BinaryMask true_gall = class_mask(labels, TissueClass::Gallbladder);
  const BinaryMask true_liver = class_mask(labels, TissueClass::Liver);

  std::vector<double> gall_iou, liver_iou;
  for (int seed = 1; seed <= 100; ++seed) {
    NoiseProfile np = NoiseProfile::zero();
    np.boundary_jitter_px = 2;
    np.rng_seed = static_cast<std::uint64_t>(seed);
    const SegObservation obs = observe_segmentation(labels, np, 0);
    gall_iou.push_back(iou(obs.gallbladder, true_gall));
    liver_iou.push_back(iou(obs.liver, true_liver));
  }
  CHECK(oracles::mean(gall_iou) >= 0.90);
  CHECK(oracles::mean(liver_iou) >= 0.90);
}

TEST_CASE("noisy class masks stay pairwise disjoint") {
  const PhantomState st = generate_phantom(PhantomConfig{});
  NoiseProfile np = NoiseProfile::high();
  const SegObservation obs = observe_segmentation(render_labels(st), np, 3);
  for (int y = 0; y < obs.gallbladder.height(); ++y)
    for (int x = 0; x < obs.gallbladder.width(); ++x) {
      const int claims = (obs.gallbladder.at(x, y) ? 1 : 0) +
                         (obs.liver.at(x, y) ? 1 : 0) +
                         (obs.liver_bed.at(x, y) ? 1 : 0);
      CHECK(claims <= 1);
    }
}

TEST_CASE("total pixel corruption shatters the gallbladder blob") {
  const PhantomState st = generate_phantom(PhantomConfig{});
  const LabelMask& labels = render_labels(st);
  const int clean_size =
      count_set(largest_component(class_mask(labels, TissueClass::Gallbladder)));
  REQUIRE(clean_size > 1000);

  NoiseProfile np = NoiseProfile::zero();
  np.pixel_flip_rate = 1.0;
  int worst_fragment = 0;
  for (int tick = 0; tick < 20; ++tick) {
    const SegObservation obs = observe_segmentation(labels, np, tick);
    const int frag = count_set(largest_component(obs.gallbladder, 1));
    worst_fragment = std::max(worst_fragment, frag);
  }
  CHECK(worst_fragment < clean_size / 4);
}

TEST_CASE("observations are pure functions of input, profile, and tick") {
  const PhantomState st = generate_phantom(PhantomConfig{});
  const LabelMask& labels = render_labels(st);
  NoiseProfile np = NoiseProfile::high();

  const SegObservation a = observe_segmentation(labels, np, 5);
  const SegObservation b = observe_segmentation(labels, np, 5);
  CHECK(masks_equal(a.gallbladder, b.gallbladder));
  CHECK(masks_equal(a.liver, b.liver));
  CHECK(masks_equal(a.liver_bed, b.liver_bed));

  const SegObservation c = observe_segmentation(labels, np, 6);
  CHECK_FALSE(masks_equal(a.gallbladder, c.gallbladder));

  Frame pose;
  pose.origin = Vec3(0, 0, 100);
  const CameraModel cam = camera_for(st.config);
  np.keypoint_sigma_px = 1.5;
  const KeypointObservation ka = observe_keypoints(
      pose, fbf_landmarks(), cam, labels.width(), labels.height(), np, 5);
  const KeypointObservation kb = observe_keypoints(
      pose, fbf_landmarks(), cam, labels.width(), labels.height(), np, 5);
  REQUIRE(ka.keypoints.size() == kb.keypoints.size());
  for (std::size_t i = 0; i < ka.keypoints.size(); ++i) {
    CHECK(ka.keypoints[i].px == kb.keypoints[i].px);
    CHECK(ka.keypoints[i].dropped == kb.keypoints[i].dropped);
  }
}

TEST_CASE("noise-free keypoints are exact projections") {
  const PhantomConfig pc;
  const CameraModel cam = camera_for(pc);
  Frame pose;
  pose.origin = Vec3(2.0, -3.0, 105.0);
  const InstrumentLandmarks lm = fbf_landmarks();
  const KeypointObservation obs =
      observe_keypoints(pose, lm, cam, pc.grid_width, pc.grid_height,
                        NoiseProfile::zero(), 0);
  REQUIRE(obs.keypoints.size() == lm.offsets_mm.size());
  for (std::size_t i = 0; i < obs.keypoints.size(); ++i) {
    const Vec2 truth = project(cam, pose.to_world(lm.offsets_mm[i]));
    CHECK_FALSE(obs.keypoints[i].dropped);
    CHECK(obs.keypoints[i].confidence == doctest::Approx(1.0));
    CHECK(obs.keypoints[i].name == lm.names[i]);
    CHECK(obs.keypoints[i].px.x() == doctest::Approx(truth.x()).epsilon(1e-12));
    CHECK(obs.keypoints[i].px.y() == doctest::Approx(truth.y()).epsilon(1e-12));
  }
}

TEST_CASE("keypoints projecting outside the image are dropped") {
  const PhantomConfig pc;
  const CameraModel cam = camera_for(pc);
  Frame pose;
  pose.origin = Vec3(-500.0, 0.0, 105.0);  // far out of frame
  const KeypointObservation obs =
      observe_keypoints(pose, pch_landmarks(), cam, pc.grid_width,
                        pc.grid_height, NoiseProfile::zero(), 0);
  for (const Keypoint& k : obs.keypoints) {
    CHECK(k.dropped);
    CHECK(k.confidence == doctest::Approx(0.0));
  }
}

TEST_CASE("keypoint pixel noise matches its configured scale") {
  const PhantomConfig pc;
  const CameraModel cam = camera_for(pc);
  Frame pose;
  pose.origin = Vec3(0, 0, 100);
  const InstrumentLandmarks lm = fbf_landmarks();
  NoiseProfile np = NoiseProfile::zero();
  np.keypoint_sigma_px = 2.0;

  std::vector<double> deviations;
  for (int tick = 0; tick < 1000; ++tick) {
    const KeypointObservation obs = observe_keypoints(
        pose, lm, cam, pc.grid_width, pc.grid_height, np, tick);
    for (std::size_t i = 0; i < obs.keypoints.size(); ++i) {
      if (obs.keypoints[i].dropped) continue;
      const Vec2 truth = project(cam, pose.to_world(lm.offsets_mm[i]));
      deviations.push_back(obs.keypoints[i].px.x() - truth.x());
      deviations.push_back(obs.keypoints[i].px.y() - truth.y());
    }
  }
  REQUIRE(deviations.size() > 1000);
  const double sd = oracles::stddev_population(deviations);
  CHECK(sd > 1.8);
  CHECK(sd < 2.2);
  CHECK(std::abs(oracles::mean(deviations)) < 0.15);
}

TEST_CASE("dropout hits its configured rate") {
  const PhantomConfig pc;
  const CameraModel cam = camera_for(pc);
  Frame pose;
  pose.origin = Vec3(0, 0, 100);
  NoiseProfile np = NoiseProfile::zero();
  np.keypoint_dropout = 0.3;

  int dropped = 0, total = 0;
  for (int tick = 0; tick < 1000; ++tick) {
    const KeypointObservation obs =
        observe_keypoints(pose, fbf_landmarks(), cam, pc.grid_width,
                          pc.grid_height, np, tick);
    for (const Keypoint& k : obs.keypoints) {
      ++total;
      dropped += k.dropped ? 1 : 0;
    }
  }
  const double fraction = static_cast<double>(dropped) / total;
  CHECK(fraction > 0.25);
  CHECK(fraction < 0.35);

  np.keypoint_dropout = 1.0;
  const KeypointObservation all_gone =
      observe_keypoints(pose, fbf_landmarks(), cam, pc.grid_width,
                        pc.grid_height, np, 0);
  for (const Keypoint& k : all_gone.keypoints) CHECK(k.dropped);
}

TEST_CASE("pose fit recovers a rigid pose from clean keypoints") {
  const PhantomConfig pc;
  const CameraModel cam = camera_for(pc);
  Frame pose;
  pose.origin = Vec3(4.0, -2.0, 102.0);
  // A genuine rotation: 30 degrees about a skew axis.
  const double c = std::cos(0.5), s = std::sin(0.5);
  Mat3 rz;
  rz << c, -s, 0, s, c, 0, 0, 0, 1;
  Mat3 rx;
  const double c2 = std::cos(0.3), s2 = std::sin(0.3);
  rx << 1, 0, 0, 0, c2, -s2, 0, s2, c2;
  pose.axes = rz * rx;

  const InstrumentLandmarks lm = pch_landmarks();
  const KeypointObservation obs =
      observe_keypoints(pose, lm, cam, pc.grid_width, pc.grid_height,
                        NoiseProfile::zero(), 0);
  std::vector<double> depths;
  for (const Vec3& off : lm.offsets_mm) depths.push_back(pose.to_world(off).z());

  const std::optional<Frame> fit = fit_instrument_pose(obs, lm, depths, cam);
  REQUIRE(fit.has_value());
  CHECK((fit->origin - pose.origin).norm() < 1e-6);
  CHECK((fit->axes - pose.axes).norm() < 1e-6);
  CHECK(fit->is_right_handed(1e-9));

  // Fewer than three surviving keypoints: no pose.
  KeypointObservation starved = obs;
  for (std::size_t i = 2; i < starved.keypoints.size(); ++i)
    starved.keypoints[i].dropped = true;
  CHECK_FALSE(fit_instrument_pose(starved, lm, depths, cam).has_value());

  // Exactly three still fit the pose.
  KeypointObservation three = obs;
  three.keypoints[0].dropped = true;
  REQUIRE(three.keypoints.size() == 4);
  const std::optional<Frame> fit3 = fit_instrument_pose(three, lm, depths, cam);
  REQUIRE(fit3.has_value());
  CHECK((fit3->origin - pose.origin).norm() < 1e-6);
}

TEST_CASE("back projection inverts projection on the grid") {
  CameraModel cam;
  cam.focal_px = 500.0;
  cam.principal_px = Vec2(80.0, 60.0);

  const Vec3 center = back_project_pixel(cam, 80.0, 60.0, 100.0);
  CHECK(center.x() == doctest::Approx(0.0));
  CHECK(center.y() == doctest::Approx(0.0));
  CHECK(center.z() == doctest::Approx(100.0));

  // A pixel 5 columns right of center at depth 100 and focal 500 sits 1 mm
  // to the right.
  const Vec3 right = back_project_pixel(cam, 85.0, 60.0, 100.0);
  CHECK(right.x() == doctest::Approx(1.0));
  CHECK(right.y() == doctest::Approx(0.0));

  for (const Vec3& p :
       {Vec3(3.0, -4.0, 90.0), Vec3(-7.5, 2.5, 120.0), Vec3(0.25, 0.5, 75.0)}) {
    const Vec2 px = project(cam, p);
    const Vec3 back = back_project_pixel(cam, px.x(), px.y(), p.z());
    CHECK((back - p).norm() < 1e-9);
  }

  BinaryMask empty(4, 4, 0);
  DepthMap depth(4, 4, 100.0);
  CHECK(back_project(empty, depth, cam).empty());

  BinaryMask square(4, 4, 0);
  square.at(1, 1) = 1;
  square.at(2, 1) = 1;
  DepthMap wrong(5, 4, 100.0);
  CHECK_THROWS_AS(back_project(square, wrong, cam), const DimensionMismatch&);

  // Row-major order of the lifted points.
  square.at(1, 2) = 1;
  const PointSet3 lifted = back_project(square, depth, cam);
  REQUIRE(lifted.size() == 3);
  CHECK(lifted[0] == back_project_pixel(cam, 1, 1, 100.0));
  CHECK(lifted[1] == back_project_pixel(cam, 2, 1, 100.0));
  CHECK(lifted[2] == back_project_pixel(cam, 1, 2, 100.0));
}

TEST_CASE("noise profile presets and validation") {
  const NoiseProfile z = NoiseProfile::preset("zero");
  CHECK(z.is_zero());
  CHECK(z.boundary_jitter_px == 0);
  CHECK(z.pixel_flip_rate == 0.0);
  CHECK(z.keypoint_sigma_px == 0.0);
  CHECK(z.keypoint_dropout == 0.0);

  const NoiseProfile low = NoiseProfile::preset("low");
  CHECK(low.boundary_jitter_px == NoiseProfile::low().boundary_jitter_px);
  CHECK(low.pixel_flip_rate == NoiseProfile::low().pixel_flip_rate);
  CHECK_FALSE(low.is_zero());

  const NoiseProfile high = NoiseProfile::preset("high");
  CHECK(high.boundary_jitter_px > low.boundary_jitter_px);
  CHECK(high.pixel_flip_rate > low.pixel_flip_rate);
  CHECK(high.keypoint_sigma_px > low.keypoint_sigma_px);
  CHECK(high.keypoint_dropout > low.keypoint_dropout);

  CHECK_THROWS_AS(NoiseProfile::preset("bogus"), const InvalidConfig&);

  NoiseProfile bad = NoiseProfile::zero();
  bad.boundary_jitter_px = -1;
  CHECK_THROWS_AS(bad.validate(), const InvalidConfig&);
  bad = NoiseProfile::zero();
  bad.pixel_flip_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), const InvalidConfig&);
  bad = NoiseProfile::zero();
  bad.keypoint_sigma_px = -0.1;
  CHECK_THROWS_AS(bad.validate(), const InvalidConfig&);
  bad = NoiseProfile::zero();
  bad.keypoint_dropout = 2.0;
  CHECK_THROWS_AS(bad.validate(), const InvalidConfig&);
}

}  // TEST_SUITE
