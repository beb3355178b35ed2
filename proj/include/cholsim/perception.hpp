#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cholsim/camera.hpp"
#include "cholsim/geometry.hpp"
#include "cholsim/grid.hpp"

namespace cholsim {

// Segmentation / keypoint noise model. Observations are pure functions of
// (input, profile, tick): the draw stream is re-derived per call from
// rng_seed and tick, so repeated calls are identical.
struct NoiseProfile {
  int boundary_jitter_px = 0;      // class-border dilation steps
  double pixel_flip_rate = 0.0;    // salt-and-pepper label flips
  double keypoint_sigma_px = 0.0;  // Gaussian pixel noise
  double keypoint_dropout = 0.0;   // per-keypoint drop probability
  std::uint64_t rng_seed = 7;

  static NoiseProfile zero();
  static NoiseProfile low();
  static NoiseProfile high();
  static NoiseProfile preset(const std::string& name);  // throws InvalidConfig

  bool is_zero() const {
    return boundary_jitter_px == 0 && pixel_flip_rate == 0.0;
  }

  void validate() const;
};

struct SegObservation {
  BinaryMask liver;
  BinaryMask gallbladder;
  BinaryMask liver_bed;
  int tick = 0;
};

struct Keypoint {
  std::string name;
  Vec2 px = Vec2::Zero();
  double confidence = 0.0;  // in [0, 1]
  bool dropped = true;
};

struct KeypointObservation {
  std::string instrument;
  std::vector<Keypoint> keypoints;
  int tick = 0;
};

// Named landmark offsets in the instrument frame (tip at the origin).
struct InstrumentLandmarks {
  std::string instrument;
  std::vector<std::string> names;
  PointSet3 offsets_mm;
};

InstrumentLandmarks fbf_landmarks();
InstrumentLandmarks pch_landmarks();

// Noisy class masks from the true labels. With a zero profile the masks equal
// the labels exactly. With noise: class borders are jittered by up to
// boundary_jitter_px single-pixel dilations between adjacent tissue classes,
// pixels flip to random classes at pixel_flip_rate, and the label map is
// smoothed with a 3x3 majority window.
SegObservation observe_segmentation(const LabelMask& labels,
                                    const NoiseProfile& noise, int tick);

// Projects instrument landmarks and applies pixel noise and dropout.
// Keypoints whose true or noisy projection falls outside the image are
// dropped (confidence 0).
KeypointObservation observe_keypoints(const Frame& pose,
                                      const InstrumentLandmarks& landmarks,
                                      const CameraModel& camera,
                                      int image_width, int image_height,
                                      const NoiseProfile& noise, int tick);

// Rigid landmark fit: lifts each undropped keypoint with its point-cloud
// depth (depths_mm, one entry per landmark, ignored where dropped) and solves
// the least-squares rigid transform from landmark offsets to lifted points.
// Needs at least 3 undropped keypoints; returns nullopt otherwise.
std::optional<Frame> fit_instrument_pose(const KeypointObservation& obs,
                                         const InstrumentLandmarks& landmarks,
                                         const std::vector<double>& depths_mm,
                                         const CameraModel& camera);

}  // namespace cholsim
