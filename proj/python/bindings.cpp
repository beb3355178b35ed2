#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cholsim/controller.hpp"
#include "cholsim/frames.hpp"
#include "cholsim/harness.hpp"
#include "cholsim/mask_geometry.hpp"
#include "cholsim/metrics.hpp"
#include "cholsim/perception.hpp"
#include "cholsim/phantom.hpp"
#include "cholsim/scenario.hpp"

namespace py = pybind11;
using namespace cholsim;

namespace {

BinaryMask mask_from_array(const py::array_t<std::uint8_t, py::array::c_style |
                                                               py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionMismatch("mask must be 2-D");
  BinaryMask mask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  auto r = a.unchecked<2>();
  for (py::ssize_t y = 0; y < a.shape(0); ++y)
    for (py::ssize_t x = 0; x < a.shape(1); ++x)
      mask.at(static_cast<int>(x), static_cast<int>(y)) = r(y, x) ? 1 : 0;
  return mask;
}

py::array_t<std::uint8_t> array_from_mask(const BinaryMask& mask) {
  py::array_t<std::uint8_t> a({mask.height(), mask.width()});
  auto w = a.mutable_unchecked<2>();
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) w(y, x) = mask.at(x, y);
  return a;
}

PointSet3 points_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 3)
    throw DimensionMismatch("points must be an (N, 3) array");
  PointSet3 pts;
  auto r = a.unchecked<2>();
  pts.reserve(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    pts.emplace_back(r(i, 0), r(i, 1), r(i, 2));
  return pts;
}

py::array_t<double> array_from_points(const PointSet3& pts) {
  py::array_t<double> a({static_cast<py::ssize_t>(pts.size()),
                         static_cast<py::ssize_t>(3)});
  auto w = a.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(pts.size()); ++i)
    for (py::ssize_t c = 0; c < 3; ++c) w(i, c) = pts[static_cast<std::size_t>(i)](c);
  return a;
}

py::array_t<double> array_from_mat3(const Mat3& m) {
  py::array_t<double> a({3, 3});
  auto w = a.mutable_unchecked<2>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) w(r, c) = m(r, c);
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic gallbladder-dissection simulation core";

  py::register_exception<Error>(m, "CholsimError");

  m.def(
      "thin_mask",
      [](const py::array_t<std::uint8_t, py::array::c_style |
                                             py::array::forcecast>& mask) {
        return array_from_mask(thin_mask(mask_from_array(mask)));
      },
      py::arg("mask"),
      "Topology-preserving thinning of a binary mask (rows = y).");

  m.def(
      "largest_component",
      [](const py::array_t<std::uint8_t, py::array::c_style |
                                             py::array::forcecast>& mask,
         int min_area) {
        return array_from_mask(
            largest_component(mask_from_array(mask), min_area));
      },
      py::arg("mask"), py::arg("min_area") = kDefaultMinAreaPx,
      "Largest 8-connected component of a binary mask.");

  m.def(
      "pca_axes",
      [](const py::array_t<double, py::array::c_style |
                                       py::array::forcecast>& points) {
        const PcaResult r = pca_axes(points_from_array(points));
        return py::make_tuple(
            py::make_tuple(r.centroid.x(), r.centroid.y(), r.centroid.z()),
            array_from_mat3(r.axes),
            py::make_tuple(r.variances(0), r.variances(1), r.variances(2)));
      },
      py::arg("points"),
      "Principal axes of an (N, 3) point set: (centroid, axes, variances).");

  m.def(
      "boundary_deviation",
      [](const py::array_t<double, py::array::c_style |
                                       py::array::forcecast>& points) {
        return boundary_deviation(points_from_array(points));
      },
      py::arg("points"),
      "RMS distance of points to their own total-least-squares 3-D line.");

  m.def(
      "spline_rmse",
      [](const std::vector<py::array_t<
             double, py::array::c_style | py::array::forcecast>>& samples,
         int num_knots) {
        std::vector<BoundarySample> pool;
        int tick = 0;
        for (const auto& s : samples)
          pool.push_back({tick++, points_from_array(s)});
        const SplineFitResult r = spline_rmse(pool, num_knots);
        return py::make_tuple(r.rmse_mm, r.outliers_removed);
      },
      py::arg("samples"), py::arg("num_knots") = kSplineKnots,
      "Least-squares spline residual over pooled boundary samples: "
      "(rmse_mm, outliers_removed).");

  m.def(
      "select_target",
      [](const py::array_t<double, py::array::c_style |
                                       py::array::forcecast>& boundary,
         const std::array<double, 3>& current,
         const std::optional<std::array<double, 3>>& motion_dir,
         double max_step_mm,
         double termination_dist_mm) -> std::optional<std::array<double, 3>> {
        BoundaryPolyline poly;
        poly.points3d = points_from_array(boundary);
        ControllerParams params;
        params.max_step_mm = max_step_mm;
        params.termination_dist_mm = termination_dist_mm;
        std::optional<Vec3> dir;
        if (motion_dir)
          dir = Vec3((*motion_dir)[0], (*motion_dir)[1], (*motion_dir)[2]);
        const auto t = select_target(
            poly, Vec3(current[0], current[1], current[2]), dir, params);
        if (!t) return std::nullopt;
        return std::array<double, 3>{t->x(), t->y(), t->z()};
      },
      py::arg("boundary"), py::arg("current"), py::arg("motion_dir"),
      py::arg("max_step_mm") = 10.0, py::arg("termination_dist_mm") = 1.0,
      "Next dissection target, or None when the procedure should end.");

  m.def(
      "run_trial",
      [](std::uint64_t seed, const std::string& noise_preset) {
        Simulation sim(PhantomConfig{}, NoiseProfile::preset(noise_preset),
                       ControllerParams{}, seed);
        return to_jsonl(sim.run());
      },
      py::arg("seed") = 42, py::arg("noise_preset") = "zero",
      "Run one full trial on the default scene; returns the JSONL log.");

  m.def(
      "run_scenario_json",
      [](const std::string& config_json, bool dump_masks) {
        const ScenarioConfig config = scenario_from_json_text(config_json);
        const ScenarioSummary summary = run_scenario(config, dump_masks);
        return summary_to_json_text(config, summary);
      },
      py::arg("config_json"), py::arg("dump_masks") = false,
      "Run a scenario from its JSON text; returns the summary JSON.");

  m.def(
      "replay_metrics_json",
      [](const std::string& log_path) {
        return metrics_to_json_text(replay_log(log_path));
      },
      py::arg("log_path"), "Recompute metrics JSON from a stored trial log.");

  m.def(
      "default_scenario_json",
      [] { return scenario_to_json_text(ScenarioConfig{}); },
      "Canonical JSON of the default scenario.");

  m.def(
      "config_hash",
      [](const std::string& config_json) {
        return config_hash(scenario_from_json_text(config_json));
      },
      py::arg("config_json"), "Stable hash of a scenario config.");
}
