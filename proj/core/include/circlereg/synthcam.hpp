#pragma once

// Synthetic broadcast-camera views of the center circle with ground truth,
// and the noise sweep that measures how the circle-based pipeline degrades
// with noisy ellipse points or a noisy imaged center.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "circlereg/camera.hpp"
#include "circlereg/correspondence.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/image.hpp"
#include "circlereg/projective.hpp"

namespace circlereg {

/// Sampling ranges for main-camera poses. Distances in meters, focal in
/// pixels, roll in degrees.
struct CameraRanges {
  double x_min = -20.0;
  double x_max = 20.0;
  double y_min = -45.0;
  double y_max = -25.0;
  double height_min = 10.0;
  double height_max = 25.0;
  double focal_min = 2500.0;
  double focal_max = 9000.0;
  double roll_max_deg = 2.0;
  int image_width = 1920;
  int image_height = 1080;
  /// Minimum fraction of the center circle that must project into the image.
  double min_arc_fraction = 0.6;
  int max_retries = 10000;
};

struct ViewCheck {
  bool center_visible = false;
  double arc_fraction = 0.0;
  bool halfway_visible = false;
  bool other_markings_visible = false;

  bool central_view(double min_arc_fraction) const {
    return center_visible && halfway_visible && !other_markings_visible &&
           arc_fraction >= min_arc_fraction;
  }
};

/// Which markings a camera sees.
ViewCheck check_view(const CameraSample& cam, const FieldTemplate& tpl);

/// Draws poses until one shows the center circle and the halfway line and
/// nothing else. Throws ExhaustedRetries.
CameraSample sample_camera(std::mt19937_64& rng, const CameraRanges& ranges,
                           const FieldTemplate& tpl);

enum class NoiseTarget { EllipsePoints, CenterPoint };

struct NoiseSpec {
  double sigma_px = 0.0;
  std::uint64_t seed = 0;
  NoiseTarget target = NoiseTarget::EllipsePoints;
};

/// Image-side measurements of one synthetic view.
struct SyntheticView {
  std::vector<double> angles;  // field angles of the sampled edge points
  std::vector<Eigen::Vector2d> inner_points;
  std::vector<Eigen::Vector2d> outer_points;
  /// Imaged circle center including center noise.
  Eigen::Vector2d center_px;
  /// Noise added to the center (zero unless the center is targeted).
  Eigen::Vector2d center_offset = Eigen::Vector2d::Zero();
  HomLine2 halfway_line;
  Homography truth;
};

/// Projects n points on each edge of the center-circle marking. The random
/// stream (angles, then standard normals) does not depend on sigma, so a
/// sweep over sigma scales the same noise draw. Throws CircleNotVisible.
SyntheticView observe_circle(const CameraSample& cam, const FieldTemplate& tpl,
                             int n_points, const NoiseSpec& noise);

/// Class-index mask of the center-circle marking: pixels whose center lies
/// between the inner and outer edge get class_id, others 0.
MaskImage rasterize_ring_mask(const Homography& image_from_world,
                              const FieldTemplate& tpl, int width, int height,
                              std::uint8_t class_id);

enum class PipelineVariant { Case1TrueCenter, Case3Concentric };

struct SweepConfig {
  std::vector<double> sigmas{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  int cameras = 100;
  NoiseTarget target = NoiseTarget::EllipsePoints;
  PipelineVariant variant = PipelineVariant::Case1TrueCenter;
  std::uint64_t seed = 7;
  int n_points = 8;
  CameraRanges ranges;
  TemplateConfig field{.length = 105.0, .width = 68.0, .circle_radius = 9.15,
                       .thickness = 0.08};
  double grid_spacing = 1.0;
  /// 0 picks the hardware concurrency.
  int threads = 0;
};

/// Throws InvalidConfig naming the offending field.
void validate(const SweepConfig& config);

struct TrialRow {
  double sigma = 0.0;
  NoiseTarget target = NoiseTarget::EllipsePoints;
  int camera_id = 0;
  std::uint64_t seed = 0;
  PipelineVariant variant = PipelineVariant::Case1TrueCenter;
  double mre_px = 0.0;
  std::string status;  // "ok" or the failure code
  std::optional<Homography> truth;
  std::optional<Homography> estimate;

  bool ok() const { return status == "ok"; }
};

struct SigmaSummary {
  double sigma = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct SweepReport {
  SweepConfig config;
  std::vector<TrialRow> rows;  // sigma-major, then camera id
  std::vector<SigmaSummary> summary;
};

/// Per-camera seed derived from the sweep seed.
std::uint64_t camera_seed(std::uint64_t sweep_seed, int camera_id);

/// Runs every (sigma, camera) trial. Per-trial failures become rows with a
/// failure status; the sweep itself never aborts on them.
SweepReport run_noise_sweep(const SweepConfig& config);

/// One end-to-end trial: fit, derive, estimate, score.
TrialRow run_trial(const CameraSample& cam, const FieldTemplate& tpl,
                   const SweepConfig& config, double sigma, int camera_id,
                   std::uint64_t seed);

/// Linear-interpolated quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

std::string sweep_csv(const SweepReport& report);
std::string summary_csv(const SweepReport& report);

std::string to_string(NoiseTarget t);
std::string to_string(PipelineVariant v);
NoiseTarget parse_noise_target(const std::string& s);
PipelineVariant parse_pipeline_variant(const std::string& s);

}  // namespace circlereg
