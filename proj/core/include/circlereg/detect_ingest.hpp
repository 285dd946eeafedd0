#pragma once

// Ingestion of upstream detector output: keypoint/line files, class-index
// masks, and the ray-casting + RANSAC extraction of the two edges of the
// center-circle marking.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "circlereg/correspondence.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/image.hpp"
#include "circlereg/projective.hpp"

namespace circlereg {

struct DetectedKeypoint {
  std::string name;
  Eigen::Vector2d xy;
  double confidence = 1.0;
};

struct DetectedLine {
  std::string name;
  std::vector<Eigen::Vector2d> points;
};

struct DetectionFile {
  int width = 0;
  int height = 0;
  std::vector<DetectedKeypoint> keypoints;
  std::vector<DetectedLine> lines;
  std::optional<std::string> mask_path;
  std::optional<std::map<std::string, int>> mask_class_map;
  /// Top-level members we do not interpret, kept for round trips.
  nlohmann::json extra = nlohmann::json::object();
  /// Directory relative mask paths resolve against.
  std::filesystem::path base_dir;

  const DetectedKeypoint* keypoint(const std::string& name) const;
  const DetectedLine* line(const std::string& name) const;

  /// Loads and validates the mask on first call. Throws SchemaError when
  /// there is no mask or its size disagrees with image_size, IoError when
  /// the file is unreadable.
  const MaskImage& mask() const;
  /// Class id from mask_class_map. Throws ClassAbsent.
  int class_id(const std::string& class_name) const;

 private:
  mutable std::shared_ptr<const MaskImage> mask_cache_;
};

/// Throws IoError for unreadable files and SchemaError naming the offending
/// member, e.g. "keypoints[2].xy".
DetectionFile parse_detection_file(const std::filesystem::path& path);
DetectionFile parse_detection_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const DetectionFile& det);

struct EdgeOptions {
  double angle_step_deg = 2.0;
  double sample_step_px = 0.5;
  double min_gap_px = 1.0;
  double max_gap_px = 30.0;
  int min_class_pixels = 1;
};

struct ConcentricEdges {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  int rays_cast = 0;
  std::vector<Eigen::Vector2d> inner_candidates;
  std::vector<Eigen::Vector2d> outer_candidates;
};

/// Casts rays from the centroid of the class region. Along each ray the
/// first rising edge of the class indicator is an inner candidate and the
/// next falling edge an outer one. Throws ClassAbsent or TooFewCandidates.
ConcentricEdges extract_concentric_edges(const MaskImage& mask, int class_id,
                                         const EdgeOptions& options = {});
ConcentricEdges extract_concentric_edges(const DetectionFile& det,
                                         const std::string& class_name,
                                         const EdgeOptions& options = {});

struct RansacOptions {
  int iterations = 500;
  double inlier_threshold_px = 1.5;
  double min_inlier_ratio = 0.5;
  std::uint64_t seed = 0;
};

struct ConcentricFit {
  Conic inner;
  Conic outer;
  std::vector<std::size_t> inner_inliers;
  std::vector<std::size_t> outer_inliers;
};

/// First-order geometric distance of a pixel to a conic.
double sampson_distance(const Conic& c, const Eigen::Vector2d& p);

/// Robust fit of one ellipse. Throws InsufficientPoints or ConsensusFailure.
Conic ransac_fit_ellipse(const std::vector<Eigen::Vector2d>& points,
                         const RansacOptions& options,
                         std::vector<std::size_t>* inliers = nullptr);

/// Fits both edges; the result always has inner strictly inside outer.
/// Throws ConsensusFailure or NotNested.
ConcentricFit ransac_fit_concentric(const ConcentricEdges& edges,
                                    const RansacOptions& options = {});

/// True when every one of n samples of `inner` lies inside `outer`.
bool nested_inside(const Conic& inner, const Conic& outer, int samples = 32);

/// Total least squares line through pixel samples.
HomLine2 fit_line_tls(const std::vector<Eigen::Vector2d>& points);

struct BuiltObservation {
  CircleObservation observation;
  DerivationCase derivation;
};

/// Name of the detected line holding samples of the circle marking.
inline constexpr const char* kCircleSamples = "center_circle";

/// Assembles an observation for the requested case, or the first case the
/// evidence supports (1, then 2, then 3). The ellipse comes from `ellipse`
/// or, failing that, a fit to the center_circle samples. Throws
/// InsufficientEvidence naming what each case lacks.
BuiltObservation build_observation(const DetectionFile& det,
                                   const std::optional<Conic>& ellipse,
                                   const std::optional<ConcentricFit>& concentric,
                                   const FieldTemplate& tpl,
                                   std::optional<DerivationCase> only = std::nullopt);

/// Runs the derivation matching the observation's case and adds the
/// 45-degree points.
CorrespondenceSet derive_correspondences(const BuiltObservation& built,
                                         const FieldTemplate& tpl,
                                         const CameraPrior& prior = CameraPrior::broadcast());

}  // namespace circlereg
