#pragma once

#include <span>
#include <vector>

#include "circlereg/camera.hpp"
#include "circlereg/correspondence.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/projective.hpp"

namespace circlereg {

/// Stacked point and line constraints for an image_from_world homography.
struct DltProblem {
  std::vector<PointPair> points;
  std::vector<LinePair> lines;
  /// Optional per-pair weights; empty means 1 for every pair.
  std::vector<double> point_weights;
  std::vector<double> line_weights;

  static DltProblem from(const CorrespondenceSet& corr);
};

struct DltOptions {
  /// Run a Levenberg-Marquardt pass on point reprojection error after the
  /// linear solve.
  bool refine = false;
  double max_condition = 1e12;
};

/// Normalized DLT over mixed point and line pairs. The result maps world
/// (meters) to image (pixels), has unit Frobenius norm and positive
/// determinant. Throws RankDeficient or IllConditioned.
Homography estimate_homography_dlt(const DltProblem& problem,
                                   const DltOptions& options = {});

/// Nonlinear refinement of point reprojection error. Needs >= 4 finite
/// point pairs; otherwise returns the input unchanged.
Homography refine_homography(const Homography& initial, const DltProblem& problem);

/// K [r1 r2 t]: the image of the Z = 0 plane, scaled to unit Frobenius norm
/// while keeping the third coordinate positive for points in front of the
/// camera. Throws DegeneratePose.
Homography camera_to_homography(const CameraSample& cam);

/// Mean pixel distance between the dehomogenized images of each field
/// point under the two maps. Throws PointAtInfinity.
double mean_reprojection_error(const Homography& truth, const Homography& estimate,
                               std::span<const HomPoint2> world_points);

/// Field points used for reprojection error: a regular grid over the
/// pitch plus every template keypoint, kept when they land in front of the
/// camera and inside the image. Expects the cheirality-signed H from
/// camera_to_homography, where points in front have positive w.
std::vector<HomPoint2> visible_field_points(const Homography& image_from_world,
                                            const FieldTemplate& tpl, int width,
                                            int height, double spacing = 1.0);

/// Dehomogenized image of a field point. Throws PointAtInfinity.
Eigen::Vector2d project(const Homography& h, const Eigen::Vector2d& world);

}  // namespace circlereg
