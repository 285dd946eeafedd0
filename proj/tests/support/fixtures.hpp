#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "circlereg/camera.hpp"
#include "circlereg/conic.hpp"
#include "circlereg/correspondence.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/homography.hpp"
#include "circlereg/projective.hpp"

namespace circlereg::testing {

/// Camera behind the near touchline looking at the center circle, with
/// wider ranges than the central-view sampler (any framing, roll to 10 deg).
CameraSample random_camera(std::mt19937_64& rng);

/// Generic invertible matrix with entries in [-1, 1] plus identity.
Eigen::Matrix3d random_matrix(std::mt19937_64& rng);
Eigen::Vector3d random_vector(std::mt19937_64& rng);

/// Ground truth and exact image measurements of the nominal center circle.
struct CircleFixture {
  CameraSample cam;
  Homography h;
  Conic ellipse;
  HomPoint2 center;
  HomLine2 halfway;
};

CircleFixture make_fixture(std::mt19937_64& rng, const FieldTemplate& tpl);

/// Case-1 observation built from the fixture's exact primitives.
CircleObservation case1_observation(const CircleFixture& f);

/// Image of a template circle under h.
Conic imaged_circle(const Homography& h, const TemplateCircle& c);

/// Points on a template circle projected through h.
std::vector<Eigen::Vector2d> project_circle_points(const Homography& h,
                                                   const TemplateCircle& c, int n,
                                                   double phase = 0.1);

/// Euclidean pixel distance of two finite homogeneous points.
double pixel_distance(const HomPoint2& a, const HomPoint2& b);

/// Distance between two conics up to scale and sign, after unit-Frobenius
/// normalization.
double conic_distance(const Conic& a, const Conic& b);

/// Oracle: plain algebraic fit, smallest right singular vector of the
/// [x^2 xy y^2 x y 1] design matrix after Hartley normalization. Not an
/// ellipse-specific method.
Conic svd_algebraic_fit(const std::vector<Eigen::Vector2d>& pts);

/// Oracle: homography through four point pairs by the projective-basis
/// construction (no least squares).
Eigen::Matrix3d four_point_homography(const std::vector<Eigen::Vector2d>& src,
                                      const std::vector<Eigen::Vector2d>& dst);

/// Mean Sampson distance to `fit` of n points sampled on `truth`.
double mean_curve_distance(const Conic& truth, const Conic& fit, int n = 64);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace circlereg::testing
