#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "circlereg/projective.hpp"

namespace circlereg {

enum class ConicClass { Ellipse, ImaginaryEllipse, Parabola, Hyperbola, Degenerate };

ConicClass classify(const Conic& c);

/// Parametric ellipse. angle is the direction of the major axis in [0, pi).
struct EllipseGeom {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double semi_major = 1.0;
  double semi_minor = 1.0;
  double angle = 0.0;

  /// Point at parameter t of x(t) = center + R(angle) (a cos t, b sin t).
  Eigen::Vector2d point_at(double t) const;
};

/// Circle of the given center and radius as a conic matrix
/// [[1,0,-ox],[0,1,-oy],[-ox,-oy,ox^2+oy^2-r^2]].
Conic circle_conic(const Eigen::Vector2d& center, double radius);

/// Points where a line meets a conic: none, one (tangency) or two. Two
/// points are ordered by their signed position along the line direction.
std::vector<HomPoint2> intersect_line_conic(const HomLine2& l, const Conic& c);

/// Tangent line at a point of the conic. Throws PointNotOnConic.
HomLine2 tangent_at(const Conic& c, const HomPoint2& p, double tol = 1e-7);

/// Direct least-squares ellipse fit under the 4AC - B^2 = 1 constraint.
/// Input is centered and scaled to unit RMS radius before the solve.
Conic fit_ellipse_direct(std::span<const Eigen::Vector2d> points);

EllipseGeom geom_from_conic(const Conic& c);
Conic conic_from_geom(const EllipseGeom& g);

/// Coefficients (A, B, C, D, E, F) of A x^2 + B xy + C y^2 + D x + E y + F.
Eigen::Matrix<double, 6, 1> conic_coefficients(const Conic& c);
Conic conic_from_coefficients(const Eigen::Matrix<double, 6, 1>& k);

/// x^T C x evaluated after moving the conic to its center and unit size, then
/// unit-normalizing both x and the matrix. Unlike Conic::normalized_value,
/// the magnitude is comparable across pixel and meter scales.
double conditioned_residual(const Conic& c, const HomPoint2& p);

/// Similarity moving a central conic to its center with unit geometric-mean
/// axis length; identity for non-central conics.
Homography conditioning_similarity(const Conic& c);

/// True when p is strictly inside the ellipse, i.e. the interior-negative
/// value is below -tol.
bool is_interior(const Conic& ellipse, const HomPoint2& p, double tol = 1e-12);

/// n points sampled uniformly in the ellipse parameter.
std::vector<Eigen::Vector2d> sample_ellipse(const EllipseGeom& g, int n);

}  // namespace circlereg
