#pragma once

// Homogeneous primitives of the real projective plane: points, lines,
// conics and homographies, plus the pole-polar machinery built on them.
//
// All primitives are scale-equivalent: two values are "the same" when their
// coordinate vectors are proportional. Points at infinity (third coordinate
// zero) are ordinary values; nothing here assumes a finite point.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "circlereg/error.hpp"

namespace circlereg {

/// Tolerance used when comparing primitives up to scale.
inline constexpr double kScaleEquivalenceTol = 1e-9;

/// Relative threshold below which a cross product is treated as zero.
inline constexpr double kDegenerateCrossTol = 1e-12;

/// Unit-norm representative whose first significant component is positive.
Eigen::Vector3d canonical(const Eigen::Vector3d& v);

/// True when a and b are proportional, compared through canonical().
bool scale_equivalent(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      double tol = kScaleEquivalenceTol);

namespace detail {

template <typename Tag>
class Homogeneous3 {
 public:
  explicit Homogeneous3(const Eigen::Vector3d& v) : v_(v) {
    if (!v_.allFinite() || v_.norm() == 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "homogeneous 3-vector must be finite and nonzero");
    }
  }
  Homogeneous3(double a, double b, double c)
      : Homogeneous3(Eigen::Vector3d(a, b, c)) {}

  const Eigen::Vector3d& coords() const noexcept { return v_; }
  double operator[](int i) const { return v_[i]; }

  Eigen::Vector3d unit() const { return v_.normalized(); }
  Eigen::Vector3d canonical() const { return circlereg::canonical(v_); }

  bool equivalent(const Homogeneous3& other,
                  double tol = kScaleEquivalenceTol) const {
    return scale_equivalent(v_, other.v_, tol);
  }

 private:
  Eigen::Vector3d v_;
};

struct PointTag {};
struct LineTag {};

}  // namespace detail

/// A point of the projective plane. Euclidean units are meters on the field
/// side and pixels on the image side.
class HomPoint2 : public detail::Homogeneous3<detail::PointTag> {
 public:
  using Homogeneous3::Homogeneous3;

  /// Finite point (x, y, 1).
  static HomPoint2 from_euclidean(const Eigen::Vector2d& xy) {
    return HomPoint2(xy.x(), xy.y(), 1.0);
  }

  bool is_at_infinity(double tol = 1e-12) const;

  /// Dehomogenized coordinates. Throws PointAtInfinity for ideal points.
  Eigen::Vector2d euclidean() const;
};

/// A line of the projective plane, a*x + b*y + c*w = 0.
class HomLine2 : public detail::Homogeneous3<detail::LineTag> {
 public:
  using Homogeneous3::Homogeneous3;

  /// The line at infinity (0, 0, 1).
  static HomLine2 at_infinity() { return HomLine2(0.0, 0.0, 1.0); }

  /// Same line scaled so that (a, b) has unit norm. Throws when the line is
  /// the line at infinity.
  HomLine2 with_unit_normal() const;

  /// Direction vector (b, -a) of the line.
  Eigen::Vector2d direction() const {
    return Eigen::Vector2d(coords()[1], -coords()[0]);
  }
};

/// Symmetric 3x3 matrix representing a conic x^T M x = 0.
class Conic {
 public:
  /// Symmetrizes the input; throws InvalidArgument for a zero or non-finite
  /// matrix.
  explicit Conic(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }

  /// Value of x^T M x after unit-normalizing both x and M.
  double normalized_value(const HomPoint2& p) const;

  /// Rescaled to unit Frobenius norm with a positive-trace upper-left 2x2
  /// block. Under this sign convention interior points of an ellipse give
  /// a negative value.
  Conic normalized() const;

  bool equivalent(const Conic& other, double tol = kScaleEquivalenceTol) const;

 private:
  Eigen::Matrix3d m_;
};

/// Invertible plane-to-plane projective map.
class Homography {
 public:
  /// Relative determinant floor applied after unit-Frobenius normalization.
  static constexpr double kDeterminantFloor = 1e-12;

  /// Throws SingularHomography when the normalized determinant is below the
  /// floor.
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography identity() { return Homography(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  Eigen::Matrix3d inverse_matrix() const { return m_.inverse(); }
  Homography inverse() const { return Homography(inverse_matrix()); }

  /// Unit Frobenius norm, positive determinant.
  Homography normalized() const;

  bool equivalent(const Homography& other, double tol = 1e-9) const;

 private:
  Eigen::Matrix3d m_;
};

/// Line through two distinct points. Throws DegenerateJoin if p ~ q.
HomLine2 join_points(const HomPoint2& p, const HomPoint2& q);

/// Intersection of two distinct lines. Throws DegenerateMeet if l ~ m.
HomPoint2 meet_lines(const HomLine2& l, const HomLine2& m);

/// True when <p, l> vanishes after unit-normalizing both.
bool incident(const HomPoint2& p, const HomLine2& l, double tol = 1e-9);

/// Polar line C p. Throws ZeroPolar when p lies in the null space of C.
HomLine2 polar_of_point(const Conic& c, const HomPoint2& p);

/// Pole C^-1 l, i.e. the point whose polar is l. Throws SingularConic for a
/// rank-deficient conic.
HomPoint2 pole_of_line(const Conic& c, const HomLine2& l);

/// Points map as H p, lines as H^-T l, conics as H^-T C H^-1.
HomPoint2 transform(const Homography& h, const HomPoint2& p);
HomLine2 transform(const Homography& h, const HomLine2& l);
Conic transform(const Homography& h, const Conic& c);

}  // namespace circlereg
