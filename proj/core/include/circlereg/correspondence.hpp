#pragma once

// Circle correspondence -> point and line correspondences.
//
// An imaged circle together with its imaged center yields the vanishing line
// of the field plane (polar of the center). One more primitive, a support
// line (case 1) or a support point (case 2), fixes a direction; its
// vanishing point and its polar give two conjugate diameters whose endpoints
// a, b, d, e are the same construction applied to the template circle.
// The tangents at those points bound the image of the circumscribed square,
// and its diagonals cut the ellipse at the four 45-degree points. Case 3
// recovers the imaged center from the two edges of the painted marking.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "circlereg/conic.hpp"
#include "circlereg/field_template.hpp"
#include "circlereg/projective.hpp"

namespace circlereg {

/// Which template circle an image ellipse belongs to.
enum class MarkingEdge { Nominal, Inner, Outer };

enum class DerivationCase { Case1, Case2, Case3 };

struct NamedLine {
  std::string name;
  HomLine2 line;
};

struct NamedPoint {
  std::string name;
  HomPoint2 point;
};

/// An ellipse detected in the image plus whatever support comes with it.
/// The ellipse is stored normalized so that interior points evaluate
/// negative.
class CircleObservation {
 public:
  /// Throws NotAnEllipse.
  explicit CircleObservation(const Conic& ellipse,
                             MarkingEdge edge = MarkingEdge::Nominal);

  const Conic& ellipse() const noexcept { return ellipse_; }
  MarkingEdge edge() const noexcept { return edge_; }

  const std::optional<HomPoint2>& imaged_center() const noexcept { return center_; }
  const std::optional<NamedLine>& support_line() const noexcept { return line_; }
  const std::optional<NamedPoint>& support_point() const noexcept { return point_; }
  /// Image of the outer marking edge when ellipse() is the inner one.
  const std::optional<Conic>& outer_ellipse() const noexcept { return outer_; }

  /// Throws CenterOnConic unless c is strictly inside the ellipse.
  CircleObservation& set_imaged_center(const HomPoint2& c);
  CircleObservation& set_support_line(NamedLine line);
  CircleObservation& set_support_point(NamedPoint point);
  /// Marks ellipse() as the inner edge and attaches the outer edge image.
  CircleObservation& set_outer_ellipse(const Conic& outer);

 private:
  Conic ellipse_;
  MarkingEdge edge_;
  std::optional<HomPoint2> center_;
  std::optional<NamedLine> line_;
  std::optional<NamedPoint> point_;
  std::optional<Conic> outer_;
};

struct PointPair {
  std::string name;
  HomPoint2 image;  // pixels
  HomPoint2 world;  // meters
};

struct LinePair {
  std::string name;
  HomLine2 image;
  HomLine2 world;
};

struct CorrespondenceSet {
  DerivationCase derivation = DerivationCase::Case1;
  MarkingEdge edge = MarkingEdge::Nominal;
  std::vector<PointPair> points;
  std::vector<LinePair> lines;
  std::optional<HomLine2> vanishing_line;
  std::optional<HomPoint2> imaged_center;
  /// Set when an axis meets the ellipse at a grazing angle.
  bool low_confidence = false;
  std::vector<std::string> notes;

  const PointPair* point(const std::string& name) const;
  const LinePair* line(const std::string& name) const;
};

/// Names used for derived primitives.
namespace derived_names {
inline constexpr const char* kA = "a";
inline constexpr const char* kB = "b";
inline constexpr const char* kD = "d";
inline constexpr const char* kE = "e";
inline constexpr const char* kAxisAB = "axis_ab";
inline constexpr const char* kAxisDE = "axis_de";
}  // namespace derived_names

/// Opposed point pairs of a derived set: (a, b), (d, e) and, once extended,
/// the two diagonal pairs of 45-degree points.
std::vector<std::pair<std::string, std::string>> opposed_pairs();

enum class CameraSide { Near, Far };
enum class ImageYAxis { Down, Up };

/// Coarse knowledge of how field directions appear in the image, used to
/// label the two intersections of each diameter.
class CameraPrior {
 public:
  /// Camera behind one touchline, looking across the pitch. Near means the
  /// camera stands on the y < 0 side.
  static CameraPrior broadcast(CameraSide side = CameraSide::Near,
                               ImageYAxis axis = ImageYAxis::Down);

  /// Local linearization of a known (possibly rough) homography at a field
  /// point.
  static CameraPrior from_homography(const Homography& image_from_world,
                                     const Eigen::Vector2d& at_world);

  explicit CameraPrior(const Eigen::Matrix2d& world_to_image_directions);

  /// Predicted image direction of a field displacement.
  Eigen::Vector2d predict(const Eigen::Vector2d& world_delta) const {
    return map_ * world_delta;
  }

  const Eigen::Matrix2d& matrix() const noexcept { return map_; }

 private:
  Eigen::Matrix2d map_;
};

/// Polar of the imaged center. Throws CenterOnConic unless c is inside E.
HomLine2 vanishing_line_from_center(const Conic& ellipse, const HomPoint2& c);

/// Case 1: ellipse + imaged center + a support line known in the template.
CorrespondenceSet derive_case1(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior = CameraPrior::broadcast());

/// Case 2: ellipse + imaged center + a support point known in the template.
CorrespondenceSet derive_case2(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior = CameraPrior::broadcast());

struct CenterRecovery {
  HomPoint2 center;
  HomLine2 vanishing_line;
  /// Scale relating the two polars, E_inner c = lambda E_outer c.
  double lambda;
  /// Eigenvalue of E_outer^-1 E_inner attached to the center.
  double eigenvalue;
};

/// Imaged common center of two concentric circles from their images.
/// Throws NotNested or NoValidEigenvector.
CenterRecovery recover_center_concentric(const Conic& e1, const Conic& e2);

/// Case 3: the observation carries inner and outer edge ellipses and no
/// center. Recovers the center, then runs case 1 or case 2 on the inner
/// edge depending on the available support.
CorrespondenceSet derive_case3(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior = CameraPrior::broadcast());

/// Relabels each opposed pair so that its image displacement agrees with
/// the prior's prediction. Throws AmbiguousPrior for near-perpendicular
/// predictions.
CorrespondenceSet resolve_orientation(CorrespondenceSet corr,
                                      const CameraPrior& prior);

/// Adds the four 45-degree points and the two trapezoid diagonals.
CorrespondenceSet extend_green_points(CorrespondenceSet corr,
                                      const Conic& ellipse,
                                      const FieldTemplate& tpl);

/// Template circle matching a marking edge.
TemplateCircle template_circle(const FieldTemplate& tpl, MarkingEdge edge);

std::string to_string(DerivationCase c);
std::string to_string(MarkingEdge e);

}  // namespace circlereg
