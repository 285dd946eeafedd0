#include "circlereg/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace circlereg {
namespace {

namespace dn = derived_names;

constexpr double kGrazingAngle = 2.0 * std::numbers::pi / 180.0;
// |cos| of the angle between predicted and observed pair directions below
// which the prior cannot tell the two labelings apart.
constexpr double kPriorAmbiguity = 0.05;

std::string tangent_name(const std::string& point) { return "tangent_" + point; }

// Orders a field-side pair: larger y first, ties broken by larger x.
std::pair<HomPoint2, HomPoint2> order_world_pair(std::vector<HomPoint2> pts) {
  const Eigen::Vector2d p = pts[0].euclidean();
  const Eigen::Vector2d q = pts[1].euclidean();
  const double scale = std::max({1.0, p.norm(), q.norm()});
  const bool p_first = std::abs(p.y() - q.y()) > 1e-9 * scale
                           ? p.y() > q.y()
                           : p.x() > q.x();
  return p_first ? std::pair{pts[0], pts[1]} : std::pair{pts[1], pts[0]};
}

std::vector<HomPoint2> require_two(const HomLine2& l, const Conic& c,
                                   const char* what) {
  auto pts = intersect_line_conic(l, c);
  if (pts.size() != 2) {
    throw Error(ErrorCode::NoIntersection,
                std::string(what) + " does not cross the ellipse at two points");
  }
  return pts;
}

// Angle between a line and the conic's tangent at p, in radians.
double crossing_angle(const HomLine2& l, const Conic& c, const HomPoint2& p) {
  const Eigen::Vector2d n1 = l.coords().head<2>().normalized();
  const Eigen::Vector2d n2 = polar_of_point(c, p).coords().head<2>().normalized();
  return std::acos(std::clamp(std::abs(n1.dot(n2)), 0.0, 1.0));
}

PointPair* find_point(CorrespondenceSet& s, const std::string& name) {
  for (auto& p : s.points) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

LinePair* find_line(CorrespondenceSet& s, const std::string& name) {
  for (auto& l : s.lines) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

struct Axes {
  HomLine2 image_ab;
  HomLine2 image_de;
  HomLine2 world_ab;
  HomLine2 world_de;
};

// Shared tail of cases 1 and 2: intersect both axes with the ellipse and the
// template circle, pair them up, attach tangents and relabel by the prior.
CorrespondenceSet assemble(const Conic& ellipse, const HomPoint2& center,
                           const HomLine2& vanishing, const Axes& axes,
                           const TemplateCircle& circle, MarkingEdge edge,
                           DerivationCase derivation, const CameraPrior& prior) {
  const Conic world_conic = circle.conic();
  const auto img_ab = require_two(axes.image_ab, ellipse, "axis through a, b");
  const auto img_de = require_two(axes.image_de, ellipse, "axis through d, e");
  const auto [wa, wb] =
      order_world_pair(require_two(axes.world_ab, world_conic, "template axis a, b"));
  const auto [wd, we] =
      order_world_pair(require_two(axes.world_de, world_conic, "template axis d, e"));

  CorrespondenceSet out;
  out.derivation = derivation;
  out.edge = edge;
  out.vanishing_line = vanishing;
  out.imaged_center = center;
  out.points = {
      {dn::kA, img_ab[0], wa},
      {dn::kB, img_ab[1], wb},
      {dn::kD, img_de[0], wd},
      {dn::kE, img_de[1], we},
  };
  for (const auto& p : out.points) {
    out.lines.push_back({tangent_name(p.name), polar_of_point(ellipse, p.image),
                         polar_of_point(world_conic, p.world)});
  }
  out.lines.insert(out.lines.begin(),
                   {{dn::kAxisAB, axes.image_ab, axes.world_ab},
                    {dn::kAxisDE, axes.image_de, axes.world_de}});

  for (const auto& [axis, pts] :
       {std::pair{axes.image_ab, img_ab}, std::pair{axes.image_de, img_de}}) {
    for (const auto& p : pts) {
      if (crossing_angle(axis, ellipse, p) < kGrazingAngle) {
        out.low_confidence = true;
      }
    }
  }
  if (out.low_confidence) {
    out.notes.push_back("an axis crosses the ellipse below 2 degrees");
  }
  return resolve_orientation(std::move(out), prior);
}

const NamedLine& require_line(const CircleObservation& obs) {
  if (!obs.support_line()) {
    throw Error(ErrorCode::MissingLine, "observation has no support line");
  }
  return *obs.support_line();
}

const HomPoint2& require_center(const CircleObservation& obs) {
  if (!obs.imaged_center()) {
    throw Error(ErrorCode::MissingCenter, "observation has no imaged center");
  }
  return *obs.imaged_center();
}

// Point normalized so that <vanishing, p> = 1. Under this scaling differences
// of points on the field plane behave like affine displacements, so "same
// side of the center" becomes a sign test even for ideal image points.
Eigen::Vector3d affine_rep(const HomLine2& vanishing, const HomPoint2& p) {
  const double s = vanishing.coords().dot(p.coords());
  if (std::abs(s) <= 1e-15 * vanishing.coords().norm() * p.coords().norm()) {
    throw Error(ErrorCode::PointAtInfinity,
                "point lies on the vanishing line of the field plane");
  }
  return p.coords() / s;
}

bool same_side(const HomLine2& vanishing, const HomPoint2& center,
               const HomPoint2& p, const HomPoint2& q) {
  const Eigen::Vector3d c = affine_rep(vanishing, center);
  return (affine_rep(vanishing, p) - c).dot(affine_rep(vanishing, q) - c) > 0.0;
}

}  // namespace

CircleObservation::CircleObservation(const Conic& ellipse, MarkingEdge edge)
    : ellipse_(ellipse.normalized()), edge_(edge) {
  if (classify(ellipse_) != ConicClass::Ellipse) {
    throw Error(ErrorCode::NotAnEllipse, "observed conic is not an ellipse");
  }
}

CircleObservation& CircleObservation::set_imaged_center(const HomPoint2& c) {
  vanishing_line_from_center(ellipse_, c);  // validates interiority
  center_ = c;
  return *this;
}

CircleObservation& CircleObservation::set_support_line(NamedLine line) {
  line_ = std::move(line);
  return *this;
}

CircleObservation& CircleObservation::set_support_point(NamedPoint point) {
  point_ = std::move(point);
  return *this;
}

CircleObservation& CircleObservation::set_outer_ellipse(const Conic& outer) {
  if (classify(outer) != ConicClass::Ellipse) {
    throw Error(ErrorCode::NotAnEllipse, "outer conic is not an ellipse");
  }
  outer_ = outer.normalized();
  edge_ = MarkingEdge::Inner;
  return *this;
}

const PointPair* CorrespondenceSet::point(const std::string& name) const {
  for (const auto& p : points) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const LinePair* CorrespondenceSet::line(const std::string& name) const {
  for (const auto& l : lines) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

std::vector<std::pair<std::string, std::string>> opposed_pairs() {
  return {{dn::kA, dn::kB}, {dn::kD, dn::kE}, {"g_ad", "g_be"}, {"g_db", "g_ea"}};
}

CameraPrior::CameraPrior(const Eigen::Matrix2d& world_to_image_directions)
    : map_(world_to_image_directions) {
  if (!map_.allFinite() || std::abs(map_.determinant()) <= 1e-15 * map_.squaredNorm()) {
    throw Error(ErrorCode::InvalidArgument, "camera prior map must be invertible");
  }
}

CameraPrior CameraPrior::broadcast(CameraSide side, ImageYAxis axis) {
  // Seen from the near touchline, +x runs to the right and +y recedes
  // (upward in the image). The far-side view is rotated by 180 degrees.
  const double s = side == CameraSide::Near ? 1.0 : -1.0;
  const double up = axis == ImageYAxis::Down ? -1.0 : 1.0;
  Eigen::Matrix2d m;
  m << s, 0.0, 0.0, s * up;
  return CameraPrior(m);
}

CameraPrior CameraPrior::from_homography(const Homography& image_from_world,
                                         const Eigen::Vector2d& at_world) {
  const Eigen::Matrix3d& h = image_from_world.matrix();
  const Eigen::Vector3d x = h * at_world.homogeneous();
  if (std::abs(x.z()) <= 1e-15 * x.norm()) {
    throw Error(ErrorCode::PointAtInfinity, "prior anchor maps to infinity");
  }
  const Eigen::Vector2d img = x.head<2>() / x.z();
  const Eigen::Matrix2d jac =
      (h.topLeftCorner<2, 2>() - img * h.block<1, 2>(2, 0)) / x.z();
  return CameraPrior(jac);
}

HomLine2 vanishing_line_from_center(const Conic& ellipse, const HomPoint2& c) {
  const double value = conditioned_residual(ellipse.normalized(), c);
  if (std::abs(value) <= 1e-12) {
    throw Error(ErrorCode::CenterOnConic, "imaged center lies on the ellipse");
  }
  if (value > 0.0) {
    throw Error(ErrorCode::CenterOnConic,
                "imaged center lies outside the ellipse");
  }
  return polar_of_point(ellipse, c);
}

TemplateCircle template_circle(const FieldTemplate& tpl, MarkingEdge edge) {
  switch (edge) {
    case MarkingEdge::Inner: return tpl.inner_circle();
    case MarkingEdge::Outer: return tpl.outer_circle();
    case MarkingEdge::Nominal: break;
  }
  return tpl.center_circle();
}

CorrespondenceSet derive_case1(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior) {
  const HomPoint2& c = require_center(obs);
  const NamedLine& support = require_line(obs);
  const auto world_support = tpl.line(support.name);
  if (!world_support) {
    throw Error(ErrorCode::MissingLine,
                "support line '" + support.name + "' is not in the template");
  }
  const Conic& e = obs.ellipse();
  const TemplateCircle circle = template_circle(tpl, obs.edge());
  const HomPoint2 o = HomPoint2::from_euclidean(circle.center);
  const Conic world_conic = circle.conic();

  const HomLine2 vanishing = vanishing_line_from_center(e, c);
  const HomPoint2 v = meet_lines(support.line, vanishing);
  const HomPoint2 world_v = meet_lines(*world_support, polar_of_point(world_conic, o));

  const Axes axes{join_points(v, c), polar_of_point(e, v), join_points(world_v, o),
                  polar_of_point(world_conic, world_v)};
  return assemble(e, c, vanishing, axes, circle, obs.edge(),
                  DerivationCase::Case1, prior);
}

CorrespondenceSet derive_case2(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior) {
  const HomPoint2& c = require_center(obs);
  if (!obs.support_point()) {
    throw Error(ErrorCode::InvalidArgument, "observation has no support point");
  }
  const NamedPoint& support = *obs.support_point();
  const auto world_xy = tpl.keypoint(support.name);
  if (!world_xy) {
    throw Error(ErrorCode::InvalidArgument,
                "support point '" + support.name + "' is not in the template");
  }
  const Conic& e = obs.ellipse();
  const TemplateCircle circle = template_circle(tpl, obs.edge());
  const HomPoint2 o = HomPoint2::from_euclidean(circle.center);
  const Conic world_conic = circle.conic();

  const HomLine2 vanishing = vanishing_line_from_center(e, c);
  const HomLine2 l1 = join_points(support.point, c);
  const HomPoint2 v = pole_of_line(e, l1);
  const HomLine2 world_l1 = join_points(HomPoint2::from_euclidean(*world_xy), o);
  const HomPoint2 world_v = pole_of_line(world_conic, world_l1);

  const Axes axes{l1, join_points(v, c), world_l1, join_points(world_v, o)};
  return assemble(e, c, vanishing, axes, circle, obs.edge(),
                  DerivationCase::Case2, prior);
}

CenterRecovery recover_center_concentric(const Conic& e1, const Conic& e2) {
  if (classify(e1) != ConicClass::Ellipse || classify(e2) != ConicClass::Ellipse) {
    throw Error(ErrorCode::NotAnEllipse, "concentric inputs must be ellipses");
  }
  auto inside = [](const Conic& inner, const Conic& outer) {
    const auto pts = sample_ellipse(geom_from_conic(inner), 32);
    return std::all_of(pts.begin(), pts.end(), [&](const Eigen::Vector2d& p) {
      return is_interior(outer, HomPoint2::from_euclidean(p), 0.0);
    });
  };
  const bool first_inner = inside(e1, e2);
  if (!first_inner && !inside(e2, e1)) {
    throw Error(ErrorCode::NotNested, "ellipses are not nested");
  }
  const Conic& inner = first_inner ? e1 : e2;
  const Conic& outer = first_inner ? e2 : e1;

  // Work in a frame where the outer ellipse is centered and unit-sized.
  const Homography frame = conditioning_similarity(outer);
  const Eigen::Matrix3d a = transform(frame, inner).normalized().matrix();
  const Eigen::Matrix3d b = transform(frame, outer).normalized().matrix();

  const Eigen::Matrix3d m = b.partialPivLu().solve(a);
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, /*computeEigenvectors=*/false);
  const Eigen::Vector3cd eig = es.eigenvalues();

  struct Candidate {
    Eigen::Vector3d frame_center;
    double eigenvalue;
    double isolation;
  };
  std::vector<Candidate> candidates;
  const double mag = eig.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(eig[i].imag()) > 1e-9 * mag) continue;
    const double lambda = eig[i].real();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(a - lambda * b, Eigen::ComputeFullV);
    const Eigen::Vector3d x = svd.matrixV().col(2);
    const HomPoint2 p(frame.inverse_matrix() * x);
    if (!is_interior(inner, p, 0.0) || !is_interior(outer, p, 0.0)) continue;
    double isolation = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j) {
      if (j != i) isolation = std::min(isolation, std::abs(eig[j] - eig[i]));
    }
    candidates.push_back({x, lambda, isolation});
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::NoValidEigenvector,
                "no real eigenvector lies inside both ellipses");
  }
  const auto best = std::max_element(
      candidates.begin(), candidates.end(),
      [](const Candidate& l, const Candidate& r) { return l.isolation < r.isolation; });

  Eigen::Vector3d center = frame.inverse_matrix() * best->frame_center;
  if (std::abs(center.z()) > 1e-15 * center.norm()) center /= center.z();
  const HomPoint2 c(center);
  const Eigen::Vector3d l_inner = inner.matrix() * c.coords();
  const Eigen::Vector3d l_outer = outer.matrix() * c.coords();
  const double lambda = l_inner.dot(l_outer) / l_outer.squaredNorm();
  return {c, HomLine2(l_inner), lambda, best->eigenvalue};
}

CorrespondenceSet derive_case3(const CircleObservation& obs,
                               const FieldTemplate& tpl,
                               const CameraPrior& prior) {
  if (!obs.outer_ellipse()) {
    throw Error(ErrorCode::InvalidArgument,
                "case 3 needs inner and outer edge ellipses");
  }
  const CenterRecovery rec = recover_center_concentric(obs.ellipse(), *obs.outer_ellipse());
  CircleObservation inner(obs.ellipse(), MarkingEdge::Inner);
  inner.set_imaged_center(rec.center);
  CorrespondenceSet out;
  if (obs.support_line()) {
    inner.set_support_line(*obs.support_line());
    out = derive_case1(inner, tpl, prior);
  } else if (obs.support_point()) {
    inner.set_support_point(*obs.support_point());
    out = derive_case2(inner, tpl, prior);
  } else {
    throw Error(ErrorCode::MissingLine,
                "case 3 needs a support line or a support point");
  }
  out.derivation = DerivationCase::Case3;
  return out;
}

CorrespondenceSet resolve_orientation(CorrespondenceSet corr,
                                      const CameraPrior& prior) {
  bool touched_greens = false;
  for (const auto& [first, second] : opposed_pairs()) {
    PointPair* p = find_point(corr, first);
    PointPair* q = find_point(corr, second);
    if (p == nullptr || q == nullptr) continue;
    const Eigen::Vector2d predicted =
        prior.predict(p->world.euclidean() - q->world.euclidean());
    const Eigen::Vector2d observed = p->image.euclidean() - q->image.euclidean();
    const double denom = predicted.norm() * observed.norm();
    if (denom == 0.0) {
      throw Error(ErrorCode::AmbiguousPrior, "degenerate pair " + first + "/" + second);
    }
    const double cosine = predicted.dot(observed) / denom;
    if (std::abs(cosine) < kPriorAmbiguity) {
      throw Error(ErrorCode::AmbiguousPrior,
                  "prior cannot orient pair " + first + "/" + second);
    }
    if (cosine < 0.0) {
      std::swap(p->image, q->image);
      LinePair* tp = find_line(corr, tangent_name(first));
      LinePair* tq = find_line(corr, tangent_name(second));
      if (tp != nullptr && tq != nullptr) std::swap(tp->image, tq->image);
      if (first.starts_with("g_")) touched_greens = true;
    }
  }
  if (touched_greens) {
    // Diagonals run through opposed 45-degree points.
    for (const auto& [name, ends] :
         {std::pair{"diagonal_ad_be", std::pair{"g_ad", "g_be"}},
          std::pair{"diagonal_db_ea", std::pair{"g_db", "g_ea"}}}) {
      LinePair* l = find_line(corr, name);
      const PointPair* p = find_point(corr, ends.first);
      const PointPair* q = find_point(corr, ends.second);
      if (l != nullptr && p != nullptr && q != nullptr) {
        l->image = join_points(p->image, q->image);
      }
    }
  }
  return corr;
}

CorrespondenceSet extend_green_points(CorrespondenceSet corr,
                                      const Conic& ellipse,
                                      const FieldTemplate& tpl) {
  for (const char* n : {dn::kA, dn::kB, dn::kD, dn::kE}) {
    if (corr.point(n) == nullptr) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("correspondence set lacks point ") + n);
    }
  }
  if (!corr.vanishing_line || !corr.imaged_center) {
    throw Error(ErrorCode::InvalidArgument,
                "correspondence set lacks vanishing line or imaged center");
  }
  const TemplateCircle circle = template_circle(tpl, corr.edge);
  const Conic world_conic = circle.conic();
  const HomPoint2 o = HomPoint2::from_euclidean(circle.center);
  const HomLine2 world_vanishing = HomLine2::at_infinity();

  auto tangent = [&](const char* n, bool image) {
    const PointPair* p = corr.point(n);
    return image ? polar_of_point(ellipse, p->image)
                 : polar_of_point(world_conic, p->world);
  };

  struct Diagonal {
    const char* near_name;  // 45-degree point on the corner side
    const char* far_name;
    const char* corner_a;
    const char* corner_b;
    const char* opposite_a;
    const char* opposite_b;
    const char* line_name;
  };
  const Diagonal diagonals[] = {
      {"g_ad", "g_be", dn::kA, dn::kD, dn::kB, dn::kE, "diagonal_ad_be"},
      {"g_db", "g_ea", dn::kD, dn::kB, dn::kE, dn::kA, "diagonal_db_ea"},
  };

  for (const auto& d : diagonals) {
    HomLine2 lines[2] = {HomLine2::at_infinity(), HomLine2::at_infinity()};
    HomPoint2 near_pts[2] = {o, o};
    HomPoint2 far_pts[2] = {o, o};
    for (int side = 0; side < 2; ++side) {
      const bool image = side == 0;
      const HomPoint2 corner = meet_lines(tangent(d.corner_a, image), tangent(d.corner_b, image));
      const HomPoint2 opposite =
          meet_lines(tangent(d.opposite_a, image), tangent(d.opposite_b, image));
      const HomLine2 diag = join_points(corner, opposite);
      const Conic& conic = image ? ellipse : world_conic;
      const HomLine2& vanishing = image ? *corr.vanishing_line : world_vanishing;
      const HomPoint2& center = image ? *corr.imaged_center : o;
      const auto pts = require_two(diag, conic, "trapezoid diagonal");
      const bool first_near = same_side(vanishing, center, pts[0], corner);
      lines[side] = diag;
      near_pts[side] = first_near ? pts[0] : pts[1];
      far_pts[side] = first_near ? pts[1] : pts[0];
    }
    corr.points.push_back({d.near_name, near_pts[0], near_pts[1]});
    corr.points.push_back({d.far_name, far_pts[0], far_pts[1]});
    corr.lines.push_back({d.line_name, lines[0], lines[1]});
  }
  return corr;
}

std::string to_string(DerivationCase c) {
  switch (c) {
    case DerivationCase::Case1: return "case1";
    case DerivationCase::Case2: return "case2";
    case DerivationCase::Case3: return "case3";
  }
  return "unknown";
}

std::string to_string(MarkingEdge e) {
  switch (e) {
    case MarkingEdge::Nominal: return "nominal";
    case MarkingEdge::Inner: return "inner";
    case MarkingEdge::Outer: return "outer";
  }
  return "unknown";
}

}  // namespace circlereg
