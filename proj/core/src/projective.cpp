#include "circlereg/projective.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace circlereg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateJoin: return "DegenerateJoin";
    case ErrorCode::DegenerateMeet: return "DegenerateMeet";
    case ErrorCode::ZeroPolar: return "ZeroPolar";
    case ErrorCode::SingularConic: return "SingularConic";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::PointNotOnConic: return "PointNotOnConic";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NotAnEllipse: return "NotAnEllipse";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::CenterOnConic: return "CenterOnConic";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::MissingCenter: return "MissingCenter";
    case ErrorCode::MissingLine: return "MissingLine";
    case ErrorCode::NotNested: return "NotNested";
    case ErrorCode::NoValidEigenvector: return "NoValidEigenvector";
    case ErrorCode::AmbiguousPrior: return "AmbiguousPrior";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::CircleNotVisible: return "CircleNotVisible";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ClassAbsent: return "ClassAbsent";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::ConsensusFailure: return "ConsensusFailure";
    case ErrorCode::InsufficientEvidence: return "InsufficientEvidence";
    case ErrorCode::NoCompletePairs: return "NoCompletePairs";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Eigen::Vector3d canonical(const Eigen::Vector3d& v) {
  Eigen::Vector3d u = v.normalized();
  // Components below this magnitude are round-off, not a sign.
  constexpr double kSignificant = 1e-12;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(u[i]) > kSignificant) {
      if (u[i] < 0.0) u = -u;
      break;
    }
  }
  return u;
}

bool scale_equivalent(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      double tol) {
  // Two canonical forms can still differ by sign when the leading component
  // sits right at the significance threshold, so accept either sign.
  const Eigen::Vector3d ca = canonical(a);
  const Eigen::Vector3d cb = canonical(b);
  return (ca - cb).cwiseAbs().maxCoeff() <= tol ||
         (ca + cb).cwiseAbs().maxCoeff() <= tol;
}

bool HomPoint2::is_at_infinity(double tol) const {
  const Eigen::Vector3d u = unit();
  return std::abs(u.z()) <= tol;
}

Eigen::Vector2d HomPoint2::euclidean() const {
  if (is_at_infinity(0.0) || is_at_infinity()) {
    throw Error(ErrorCode::PointAtInfinity,
                "cannot dehomogenize a point at infinity");
  }
  return coords().head<2>() / coords().z();
}

HomLine2 HomLine2::with_unit_normal() const {
  const double n = coords().head<2>().norm();
  if (n <= 1e-15 * coords().norm()) {
    throw Error(ErrorCode::InvalidArgument,
                "the line at infinity has no finite normal");
  }
  return HomLine2(coords() / n);
}

Conic::Conic(const Eigen::Matrix3d& m) : m_(0.5 * (m + m.transpose())) {
  if (!m_.allFinite() || m_.norm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "conic matrix must be finite and nonzero");
  }
}

double Conic::normalized_value(const HomPoint2& p) const {
  const Eigen::Vector3d x = p.unit();
  return x.dot((m_ / m_.norm()) * x);
}

Conic Conic::normalized() const {
  Eigen::Matrix3d m = m_ / m_.norm();
  if (m(0, 0) + m(1, 1) < 0.0) m = -m;
  return Conic(m);
}

bool Conic::equivalent(const Conic& other, double tol) const {
  const Conic a = normalized();
  const Conic b = other.normalized();
  // normalized() fixes the sign through the 2x2 trace; fall back to both
  // signs when that trace is near zero (hyperbola-like conics).
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= tol ||
         (a.matrix() + b.matrix()).cwiseAbs().maxCoeff() <= tol;
}

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  if (!m_.allFinite() || m_.norm() == 0.0) {
    throw Error(ErrorCode::SingularHomography,
                "homography matrix must be finite and nonzero");
  }
  const double det = (m_ / m_.norm()).determinant();
  if (std::abs(det) <= kDeterminantFloor) {
    throw Error(ErrorCode::SingularHomography,
                "normalized determinant below floor");
  }
}

Homography Homography::normalized() const {
  Eigen::Matrix3d m = m_ / m_.norm();
  if (m.determinant() < 0.0) m = -m;
  return Homography(m);
}

bool Homography::equivalent(const Homography& other, double tol) const {
  const Eigen::Matrix3d a = m_ / m_.norm();
  const Eigen::Matrix3d b = other.m_ / other.m_.norm();
  return (a - b).cwiseAbs().maxCoeff() <= tol ||
         (a + b).cwiseAbs().maxCoeff() <= tol;
}

HomLine2 join_points(const HomPoint2& p, const HomPoint2& q) {
  const Eigen::Vector3d l = p.unit().cross(q.unit());
  if (l.norm() <= kDegenerateCrossTol) {
    throw Error(ErrorCode::DegenerateJoin, "points coincide up to scale");
  }
  return HomLine2(l);
}

HomPoint2 meet_lines(const HomLine2& l, const HomLine2& m) {
  const Eigen::Vector3d p = l.unit().cross(m.unit());
  if (p.norm() <= kDegenerateCrossTol) {
    throw Error(ErrorCode::DegenerateMeet, "lines coincide up to scale");
  }
  return HomPoint2(p);
}

bool incident(const HomPoint2& p, const HomLine2& l, double tol) {
  return std::abs(p.unit().dot(l.unit())) <= tol;
}

HomLine2 polar_of_point(const Conic& c, const HomPoint2& p) {
  const Eigen::Vector3d l = c.matrix() * p.coords();
  if (l.norm() <= kDegenerateCrossTol * c.matrix().norm() * p.coords().norm()) {
    throw Error(ErrorCode::ZeroPolar, "point lies in the conic's null space");
  }
  return HomLine2(l);
}

HomPoint2 pole_of_line(const Conic& c, const HomLine2& l) {
  const Eigen::Matrix3d m = c.matrix() / c.matrix().norm();
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularConic, "conic is rank-deficient");
  }
  return HomPoint2(lu.solve(l.unit()));
}

HomPoint2 transform(const Homography& h, const HomPoint2& p) {
  return HomPoint2(h.matrix() * p.coords());
}

HomLine2 transform(const Homography& h, const HomLine2& l) {
  return HomLine2(h.inverse_matrix().transpose() * l.coords());
}

Conic transform(const Homography& h, const Conic& c) {
  const Eigen::Matrix3d hinv = h.inverse_matrix();
  return Conic(hinv.transpose() * c.matrix() * hinv);
}

}  // namespace circlereg
