#include "circlereg/conic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace circlereg {
namespace {

constexpr double kTangencyTol = 1e-10;

// Similarity that moves a central conic to the origin with unit geometric
// mean axis length. Pixel-scale conics are otherwise badly scaled: the
// quadratic block is ~1e-6 of the constant term after normalization.
struct ConditionedConic {
  Eigen::Matrix3d to_frame = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d from_frame = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d m;
};

ConditionedConic condition(const Conic& c) {
  ConditionedConic out;
  const Eigen::Matrix3d m = c.normalized().matrix();
  const Eigen::Matrix2d a2 = m.topLeftCorner<2, 2>();
  const double det2 = a2.determinant();
  if (std::abs(det2) > 1e-14) {
    const Eigen::Vector2d center = -a2.inverse() * m.block<2, 1>(0, 2);
    const double k = m(2, 2) + m.block<2, 1>(0, 2).dot(center);
    double scale = std::sqrt(std::abs(k)) / std::pow(std::abs(det2), 0.25);
    if (!std::isfinite(scale) || scale <= 0.0 || !center.allFinite()) {
      scale = 1.0;
    }
    out.to_frame << 1.0 / scale, 0.0, -center.x() / scale,
                    0.0, 1.0 / scale, -center.y() / scale,
                    0.0, 0.0, 1.0;
    out.from_frame << scale, 0.0, center.x(),
                      0.0, scale, center.y(),
                      0.0, 0.0, 1.0;
  }
  Eigen::Matrix3d mf = out.from_frame.transpose() * m * out.from_frame;
  out.m = mf / mf.norm();
  return out;
}

double conditioned_value(const ConditionedConic& cc, const Eigen::Vector3d& x) {
  const Eigen::Vector3d y = (cc.to_frame * x).normalized();
  return y.dot(cc.m * y);
}

}  // namespace

Eigen::Vector2d EllipseGeom::point_at(double t) const {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const double u = semi_major * std::cos(t);
  const double v = semi_minor * std::sin(t);
  return center + Eigen::Vector2d(ca * u - sa * v, sa * u + ca * v);
}

ConicClass classify(const Conic& c) {
  // Tests are relative so the answer does not depend on pixel or meter scale.
  const Eigen::Matrix3d m = c.normalized().matrix();
  const Eigen::Matrix2d a2 = m.topLeftCorner<2, 2>();
  const Eigen::Vector2d b = m.block<2, 1>(0, 2);
  const double det2 = a2.determinant();
  const double a2n = a2.squaredNorm();
  if (a2n <= 1e-300) return ConicClass::Degenerate;
  if (std::abs(det2) <= 1e-12 * a2n) {
    return std::abs(m.determinant()) <= 1e-15 ? ConicClass::Degenerate : ConicClass::Parabola;
  }
  // Value at the center, with a cancellation-aware zero test.
  const Eigen::Vector2d center = -a2.inverse() * b;
  const double bc = b.dot(center);
  const double k = m(2, 2) + bc;
  if (std::abs(k) <= 1e-12 * (std::abs(m(2, 2)) + std::abs(bc))) return ConicClass::Degenerate;
  if (det2 < 0.0) return ConicClass::Hyperbola;
  // Positive 2x2 trace after normalized(): a real ellipse is negative inside.
  return k < 0.0 ? ConicClass::Ellipse : ConicClass::ImaginaryEllipse;
}

Conic circle_conic(const Eigen::Vector2d& center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::NonPositiveRadius, "radius must be positive");
  }
  const double ox = center.x();
  const double oy = center.y();
  Eigen::Matrix3d m;
  m << 1.0, 0.0, -ox,
       0.0, 1.0, -oy,
       -ox, -oy, ox * ox + oy * oy - radius * radius;
  return Conic(m);
}

std::vector<HomPoint2> intersect_line_conic(const HomLine2& l, const Conic& c) {
  const ConditionedConic cc = condition(c);
  // Lines map with the inverse transpose of the point map.
  const Eigen::Vector3d lf = (cc.from_frame.transpose() * l.coords()).normalized();

  int k = 0;
  lf.cwiseAbs().minCoeff(&k);
  const Eigen::Vector3d p = lf.cross(Eigen::Vector3d::Unit(k)).normalized();
  const Eigen::Vector3d q = lf.cross(p).normalized();

  const double qa = p.dot(cc.m * p);
  const double qb = p.dot(cc.m * q);
  const double qc = q.dot(cc.m * q);
  const double scale = qa * qa + qb * qb + qc * qc;
  if (scale <= 1e-30) return {};  // line lies on a degenerate conic

  const double disc = qb * qb - qa * qc;
  if (disc / scale < -kTangencyTol) return {};

  std::vector<Eigen::Vector3d> frame_points;
  if (std::abs(disc / scale) <= kTangencyTol) {
    // Double root of qa s^2 + 2 qb s t + qc t^2.
    if (std::abs(qa) >= std::abs(qc)) {
      frame_points.push_back(-qb / qa * p + q);
    } else {
      frame_points.push_back(p - qb / qc * q);
    }
  } else {
    const double root = std::sqrt(disc);
    const double r1 = -qb - std::copysign(root, qb);
    if (std::abs(qa) >= std::abs(qc)) {
      frame_points.push_back(r1 / qa * p + q);
      frame_points.push_back(qc / r1 * p + q);
    } else {
      frame_points.push_back(p + r1 / qc * q);
      frame_points.push_back(p + qa / r1 * q);
    }
  }

  std::vector<HomPoint2> out;
  for (const auto& fp : frame_points) {
    Eigen::Vector3d x = cc.from_frame * fp;
    HomPoint2 hp(x);
    if (!hp.is_at_infinity()) x /= x.z();
    out.emplace_back(x);
  }

  if (out.size() == 2) {
    const Eigen::Vector2d dir = l.direction();
    auto key = [&](const HomPoint2& hp) {
      if (hp.is_at_infinity()) return hp.canonical().head<2>().dot(dir);
      return hp.euclidean().dot(dir);
    };
    if (key(out[1]) < key(out[0])) std::swap(out[0], out[1]);
  }
  return out;
}

Homography conditioning_similarity(const Conic& c) {
  return Homography(condition(c).to_frame);
}

double conditioned_residual(const Conic& c, const HomPoint2& p) {
  return conditioned_value(condition(c), p.coords());
}

HomLine2 tangent_at(const Conic& c, const HomPoint2& p, double tol) {
  if (std::abs(conditioned_residual(c, p)) > tol) {
    throw Error(ErrorCode::PointNotOnConic, "point is not on the conic");
  }
  return polar_of_point(c, p);
}

bool is_interior(const Conic& ellipse, const HomPoint2& p, double tol) {
  return conditioned_residual(ellipse, p) < -tol;
}

Conic fit_ellipse_direct(std::span<const Eigen::Vector2d> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6) {
    throw Error(ErrorCode::InsufficientPoints,
                "ellipse fitting needs at least 6 points");
  }

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  double ms = 0.0;
  for (const auto& p : points) ms += (p - mean).squaredNorm();
  const double rms = std::sqrt(ms / static_cast<double>(n));
  if (!(rms > 0.0) || !std::isfinite(rms)) {
    throw Error(ErrorCode::DegenerateConfiguration, "points coincide");
  }

  Eigen::MatrixX3d d1(n, 3);
  Eigen::MatrixX3d d2(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d q = (points[static_cast<std::size_t>(i)] - mean) / rms;
    d1.row(i) << q.x() * q.x(), q.x() * q.y(), q.y() * q.y();
    d2.row(i) << q.x(), q.y(), 1.0;
  }

  // Block-partitioned form of the constrained scatter eigenproblem, which
  // avoids the singular constraint matrix of the naive 6x6 formulation.
  const Eigen::Matrix3d s1 = d1.transpose() * d1;
  const Eigen::Matrix3d s2 = d1.transpose() * d2;
  const Eigen::Matrix3d s3 = d2.transpose() * d2;

  Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
  s3_lu.setThreshold(1e-12);
  if (!s3_lu.isInvertible()) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "scatter matrix is rank-deficient (collinear points)");
  }
  const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;

  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateConfiguration, "eigen solve failed");
  }

  int best = -1;
  double best_constraint = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3cd v = es.eigenvectors().col(i);
    if (v.imag().norm() > 1e-9 * v.norm()) continue;
    const Eigen::Vector3d a = v.real();
    const double constraint = 4.0 * a[0] * a[2] - a[1] * a[1];
    if (constraint > best_constraint) {
      best_constraint = constraint;
      best = i;
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "no eigenvector satisfies the ellipse constraint");
  }

  const Eigen::Vector3d a1 = es.eigenvectors().col(best).real();
  const Eigen::Vector3d a2 = t * a1;
  Eigen::Matrix<double, 6, 1> k;
  k << a1, a2;
  const Conic normalized_fit = conic_from_coefficients(k);

  Eigen::Matrix3d to_unit;
  to_unit << 1.0 / rms, 0.0, -mean.x() / rms,
             0.0, 1.0 / rms, -mean.y() / rms,
             0.0, 0.0, 1.0;
  return Conic(to_unit.transpose() * normalized_fit.matrix() * to_unit)
      .normalized();
}

Eigen::Matrix<double, 6, 1> conic_coefficients(const Conic& c) {
  const Eigen::Matrix3d& m = c.matrix();
  Eigen::Matrix<double, 6, 1> k;
  k << m(0, 0), 2.0 * m(0, 1), m(1, 1), 2.0 * m(0, 2), 2.0 * m(1, 2), m(2, 2);
  return k;
}

Conic conic_from_coefficients(const Eigen::Matrix<double, 6, 1>& k) {
  Eigen::Matrix3d m;
  m << k[0], k[1] / 2.0, k[3] / 2.0,
       k[1] / 2.0, k[2], k[4] / 2.0,
       k[3] / 2.0, k[4] / 2.0, k[5];
  return Conic(m);
}

EllipseGeom geom_from_conic(const Conic& c) {
  if (classify(c) != ConicClass::Ellipse) {
    throw Error(ErrorCode::NotAnEllipse, "conic is not a real ellipse");
  }
  const Eigen::Matrix3d m = c.normalized().matrix();
  const Eigen::Matrix2d a2 = m.topLeftCorner<2, 2>();
  const Eigen::Vector2d b = m.block<2, 1>(0, 2);
  const Eigen::Vector2d center = -a2.ldlt().solve(b);
  const double k = m(2, 2) + b.dot(center);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a2 / (-k));
  const Eigen::Vector2d lambda = es.eigenvalues();  // ascending

  EllipseGeom g;
  g.center = center;
  g.semi_major = 1.0 / std::sqrt(lambda[0]);
  g.semi_minor = 1.0 / std::sqrt(lambda[1]);
  if (lambda[1] - lambda[0] <= 1e-12 * lambda[1]) {
    g.angle = 0.0;
  } else {
    const Eigen::Vector2d axis = es.eigenvectors().col(0);
    double angle = std::atan2(axis.y(), axis.x());
    if (angle < 0.0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi) angle -= std::numbers::pi;
    g.angle = angle;
  }
  return g;
}

Conic conic_from_geom(const EllipseGeom& g) {
  if (!(g.semi_minor > 0.0) || g.semi_major < g.semi_minor ||
      !g.center.allFinite() || !std::isfinite(g.angle)) {
    throw Error(ErrorCode::InvalidArgument,
                "ellipse geometry needs semi_major >= semi_minor > 0");
  }
  const double ca = std::cos(g.angle);
  const double sa = std::sin(g.angle);
  Eigen::Matrix2d r;
  r << ca, -sa, sa, ca;
  const Eigen::Matrix2d q =
      r *
      Eigen::Vector2d(1.0 / (g.semi_major * g.semi_major),
                      1.0 / (g.semi_minor * g.semi_minor))
          .asDiagonal() *
      r.transpose();
  Eigen::Matrix3d m;
  m.topLeftCorner<2, 2>() = q;
  m.block<2, 1>(0, 2) = -q * g.center;
  m.block<1, 2>(2, 0) = (-q * g.center).transpose();
  m(2, 2) = g.center.dot(q * g.center) - 1.0;
  return Conic(m);
}

std::vector<Eigen::Vector2d> sample_ellipse(const EllipseGeom& g, int n) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    out.push_back(g.point_at(2.0 * std::numbers::pi * i / n));
  }
  return out;
}

}  // namespace circlereg
