#include "circlereg/homography.hpp"

#include <cmath>

#include <Eigen/SVD>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace circlereg {
namespace {

// Similarity taking the finite points to zero mean and sqrt(2) mean
// distance from the origin.
Eigen::Matrix3d normalizing_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  if (pts.size() < 2) return t;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  if (!(dist > 0.0)) return t;
  const double s = std::sqrt(2.0) / dist;
  t << s, 0.0, -s * mean.x(),
       0.0, s, -s * mean.y(),
       0.0, 0.0, 1.0;
  return t;
}

// Two orthonormal vectors spanning the complement of v.
Eigen::Matrix<double, 2, 3> complement_basis(const Eigen::Vector3d& v) {
  const Eigen::Vector3d n = v.normalized();
  int k = 0;
  n.cwiseAbs().minCoeff(&k);
  const Eigen::Vector3d u1 = n.cross(Eigen::Vector3d::Unit(k)).normalized();
  const Eigen::Vector3d u2 = n.cross(u1).normalized();
  Eigen::Matrix<double, 2, 3> b;
  b.row(0) = u1.transpose();
  b.row(1) = u2.transpose();
  return b;
}

double weight_at(const std::vector<double>& w, std::size_t i) {
  return w.empty() ? 1.0 : w.at(i);
}

struct ReprojectionFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::vector<Eigen::Vector3d> world;
  std::vector<Eigen::Vector2d> image;

  int inputs() const { return 9; }
  // One extra residual pins the overall scale of h.
  int values() const { return static_cast<int>(2 * world.size() + 1); }

  int operator()(const Eigen::VectorXd& h, Eigen::VectorXd& fvec) const {
    const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> m(h.data());
    for (std::size_t i = 0; i < world.size(); ++i) {
      const Eigen::Vector3d x = m * world[i];
      const Eigen::Vector2d r = x.head<2>() / x.z() - image[i];
      fvec[static_cast<Eigen::Index>(2 * i)] = r.x();
      fvec[static_cast<Eigen::Index>(2 * i + 1)] = r.y();
    }
    fvec[values() - 1] = h.squaredNorm() - 1.0;
    return 0;
  }
};

}  // namespace

DltProblem DltProblem::from(const CorrespondenceSet& corr) {
  DltProblem p;
  p.points = corr.points;
  p.lines = corr.lines;
  return p;
}

Homography estimate_homography_dlt(const DltProblem& problem, const DltOptions& options) {
  if (!problem.point_weights.empty() &&
      problem.point_weights.size() != problem.points.size()) {
    throw Error(ErrorCode::InvalidArgument, "point weight count mismatch");
  }
  if (!problem.line_weights.empty() &&
      problem.line_weights.size() != problem.lines.size()) {
    throw Error(ErrorCode::InvalidArgument, "line weight count mismatch");
  }

  std::vector<Eigen::Vector2d> world_pts;
  std::vector<Eigen::Vector2d> image_pts;
  for (const auto& pp : problem.points) {
    if (!pp.world.is_at_infinity()) world_pts.push_back(pp.world.euclidean());
    if (!pp.image.is_at_infinity()) image_pts.push_back(pp.image.euclidean());
  }
  const Eigen::Matrix3d tw = normalizing_transform(world_pts);
  const Eigen::Matrix3d ti = normalizing_transform(image_pts);
  const Eigen::Matrix3d tw_inv_t = tw.inverse().transpose();
  const Eigen::Matrix3d ti_inv_t = ti.inverse().transpose();

  const std::size_t rows = 2 * (problem.points.size() + problem.lines.size());
  if (rows < 8) {
    throw Error(ErrorCode::RankDeficient,
                "fewer than 8 constraint rows for a homography");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(rows, 9)), 9);

  Eigen::Index r = 0;
  for (std::size_t i = 0; i < problem.points.size(); ++i) {
    const auto& pp = problem.points[i];
    const double w = weight_at(problem.point_weights, i);
    const Eigen::Vector3d xw = (tw * pp.world.coords()).normalized();
    const Eigen::Vector3d xi = (ti * pp.image.coords()).normalized();
    // Rows of x_img x (H x_world) = 0, written against h in row-major order.
    const Eigen::RowVector3d xt = xw.transpose();
    a.block<1, 3>(r, 3) = -xi.z() * xt * w;
    a.block<1, 3>(r, 6) = xi.y() * xt * w;
    a.block<1, 3>(r + 1, 0) = xi.z() * xt * w;
    a.block<1, 3>(r + 1, 6) = -xi.x() * xt * w;
    r += 2;
  }
  for (std::size_t i = 0; i < problem.lines.size(); ++i) {
    const auto& lp = problem.lines[i];
    const double w = weight_at(problem.line_weights, i);
    Eigen::Vector3d li = ti_inv_t * lp.image.coords();
    Eigen::Vector3d lw = tw_inv_t * lp.world.coords();
    // Unit-normal scaling puts line rows on the same footing as point rows.
    if (li.head<2>().norm() > 1e-12 * li.norm()) li /= li.head<2>().norm();
    else li.normalize();
    if (lw.head<2>().norm() > 1e-12 * lw.norm()) lw /= lw.head<2>().norm();
    else lw.normalize();
    // l_world ~ H^T l_img: both complement directions of l_world must be
    // orthogonal to H^T l_img. (H^T l)_j = sum_k l_k h[3k + j].
    const Eigen::Matrix<double, 2, 3> basis = complement_basis(lw);
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j < 3; ++j) {
          a(r + b, 3 * k + j) = w * basis(b, j) * li[k];
        }
      }
    }
    r += 2;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv[7] <= 1e-13 * sv[0]) {
    throw Error(ErrorCode::RankDeficient, "constraint matrix has rank below 8");
  }
  if (sv[0] / sv[7] > options.max_condition) {
    throw Error(ErrorCode::IllConditioned, "design matrix condition number too large");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];

  Homography est = Homography(ti.inverse() * hn * tw).normalized();
  if (options.refine) est = refine_homography(est, problem).normalized();
  return est;
}

Homography refine_homography(const Homography& initial, const DltProblem& problem) {
  ReprojectionFunctor f;
  for (const auto& pp : problem.points) {
    if (pp.world.is_at_infinity() || pp.image.is_at_infinity()) continue;
    f.world.push_back(pp.world.euclidean().homogeneous());
    f.image.push_back(pp.image.euclidean());
  }
  if (f.world.size() < 4) return initial;

  const Eigen::Matrix3d m0 = initial.normalized().matrix();
  Eigen::VectorXd h(9);
  for (int i = 0; i < 9; ++i) h[i] = m0(i / 3, i % 3);

  Eigen::NumericalDiff<ReprojectionFunctor> numdiff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ReprojectionFunctor>> lm(numdiff);
  lm.parameters.maxfev = 2000;
  lm.minimize(h);
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = h[i];
  if (!m.allFinite()) return initial;
  return Homography(m);
}

Homography camera_to_homography(const CameraSample& cam) {
  validate_camera(cam);
  if (!(cam.position.z() > 1e-9)) {
    throw Error(ErrorCode::DegeneratePose, "camera must be above the field plane");
  }
  if (std::abs(cam.optical_axis().z()) < 1e-9) {
    throw Error(ErrorCode::DegeneratePose, "optical axis is parallel to the field");
  }
  Eigen::Matrix3d rt;
  rt.col(0) = cam.rotation.col(0);
  rt.col(1) = cam.rotation.col(1);
  rt.col(2) = -cam.rotation * cam.position;
  const Eigen::Matrix3d h = cam.intrinsics() * rt;
  return Homography(h / h.norm());
}

Eigen::Vector2d project(const Homography& h, const Eigen::Vector2d& world) {
  const Eigen::Vector3d x = h.matrix() * world.homogeneous();
  if (std::abs(x.z()) <= 1e-12 * x.norm()) {
    throw Error(ErrorCode::PointAtInfinity, "field point maps to infinity");
  }
  return x.head<2>() / x.z();
}

double mean_reprojection_error(const Homography& truth, const Homography& estimate,
                               std::span<const HomPoint2> world_points) {
  if (world_points.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no points for reprojection error");
  }
  double sum = 0.0;
  for (const auto& p : world_points) {
    const Eigen::Vector3d a = truth.matrix() * p.coords();
    const Eigen::Vector3d b = estimate.matrix() * p.coords();
    if (std::abs(a.z()) <= 1e-12 * a.norm() || std::abs(b.z()) <= 1e-12 * b.norm()) {
      throw Error(ErrorCode::PointAtInfinity, "a field point maps to infinity");
    }
    sum += (a.head<2>() / a.z() - b.head<2>() / b.z()).norm();
  }
  return sum / static_cast<double>(world_points.size());
}

std::vector<HomPoint2> visible_field_points(const Homography& image_from_world,
                                            const FieldTemplate& tpl, int width,
                                            int height, double spacing) {
  if (!(spacing > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  }
  std::vector<HomPoint2> out;
  auto keep = [&](const Eigen::Vector2d& w) {
    const Eigen::Vector3d x = image_from_world.matrix() * w.homogeneous();
    if (x.z() <= 1e-12 * x.norm()) return;  // behind the camera or at infinity
    const Eigen::Vector2d px = x.head<2>() / x.z();
    if (px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height) {
      out.push_back(HomPoint2::from_euclidean(w));
    }
  };
  const double hl = tpl.length() / 2.0;
  const double hw = tpl.width() / 2.0;
  const int nx = static_cast<int>(std::floor(tpl.length() / spacing + 1e-9));
  const int ny = static_cast<int>(std::floor(tpl.width() / spacing + 1e-9));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      keep({-hl + i * spacing, -hw + j * spacing});
    }
  }
  for (const auto& [name, xy] : tpl.keypoints()) keep(xy);
  return out;
}

}  // namespace circlereg
