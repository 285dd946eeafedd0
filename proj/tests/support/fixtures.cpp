#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "circlereg/detect_ingest.hpp"

namespace circlereg::testing {

CameraSample random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  for (;;) {
    const Eigen::Vector3d pos(in(-30, 30), in(-60, -15), in(5, 40));
    const Eigen::Vector3d target(in(-3, 3), in(-3, 3), 0.0);
    const double focal = in(800, 4000);
    const double roll = in(-10, 10) * std::numbers::pi / 180.0;
    CameraSample cam = CameraSample::look_at(pos, target, focal, roll);
    // Keep cameras that see the whole circle in front of them.
    const Homography h = camera_to_homography(cam);
    bool front = true;
    for (int i = 0; i < 36 && front; ++i) {
      const double t = i * std::numbers::pi / 18.0;
      const Eigen::Vector3d x =
          h.matrix() * Eigen::Vector3d(9.3 * std::cos(t), 9.3 * std::sin(t), 1.0);
      front = x.z() > 0.0;
    }
    if (front) return cam;
  }
}

Eigen::Matrix3d random_matrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = u(rng);
  return m + Eigen::Matrix3d::Identity();
}

Eigen::Vector3d random_vector(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Eigen::Vector3d(u(rng), u(rng), u(rng));
}

CircleFixture make_fixture(std::mt19937_64& rng, const FieldTemplate& tpl) {
  const CameraSample cam = random_camera(rng);
  const Homography h = camera_to_homography(cam);
  return {cam, h, imaged_circle(h, tpl.center_circle()),
          transform(h, HomPoint2(0.0, 0.0, 1.0)), transform(h, tpl.halfway_line())};
}

CircleObservation case1_observation(const CircleFixture& f) {
  CircleObservation obs(f.ellipse);
  obs.set_imaged_center(f.center);
  obs.set_support_line({"halfway", f.halfway});
  return obs;
}

Conic imaged_circle(const Homography& h, const TemplateCircle& c) {
  return transform(h, c.conic());
}

std::vector<Eigen::Vector2d> project_circle_points(const Homography& h,
                                                   const TemplateCircle& c, int n,
                                                   double phase) {
  std::vector<Eigen::Vector2d> out;
  for (int i = 0; i < n; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * i / n;
    out.push_back(project(h, c.center + c.radius * Eigen::Vector2d(std::cos(t), std::sin(t))));
  }
  return out;
}

double pixel_distance(const HomPoint2& a, const HomPoint2& b) {
  return (a.euclidean() - b.euclidean()).norm();
}

double conic_distance(const Conic& a, const Conic& b) {
  const Eigen::Matrix3d x = a.matrix() / a.matrix().norm();
  const Eigen::Matrix3d y = b.matrix() / b.matrix().norm();
  return std::min((x - y).norm(), (x + y).norm());
}

Conic svd_algebraic_fit(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).squaredNorm();
  const double s = std::sqrt(2.0 * pts.size() / spread);

  Eigen::MatrixXd d(static_cast<Eigen::Index>(pts.size()), 6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector2d q = s * (pts[i] - mean);
    d.row(static_cast<Eigen::Index>(i)) << q.x() * q.x(), q.x() * q.y(), q.y() * q.y(), q.x(),
        q.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeFullV);
  const Eigen::VectorXd k = svd.matrixV().col(5);
  Eigen::Matrix3d m;
  m << k[0], k[1] / 2, k[3] / 2,
       k[1] / 2, k[2], k[4] / 2,
       k[3] / 2, k[4] / 2, k[5];
  // Undo the normalization: q = T p.
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return Conic(t.transpose() * m * t);
}

Eigen::Matrix3d four_point_homography(const std::vector<Eigen::Vector2d>& src,
                                      const std::vector<Eigen::Vector2d>& dst) {
  // Map the canonical frame e1, e2, e3, (1,1,1) onto four points.
  auto basis = [](const std::vector<Eigen::Vector2d>& p) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) a.col(i) = p[static_cast<std::size_t>(i)].homogeneous();
    const Eigen::Vector3d lambda = a.lu().solve(p[3].homogeneous());
    return Eigen::Matrix3d(a * lambda.asDiagonal());
  };
  return basis(dst) * basis(src).inverse();
}

double mean_curve_distance(const Conic& truth, const Conic& fit, int n) {
  double sum = 0.0;
  for (const auto& p : sample_ellipse(geom_from_conic(truth), n)) {
    sum += sampson_distance(fit, p);
  }
  return sum / n;
}

namespace {
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace circlereg::testing
