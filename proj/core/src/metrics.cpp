#include "circlereg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "circlereg/conic.hpp"
#include "circlereg/error.hpp"

namespace circlereg {
namespace {

double point_line_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& q1,
                           const Eigen::Vector2d& q2) {
  const Eigen::Vector3d l = q1.homogeneous().cross(q2.homogeneous());
  const double n = l.head<2>().norm();
  if (!(n > 0.0)) {
    throw Error(ErrorCode::DegenerateJoin, "pair points coincide");
  }
  return std::abs(l.dot(p.homogeneous())) / n;
}

}  // namespace

std::vector<NamePair> default_audit_pairs() {
  namespace kn = keypoint_names;
  return {{kn::kLeft, kn::kRight},
          {kn::kFarLeft, kn::kNearRight},
          {kn::kFarRight, kn::kNearLeft}};
}

CollinearityAudit collinearity_audit(const std::map<std::string, Eigen::Vector2d>& kp,
                                     const std::vector<NamePair>& pairs,
                                     const std::string& center_name) {
  const auto c = kp.find(center_name);
  if (c == kp.end()) {
    throw Error(ErrorCode::MissingCenter, "no '" + center_name + "' keypoint");
  }
  CollinearityAudit audit;
  for (const auto& [first, second] : pairs) {
    const std::string name = first + "-" + second;
    const auto p = kp.find(first);
    const auto q = kp.find(second);
    if (p == kp.end() || q == kp.end()) {
      audit.skipped.push_back(name);
      continue;
    }
    audit.pairs.push_back({name, point_line_distance(c->second, p->second, q->second)});
  }
  if (audit.pairs.empty()) {
    throw Error(ErrorCode::NoCompletePairs, "no opposed pair is complete");
  }
  std::vector<double> d;
  for (const auto& pd : audit.pairs) d.push_back(pd.distance_px);
  std::sort(d.begin(), d.end());
  double sum = 0.0;
  for (double v : d) sum += v;
  audit.mean = sum / static_cast<double>(d.size());
  audit.max = d.back();
  const std::size_t mid = d.size() / 2;
  audit.median = d.size() % 2 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
  return audit;
}

CollinearityAudit collinearity_audit(const CorrespondenceSet& corr) {
  if (!corr.imaged_center || corr.imaged_center->is_at_infinity()) {
    throw Error(ErrorCode::MissingCenter, "correspondence set has no imaged center");
  }
  std::map<std::string, Eigen::Vector2d> kp;
  kp["center"] = corr.imaged_center->euclidean();
  for (const auto& p : corr.points) {
    if (!p.image.is_at_infinity()) kp[p.name] = p.image.euclidean();
  }
  return collinearity_audit(kp, opposed_pairs(), "center");
}

std::string audit_csv(const CollinearityAudit& audit) {
  std::ostringstream out;
  char buf[64];
  out << "pair_name,distance_px\n";
  for (const auto& p : audit.pairs) {
    std::snprintf(buf, sizeof buf, "%.9e", p.distance_px);
    out << p.name << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.9e", audit.mean);
  out << "summary_mean," << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.9e", audit.median);
  out << "summary_median," << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.9e", audit.max);
  out << "summary_max," << buf << '\n';
  out << "summary_skipped," << audit.skipped.size() << '\n';
  return out.str();
}

TangentReport tangent_consistency(const Conic& ellipse,
                                  const std::vector<std::pair<HomPoint2, HomPoint2>>& pairs,
                                  const HomLine2& vanishing_line) {
  // Compare in the ellipse's conditioned frame so the measure does not
  // depend on pixel scale.
  const Homography t = conditioning_similarity(ellipse);
  const Eigen::Vector3d l = transform(t, vanishing_line).coords().normalized();
  TangentReport report;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const HomLine2 ta = tangent_at(ellipse, pairs[i].first);
    const HomLine2 tb = tangent_at(ellipse, pairs[i].second);
    const Eigen::Vector3d m = transform(t, meet_lines(ta, tb)).coords().normalized();
    const double v = std::abs(l.dot(m));
    report.pairs.push_back({"pair" + std::to_string(i), v});
    report.max = std::max(report.max, v);
  }
  return report;
}

std::vector<std::pair<HomPoint2, HomPoint2>> derived_pairs(const CorrespondenceSet& corr) {
  std::vector<std::pair<HomPoint2, HomPoint2>> out;
  for (const auto& [a, b] : opposed_pairs()) {
    const PointPair* pa = corr.point(a);
    const PointPair* pb = corr.point(b);
    if (pa && pb) out.emplace_back(pa->image, pb->image);
  }
  return out;
}

std::vector<std::pair<HomPoint2, HomPoint2>> great_axis_pairs(const Conic& ellipse) {
  const EllipseGeom g = geom_from_conic(ellipse);
  const Eigen::Vector2d u(std::cos(g.angle), std::sin(g.angle));
  const Eigen::Vector2d v(-u.y(), u.x());
  auto pt = [](const Eigen::Vector2d& p) { return HomPoint2::from_euclidean(p); };
  return {{pt(g.center + g.semi_major * u), pt(g.center - g.semi_major * u)},
          {pt(g.center + g.semi_minor * v), pt(g.center - g.semi_minor * v)}};
}

}  // namespace circlereg
