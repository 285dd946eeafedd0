#include "circlereg/detect_ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "circlereg/conic.hpp"
#include "circlereg/error.hpp"

namespace circlereg {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::SchemaError, path + ": " + why);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

Eigen::Vector2d xy_at(const json& j, const std::string& path, int w, int h) {
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected [x, y]");
  const Eigen::Vector2d p(number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]"));
  if (p.x() < 0.0 || p.y() < 0.0 || p.x() > w || p.y() > h) {
    schema_error(path, "outside the image bounds");
  }
  return p;
}

std::string string_at(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing");
  if (!it->is_string()) schema_error(path + "." + key, "expected a string");
  return it->get<std::string>();
}

const json& member(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

// Bilinear sample of the class indicator; pixel centers sit at i + 0.5.
double indicator(const MaskImage& m, int class_id, double x, double y) {
  const double u = x - 0.5;
  const double v = y - 0.5;
  const int i = static_cast<int>(std::floor(u));
  const int j = static_cast<int>(std::floor(v));
  const double fu = u - i;
  const double fv = v - j;
  auto at = [&](int xi, int yi) {
    return m.contains(xi, yi) && m.at(xi, yi) == class_id ? 1.0 : 0.0;
  };
  return (1 - fu) * (1 - fv) * at(i, j) + fu * (1 - fv) * at(i + 1, j) +
         (1 - fu) * fv * at(i, j + 1) + fu * fv * at(i + 1, j + 1);
}

double otsu_threshold(const std::vector<double>& values) {
  constexpr int kBins = 256;
  const double top = *std::max_element(values.begin(), values.end());
  if (!(top > 0.0)) return 0.0;
  std::array<double, kBins> hist{};
  for (double v : values) {
    hist[std::min(kBins - 1, static_cast<int>(v / top * kBins))] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int b = 0; b < kBins; ++b) sum_all += b * hist[b];
  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_bin = 0;
  for (int b = 0; b < kBins; ++b) {
    w0 += hist[b];
    sum0 += b * hist[b];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  return (best_bin + 1) * top / kBins;
}

struct RayEdge {
  double t;
  int sign;
};

std::vector<std::size_t> inliers_of(const Conic& c, const std::vector<Eigen::Vector2d>& pts,
                                    double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (sampson_distance(c, pts[i]) <= threshold) out.push_back(i);
  }
  return out;
}

std::optional<Conic> try_fit(const std::vector<Eigen::Vector2d>& pts) {
  try {
    Conic c = fit_ellipse_direct(pts);
    if (classify(c) != ConicClass::Ellipse) return std::nullopt;
    return c;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<Eigen::Vector2d> subset(const std::vector<Eigen::Vector2d>& pts,
                                    const std::vector<std::size_t>& idx) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pts[i]);
  return out;
}

}  // namespace

const DetectedKeypoint* DetectionFile::keypoint(const std::string& name) const {
  for (const auto& k : keypoints) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

const DetectedLine* DetectionFile::line(const std::string& name) const {
  for (const auto& l : lines) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

const MaskImage& DetectionFile::mask() const {
  if (mask_cache_) return *mask_cache_;
  if (!mask_path) schema_error("mask_path", "no mask given");
  std::filesystem::path p(*mask_path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  auto m = std::make_shared<const MaskImage>(read_mask_png(p));
  if (m->width != width || m->height != height) {
    schema_error("mask_path", "mask size differs from image_size");
  }
  mask_cache_ = std::move(m);
  return *mask_cache_;
}

int DetectionFile::class_id(const std::string& class_name) const {
  if (mask_class_map) {
    const auto it = mask_class_map->find(class_name);
    if (it != mask_class_map->end()) return it->second;
  }
  throw Error(ErrorCode::ClassAbsent, "class '" + class_name + "' is not in mask_class_map");
}

DetectionFile parse_detection_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) schema_error("$", "expected an object");
  DetectionFile det;
  det.base_dir = base_dir;

  const json& size = member(j, "image_size", "");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    schema_error("image_size", "expected [width, height] integers");
  }
  det.width = size[0].get<int>();
  det.height = size[1].get<int>();
  if (det.width <= 0 || det.height <= 0) schema_error("image_size", "must be positive");

  const json& kps = member(j, "keypoints", "");
  if (!kps.is_array()) schema_error("keypoints", "expected an array");
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const std::string path = "keypoints[" + std::to_string(i) + "]";
    const json& k = kps[i];
    if (!k.is_object()) schema_error(path, "expected an object");
    DetectedKeypoint kp;
    kp.name = string_at(k, "name", path);
    kp.xy = xy_at(member(k, "xy", path), path + ".xy", det.width, det.height);
    kp.confidence = number_at(member(k, "confidence", path), path + ".confidence");
    if (kp.confidence < 0.0 || kp.confidence > 1.0) {
      schema_error(path + ".confidence", "must lie in [0, 1]");
    }
    det.keypoints.push_back(std::move(kp));
  }

  const json& lines = member(j, "lines", "");
  if (!lines.is_array()) schema_error("lines", "expected an array");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string path = "lines[" + std::to_string(i) + "]";
    const json& l = lines[i];
    if (!l.is_object()) schema_error(path, "expected an object");
    DetectedLine dl;
    dl.name = string_at(l, "name", path);
    const json& pts = member(l, "points", path);
    if (!pts.is_array()) schema_error(path + ".points", "expected an array");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      dl.points.push_back(xy_at(pts[k], path + ".points[" + std::to_string(k) + "]",
                                det.width, det.height));
    }
    det.lines.push_back(std::move(dl));
  }

  if (const auto it = j.find("mask_path"); it != j.end()) {
    if (!it->is_string()) schema_error("mask_path", "expected a string");
    det.mask_path = it->get<std::string>();
  }
  if (const auto it = j.find("mask_class_map"); it != j.end()) {
    if (!it->is_object()) schema_error("mask_class_map", "expected an object");
    std::map<std::string, int> map;
    for (const auto& [name, id] : it->items()) {
      if (!id.is_number_integer() || id.get<long long>() < 0 || id.get<long long>() > 255) {
        schema_error("mask_class_map." + name, "expected an integer in [0, 255]");
      }
      map[name] = id.get<int>();
    }
    det.mask_class_map = std::move(map);
  }

  for (const auto& [key, value] : j.items()) {
    if (key != "image_size" && key != "keypoints" && key != "lines" &&
        key != "mask_path" && key != "mask_class_map") {
      det.extra[key] = value;
    }
  }
  return det;
}

DetectionFile parse_detection_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return parse_detection_json(j, path.parent_path());
}

json to_json(const DetectionFile& det) {
  json j = det.extra.is_object() ? det.extra : json::object();
  j["image_size"] = {det.width, det.height};
  j["keypoints"] = json::array();
  for (const auto& k : det.keypoints) {
    j["keypoints"].push_back(
        {{"name", k.name}, {"xy", {k.xy.x(), k.xy.y()}}, {"confidence", k.confidence}});
  }
  j["lines"] = json::array();
  for (const auto& l : det.lines) {
    json pts = json::array();
    for (const auto& p : l.points) pts.push_back({p.x(), p.y()});
    j["lines"].push_back({{"name", l.name}, {"points", pts}});
  }
  if (det.mask_path) j["mask_path"] = *det.mask_path;
  if (det.mask_class_map) j["mask_class_map"] = *det.mask_class_map;
  return j;
}

ConcentricEdges extract_concentric_edges(const MaskImage& mask, int class_id,
                                         const EdgeOptions& opt) {
  if (!(opt.angle_step_deg > 0.0) || !(opt.sample_step_px > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ray step sizes must be positive");
  }
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  long count = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) == class_id) {
        sum += Eigen::Vector2d(x + 0.5, y + 0.5);
        ++count;
      }
    }
  }
  if (count == 0 || count < opt.min_class_pixels) {
    throw Error(ErrorCode::ClassAbsent, "class " + std::to_string(class_id) + " not in mask");
  }

  ConcentricEdges out;
  out.origin = sum / static_cast<double>(count);
  out.rays_cast = static_cast<int>(std::lround(360.0 / opt.angle_step_deg));
  const double step = opt.sample_step_px;

  // Signed derivative of the indicator profile along each ray.
  std::vector<std::vector<double>> grads(static_cast<std::size_t>(out.rays_cast));
  std::vector<Eigen::Vector2d> dirs;
  std::vector<double> magnitudes;
  for (int r = 0; r < out.rays_cast; ++r) {
    const double a = r * opt.angle_step_deg * std::numbers::pi / 180.0;
    const Eigen::Vector2d dir(std::cos(a), std::sin(a));
    dirs.push_back(dir);
    std::vector<double> profile;
    for (double t = 0.0;; t += step) {
      const Eigen::Vector2d p = out.origin + t * dir;
      if (p.x() < 0.0 || p.y() < 0.0 || p.x() > mask.width || p.y() > mask.height) break;
      profile.push_back(indicator(mask, class_id, p.x(), p.y()));
    }
    auto& g = grads[static_cast<std::size_t>(r)];
    g.assign(profile.size(), 0.0);
    for (std::size_t k = 1; k + 1 < profile.size(); ++k) {
      g[k] = (profile[k + 1] - profile[k - 1]) / (2.0 * step);
      magnitudes.push_back(std::abs(g[k]));
    }
  }
  if (magnitudes.empty()) {
    throw Error(ErrorCode::TooFewCandidates, "rays are too short");
  }
  const double threshold = otsu_threshold(magnitudes);

  for (int r = 0; r < out.rays_cast; ++r) {
    const auto& g = grads[static_cast<std::size_t>(r)];
    std::vector<RayEdge> edges;
    for (std::size_t k = 1; k + 1 < g.size() && edges.size() < 2; ++k) {
      const double m = std::abs(g[k]);
      const double ml = std::abs(g[k - 1]);
      const double mr = std::abs(g[k + 1]);
      if (m <= threshold || m < ml || m <= mr) continue;
      const double denom = ml - 2.0 * m + mr;
      const double offset = denom < 0.0 ? 0.5 * (ml - mr) / denom : 0.0;
      edges.push_back({(static_cast<double>(k) + offset) * step, g[k] > 0.0 ? 1 : -1});
    }
    if (edges.size() < 2 || edges[0].sign < 0 || edges[1].sign > 0) continue;
    const double gap = edges[1].t - edges[0].t;
    if (gap < opt.min_gap_px || gap > opt.max_gap_px) continue;
    const Eigen::Vector2d& dir = dirs[static_cast<std::size_t>(r)];
    out.inner_candidates.push_back(out.origin + edges[0].t * dir);
    out.outer_candidates.push_back(out.origin + edges[1].t * dir);
  }
  if (out.inner_candidates.size() < 6) {
    throw Error(ErrorCode::TooFewCandidates,
                std::to_string(out.inner_candidates.size()) + " edge pairs found, need 6");
  }
  return out;
}

ConcentricEdges extract_concentric_edges(const DetectionFile& det,
                                         const std::string& class_name,
                                         const EdgeOptions& options) {
  const int id = det.class_id(class_name);
  return extract_concentric_edges(det.mask(), id, options);
}

double sampson_distance(const Conic& c, const Eigen::Vector2d& p) {
  const Eigen::Vector3d x = p.homogeneous();
  const Eigen::Vector3d cx = c.matrix() * x;
  const double grad = 2.0 * cx.head<2>().norm();
  const double value = std::abs(x.dot(cx));
  if (!(grad > 0.0)) return value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return value / grad;
}

Conic ransac_fit_ellipse(const std::vector<Eigen::Vector2d>& points,
                         const RansacOptions& opt, std::vector<std::size_t>* inliers) {
  constexpr std::size_t kSample = 6;
  if (points.size() < kSample) {
    throw Error(ErrorCode::InsufficientPoints, "need at least 6 edge candidates");
  }
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);

  std::vector<std::size_t> best;
  const int iterations = points.size() == kSample ? 1 : opt.iterations;
  for (int it = 0; it < iterations && best.size() < points.size(); ++it) {
    for (std::size_t k = 0; k < kSample; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
      std::swap(idx[k], idx[pick(rng)]);
    }
    std::vector<Eigen::Vector2d> sample(idx.begin(), idx.begin() + kSample);
    for (std::size_t k = 0; k < kSample; ++k) sample[k] = points[idx[k]];
    const auto model = try_fit(sample);
    if (!model) continue;
    auto in = inliers_of(*model, points, opt.inlier_threshold_px);
    if (in.size() > best.size()) best = std::move(in);
  }
  if (best.size() < kSample ||
      static_cast<double>(best.size()) < opt.min_inlier_ratio * static_cast<double>(points.size())) {
    throw Error(ErrorCode::ConsensusFailure,
                std::to_string(best.size()) + " of " + std::to_string(points.size()) +
                    " candidates agree on an ellipse");
  }

  std::optional<Conic> model = try_fit(subset(points, best));
  if (!model) throw Error(ErrorCode::ConsensusFailure, "inlier refit is not an ellipse");
  for (int round = 0; round < 3; ++round) {
    auto in = inliers_of(*model, points, opt.inlier_threshold_px);
    if (in == best || in.size() < kSample) break;
    const auto refit = try_fit(subset(points, in));
    if (!refit) break;
    best = std::move(in);
    model = refit;
  }
  if (inliers) *inliers = best;
  return *model;
}

bool nested_inside(const Conic& inner, const Conic& outer, int samples) {
  EllipseGeom g;
  try {
    g = geom_from_conic(inner);
    geom_from_conic(outer);
  } catch (const Error&) {
    return false;
  }
  for (const auto& p : sample_ellipse(g, samples)) {
    if (!is_interior(outer, HomPoint2::from_euclidean(p))) return false;
  }
  return true;
}

ConcentricFit ransac_fit_concentric(const ConcentricEdges& edges, const RansacOptions& opt) {
  ConcentricFit fit{Conic(Eigen::Matrix3d::Identity()), Conic(Eigen::Matrix3d::Identity()),
                    {}, {}};
  fit.inner = ransac_fit_ellipse(edges.inner_candidates, opt, &fit.inner_inliers);
  RansacOptions outer_opt = opt;
  outer_opt.seed = opt.seed + 1;
  fit.outer = ransac_fit_ellipse(edges.outer_candidates, outer_opt, &fit.outer_inliers);
  if (nested_inside(fit.inner, fit.outer)) return fit;
  if (nested_inside(fit.outer, fit.inner)) {
    std::swap(fit.inner, fit.outer);
    std::swap(fit.inner_inliers, fit.outer_inliers);
    return fit;
  }
  throw Error(ErrorCode::NotNested, "fitted edge ellipses are not nested");
}

HomLine2 fit_line_tls(const std::vector<Eigen::Vector2d>& points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientPoints, "need two points for a line");
  }
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  if (!(cov.trace() > 0.0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "line samples coincide");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d n = es.eigenvectors().col(0);
  return HomLine2(Eigen::Vector3d(n.x(), n.y(), -n.dot(mean)));
}

BuiltObservation build_observation(const DetectionFile& det,
                                   const std::optional<Conic>& ellipse_in,
                                   const std::optional<ConcentricFit>& concentric,
                                   const FieldTemplate& tpl,
                                   std::optional<DerivationCase> only) {
  namespace kn = keypoint_names;
  std::vector<std::string> reasons;

  std::optional<Conic> ellipse = ellipse_in;
  std::string ellipse_problem;
  if (!ellipse) {
    const DetectedLine* samples = det.line(kCircleSamples);
    if (!samples) {
      ellipse_problem = "ellipse";
    } else {
      try {
        ellipse = fit_ellipse_direct(samples->points);
      } catch (const Error& e) {
        ellipse_problem = std::string("ellipse (") + e.what() + ")";
      }
    }
  }

  std::optional<HomPoint2> center;
  if (const auto* c = det.keypoint(kn::kCenter)) center = HomPoint2::from_euclidean(c->xy);

  // Halfway line from its samples or from two of its keypoints.
  std::optional<HomLine2> halfway;
  if (const auto* l = det.line("halfway"); l && l->points.size() >= 2) {
    try {
      halfway = fit_line_tls(l->points);
    } catch (const Error&) {
    }
  }
  if (!halfway) {
    std::vector<Eigen::Vector2d> on_line;
    for (const char* name : {kn::kHalfwayFar, kn::kHalfwayNear, kn::kCenter}) {
      if (const auto* k = det.keypoint(name)) on_line.push_back(k->xy);
    }
    if (on_line.size() >= 2 && (on_line[0] - on_line[1]).norm() > 1e-9) {
      halfway = join_points(HomPoint2::from_euclidean(on_line[0]),
                            HomPoint2::from_euclidean(on_line[1]));
    }
  }

  // Most confident template keypoint other than the center.
  const DetectedKeypoint* support = nullptr;
  for (const auto& k : det.keypoints) {
    if (k.name == kn::kCenter || !tpl.keypoint(k.name)) continue;
    if (!support || k.confidence > support->confidence) support = &k;
  }

  auto wanted = [&](DerivationCase c) { return !only || *only == c; };

  if (wanted(DerivationCase::Case1)) {
    std::vector<std::string> missing;
    if (!ellipse) missing.push_back(ellipse_problem);
    if (!center) missing.push_back("center keypoint");
    if (!halfway) missing.push_back("halfway line");
    if (missing.empty()) {
      try {
        CircleObservation obs(*ellipse);
        obs.set_imaged_center(*center);
        obs.set_support_line({"halfway", *halfway});
        return {obs, DerivationCase::Case1};
      } catch (const Error& e) {
        missing.push_back(e.what());
      }
    }
    std::string r = "case1: missing";
    for (std::size_t i = 0; i < missing.size(); ++i) r += (i ? ", " : " ") + missing[i];
    reasons.push_back(r);
  }

  if (wanted(DerivationCase::Case2)) {
    std::vector<std::string> missing;
    if (!ellipse) missing.push_back(ellipse_problem);
    if (!center) missing.push_back("center keypoint");
    if (!support) missing.push_back("template keypoint");
    if (missing.empty()) {
      try {
        CircleObservation obs(*ellipse);
        obs.set_imaged_center(*center);
        obs.set_support_point({support->name, HomPoint2::from_euclidean(support->xy)});
        return {obs, DerivationCase::Case2};
      } catch (const Error& e) {
        missing.push_back(e.what());
      }
    }
    std::string r = "case2: missing";
    for (std::size_t i = 0; i < missing.size(); ++i) r += (i ? ", " : " ") + missing[i];
    reasons.push_back(r);
  }

  if (wanted(DerivationCase::Case3)) {
    if (concentric) {
      try {
        CircleObservation obs(concentric->inner, MarkingEdge::Inner);
        obs.set_outer_ellipse(concentric->outer);
        if (halfway) {
          obs.set_support_line({"halfway", *halfway});
        } else if (support) {
          obs.set_support_point({support->name, HomPoint2::from_euclidean(support->xy)});
        }
        return {obs, DerivationCase::Case3};
      } catch (const Error& e) {
        reasons.push_back(std::string("case3: ") + e.what());
      }
    } else {
      reasons.push_back("case3: missing concentric edge fits");
    }
  }

  std::string msg;
  for (std::size_t i = 0; i < reasons.size(); ++i) msg += (i ? "; " : "") + reasons[i];
  throw Error(ErrorCode::InsufficientEvidence, msg);
}

CorrespondenceSet derive_correspondences(const BuiltObservation& built,
                                         const FieldTemplate& tpl,
                                         const CameraPrior& prior) {
  CorrespondenceSet corr;
  switch (built.derivation) {
    case DerivationCase::Case1:
      corr = derive_case1(built.observation, tpl, prior);
      break;
    case DerivationCase::Case2:
      corr = derive_case2(built.observation, tpl, prior);
      break;
    case DerivationCase::Case3:
      corr = derive_case3(built.observation, tpl, prior);
      break;
  }
  return extend_green_points(std::move(corr), built.observation.ellipse(), tpl);
}

}  // namespace circlereg
