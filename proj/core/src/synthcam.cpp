#include "circlereg/synthcam.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <thread>

#include "circlereg/conic.hpp"
#include "circlereg/homography.hpp"

namespace circlereg {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kArcSamples = 720;
constexpr double kMarkingStep = 0.25;  // meters between visibility samples

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::optional<Eigen::Vector2d> image_of(const CameraSample& cam,
                                        const Eigen::Vector2d& world) {
  const Eigen::Vector3d xc =
      cam.rotation * (Eigen::Vector3d(world.x(), world.y(), 0.0) - cam.position);
  if (xc.z() <= 1e-6) return std::nullopt;
  const Eigen::Vector3d px = cam.intrinsics() * xc;
  return Eigen::Vector2d(px.x() / px.z(), px.y() / px.z());
}

bool visible(const CameraSample& cam, const Eigen::Vector2d& world) {
  const auto px = image_of(cam, world);
  return px && cam.in_image(*px);
}

bool segment_visible(const CameraSample& cam, const Segment& s) {
  const double len = (s.to - s.from).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / kMarkingStep)));
  for (int i = 0; i <= n; ++i) {
    if (visible(cam, s.from + (s.to - s.from) * (static_cast<double>(i) / n))) {
      return true;
    }
  }
  return false;
}

Eigen::Vector2d on_circle(const TemplateCircle& c, double angle) {
  return c.center + c.radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
}

std::string fmt_double(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

ViewCheck check_view(const CameraSample& cam, const FieldTemplate& tpl) {
  ViewCheck out;
  const TemplateCircle circle = tpl.center_circle();
  out.center_visible = visible(cam, circle.center);
  int seen = 0;
  for (int i = 0; i < kArcSamples; ++i) {
    if (visible(cam, on_circle(circle, 2.0 * std::numbers::pi * i / kArcSamples))) ++seen;
  }
  out.arc_fraction = static_cast<double>(seen) / kArcSamples;
  for (const auto& s : tpl.markings()) {
    if (s.name == "halfway") {
      out.halfway_visible = segment_visible(cam, s);
    } else if (!out.other_markings_visible && segment_visible(cam, s)) {
      out.other_markings_visible = true;
    }
  }
  return out;
}

CameraSample sample_camera(std::mt19937_64& rng, const CameraRanges& r,
                           const FieldTemplate& tpl) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double radius = tpl.center_circle().radius;
  for (int attempt = 0; attempt < r.max_retries; ++attempt) {
    const Eigen::Vector3d position(uniform(r.x_min, r.x_max), uniform(r.y_min, r.y_max),
                                   uniform(r.height_min, r.height_max));
    const double focal = uniform(r.focal_min, r.focal_max);
    const double roll = uniform(-r.roll_max_deg, r.roll_max_deg) * kDeg;
    // Aim point uniform over the center-circle disk.
    const double rho = radius * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const Eigen::Vector3d target(rho * std::cos(phi), rho * std::sin(phi), 0.0);

    const CameraSample cam = CameraSample::look_at(position, target, focal, roll,
                                                   r.image_width, r.image_height);
    if (check_view(cam, tpl).central_view(r.min_arc_fraction)) return cam;
  }
  throw Error(ErrorCode::ExhaustedRetries, "no central view within the retry budget");
}

SyntheticView observe_circle(const CameraSample& cam, const FieldTemplate& tpl,
                             int n_points, const NoiseSpec& noise) {
  if (n_points < 6) {
    throw Error(ErrorCode::InvalidArgument, "need at least 6 points per ellipse");
  }
  if (!(noise.sigma_px >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  }
  const Homography truth = camera_to_homography(cam);
  const TemplateCircle inner = tpl.inner_circle();
  const TemplateCircle outer = tpl.outer_circle();

  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * std::numbers::pi);
  std::vector<double> angles;
  constexpr int kMaxDraws = 100000;
  for (int draws = 0; static_cast<int>(angles.size()) < n_points; ++draws) {
    if (draws >= kMaxDraws) {
      throw Error(ErrorCode::CircleNotVisible, "too little of the circle is in view");
    }
    const double a = angle_dist(rng);
    if (visible(cam, on_circle(inner, a)) && visible(cam, on_circle(outer, a))) {
      angles.push_back(a);
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::Vector2d> inner_noise(angles.size());
  std::vector<Eigen::Vector2d> outer_noise(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    inner_noise[i].x() = normal(rng);
    inner_noise[i].y() = normal(rng);
    outer_noise[i].x() = normal(rng);
    outer_noise[i].y() = normal(rng);
  }
  Eigen::Vector2d center_noise;
  center_noise.x() = normal(rng);
  center_noise.y() = normal(rng);

  const bool on_edges = noise.target == NoiseTarget::EllipsePoints;
  const double s_edges = on_edges ? noise.sigma_px : 0.0;
  const double s_center = on_edges ? 0.0 : noise.sigma_px;

  SyntheticView view{angles,
                     {},
                     {},
                     project(truth, inner.center),
                     s_center * center_noise,
                     transform(truth, tpl.halfway_line()),
                     truth};
  view.center_px += view.center_offset;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    view.inner_points.push_back(project(truth, on_circle(inner, angles[i])) +
                                s_edges * inner_noise[i]);
    view.outer_points.push_back(project(truth, on_circle(outer, angles[i])) +
                                s_edges * outer_noise[i]);
  }
  return view;
}

MaskImage rasterize_ring_mask(const Homography& image_from_world,
                              const FieldTemplate& tpl, int width, int height,
                              std::uint8_t class_id) {
  MaskImage mask(width, height, 0);
  const Eigen::Matrix3d inv = image_from_world.inverse_matrix();
  // Expects the cheirality-signed homography: pixels whose preimage has a
  // negative third coordinate see the field behind the camera.
  const TemplateCircle inner = tpl.inner_circle();
  const TemplateCircle outer = tpl.outer_circle();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d w = inv * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
      if (w.z() <= 0.0) continue;
      const double d = (w.head<2>() / w.z() - inner.center).norm();
      if (d >= inner.radius && d <= outer.radius) mask.at(x, y) = class_id;
    }
  }
  return mask;
}

void validate(const SweepConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidConfig, field + ": " + why);
  };
  if (c.cameras <= 0) fail("cameras", "must be positive");
  if (c.sigmas.empty()) fail("sigma", "grid is empty");
  for (double s : c.sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail("sigma", "values must be finite and >= 0");
  }
  if (c.n_points < 6) fail("points", "must be at least 6");
  if (!(c.grid_spacing > 0.0)) fail("grid_spacing", "must be positive");
  if (c.threads < 0) fail("threads", "must be >= 0");
  const CameraRanges& r = c.ranges;
  if (r.x_min > r.x_max) fail("ranges.x", "min exceeds max");
  if (r.y_min > r.y_max) fail("ranges.y", "min exceeds max");
  if (!(r.height_min > 0.0) || r.height_min > r.height_max) {
    fail("ranges.height", "must be positive with min <= max");
  }
  if (!(r.focal_min > 0.0) || r.focal_min > r.focal_max) {
    fail("ranges.focal", "must be positive with min <= max");
  }
  if (r.roll_max_deg < 0.0) fail("ranges.roll_max_deg", "must be >= 0");
  if (r.image_width <= 0 || r.image_height <= 0) fail("ranges.image_size", "must be positive");
  if (r.min_arc_fraction < 0.0 || r.min_arc_fraction > 1.0) {
    fail("ranges.min_arc_fraction", "must lie in [0, 1]");
  }
  if (r.max_retries <= 0) fail("ranges.max_retries", "must be positive");
  try {
    standard_template(c.field);
  } catch (const Error& e) {
    fail("field", e.what());
  }
}

std::uint64_t camera_seed(std::uint64_t sweep_seed, int camera_id) {
  return splitmix64(sweep_seed ^ splitmix64(static_cast<std::uint64_t>(camera_id) + 1));
}

TrialRow run_trial(const CameraSample& cam, const FieldTemplate& tpl,
                   const SweepConfig& config, double sigma, int camera_id,
                   std::uint64_t seed) {
  TrialRow row;
  row.sigma = sigma;
  row.target = config.target;
  row.camera_id = camera_id;
  row.seed = seed;
  row.variant = config.variant;
  try {
    const NoiseSpec noise{sigma, splitmix64(seed ^ 0x6E6F697365ULL), config.target};
    const SyntheticView view = observe_circle(cam, tpl, config.n_points, noise);
    row.truth = view.truth;

    const Conic inner = fit_ellipse_direct(view.inner_points);
    HomPoint2 center = HomPoint2::from_euclidean(view.center_px);
    if (config.variant == PipelineVariant::Case3Concentric) {
      const Conic outer = fit_ellipse_direct(view.outer_points);
      const CenterRecovery rec = recover_center_concentric(inner, outer);
      center = HomPoint2::from_euclidean(rec.center.euclidean() + view.center_offset);
    }
    CircleObservation obs(inner, MarkingEdge::Inner);
    obs.set_imaged_center(center);
    obs.set_support_line({"halfway", view.halfway_line});
    CorrespondenceSet corr = derive_case1(obs, tpl, CameraPrior::broadcast());
    if (config.variant == PipelineVariant::Case3Concentric) {
      corr.derivation = DerivationCase::Case3;
    }
    corr = extend_green_points(std::move(corr), obs.ellipse(), tpl);
    const Homography est = estimate_homography_dlt(DltProblem::from(corr));
    const auto pts = visible_field_points(view.truth, tpl, cam.image_width,
                                          cam.image_height, config.grid_spacing);
    if (pts.empty()) {
      row.status = "NoVisiblePoints";
      return row;
    }
    row.estimate = est;
    row.mre_px = mean_reprojection_error(view.truth, est, pts);
    row.status = std::isfinite(row.mre_px) ? "ok" : "NonFiniteError";
  } catch (const Error& e) {
    row.status = std::string(to_string(e.code()));
  }
  return row;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SweepReport run_noise_sweep(const SweepConfig& config) {
  validate(config);
  const FieldTemplate tpl = standard_template(config.field);
  const std::size_t n_sigma = config.sigmas.size();
  const auto n_cam = static_cast<std::size_t>(config.cameras);

  SweepReport report;
  report.config = config;
  report.rows.resize(n_sigma * n_cam);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cam_id = next++; cam_id < n_cam; cam_id = next++) {
      const int id = static_cast<int>(cam_id);
      const std::uint64_t seed = camera_seed(config.seed, id);
      std::optional<CameraSample> cam;
      std::string failure;
      try {
        std::mt19937_64 rng(seed);
        cam = sample_camera(rng, config.ranges, tpl);
      } catch (const Error& e) {
        failure = std::string(to_string(e.code()));
      }
      for (std::size_t k = 0; k < n_sigma; ++k) {
        TrialRow& row = report.rows[k * n_cam + cam_id];
        if (cam) {
          row = run_trial(*cam, tpl, config, config.sigmas[k], id, seed);
        } else {
          row.sigma = config.sigmas[k];
          row.target = config.target;
          row.camera_id = id;
          row.seed = seed;
          row.variant = config.variant;
          row.status = failure;
        }
      }
    }
  };

  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_cam));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (std::size_t k = 0; k < n_sigma; ++k) {
    SigmaSummary s;
    s.sigma = config.sigmas[k];
    std::vector<double> mre;
    for (std::size_t c = 0; c < n_cam; ++c) {
      const TrialRow& row = report.rows[k * n_cam + c];
      if (row.ok()) mre.push_back(row.mre_px);
      else ++s.n_failed;
    }
    s.n_ok = static_cast<int>(mre.size());
    s.median = quantile(mre, 0.5);
    s.q1 = quantile(mre, 0.25);
    s.q3 = quantile(mre, 0.75);
    report.summary.push_back(s);
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "sigma,target,camera_id,seed,case,mre_px,status\n";
  for (const auto& r : report.rows) {
    out << fmt_double("%g", r.sigma) << ',' << to_string(r.target) << ','
        << r.camera_id << ',' << r.seed << ',' << to_string(r.variant) << ','
        << (r.ok() ? fmt_double("%.9e", r.mre_px) : std::string()) << ','
        << r.status << '\n';
  }
  return out.str();
}

std::string summary_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "sigma,target,case,n_ok,n_failed,median_mre_px,q1_mre_px,q3_mre_px\n";
  for (const auto& s : report.summary) {
    out << fmt_double("%g", s.sigma) << ',' << to_string(report.config.target) << ','
        << to_string(report.config.variant) << ',' << s.n_ok << ',' << s.n_failed << ','
        << fmt_double("%.9e", s.median) << ',' << fmt_double("%.9e", s.q1) << ','
        << fmt_double("%.9e", s.q3) << '\n';
  }
  return out.str();
}

std::string to_string(NoiseTarget t) {
  return t == NoiseTarget::EllipsePoints ? "ellipse" : "center";
}

std::string to_string(PipelineVariant v) {
  return v == PipelineVariant::Case1TrueCenter ? "case1" : "case3";
}

NoiseTarget parse_noise_target(const std::string& s) {
  if (s == "ellipse") return NoiseTarget::EllipsePoints;
  if (s == "center") return NoiseTarget::CenterPoint;
  throw Error(ErrorCode::InvalidConfig, "target: expected 'ellipse' or 'center'");
}

PipelineVariant parse_pipeline_variant(const std::string& s) {
  if (s == "case1") return PipelineVariant::Case1TrueCenter;
  if (s == "case3") return PipelineVariant::Case3Concentric;
  throw Error(ErrorCode::InvalidConfig, "variant: expected 'case1' or 'case3'");
}

}  // namespace circlereg
