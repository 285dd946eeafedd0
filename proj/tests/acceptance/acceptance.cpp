// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "circlereg/detect_ingest.hpp"
#include "circlereg/homography.hpp"
#include "circlereg/metrics.hpp"
#include "circlereg/synthcam.hpp"
#include "fixtures.hpp"

namespace {

using namespace circlereg;
using testing::CircleFixture;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

FieldTemplate sweep_template() { return standard_template(SweepConfig{}.field); }

std::vector<CameraSample> sampled_cameras(int n, std::uint64_t seed) {
  const FieldTemplate tpl = sweep_template();
  std::vector<CameraSample> out;
  for (int id = 0; id < n; ++id) {
    std::mt19937_64 rng(camera_seed(seed, id));
    out.push_back(sample_camera(rng, {}, tpl));
  }
  return out;
}

// 1. Noise-free case 1, 8 fitted points, 100 sampled central views.
Outcome exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig c;
  c.sigmas = {0.0};
  c.cameras = 100;
  c.threads = 1;
  const SweepReport r = run_noise_sweep(c);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst = 0.0;
  int failed = 0;
  for (const auto& row : r.rows) {
    if (!row.ok()) {
      ++failed;
      worst = kInf;
    } else {
      worst = std::max(worst, row.mre_px);
    }
  }
  return {failed == 0 && worst < 1e-6 && secs < 10.0,
          "max MRE " + fmt("%.3e", worst) + " px over 100 cameras, " +
              std::to_string(failed) + " failed, " + fmt("%.2f", secs) + " s"};
}

// 2. Center from the two marking edges, then case 3 against true-center case 1.
Outcome concentric_center() {
  const FieldTemplate tpl = sweep_template();
  double worst_center = 0.0;
  double worst_points = 0.0;
  int ok = 0;
  for (const CameraSample& cam : sampled_cameras(100, 2024)) {
    const SyntheticView v = observe_circle(cam, tpl, 8, {});
    try {
      const Conic inner = fit_ellipse_direct(v.inner_points);
      const Conic outer = fit_ellipse_direct(v.outer_points);
      const CenterRecovery rec = recover_center_concentric(inner, outer);
      const double err = (rec.center.euclidean() - project(v.truth, {0, 0})).norm();
      worst_center = std::max(worst_center, err);

      CircleObservation obs(inner);
      obs.set_outer_ellipse(outer);
      obs.set_support_line({"halfway", v.halfway_line});
      const CorrespondenceSet three = derive_case3(obs, tpl);
      CircleObservation truth(inner, MarkingEdge::Inner);
      truth.set_imaged_center(HomPoint2::from_euclidean(project(v.truth, {0, 0})));
      truth.set_support_line({"halfway", v.halfway_line});
      const CorrespondenceSet one = derive_case1(truth, tpl);
      for (const auto& p : one.points) {
        const PointPair* q = three.point(p.name);
        const double d = q ? testing::pixel_distance(p.image, q->image) : kInf;
        worst_points = std::max(worst_points, d);
      }
      if (err < 1e-6) ++ok;
    } catch (const Error&) {
      worst_center = kInf;
    }
  }
  return {ok == 100 && worst_points < 1e-6,
          std::to_string(ok) + "/100 centers within 1e-6 px (max " + fmt("%.3e", worst_center) +
              "), case 3 vs case 1 max " + fmt("%.3e", worst_points) + " px"};
}

struct SweepStats {
  std::vector<double> medians;  // failures count as +inf
  double rho = 0.0;
  int failed = 0;
};

SweepStats sweep_stats(NoiseTarget target) {
  SweepConfig c;
  c.target = target;
  const SweepReport r = run_noise_sweep(c);
  SweepStats s;
  std::vector<double> sig, mre;
  for (double sigma : c.sigmas) {
    std::vector<double> col;
    for (const auto& row : r.rows) {
      if (row.sigma != sigma) continue;
      const double v = row.ok() ? row.mre_px : kInf;
      col.push_back(v);
      sig.push_back(sigma);
      mre.push_back(v);
      s.failed += row.ok() ? 0 : 1;
    }
    s.medians.push_back(median(col));
  }
  s.rho = testing::spearman(sig, mre);
  return s;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt("%.3g", v[i]);
  return out;
}

// 3. Ellipse-point noise: medians increase, MRE tracks sigma.
Outcome ellipse_noise_trend(const SweepStats& s) {
  bool increasing = true;
  for (std::size_t i = 1; i < s.medians.size(); ++i) {
    increasing = increasing && s.medians[i] > s.medians[i - 1];
  }
  return {increasing && s.rho > 0.8,
          "medians [" + list(s.medians) + "] px, spearman " + fmt("%.3f", s.rho) + ", " +
              std::to_string(s.failed) + " failed trials"};
}

// 4. Center noise must hurt more than ellipse noise at every sigma >= 5.
Outcome center_noise_dominates(const SweepStats& ellipse, const SweepStats& center) {
  const std::vector<double> sigmas = SweepConfig{}.sigmas;
  bool all = true;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (sigmas[i] >= 5.0) all = all && center.medians[i] > ellipse.medians[i];
  }
  return {all, "center medians [" + list(center.medians) + "] vs ellipse [" +
                   list(ellipse.medians) + "] px"};
}

// 5. Opposed derived points are collinear with a noise-free center, also
// when the ellipse itself is noisy.
Outcome collinearity() {
  const FieldTemplate tpl = standard_template();
  std::mt19937_64 rng(505);
  std::normal_distribution<double> noise(0.0, 2.0);
  double worst = 0.0;
  int audited = 0;
  for (int i = 0; i < 100; ++i) {
    const CircleFixture f = testing::make_fixture(rng, tpl);
    auto pts = testing::project_circle_points(f.h, tpl.center_circle(), 8);
    for (auto& p : pts) p += Eigen::Vector2d(noise(rng), noise(rng));
    for (const Conic& e : {f.ellipse, fit_ellipse_direct(pts)}) {
      try {
        CircleObservation obs(e);
        obs.set_imaged_center(f.center);
        obs.set_support_line({"halfway", f.halfway});
        const CorrespondenceSet s = extend_green_points(derive_case1(obs, tpl), obs.ellipse(), tpl);
        worst = std::max(worst, collinearity_audit(s).max);
        ++audited;
      } catch (const Error&) {
        // A noisy fit can leave the true center outside; nothing to audit.
      }
    }
  }
  return {worst < 1e-7 && audited >= 100,
          "max distance " + fmt("%.3e", worst) + " px over " + std::to_string(audited) +
              " derived sets"};
}

// 6. Derived tangents meet on the vanishing line; great-axis tangents do not.
Outcome tangent_consistency_check() {
  const FieldTemplate tpl = standard_template();
  std::mt19937_64 rng(606);
  double worst_derived = 0.0;
  int great_inconsistent = 0;
  for (int i = 0; i < 100; ++i) {
    const CircleFixture f = testing::make_fixture(rng, tpl);
    const CorrespondenceSet s =
        extend_green_points(derive_case1(testing::case1_observation(f), tpl), f.ellipse, tpl);
    worst_derived = std::max(
        worst_derived, tangent_consistency(f.ellipse, derived_pairs(s), *s.vanishing_line).max);
    const double great =
        tangent_consistency(f.ellipse, great_axis_pairs(f.ellipse), *s.vanishing_line).max;
    great_inconsistent += great > 1e-6 ? 1 : 0;
  }
  return {worst_derived < 1e-6 && great_inconsistent >= 95,
          "derived max " + fmt("%.3e", worst_derived) + ", great-axis inconsistent on " +
              std::to_string(great_inconsistent) + "/100"};
}

// 7. Structure of every successful case 1 derivation.
Outcome correspondence_count() {
  const FieldTemplate tpl = sweep_template();
  const std::vector<std::string> point_names{"a", "b", "d", "e", "g_ad", "g_be", "g_db", "g_ea"};
  const std::vector<std::string> line_names{"axis_ab", "axis_de", "tangent_a", "tangent_b",
                                            "tangent_d", "tangent_e", "diagonal_ad_be",
                                            "diagonal_db_ea"};
  int checked = 0;
  int good = 0;
  for (const CameraSample& cam : sampled_cameras(100, 707)) {
    const SyntheticView v = observe_circle(cam, tpl, 8, {});
    CircleObservation obs(fit_ellipse_direct(v.inner_points), MarkingEdge::Inner);
    obs.set_imaged_center(HomPoint2::from_euclidean(v.center_px));
    obs.set_support_line({"halfway", v.halfway_line});
    CorrespondenceSet s;
    try {
      s = extend_green_points(derive_case1(obs, tpl), obs.ellipse(), tpl);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    bool ok = s.points.size() == 8 && s.lines.size() == 8;
    for (const auto& n : point_names) ok = ok && s.point(n) != nullptr;
    for (const auto& n : line_names) ok = ok && s.line(n) != nullptr;
    // Distinct world points on the template circle.
    const Conic world = tpl.inner_circle().conic();
    for (std::size_t i = 0; ok && i < s.points.size(); ++i) {
      ok = std::abs(conditioned_residual(world, s.points[i].world)) < 1e-9;
      for (std::size_t k = 0; ok && k < i; ++k) {
        ok = !s.points[i].world.equivalent(s.points[k].world, 1e-6);
      }
    }
    good += ok ? 1 : 0;
  }
  return {checked == 100 && good == checked,
          std::to_string(good) + "/" + std::to_string(checked) +
              " derivations with 8 point pairs and 8 line pairs"};
}

// 8. Property suites.
Outcome properties() {
  std::vector<std::string> failures;
  std::mt19937_64 rng(808);

  // Pole-polar covariance.
  {
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const Homography h(testing::random_matrix(rng));
      const Eigen::Matrix3d m = testing::random_matrix(rng);
      const Conic c(m + m.transpose());
      const HomPoint2 p(testing::random_vector(rng));
      const HomLine2 lhs = transform(h, polar_of_point(c, p));
      const HomLine2 rhs = polar_of_point(transform(h, c), transform(h, p));
      bad += lhs.equivalent(rhs, 1e-7) ? 0 : 1;
    }
    if (bad) failures.push_back("covariance " + std::to_string(bad));
  }
  // Circle matrix times its center.
  {
    std::uniform_real_distribution<double> u(-64.0, 64.0);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector2d o(std::ldexp(std::round(u(rng) * 256), -8),
                              std::ldexp(std::round(u(rng) * 256), -8));
      const double r = std::ldexp(1.0 + std::round(std::abs(u(rng)) * 64), -4);
      const Eigen::Vector3d v = circle_conic(o, r).matrix() * o.homogeneous();
      bad += v == Eigen::Vector3d(0, 0, -r * r) ? 0 : 1;
    }
    if (bad) failures.push_back("center identity " + std::to_string(bad));
  }
  // Four-point interpolation.
  {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Homography truth(testing::random_matrix(rng));
      DltProblem p;
      std::vector<Eigen::Vector2d> world, image;
      for (int k = 0; k < 4; ++k) {
        world.emplace_back(u(rng), u(rng));
        image.emplace_back(u(rng), u(rng));
        p.points.push_back({"p", HomPoint2::from_euclidean(image[k]),
                            HomPoint2::from_euclidean(world[k])});
      }
      try {
        const Homography h = estimate_homography_dlt(p);
        for (int k = 0; k < 4; ++k) {
          worst = std::max(worst, (project(h, world[k]) - image[k]).norm());
        }
      } catch (const Error&) {
        worst = kInf;
      }
    }
    if (!(worst < 1e-9)) failures.push_back("4-point residual " + fmt("%.2e", worst));
  }
  // Exact ellipse recovery from 8 points.
  {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      EllipseGeom g;
      g.center = {1920 * u(rng), 1080 * u(rng)};
      g.semi_major = 50 + 800 * u(rng);
      g.semi_minor = g.semi_major * (0.1 + 0.9 * u(rng));
      g.angle = std::numbers::pi * u(rng);
      std::vector<Eigen::Vector2d> pts;
      const double t0 = 2 * std::numbers::pi * u(rng);
      for (int k = 0; k < 8; ++k) pts.push_back(g.point_at(t0 + 0.785 * k));
      worst = std::max(worst, testing::conic_distance(fit_ellipse_direct(pts), conic_from_geom(g)));
    }
    if (!(worst < 1e-9)) failures.push_back("ellipse fit " + fmt("%.2e", worst));
  }
  // RANSAC under 30% outliers against an oracle-derived bound.
  {
    const FieldTemplate tpl = standard_template({.thickness = 0.08});
    std::normal_distribution<double> n(0.0, 0.5);
    std::uniform_real_distribution<double> ux(0, 1920), uy(0, 1080);
    std::vector<double> oracle, ransac;
    for (int i = 0; i < 1000; ++i) {
      const CircleFixture f = testing::make_fixture(rng, tpl);
      ConcentricEdges e;
      std::vector<Eigen::Vector2d> clean_in, clean_out;
      for (const auto& [circle, dst, clean] :
           {std::tuple{tpl.inner_circle(), &e.inner_candidates, &clean_in},
            std::tuple{tpl.outer_circle(), &e.outer_candidates, &clean_out}}) {
        for (auto p : testing::project_circle_points(f.h, circle, 40, 0.3 * i)) {
          p += Eigen::Vector2d(n(rng), n(rng));
          dst->push_back(p);
          clean->push_back(p);
        }
        for (int k = 0; k < 17; ++k) dst->emplace_back(ux(rng), uy(rng));
      }
      const Conic ti = testing::imaged_circle(f.h, tpl.inner_circle());
      const Conic to = testing::imaged_circle(f.h, tpl.outer_circle());
      oracle.push_back(std::max(testing::mean_curve_distance(ti, testing::svd_algebraic_fit(clean_in)),
                                testing::mean_curve_distance(to, testing::svd_algebraic_fit(clean_out))));
      RansacOptions opts;
      opts.seed = static_cast<std::uint64_t>(i);
      try {
        const ConcentricFit fit = ransac_fit_concentric(e, opts);
        ransac.push_back(std::max(testing::mean_curve_distance(ti, fit.inner),
                                  testing::mean_curve_distance(to, fit.outer)));
      } catch (const Error&) {
        ransac.push_back(kInf);
      }
    }
    const double bound = quantile(oracle, 0.99);
    const auto within = std::count_if(ransac.begin(), ransac.end(),
                                      [&](double d) { return d <= bound; });
    if (within < 950) {
      failures.push_back("ransac " + std::to_string(within) + "/1000 within " + fmt("%.3f", bound));
    }
  }
  // Byte-identical sweeps.
  {
    SweepConfig a;
    a.cameras = 20;
    a.threads = 1;
    SweepConfig b = a;
    b.threads = 4;
    if (sweep_csv(run_noise_sweep(a)) != sweep_csv(run_noise_sweep(b))) {
      failures.push_back("sweep csv differs");
    }
  }

  std::string detail = failures.empty() ? "covariance, center identity, 4-point DLT, "
                                          "8-point fit, RANSAC bound, determinism"
                                        : "";
  for (std::size_t i = 0; i < failures.size(); ++i) detail += (i ? "; " : "") + failures[i];
  return {failures.empty(), detail};
}

// 9. Center recovery from pixelated ring masks is far off.
Outcome pixelated_rings() {
  const FieldTemplate tpl = sweep_template();
  std::mt19937_64 rng(909);
  std::vector<double> errors;
  int sampled = 0;
  while (errors.size() < 100 && sampled < 20000) {
    ++sampled;
    const CameraSample cam = sample_camera(rng, {}, tpl);
    const Homography h = camera_to_homography(cam);
    std::vector<double> widths;
    for (int k = 0; k < 64; ++k) {
      const double t = 2 * std::numbers::pi * k / 64;
      const Eigen::Vector2d dir(std::cos(t), std::sin(t));
      const Eigen::Vector2d a = project(h, tpl.inner_circle().radius * dir);
      const Eigen::Vector2d b = project(h, tpl.outer_circle().radius * dir);
      if (cam.in_image(a) && cam.in_image(b)) widths.push_back((a - b).norm());
    }
    if (widths.empty()) continue;
    const double w = median(widths);
    if (w < 3.0 || w > 6.0) continue;

    const MaskImage mask = rasterize_ring_mask(h, tpl, cam.image_width, cam.image_height, 1);
    double err = kInf;
    try {
      const ConcentricEdges edges = extract_concentric_edges(mask, 1);
      RansacOptions opts;
      opts.seed = errors.size();
      const ConcentricFit fit = ransac_fit_concentric(edges, opts);
      const CenterRecovery rec = recover_center_concentric(fit.inner, fit.outer);
      err = (rec.center.euclidean() - project(h, {0, 0})).norm();
    } catch (const Error&) {
    }
    errors.push_back(err);
  }
  const auto finite = std::count_if(errors.begin(), errors.end(),
                                    [](double e) { return std::isfinite(e); });
  const double med = errors.empty() ? 0.0 : median(errors);
  return {errors.size() == 100 && med > 10.0,
          "median center error " + fmt("%.1f", med) + " px over " +
              std::to_string(errors.size()) + " rings 3-6 px wide (" + std::to_string(finite) +
              " recovered)"};
}

}  // namespace

int main() {
  const SweepStats ellipse = sweep_stats(NoiseTarget::EllipsePoints);
  const SweepStats center = sweep_stats(NoiseTarget::CenterPoint);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 noise-free case 1 exactness", exactness},
      {"2 concentric center recovery", concentric_center},
      {"3 ellipse-noise trend", [&] { return ellipse_noise_trend(ellipse); }},
      {"4 center noise dominates", [&] { return center_noise_dominates(ellipse, center); }},
      {"5 collinearity of derived pairs", collinearity},
      {"6 tangent consistency", tangent_consistency_check},
      {"7 eight points and eight lines", correspondence_count},
      {"8 property suites", properties},
      {"9 pixelated rings are too noisy", pixelated_rings},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
