#include <cstdio>
#include <iostream>
#include <memory>

#include "circlereg/homography.hpp"
#include "circlereg/io.hpp"
#include "common.hpp"

namespace circlereg::cli {
namespace {

// Grid points visible under the ground truth. A truth stored with the
// opposite overall sign sees nothing in front of the camera; retry negated.
std::vector<HomPoint2> scoring_points(const Homography& gt, const FieldTemplate& tpl,
                                      int width, int height, double spacing) {
  auto pts = visible_field_points(gt, tpl, width, height, spacing);
  if (pts.empty()) {
    pts = visible_field_points(Homography(-gt.matrix()), tpl, width, height, spacing);
  }
  if (pts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no field point is visible under the ground truth");
  }
  return pts;
}

struct CalibrateArgs {
  std::string correspondences;
  std::string out;
  std::string gt;
  std::string template_path;
  bool refine = false;
  int width = 1920;
  int height = 1080;
  double spacing = 1.0;
};

int run_calibrate(const CalibrateArgs& a) {
  const FieldTemplate tpl = standard_template(load_template_config(a.template_path));
  const CorrespondenceSet corr = correspondences_from_json(read_json_file(a.correspondences));
  DltOptions opt;
  opt.refine = a.refine;
  const Homography h = estimate_homography_dlt(DltProblem::from(corr), opt);

  nlohmann::json j = to_json(h);
  j["refine"] = a.refine;
  j["case"] = to_string(corr.derivation);
  j["n_points"] = corr.points.size();
  j["n_lines"] = corr.lines.size();
  j["config"] = {{"correspondences", a.correspondences},
                 {"gt", a.gt},
                 {"refine", a.refine},
                 {"image_size", {a.width, a.height}},
                 {"grid_spacing", a.spacing},
                 {"template", to_json(tpl.config())}};
  if (!a.gt.empty()) {
    const Homography gt = homography_from_json(read_json_file(a.gt));
    const auto pts = scoring_points(gt, tpl, a.width, a.height, a.spacing);
    const double mre = mean_reprojection_error(gt, h, pts);
    j["metrics"] = {{"mre_px", mre}, {"n_scored_points", pts.size()}};
    std::printf("mre_px=%.9e\n", mre);
  }
  write_json_file(a.out, j);
  return kOk;
}

struct EvaluateArgs {
  std::string gt;
  std::string estimate;
  std::string out;
  std::string template_path;
  int width = 1920;
  int height = 1080;
  double spacing = 1.0;
};

int run_evaluate(const EvaluateArgs& a) {
  if (!(a.spacing > 0.0)) throw Error(ErrorCode::InvalidConfig, "spacing: must be positive");
  const FieldTemplate tpl = standard_template(load_template_config(a.template_path));
  const Homography gt = homography_from_json(read_json_file(a.gt));
  const Homography est = homography_from_json(read_json_file(a.estimate));
  const auto pts = scoring_points(gt, tpl, a.width, a.height, a.spacing);
  const double mre = mean_reprojection_error(gt, est, pts);
  std::printf("mre_px=%.9e n_points=%zu\n", mre, pts.size());
  if (!a.out.empty()) {
    write_json_file(a.out, {{"mre_px", mre},
                            {"n_points", pts.size()},
                            {"config",
                             {{"gt", a.gt},
                              {"estimate", a.estimate},
                              {"image_size", {a.width, a.height}},
                              {"grid_spacing", a.spacing},
                              {"template", to_json(tpl.config())}}}});
  }
  return kOk;
}

}  // namespace

void add_calibrate(CLI::App& app, int& status) {
  auto args = std::make_shared<CalibrateArgs>();
  CLI::App* sub = app.add_subcommand("calibrate", "Correspondences -> homography");
  sub->add_option("--correspondences", args->correspondences, "Correspondence JSON")->required();
  sub->add_option("--out", args->out, "Homography JSON to write")->required();
  sub->add_option("--gt", args->gt, "Ground-truth homography JSON for MRE");
  sub->add_option("--template", args->template_path, "Template config JSON");
  sub->add_flag("--refine", args->refine, "Nonlinear refinement after the DLT");
  sub->add_option("--width", args->width, "Image width for MRE");
  sub->add_option("--height", args->height, "Image height for MRE");
  sub->add_option("--spacing", args->spacing, "Grid spacing in meters for MRE");
  sub->callback([args, &status] { status = run_calibrate(*args); });
}

void add_evaluate(CLI::App& app, int& status) {
  auto args = std::make_shared<EvaluateArgs>();
  CLI::App* sub = app.add_subcommand("evaluate", "MRE between two homographies");
  sub->add_option("--gt", args->gt, "Ground-truth homography JSON")->required();
  sub->add_option("--estimate", args->estimate, "Estimated homography JSON")->required();
  sub->add_option("--out", args->out, "Metrics JSON to write");
  sub->add_option("--template", args->template_path, "Template config JSON");
  sub->add_option("--width", args->width, "Image width");
  sub->add_option("--height", args->height, "Image height");
  sub->add_option("--spacing", args->spacing, "Grid spacing in meters");
  sub->callback([args, &status] { status = run_evaluate(*args); });
}

}  // namespace circlereg::cli
