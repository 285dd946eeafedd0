#include <algorithm>
#include <iostream>
#include <memory>

#include "circlereg/detect_ingest.hpp"
#include "circlereg/io.hpp"
#include "circlereg/metrics.hpp"
#include "common.hpp"

namespace circlereg::cli {
namespace {

struct DeriveArgs {
  std::string detections;
  std::string out;
  std::string template_path;
  std::string which = "auto";
  std::string mask_class = "center_circle";
  std::string side = "near";
  std::string y_axis = "down";
  std::uint64_t seed = 0;
};

std::vector<DerivationCase> cases_for(const std::string& which) {
  if (which == "auto") return {DerivationCase::Case1, DerivationCase::Case2, DerivationCase::Case3};
  if (which == "1" || which == "case1") return {DerivationCase::Case1};
  if (which == "2" || which == "case2") return {DerivationCase::Case2};
  if (which == "3" || which == "case3") return {DerivationCase::Case3};
  throw Error(ErrorCode::InvalidConfig, "case: expected auto, 1, 2 or 3");
}

int run_derive(const DeriveArgs& a) {
  const auto cases = cases_for(a.which);
  if (a.side != "near" && a.side != "far") {
    throw Error(ErrorCode::InvalidConfig, "side: expected near or far");
  }
  if (a.y_axis != "down" && a.y_axis != "up") {
    throw Error(ErrorCode::InvalidConfig, "y-axis: expected down or up");
  }
  const FieldTemplate tpl = standard_template(load_template_config(a.template_path));
  const CameraPrior prior = CameraPrior::broadcast(
      a.side == "near" ? CameraSide::Near : CameraSide::Far,
      a.y_axis == "down" ? ImageYAxis::Down : ImageYAxis::Up);
  const DetectionFile det = parse_detection_file(a.detections);

  std::vector<std::string> attempts;
  std::optional<ConcentricFit> concentric;
  const bool want_case3 = std::find(cases.begin(), cases.end(), DerivationCase::Case3) != cases.end();
  if (want_case3 && det.mask_path) {
    try {
      RansacOptions ropt;
      ropt.seed = a.seed;
      concentric = ransac_fit_concentric(extract_concentric_edges(det, a.mask_class), ropt);
    } catch (const Error& e) {
      // IoError on the mask is fatal; detection failures only rule out case 3.
      if (e.code() == ErrorCode::IoError) throw;
      attempts.push_back(std::string("case3 edges: ") + e.what());
    }
  }

  for (const DerivationCase c : cases) {
    try {
      const BuiltObservation built = build_observation(det, std::nullopt, concentric, tpl, c);
      const CorrespondenceSet corr = derive_correspondences(built, tpl, prior);
      attempts.push_back(to_string(c) + ": ok");
      nlohmann::json j = to_json(corr);
      j["attempts"] = attempts;
      j["config"] = {{"detections", a.detections},
                     {"case", a.which},
                     {"mask_class", a.mask_class},
                     {"side", a.side},
                     {"y_axis", a.y_axis},
                     {"seed", a.seed},
                     {"template", to_json(tpl.config())}};
      if (concentric) {
        j["concentric"] = {{"inner_inliers", concentric->inner_inliers.size()},
                           {"outer_inliers", concentric->outer_inliers.size()}};
      }
      try {
        const CollinearityAudit audit = collinearity_audit(corr);
        j["collinearity_max_px"] = audit.max;
      } catch (const Error&) {
      }
      write_json_file(a.out, j);
      std::cout << to_string(c) << ": " << corr.points.size() << " points, "
                << corr.lines.size() << " lines\n";
      return kOk;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      std::string msg = e.what();
      if (e.code() != ErrorCode::InsufficientEvidence) msg = to_string(c) + ": " + msg;
      attempts.push_back(msg);
    }
  }
  std::cerr << "error: no case could be derived\n";
  for (const auto& r : attempts) std::cerr << "  " << r << '\n';
  return kInsufficientEvidence;
}

}  // namespace

void add_derive(CLI::App& app, int& status) {
  auto args = std::make_shared<DeriveArgs>();
  CLI::App* sub = app.add_subcommand("derive", "Detections -> point and line correspondences");
  sub->add_option("--detections", args->detections, "Detection JSON")->required();
  sub->add_option("--out", args->out, "Correspondence JSON to write")->required();
  sub->add_option("--case", args->which, "auto, 1, 2 or 3");
  sub->add_option("--template", args->template_path, "Template config JSON");
  sub->add_option("--mask-class", args->mask_class, "Mask class of the circle marking");
  sub->add_option("--side", args->side, "Camera side of the pitch: near or far");
  sub->add_option("--y-axis", args->y_axis, "Image y axis: down or up");
  sub->add_option("--seed", args->seed, "RANSAC seed");
  sub->callback([args, &status] { status = run_derive(*args); });
}

}  // namespace circlereg::cli
