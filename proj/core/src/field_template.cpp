#include "circlereg/field_template.hpp"

#include <cmath>
#include <numbers>

#include "circlereg/conic.hpp"

namespace circlereg {
namespace {

// Penalty and goal area sizes are only used for overlays and the
// central-view visibility test.
constexpr double kPenaltyDepth = 16.5;
constexpr double kPenaltyWidth = 40.32;
constexpr double kGoalAreaDepth = 5.5;
constexpr double kGoalAreaWidth = 18.32;

void validate(const TemplateConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(c.length)) throw Error(ErrorCode::InvalidConfig, "length must be positive");
  if (!positive(c.width)) throw Error(ErrorCode::InvalidConfig, "width must be positive");
  if (!positive(c.circle_radius)) {
    throw Error(ErrorCode::InvalidConfig, "circle_radius must be positive");
  }
  if (!positive(c.thickness)) {
    throw Error(ErrorCode::InvalidConfig, "thickness must be positive");
  }
  if (c.thickness >= 2.0 * c.circle_radius) {
    throw Error(ErrorCode::InvalidConfig, "thickness exceeds circle diameter");
  }
  if (c.circle_radius + c.thickness / 2.0 > std::min(c.length, c.width) / 2.0) {
    throw Error(ErrorCode::InvalidConfig, "center circle does not fit the pitch");
  }
}

void add_rectangle(std::vector<Segment>& out, const std::string& name,
                   double x0, double y0, double x1, double y1) {
  out.push_back({name + "_a", {x0, y0}, {x1, y0}});
  out.push_back({name + "_b", {x1, y0}, {x1, y1}});
  out.push_back({name + "_c", {x1, y1}, {x0, y1}});
  out.push_back({name + "_d", {x0, y1}, {x0, y0}});
}

}  // namespace

Conic TemplateCircle::conic() const { return circle_conic(center, radius); }

FieldTemplate::FieldTemplate(const TemplateConfig& config) : config_(config) {
  validate(config_);
  namespace kn = keypoint_names;
  const double hl = config_.length / 2.0;
  const double hw = config_.width / 2.0;
  const double r = config_.circle_radius;
  const double diag = r * std::numbers::sqrt2 / 2.0;

  keypoints_ = {
      {kn::kCenter, {0.0, 0.0}},
      {kn::kHalfwayFar, {0.0, r}},
      {kn::kHalfwayNear, {0.0, -r}},
      {kn::kLeft, {-r, 0.0}},
      {kn::kRight, {r, 0.0}},
      {kn::kFarLeft, {-diag, diag}},
      {kn::kFarRight, {diag, diag}},
      {kn::kNearLeft, {-diag, -diag}},
      {kn::kNearRight, {diag, -diag}},
      {"halfway_far", {0.0, hw}},
      {"halfway_near", {0.0, -hw}},
      {"corner_far_left", {-hl, hw}},
      {"corner_far_right", {hl, hw}},
      {"corner_near_left", {-hl, -hw}},
      {"corner_near_right", {hl, -hw}},
  };

  lines_ = {
      {"halfway", HomLine2(1.0, 0.0, 0.0)},
      {"touchline_far", HomLine2(0.0, 1.0, -hw)},
      {"touchline_near", HomLine2(0.0, 1.0, hw)},
      {"goal_line_left", HomLine2(1.0, 0.0, hl)},
      {"goal_line_right", HomLine2(1.0, 0.0, -hl)},
  };

  markings_ = {
      {"halfway", {0.0, -hw}, {0.0, hw}},
      {"touchline_far", {-hl, hw}, {hl, hw}},
      {"touchline_near", {-hl, -hw}, {hl, -hw}},
      {"goal_line_left", {-hl, -hw}, {-hl, hw}},
      {"goal_line_right", {hl, -hw}, {hl, hw}},
  };
  const double pw = kPenaltyWidth / 2.0;
  const double gw = kGoalAreaWidth / 2.0;
  if (kPenaltyDepth < hl && pw < hw) {
    add_rectangle(markings_, "penalty_area_left", -hl, -pw, -hl + kPenaltyDepth, pw);
    add_rectangle(markings_, "penalty_area_right", hl - kPenaltyDepth, -pw, hl, pw);
  }
  if (kGoalAreaDepth < hl && gw < hw) {
    add_rectangle(markings_, "goal_area_left", -hl, -gw, -hl + kGoalAreaDepth, gw);
    add_rectangle(markings_, "goal_area_right", hl - kGoalAreaDepth, -gw, hl, gw);
  }
}

TemplateCircle FieldTemplate::center_circle() const {
  return {Eigen::Vector2d::Zero(), config_.circle_radius};
}

TemplateCircle FieldTemplate::inner_circle() const {
  return {Eigen::Vector2d::Zero(), config_.circle_radius - config_.thickness / 2.0};
}

TemplateCircle FieldTemplate::outer_circle() const {
  return {Eigen::Vector2d::Zero(), config_.circle_radius + config_.thickness / 2.0};
}

std::optional<Eigen::Vector2d> FieldTemplate::keypoint(const std::string& name) const {
  if (auto it = keypoints_.find(name); it != keypoints_.end()) return it->second;
  return std::nullopt;
}

std::optional<HomLine2> FieldTemplate::line(const std::string& name) const {
  if (auto it = lines_.find(name); it != lines_.end()) return it->second;
  return std::nullopt;
}

bool FieldTemplate::contains(const Eigen::Vector2d& p, double tol) const {
  return std::abs(p.x()) <= config_.length / 2.0 + tol &&
         std::abs(p.y()) <= config_.width / 2.0 + tol;
}

FieldTemplate standard_template(const TemplateConfig& config) {
  return FieldTemplate(config);
}

}  // namespace circlereg
