#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "circlereg/projective.hpp"

namespace circlereg {

/// Pitch dimensions in meters. Defaults follow the usual 105 x 68 m pitch.
struct TemplateConfig {
  double length = 105.0;
  double width = 68.0;
  double circle_radius = 9.15;
  double thickness = 0.10;
};

struct TemplateCircle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;

  Conic conic() const;
};

/// Straight marking between two field points.
struct Segment {
  std::string name;
  Eigen::Vector2d from;
  Eigen::Vector2d to;
};

/// Soccer pitch on the plane Z = 0. Origin at the pitch center, x along the
/// touchlines (the halfway line is x = 0), y toward the far touchline.
class FieldTemplate {
 public:
  explicit FieldTemplate(const TemplateConfig& config);

  const TemplateConfig& config() const noexcept { return config_; }
  double length() const noexcept { return config_.length; }
  double width() const noexcept { return config_.width; }
  double thickness() const noexcept { return config_.thickness; }

  /// Circle along the middle of the painted marking.
  TemplateCircle center_circle() const;
  /// Inner and outer edges of the marking, radius -/+ thickness / 2.
  TemplateCircle inner_circle() const;
  TemplateCircle outer_circle() const;

  HomLine2 halfway_line() const { return lines_.at("halfway"); }

  const std::map<std::string, Eigen::Vector2d>& keypoints() const noexcept {
    return keypoints_;
  }
  const std::map<std::string, HomLine2>& lines() const noexcept { return lines_; }
  const std::vector<Segment>& markings() const noexcept { return markings_; }

  std::optional<Eigen::Vector2d> keypoint(const std::string& name) const;
  std::optional<HomLine2> line(const std::string& name) const;

  bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const;

 private:
  TemplateConfig config_;
  std::map<std::string, Eigen::Vector2d> keypoints_;
  std::map<std::string, HomLine2> lines_;
  std::vector<Segment> markings_;
};

/// Throws InvalidConfig for non-positive or inconsistent dimensions.
FieldTemplate standard_template(const TemplateConfig& config = {});

/// Keypoint names on the center circle.
namespace keypoint_names {
inline constexpr const char* kCenter = "center";
inline constexpr const char* kHalfwayFar = "circle_halfway_far";
inline constexpr const char* kHalfwayNear = "circle_halfway_near";
inline constexpr const char* kLeft = "circle_left";
inline constexpr const char* kRight = "circle_right";
inline constexpr const char* kFarLeft = "circle_far_left";
inline constexpr const char* kFarRight = "circle_far_right";
inline constexpr const char* kNearLeft = "circle_near_left";
inline constexpr const char* kNearRight = "circle_near_right";
}  // namespace keypoint_names

}  // namespace circlereg
