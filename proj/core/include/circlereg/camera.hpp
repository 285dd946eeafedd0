#pragma once

#include <Eigen/Core>

namespace circlereg {

/// Pinhole camera above the field plane. rotation maps world to camera
/// coordinates (camera x right, y down, z forward); the world frame has Z up
/// and the pitch on Z = 0.
struct CameraSample {
  Eigen::Vector3d position = Eigen::Vector3d(0.0, -40.0, 15.0);
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double focal = 3000.0;
  Eigen::Vector2d principal_point = Eigen::Vector2d(960.0, 540.0);
  int image_width = 1920;
  int image_height = 1080;

  Eigen::Matrix3d intrinsics() const;
  /// Full 3x4 projection K [R | -R C].
  Eigen::Matrix<double, 3, 4> projection() const;
  Eigen::Vector3d optical_axis() const { return rotation.row(2).transpose(); }

  bool in_image(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < image_width &&
           px.y() < image_height;
  }

  /// Camera at `position` aimed at `target` with a roll about the optical
  /// axis. Throws DegeneratePose when looking straight up or down the
  /// world Z axis is ill-defined for the chosen up vector.
  static CameraSample look_at(const Eigen::Vector3d& position,
                              const Eigen::Vector3d& target, double focal,
                              double roll = 0.0, int width = 1920, int height = 1080);
};

/// Throws when the rotation is not orthonormal with det +1 (1e-9).
void validate_camera(const CameraSample& cam);

}  // namespace circlereg
