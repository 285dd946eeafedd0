#include "circlereg/camera.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "circlereg/error.hpp"

namespace circlereg {

Eigen::Matrix3d CameraSample::intrinsics() const {
  Eigen::Matrix3d k;
  k << focal, 0.0, principal_point.x(),
       0.0, focal, principal_point.y(),
       0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix<double, 3, 4> CameraSample::projection() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rotation;
  rt.col(3) = -rotation * position;
  return intrinsics() * rt;
}

CameraSample CameraSample::look_at(const Eigen::Vector3d& position,
                                   const Eigen::Vector3d& target, double focal,
                                   double roll, int width, int height) {
  const Eigen::Vector3d forward = (target - position).normalized();
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d right = forward.cross(up);
  if (!forward.allFinite() || right.norm() < 1e-9) {
    throw Error(ErrorCode::DegeneratePose,
                "look-at direction is parallel to the vertical");
  }
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);

  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  // Roll rotates the image plane about the optical axis.
  const Eigen::Matrix3d roll_m =
      Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  CameraSample cam;
  cam.position = position;
  cam.rotation = roll_m * r;
  cam.focal = focal;
  cam.image_width = width;
  cam.image_height = height;
  cam.principal_point = Eigen::Vector2d(width / 2.0, height / 2.0);
  return cam;
}

void validate_camera(const CameraSample& cam) {
  const Eigen::Matrix3d& r = cam.rotation;
  if (!r.allFinite() ||
      (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(r.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "rotation must be orthonormal with det +1");
  }
  if (!(cam.focal > 0.0) || cam.image_width <= 0 || cam.image_height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "focal and image size must be positive");
  }
}

}  // namespace circlereg
