#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "roisweep/image.hpp"

namespace roisweep {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Pinhole intrinsics shared by every view of a bundle.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  Mat3 matrix() const;
  /// Throws InvalidArgument unless fx, fy > 0 and K is invertible.
  void validate() const;

  CameraIntrinsics scaled(double sx, double sy) const;
  /// Intrinsics of a crop whose top-left pixel is (dx, dy) in this frame.
  CameraIntrinsics shifted(double dx, double dy) const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// World-to-camera pose: x_cam = rotation * (X_world - center).
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();

  /// Throws InvalidArgument unless rotation is in SO(3) within 1e-9.
  void validate() const;
  Vec3 to_camera(const Vec3& world) const { return rotation * (world - center); }
  Vec3 to_world(const Vec3& camera) const { return rotation.transpose() * camera + center; }
};

struct CameraView {
  CameraIntrinsics intrinsics;
  CameraPose pose;
  GrayImage image;
};

/// Plane n^T X = distance in the reference camera frame.
struct SweepPlane {
  Vec3 normal = Vec3::UnitZ();
  double distance = 1.0;
};

/// Planes sharing one normal, nearest first, uniform in inverse distance.
struct PlaneStack {
  std::vector<SweepPlane> planes;
  double d_min = 0.0;
  double d_max = 0.0;

  int size() const noexcept { return static_cast<int>(planes.size()); }
  const SweepPlane& operator[](int i) const { return planes[static_cast<std::size_t>(i)]; }
  /// Spacing between consecutive planes in inverse distance.
  double inverse_step() const;
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

Mat34 projection_matrix(const CameraIntrinsics& intrinsics, const CameraPose& pose);
inline Mat34 projection_matrix(const CameraView& view) {
  return projection_matrix(view.intrinsics, view.pose);
}

/// Projects a world point; depth is the camera-frame z.
Projection project(const CameraIntrinsics& intrinsics, const CameraPose& pose, const Vec3& world);

/// Relative motion taking reference-camera coordinates to the other camera:
/// x_other = rotation * x_ref + translation.
struct RelativeMotion {
  Mat3 rotation;
  Vec3 translation;
};
RelativeMotion relative_motion(const CameraPose& ref, const CameraPose& other);

/// Homography mapping reference pixels to pixels of `other` for points on
/// `plane` (given in the reference frame). Normalized so H(2,2) == 1 when it
/// is nonzero. Throws NumericalDegeneracy if the condition number exceeds 1e12.
Mat3 plane_homography(const CameraIntrinsics& intrinsics, const CameraPose& ref,
                      const CameraPose& other, const SweepPlane& plane);
inline Mat3 plane_homography(const CameraView& ref, const CameraView& other, const SweepPlane& plane) {
  return plane_homography(ref.intrinsics, ref.pose, other.pose, plane);
}

/// count planes between d_min and d_max, uniform in 1/d, endpoints exact.
/// Throws InvalidRange / InvalidCount.
PlaneStack sample_planes(double d_min, double d_max, int count, const Vec3& normal = Vec3::UnitZ());

/// Optical-axis depth where the viewing ray through pixel (x, y) meets the
/// plane. Throws RayParallel if |n . ray| < 1e-12.
double depth_from_plane(double x, double y, const SweepPlane& plane, const CameraIntrinsics& intrinsics);

}  // namespace roisweep
