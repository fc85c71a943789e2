#include "roisweep/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "roisweep/errors.hpp"

namespace roisweep {

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, skew, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(skew)) {
    throw Error(ErrorCode::InvalidArgument, "intrinsics must be finite");
  }
  // K is upper triangular, so det = fx * fy.
  if (!(std::abs(fx * fy) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "intrinsic matrix is singular");
  }
}

CameraIntrinsics CameraIntrinsics::scaled(double sx, double sy) const {
  return {fx * sx, fy * sy, cx * sx, cy * sy, skew * sx};
}

CameraIntrinsics CameraIntrinsics::shifted(double dx, double dy) const {
  return {fx, fy, cx - dx, cy - dy, skew};
}

void CameraPose::validate() const {
  if (!rotation.allFinite() || !center.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "pose must be finite");
  }
  const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "rotation determinant is not +1");
  }
}

double PlaneStack::inverse_step() const {
  if (planes.size() < 2) return 0.0;
  return (1.0 / d_min - 1.0 / d_max) / static_cast<double>(planes.size() - 1);
}

Mat34 projection_matrix(const CameraIntrinsics& intrinsics, const CameraPose& pose) {
  Mat34 extrinsic;
  extrinsic.leftCols<3>() = pose.rotation;
  extrinsic.col(3) = -pose.rotation * pose.center;
  return intrinsics.matrix() * extrinsic;
}

Projection project(const CameraIntrinsics& intrinsics, const CameraPose& pose, const Vec3& world) {
  const Vec3 cam = pose.to_camera(world);
  const Vec3 h = intrinsics.matrix() * cam;
  return {Vec2(h.x() / h.z(), h.y() / h.z()), cam.z()};
}

RelativeMotion relative_motion(const CameraPose& ref, const CameraPose& other) {
  return {other.rotation * ref.rotation.transpose(), other.rotation * (ref.center - other.center)};
}

Mat3 plane_homography(const CameraIntrinsics& intrinsics, const CameraPose& ref,
                      const CameraPose& other, const SweepPlane& plane) {
  const RelativeMotion motion = relative_motion(ref, other);
  const Mat3 k = intrinsics.matrix();
  // For X on n^T X = d: x_other = R X + t = (R + t n^T / d) X.
  const Mat3 induced = motion.rotation + motion.translation * plane.normal.transpose() / plane.distance;
  Mat3 h = k * induced * k.inverse();

  const Eigen::JacobiSVD<Mat3> svd(h);
  const auto sv = svd.singularValues();
  if (!h.allFinite() || !(sv(2) > 0.0) || sv(0) / sv(2) > 1e12) {
    throw Error(ErrorCode::NumericalDegeneracy, "plane homography is singular");
  }
  if (h(2, 2) != 0.0) h /= h(2, 2);
  return h;
}

PlaneStack sample_planes(double d_min, double d_max, int count, const Vec3& normal) {
  if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::InvalidRange,
                "plane range requires 0 < d_min < d_max, got [" + std::to_string(d_min) + ", " +
                    std::to_string(d_max) + "]");
  }
  if (count < 2) {
    throw Error(ErrorCode::InvalidCount, "plane count must be at least 2");
  }
  const double norm = normal.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "plane normal must be nonzero");
  }
  const Vec3 unit = normal / norm;

  PlaneStack stack;
  stack.d_min = d_min;
  stack.d_max = d_max;
  stack.planes.reserve(static_cast<std::size_t>(count));
  const double inv_near = 1.0 / d_min;
  const double inv_far = 1.0 / d_max;
  for (int i = 0; i < count; ++i) {
    double distance;
    if (i == 0) {
      distance = d_min;
    } else if (i == count - 1) {
      distance = d_max;
    } else {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      distance = 1.0 / (inv_near + t * (inv_far - inv_near));
    }
    stack.planes.push_back({unit, distance});
  }
  return stack;
}

double depth_from_plane(double x, double y, const SweepPlane& plane, const CameraIntrinsics& intrinsics) {
  // Back-project without forming K^{-1} explicitly.
  const double ry = (y - intrinsics.cy) / intrinsics.fy;
  const double rx = (x - intrinsics.cx - intrinsics.skew * ry) / intrinsics.fx;
  const Vec3 ray(rx, ry, 1.0);
  const double denom = plane.normal.dot(ray);
  if (std::abs(denom) < 1e-12) {
    throw Error(ErrorCode::RayParallel, "viewing ray is parallel to the plane");
  }
  return plane.distance / denom;
}

}  // namespace roisweep
