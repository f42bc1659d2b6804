#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "actimg/errors.hpp"

namespace actimg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Minimum camera-frame depth accepted by project(); anything at or below
// this counts as behind the camera.
inline constexpr double kZMin = 1e-6;

// Orthonormal rotation with det +1. Construct via from_matrix (validated)
// or from_euler; raw matrices from trusted math paths use the unchecked tag.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}

  // Validates orthonormality and det within 1e-9.
  static Rotation3 from_matrix(const Mat3& m);

  // Intrinsic X-Y-Z (roll-pitch-yaw): R = Rz(yaw) * Ry(pitch) * Rx(roll).
  // angles = (roll, pitch, yaw) in radians.
  static Rotation3 from_euler(const Vec3& angles);

  // Nearest rotation to an arbitrary 3x3 via SVD polar projection.
  static Rotation3 orthonormalized(const Mat3& m);

  // Inverse of from_euler, canonicalized: angles in (-pi, pi], and at
  // pitch = +-pi/2 the roll is fixed to 0 with the ambiguity folded into yaw.
  Vec3 to_euler() const;

  const Mat3& matrix() const { return m_; }
  Rotation3 transpose() const { return Rotation3(unchecked{}, m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct unchecked {};
  Rotation3(unchecked, const Mat3& m) : m_(m) {}
  Mat3 m_;
};

// Pinhole camera. rotation/translation map world to camera frame:
// x_cam = R * x_world + t.
struct CameraView {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();
  int width = 0, height = 0;
  std::string view_id;
  std::optional<int> time_index;

  void validate() const;
  // Camera center in the world frame: -R^T t.
  Vec3 center() const { return -(rotation.transpose() * translation); }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

// Per-pixel (direction, moment) ray embedding, row-major, 6 doubles per pixel.
struct PluckerMap {
  int width = 0, height = 0;
  std::vector<double> data;  // height * width * 6

  const double* at(int ix, int iy) const { return &data[(size_t(iy) * width + ix) * 6]; }
};

// Pixel coordinates are continuous with pixel (ix, iy) centered at
// (ix + 0.5, iy + 0.5); x runs along width, y along height.
Vec2 project(const CameraView& cam, const Vec3& point);

// Ray from the camera center through sub-pixel coordinate u, world frame.
Ray unproject_ray(const CameraView& cam, const Vec2& u);

// k depths uniformly spaced on [near, far], endpoints included.
std::vector<Vec3> sample_ray(const Ray& ray, double near, double far, int k);

PluckerMap plucker_map(const CameraView& cam);

// One timed pose of a camera track.
struct CameraPose {
  int time = 0;
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();
};

// A camera over time: shared intrinsics, per-frame extrinsics. A track with
// a single pose is static.
struct CameraTrack {
  std::string view_id;
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;

  std::vector<CameraPose> poses;

  // Camera at time t: exact time match if present, else the single static
  // pose. Missing coverage is a validation error.
  CameraView at(int t) const;
};

using Rig = std::vector<CameraTrack>;

}  // namespace actimg
