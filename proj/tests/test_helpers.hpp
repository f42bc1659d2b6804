#pragma once

#include <random>

#include "actimg/geometry.hpp"

namespace actimg::test {

inline Rotation3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return Rotation3::from_matrix(q.toRotationMatrix());
}

inline CameraView random_camera(std::mt19937_64& rng, int width = 640, int height = 480) {
  std::uniform_real_distribution<double> f(200.0, 800.0);
  std::uniform_real_distribution<double> c(0.3, 0.7);
  std::uniform_real_distribution<double> t(-1.0, 1.0);
  CameraView cam;
  cam.fx = f(rng);
  cam.fy = f(rng);
  cam.width = width;
  cam.height = height;
  cam.cx = c(rng) * width;
  cam.cy = c(rng) * height;
  cam.rotation = random_rotation(rng);
  cam.translation = Vec3(t(rng), t(rng), t(rng));
  cam.view_id = "test";
  return cam;
}

}  // namespace actimg::test
