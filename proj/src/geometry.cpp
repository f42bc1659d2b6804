#include "actimg/geometry.hpp"

#include <cmath>

namespace actimg {

namespace {

bool finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 rot_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

}  // namespace

Rotation3 Rotation3::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw ValidationError("rotation matrix has non-finite entries");
  if ((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("rotation matrix is not orthonormal");
  if (std::abs(m.determinant() - 1.0) > 1e-9)
    throw ValidationError("rotation matrix determinant is not +1");
  Rotation3 r;
  r.m_ = m;
  return r;
}

Rotation3 Rotation3::from_euler(const Vec3& angles) {
  if (!finite(angles)) throw std::invalid_argument("euler angles must be finite");
  Rotation3 r;
  r.m_ = rot_z(angles.z()) * rot_y(angles.y()) * rot_x(angles.x());
  return r;
}

Rotation3 Rotation3::orthonormalized(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 d = Mat3::Identity();
    d(2, 2) = -1;
    r = svd.matrixU() * d * svd.matrixV().transpose();
  }
  Rotation3 out;
  out.m_ = r;
  return out;
}

Vec3 Rotation3::to_euler() const {
  // R = Rz(yaw) Ry(pitch) Rx(roll):
  //   R(2,0) = -sin(pitch)
  //   R(2,1) = cos(pitch) sin(roll),  R(2,2) = cos(pitch) cos(roll)
  //   R(1,0) = sin(yaw) cos(pitch),   R(0,0) = cos(yaw) cos(pitch)
  const Mat3& m = m_;
  double sp = -m(2, 0);
  sp = std::clamp(sp, -1.0, 1.0);
  double pitch = std::asin(sp);
  if (std::abs(sp) > 1.0 - 1e-12) {
    // Gimbal lock: roll fixed to 0, ambiguity folded into yaw.
    double yaw = std::atan2(-m(0, 1), m(1, 1));
    return {0.0, pitch, yaw};
  }
  double roll = std::atan2(m(2, 1), m(2, 2));
  double yaw = std::atan2(m(1, 0), m(0, 0));
  return {roll, pitch, yaw};
}

void CameraView::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw ValidationError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
    throw ValidationError("camera principal point outside the image");
}

Vec2 project(const CameraView& cam, const Vec3& point) {
  if (!finite(point)) throw std::invalid_argument("project: point must be finite");
  Vec3 pc = cam.rotation * point + cam.translation;
  if (pc.z() <= kZMin) throw BehindCameraError(pc.z());
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy};
}

Ray unproject_ray(const CameraView& cam, const Vec2& u) {
  Vec3 dir_cam((u.x() - cam.cx) / cam.fx, (u.y() - cam.cy) / cam.fy, 1.0);
  Vec3 dir = cam.rotation.transpose() * dir_cam;
  return {cam.center(), dir.normalized()};
}

std::vector<Vec3> sample_ray(const Ray& ray, double near, double far, int k) {
  if (!(near > 0) || !(near < far)) throw std::invalid_argument("sample_ray: need 0 < near < far");
  if (k < 2) throw std::invalid_argument("sample_ray: need k >= 2");
  std::vector<Vec3> pts;
  pts.reserve(k);
  double step = (far - near) / (k - 1);
  for (int i = 0; i < k; ++i) {
    double s = (i == k - 1) ? far : near + step * i;
    pts.push_back(ray.origin + s * ray.direction);
  }
  return pts;
}

PluckerMap plucker_map(const CameraView& cam) {
  cam.validate();
  PluckerMap map;
  map.width = cam.width;
  map.height = cam.height;
  map.data.resize(size_t(cam.width) * cam.height * 6);
  Vec3 origin = cam.center();
  Mat3 rt = cam.rotation.matrix().transpose();
  size_t idx = 0;
  for (int iy = 0; iy < cam.height; ++iy) {
    for (int ix = 0; ix < cam.width; ++ix) {
      Vec3 dir_cam((ix + 0.5 - cam.cx) / cam.fx, (iy + 0.5 - cam.cy) / cam.fy, 1.0);
      Vec3 d = (rt * dir_cam).normalized();
      Vec3 m = origin.cross(d);
      map.data[idx++] = d.x();
      map.data[idx++] = d.y();
      map.data[idx++] = d.z();
      map.data[idx++] = m.x();
      map.data[idx++] = m.y();
      map.data[idx++] = m.z();
    }
  }
  return map;
}

CameraView CameraTrack::at(int t) const {
  if (poses.empty()) throw ValidationError("camera track '" + view_id + "' has no poses");
  const CameraPose* pose = nullptr;
  if (poses.size() == 1) {
    pose = &poses.front();
  } else {
    for (const auto& p : poses)
      if (p.time == t) {
        pose = &p;
        break;
      }
    if (!pose)
      throw ValidationError("camera track '" + view_id + "' has no pose for t = " +
                            std::to_string(t));
  }
  CameraView cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.view_id = view_id;
  cam.rotation = pose->rotation;
  cam.translation = pose->translation;
  cam.time_index = t;
  cam.validate();
  return cam;
}

}  // namespace actimg
