#include "actimg/encoder.hpp"

#include <cmath>

namespace actimg {

void Action7::validate() const {
  if (!position.allFinite()) throw ValidationError("action position must be finite");
  if (!(gripper >= 0.0 && gripper <= 1.0))
    throw ValidationError("gripper openness must lie in [0, 1], got " + std::to_string(gripper));
}

void EncoderParams::validate() const {
  if (!(ell > 0)) throw ValidationError("ell must be positive");
  if (!(sigma_rel > 0 && sigma_rel < 1)) throw ValidationError("sigma_rel must lie in (0, 1)");
  if (!(threshold > 0 && threshold < 1)) throw ValidationError("threshold must lie in (0, 1)");
}

double EncoderParams::sigma_px(int width, int height) const {
  return sigma_rel * std::min(width, height);
}

double Heatmap::sample(double x, double y) const {
  // Shift so pixel centers land on integers.
  double fx = x - 0.5, fy = y - 0.5;
  int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
  double ax = fx - x0, ay = fy - y0;
  auto val = [&](int ix, int iy) -> double {
    if (ix < 0 || iy < 0 || ix >= width || iy >= height) return 0.0;
    return at(ix, iy);
  };
  return val(x0, y0) * (1 - ax) * (1 - ay) + val(x0 + 1, y0) * ax * (1 - ay) +
         val(x0, y0 + 1) * (1 - ax) * ay + val(x0 + 1, y0 + 1) * ax * ay;
}

double Heatmap::sample_cubic(double x, double y) const {
  // Catmull-Rom in both axes. The bilinear interpolant has kinks at pixel
  // nodes, so its maxima snap toward them; a C^1 interpolant keeps the
  // response peak at the blob center, which the depth search depends on.
  double fx = x - 0.5, fy = y - 0.5;
  int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
  double ax = fx - x0, ay = fy - y0;
  auto val = [&](int ix, int iy) -> double {
    if (ix < 0 || iy < 0 || ix >= width || iy >= height) return 0.0;
    return at(ix, iy);
  };
  auto cr = [](double p0, double p1, double p2, double p3, double t) {
    return p1 + 0.5 * t *
                    (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
  };
  double rows[4];
  for (int r = 0; r < 4; ++r) {
    int iy = y0 - 1 + r;
    rows[r] = cr(val(x0 - 1, iy), val(x0, iy), val(x0 + 1, iy), val(x0 + 2, iy), ax);
  }
  return std::max(0.0, cr(rows[0], rows[1], rows[2], rows[3], ay));
}

SemanticPoints semantic_points(const Action7& a, double ell) {
  a.validate();
  if (!(ell > 0)) throw ValidationError("ell must be positive");
  const Mat3& r = a.orientation.matrix();
  SemanticPoints sp;
  sp.pos = a.position;
  sp.up = a.position + ell * r.col(0);      // R * e_x
  sp.normal = a.position - ell * r.col(2);  // R * (-e_z)
  return sp;
}

Heatmap render_gaussian(const Vec2& u, double sigma_px, int width, int height) {
  if (!(sigma_px > 0)) throw std::invalid_argument("render_gaussian: sigma must be positive");
  Heatmap h(width, height);
  // Separable: exp(-(dx^2 + dy^2)/2s^2) = fx(ix) * fy(iy).
  double inv = 1.0 / (2.0 * sigma_px * sigma_px);
  std::vector<double> gx(width), gy(height);
  for (int ix = 0; ix < width; ++ix) {
    double d = (ix + 0.5) - u.x();
    gx[ix] = std::exp(-d * d * inv);
  }
  for (int iy = 0; iy < height; ++iy) {
    double d = (iy + 0.5) - u.y();
    gy[iy] = std::exp(-d * d * inv);
  }
  size_t idx = 0;
  for (int iy = 0; iy < height; ++iy)
    for (int ix = 0; ix < width; ++ix) h.data[idx++] = float(gx[ix] * gy[iy]);
  return h;
}

ActionFrame encode_frame(const Action7& a, const CameraView& cam, const EncoderParams& params) {
  params.validate();
  cam.validate();
  SemanticPoints sp = semantic_points(a, params.ell);

  auto proj = [&](const Vec3& p, const char* name) -> Vec2 {
    try {
      return project(cam, p);
    } catch (const BehindCameraError& e) {
      throw EncodeError(name, e.depth());
    }
  };
  Vec2 u_pos = proj(sp.pos, "pos");
  Vec2 u_normal = proj(sp.normal, "normal");
  Vec2 u_up = proj(sp.up, "up");

  double sigma = params.sigma_px(cam.width, cam.height);
  ActionFrame frame(cam.width, cam.height);
  frame.ch[0] = render_gaussian(u_pos, sigma, cam.width, cam.height);
  frame.ch[1] = render_gaussian(u_normal, sigma, cam.width, cam.height);
  frame.ch[2] = render_gaussian(u_up, sigma, cam.width, cam.height);

  // Gripper constant in every low-response pixel; strict > keeps the blob.
  float bg = float(params.threshold * a.gripper);
  float thr = float(params.threshold);
  for (float& v : frame.ch[2].data)
    if (!(v > thr)) v = bg;
  return frame;
}

MultiViewVideo encode_video(const std::vector<Action7>& traj, const Rig& rig,
                            const EncoderParams& params) {
  MultiViewVideo out(rig.size());
  for (size_t v = 0; v < rig.size(); ++v) {
    out[v].reserve(traj.size());
    for (size_t t = 0; t < traj.size(); ++t) {
      try {
        out[v].push_back(encode_frame(traj[t], rig[v].at(int(t)), params));
      } catch (const EncodeError& e) {
        throw EncodeError(e.point(),
                          "in view " + rig[v].view_id + " at t=" + std::to_string(t));
      }
    }
  }
  return out;
}

}  // namespace actimg
