#pragma once

#include <vector>

#include "actimg/geometry.hpp"

namespace actimg {

// One 7-DoF control step: end-effector position, orientation, gripper openness.
struct Action7 {
  Vec3 position = Vec3::Zero();
  Rotation3 orientation;
  double gripper = 0.0;  // in [0, 1]

  void validate() const;
};

// The three 3D points derived from an action: the end-effector position and
// two points a fixed distance ell away along the rotated x and -z axes.
struct SemanticPoints {
  Vec3 pos;
  Vec3 up;      // pos + ell * R * e_x
  Vec3 normal;  // pos - ell * R * e_z
};

// Single-channel float image, row-major, values in [0, 1].
struct Heatmap {
  int width = 0, height = 0;
  std::vector<float> data;

  Heatmap() = default;
  Heatmap(int w, int h) : width(w), height(h), data(size_t(w) * h, 0.f) {}

  float at(int ix, int iy) const { return data[size_t(iy) * width + ix]; }
  float& at(int ix, int iy) { return data[size_t(iy) * width + ix]; }

  // Bilinear sample at continuous pixel coordinate (x, y); pixel centers at
  // half-integers. Outside the image returns 0.
  double sample(double x, double y) const;

  // Catmull-Rom bicubic sample, same coordinate convention, clamped to >= 0.
  double sample_cubic(double x, double y) const;
};

// H x W x 3 action image: ch[0] position heatmap, ch[1] normal heatmap,
// ch[2] up heatmap with the gripper constant written into the background.
struct ActionFrame {
  int width = 0, height = 0;
  Heatmap ch[3];

  ActionFrame() = default;
  ActionFrame(int w, int h) : width(w), height(h), ch{{w, h}, {w, h}, {w, h}} {}
};

using ActionVideo = std::vector<ActionFrame>;        // one view, T frames
using MultiViewVideo = std::vector<ActionVideo>;     // V views

struct EncoderParams {
  double ell = 0.1;        // semantic point offset, meters
  double sigma_rel = 0.05; // Gaussian sigma relative to min(width, height)
  double threshold = 0.25; // blue-channel gripper cutoff

  void validate() const;
  double sigma_px(int width, int height) const;
};

SemanticPoints semantic_points(const Action7& a, double ell);

// Amplitude-1 Gaussian centered at sub-pixel u; value 1 when u coincides
// with a pixel center.
Heatmap render_gaussian(const Vec2& u, double sigma_px, int width, int height);

// Throws EncodeError naming the semantic point if any of the three points
// falls behind the camera.
ActionFrame encode_frame(const Action7& a, const CameraView& cam, const EncoderParams& params);

// out[v][t] = encode_frame(traj[t], rig[v].at(t), params).
MultiViewVideo encode_video(const std::vector<Action7>& traj, const Rig& rig,
                            const EncoderParams& params);

}  // namespace actimg
