#pragma once

#include <optional>
#include <vector>

#include "actimg/encoder.hpp"

namespace actimg {

// Axis-aligned workspace box; when present, per-ray near/far planes are
// tightened to the ray's intersection with the box.
struct WorkspaceBox {
  Vec3 min;
  Vec3 max;
};

struct DecoderParams {
  double near = 0.1;   // meters
  double far = 2.0;    // meters
  int k = 512;         // depth samples per ray
  double threshold = 0.25;  // shared with the encoder
  double ell = 0.1;         // expected semantic point offset, for degeneracy checks
  std::optional<WorkspaceBox> workspace;

  void validate() const;
};

struct LiftResult {
  Vec3 point;
  double residual = 0.0;  // winning side-view score, in [0, 1] per view
  int depth_index = 0;    // 1-based index of the selected candidate
};

struct DecodedAction {
  Action7 action;
  double residual[3] = {0, 0, 0};   // per semantic point (pos, normal, up)
  int depth_index[3] = {0, 0, 0};
};

// g_hat = mean of below-threshold blue-channel pixels across views, scaled
// by 1/threshold and clamped to [0, 1].
double decode_gripper(const std::vector<const ActionFrame*>& frames, double threshold);

// Intensity-weighted centroid over pixel centers (ix + 0.5, iy + 0.5).
Vec2 heatmap_centroid(const Heatmap& h);

// Cast a ray through the main-view centroid and pick the depth candidate
// whose projection draws the highest summed response from the side views.
// Candidates behind a side camera or outside its image score 0 there.
LiftResult lift_point(const CameraView& main_cam, const Heatmap& main_map,
                      const std::vector<const CameraView*>& side_cams,
                      const std::vector<const Heatmap*>& side_maps, const DecoderParams& params);

// Full per-frame decode: three independent lifts, orientation reassembly
// with polar re-orthonormalization, gripper readout. Needs >= 2 views.
// Per semantic point the view with the highest heatmap peak is the main view.
DecodedAction decode_frame(const std::vector<const ActionFrame*>& frames,
                           const std::vector<CameraView>& cams, const DecoderParams& params);

struct VideoDecodeResult {
  std::vector<std::optional<DecodedAction>> steps;
  std::vector<std::pair<int, std::string>> failures;  // (t, message)
};

// fail_fast rethrows the first per-frame error; otherwise failures are
// collected and the corresponding step left empty.
VideoDecodeResult decode_video(const MultiViewVideo& videos, const Rig& rig,
                               const DecoderParams& params, bool fail_fast = false);

}  // namespace actimg
