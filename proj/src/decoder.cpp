#include "actimg/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace actimg {

namespace {

// Slack on the background threshold so that a g = 1 background, which sits
// exactly at the threshold, survives low-bit storage. 8-bit rounding pushes
// 0.25 up to 64/255 ~ 0.2510, so anything smaller than ~1e-3 is not enough.
constexpr double kThresholdSlack = 2e-3;

// Blue-channel preprocessing: everything at or below the threshold is
// gripper background, not heatmap mass, and must not bias the centroid.
Heatmap strip_background(const Heatmap& ch3, double threshold) {
  Heatmap out = ch3;
  float thr = float(threshold + kThresholdSlack);
  for (float& v : out.data)
    if (!(v > thr)) v = 0.f;
  return out;
}

float peak(const Heatmap& h) {
  float m = 0.f;
  for (float v : h.data) m = std::max(m, v);
  return m;
}

// Ray parameter interval inside an axis-aligned box (slab test).
bool ray_box_range(const Ray& ray, const WorkspaceBox& box, double& s0, double& s1) {
  s0 = 0.0;
  s1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double o = ray.origin[a], d = ray.direction[a];
    if (std::abs(d) < 1e-12) {
      if (o < box.min[a] || o > box.max[a]) return false;
      continue;
    }
    double t0 = (box.min[a] - o) / d, t1 = (box.max[a] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    s0 = std::max(s0, t0);
    s1 = std::min(s1, t1);
  }
  return s0 < s1;
}

}  // namespace

void DecoderParams::validate() const {
  if (!(near > 0 && near < far)) throw ValidationError("need 0 < near < far");
  if (k < 2) throw ValidationError("need k >= 2 ray samples");
  if (!(threshold > 0 && threshold < 1)) throw ValidationError("threshold must lie in (0, 1)");
}

double decode_gripper(const std::vector<const ActionFrame*>& frames, double threshold) {
  // Background is the complement of the encoder's strict > threshold blob
  // branch; with < the g = 1 background (exactly at the threshold) would be
  // invisible. The slack lets quantized backgrounds through, but also admits
  // a thin blob ring just above the threshold, so take the median rather
  // than the mean: the flat background dominates the set.
  float thr = float(threshold + kThresholdSlack);
  std::vector<float> bg;
  for (const ActionFrame* f : frames)
    for (float v : f->ch[2].data)
      if (!(v > thr)) bg.push_back(v);
  if (bg.empty()) throw NoBackgroundError("no below-threshold pixel in any view's blue channel");
  size_t n = bg.size();
  std::nth_element(bg.begin(), bg.begin() + n / 2, bg.end());
  double med = bg[n / 2];
  if (n % 2 == 0) {
    std::nth_element(bg.begin(), bg.begin() + n / 2 - 1, bg.begin() + n / 2);
    med = 0.5 * (med + bg[n / 2 - 1]);
  }
  return std::clamp(med / threshold, 0.0, 1.0);
}

Vec2 heatmap_centroid(const Heatmap& h) {
  // Only pixels above a fraction of the peak contribute. A plain centroid
  // integrates sensor/storage noise over the whole image, which drags the
  // estimate toward the image center; the blob itself lives near the peak.
  float floor_v = 0.1f * peak(h);
  if (!(floor_v > 0)) throw EmptyHeatmapError("heatmap has no mass, centroid undefined");
  double total = 0.0, sx = 0.0, sy = 0.0;
  size_t idx = 0;
  for (int iy = 0; iy < h.height; ++iy) {
    for (int ix = 0; ix < h.width; ++ix) {
      double v = h.data[idx++];
      if (v < floor_v) continue;
      total += v;
      sx += v * (ix + 0.5);
      sy += v * (iy + 0.5);
    }
  }
  if (!(total > 0)) throw EmptyHeatmapError("heatmap has no mass, centroid undefined");
  return {sx / total, sy / total};
}

LiftResult lift_point(const CameraView& main_cam, const Heatmap& main_map,
                      const std::vector<const CameraView*>& side_cams,
                      const std::vector<const Heatmap*>& side_maps, const DecoderParams& params) {
  params.validate();
  if (side_cams.empty() || side_cams.size() != side_maps.size())
    throw ShapeError("lift_point: need at least one side view with matching heatmaps");

  Vec2 anchor = heatmap_centroid(main_map);
  Ray ray = unproject_ray(main_cam, anchor);

  double near = params.near, far = params.far;
  if (params.workspace) {
    double s0, s1;
    if (ray_box_range(ray, *params.workspace, s0, s1)) {
      near = std::max(near, s0);
      far = std::min(far, s1);
      if (!(near < far)) {
        near = params.near;
        far = params.far;
      }
    }
  }

  std::vector<Vec3> candidates = sample_ray(ray, near, far, params.k);
  double best = 0.0;
  int best_idx = -1;
  for (int i = 0; i < int(candidates.size()); ++i) {
    double score = 0.0;
    for (size_t s = 0; s < side_cams.size(); ++s) {
      try {
        Vec2 u = project(*side_cams[s], candidates[i]);
        score += side_maps[s]->sample_cubic(u.x(), u.y());
      } catch (const BehindCameraError&) {
        // behind a side camera contributes nothing
      }
    }
    if (score > best) {  // strict: ties keep the smallest depth index
      best = score;
      best_idx = i;
    }
  }
  if (best_idx < 0) throw NoCorrespondenceError("no ray candidate scored above zero in any side view");
  return {candidates[best_idx], best / double(side_cams.size()), best_idx + 1};
}

DecodedAction decode_frame(const std::vector<const ActionFrame*>& frames,
                           const std::vector<CameraView>& cams, const DecoderParams& params) {
  params.validate();
  if (frames.size() < 2 || frames.size() != cams.size())
    throw ValidationError("decode_frame: need >= 2 views with matching cameras");
  const size_t v_count = frames.size();

  // Per-point processed heatmaps: channels 0/1 as-is, channel 2 stripped.
  std::vector<std::vector<Heatmap>> maps(3);
  for (size_t v = 0; v < v_count; ++v) {
    maps[0].push_back(frames[v]->ch[0]);
    maps[1].push_back(frames[v]->ch[1]);
    maps[2].push_back(strip_background(frames[v]->ch[2], params.threshold));
  }

  const char* names[3] = {"pos", "normal", "up"};
  Vec3 pts[3];
  DecodedAction out;
  for (int p = 0; p < 3; ++p) {
    // Main view = highest peak; every other view scores candidates.
    size_t main_v = 0;
    float best_peak = -1.f;
    for (size_t v = 0; v < v_count; ++v) {
      float pk = peak(maps[p][v]);
      if (pk > best_peak) {
        best_peak = pk;
        main_v = v;
      }
    }
    std::vector<const CameraView*> side_cams;
    std::vector<const Heatmap*> side_maps;
    for (size_t v = 0; v < v_count; ++v) {
      if (v == main_v) continue;
      side_cams.push_back(&cams[v]);
      side_maps.push_back(&maps[p][v]);
    }
    try {
      LiftResult lr = lift_point(cams[main_v], maps[p][main_v], side_cams, side_maps, params);
      pts[p] = lr.point;
      out.residual[p] = lr.residual;
      out.depth_index[p] = lr.depth_index;
    } catch (const CodecError& e) {
      throw CodecError(std::string("lift failed for point '") + names[p] + "': " + e.what());
    }
  }

  Vec3 dx = pts[2] - pts[0];  // up - pos
  Vec3 dz = pts[0] - pts[1];  // pos - normal
  // Collapsed points give no usable orientation.
  double min_sep = 0.1 * params.ell;
  if (dx.norm() < min_sep || dz.norm() < min_sep)
    throw CodecError("degenerate frame: semantic points collapsed");
  Vec3 ex = dx.normalized();
  Vec3 ez = dz.normalized();
  Vec3 ey = ez.cross(ex);
  Mat3 raw;
  raw.col(0) = ex;
  raw.col(1) = ey;
  raw.col(2) = ez;
  out.action.orientation = Rotation3::orthonormalized(raw);
  out.action.position = pts[0];
  out.action.gripper = decode_gripper(frames, params.threshold);
  return out;
}

VideoDecodeResult decode_video(const MultiViewVideo& videos, const Rig& rig,
                               const DecoderParams& params, bool fail_fast) {
  if (videos.empty() || videos.size() != rig.size())
    throw ShapeError("decode_video: view count does not match rig");
  size_t t_count = videos[0].size();
  for (const auto& v : videos)
    if (v.size() != t_count) throw ShapeError("decode_video: views have unequal frame counts");

  VideoDecodeResult result;
  result.steps.resize(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    std::vector<const ActionFrame*> frames;
    std::vector<CameraView> cams;
    for (size_t v = 0; v < videos.size(); ++v) {
      frames.push_back(&videos[v][t]);
      cams.push_back(rig[v].at(int(t)));
    }
    try {
      result.steps[t] = decode_frame(frames, cams, params);
    } catch (const CodecError& e) {
      if (fail_fast) throw CodecError("t=" + std::to_string(t) + ": " + e.what());
      result.failures.emplace_back(int(t), e.what());
    }
  }
  return result;
}

}  // namespace actimg
