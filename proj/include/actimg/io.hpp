#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "actimg/decoder.hpp"
#include "actimg/encoder.hpp"
#include "actimg/harness.hpp"
#include "actimg/packing.hpp"

namespace actimg {

enum class FrameFormat { RawF32, Png16 };

FrameFormat parse_frame_format(const std::string& s);

// Trajectory JSON:
//   {"orientation_format": "euler_xyz" | "matrix",
//    "steps": [{"t": int, "position": [3], "orientation": [3]|[9], "gripper": g}]}
// Steps are sorted by t on load; orientations normalized to rotation matrices.
std::vector<Action7> load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::vector<Action7>& traj, const std::filesystem::path& path,
                     const std::string& orientation_format = "euler_xyz");

// Camera rig JSON:
//   {"views": [{"view_id", "width", "height", "fx", "fy", "cx", "cy",
//               "frames": [{"time", "rotation": [9 row-major], "translation": [3]}]}]}
Rig load_rig(const std::filesystem::path& path);
void save_rig(const Rig& rig, const std::filesystem::path& path);

// Frame storage. raw_f32: one container file per view,
//   magic "ACTIMGF0" + u32 {width, height, channels, T} + float32 planes
//   (frame-major, channel-plane within frame), little-endian.
// png16: one 16-bit RGB PNG per (view, t), value = round(x * 65535),
//   R/G/B = channels 1/2/3, under <dir>/<view_id>/frame_%05d.png.
// Either layout carries a frames.json manifest naming views and files.
void save_frames(const MultiViewVideo& videos, const Rig& rig, const std::filesystem::path& dir,
                 FrameFormat format);
MultiViewVideo load_frames(const std::filesystem::path& dir);

// Write-to-temp-then-rename; partial files never land at the final path.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// Per-step decode confidence sidecar (residuals and depth indices).
void save_confidence(const VideoDecodeResult& result, const std::filesystem::path& path);

// Token-packing shard for trainer interop, little-endian:
//   magic "AIPACK01"
//   u32 views, time, h, w, channels, strategy
//   u64 seed
//   mask bytes, one per token in packed order (0 visible, 1 predicted);
//     VideoOnly shards carry video-stream tokens only
//   u32 index-map entries: packed flat position for every (stream, view, t,
//     y, x) token enumerated stream-major (video first), then view, t, y, x
struct PackShard {
  TokenLayout layout;
  MaskStrategy strategy = MaskStrategy::JointGen;
  uint64_t seed = 0;
  Mask mask;
  std::vector<uint32_t> index_map;
};

PackShard make_pack_shard(const TokenLayout& layout, MaskStrategy strategy, uint64_t seed);
void save_pack_shard(const PackShard& shard, const std::filesystem::path& path);
PackShard load_pack_shard(const std::filesystem::path& path);

}  // namespace actimg
