#include "actimg/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

namespace actimg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kRawMagic[8] = {'A', 'C', 'T', 'I', 'M', 'G', 'F', '0'};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

double finite_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ValidationError(ctx + ": expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(ctx + ": non-finite value");
  return v;
}

Vec3 read_vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(ctx + ": expected 3 numbers");
  return {finite_number(j[0], ctx), finite_number(j[1], ctx), finite_number(j[2], ctx)};
}

Mat3 read_mat3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 9) throw ValidationError(ctx + ": expected 9 row-major numbers");
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = finite_number(j[i], ctx);
  return m;
}

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                        (unsigned char)(v >> 24)};
  out.write(reinterpret_cast<char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

void commit(const fs::path& tmp, const fs::path& final_path) {
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ValidationError("cannot move " + tmp.string() + " to " + final_path.string() + ": " +
                          ec.message());
  }
}

void save_raw_view(const ActionVideo& video, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(kRawMagic, 8);
    int w = video.empty() ? 0 : video[0].width;
    int h = video.empty() ? 0 : video[0].height;
    write_u32(out, uint32_t(w));
    write_u32(out, uint32_t(h));
    write_u32(out, 3);
    write_u32(out, uint32_t(video.size()));
    for (const auto& frame : video)
      for (const auto& ch : frame.ch)
        out.write(reinterpret_cast<const char*>(ch.data.data()), ch.data.size() * sizeof(float));
    if (!out) throw ValidationError("write failed: " + tmp.string());
  }
  commit(tmp, path);
}

ActionVideo load_raw_view(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kRawMagic, 8) != 0)
    throw ValidationError(path.string() + ": not a raw frame container");
  uint32_t w = read_u32(in), h = read_u32(in), c = read_u32(in), t = read_u32(in);
  if (c != 3) throw ValidationError(path.string() + ": expected 3 channels");
  ActionVideo video;
  video.reserve(t);
  for (uint32_t i = 0; i < t; ++i) {
    ActionFrame frame{int(w), int(h)};
    for (auto& ch : frame.ch)
      in.read(reinterpret_cast<char*>(ch.data.data()), ch.data.size() * sizeof(float));
    if (!in) throw ValidationError(path.string() + ": truncated container");
    video.push_back(std::move(frame));
  }
  return video;
}

void save_png16_frame(const ActionFrame& frame, const fs::path& path) {
  // OpenCV stores pixels BGR, so plane order is (ch3, ch2, ch1).
  cv::Mat img(frame.height, frame.width, CV_16UC3);
  for (int iy = 0; iy < frame.height; ++iy) {
    auto* row = img.ptr<cv::Vec3w>(iy);
    for (int ix = 0; ix < frame.width; ++ix) {
      row[ix][0] = uint16_t(std::lround(double(frame.ch[2].at(ix, iy)) * 65535.0));
      row[ix][1] = uint16_t(std::lround(double(frame.ch[1].at(ix, iy)) * 65535.0));
      row[ix][2] = uint16_t(std::lround(double(frame.ch[0].at(ix, iy)) * 65535.0));
    }
  }
  fs::path tmp = path;
  tmp += ".tmp.png";
  if (!cv::imwrite(tmp.string(), img)) throw ValidationError("cannot write " + tmp.string());
  commit(tmp, path);
}

ActionFrame load_png16_frame(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw ValidationError("cannot read " + path.string());
  if (img.type() != CV_16UC3) throw ValidationError(path.string() + ": expected 16-bit RGB PNG");
  ActionFrame frame(img.cols, img.rows);
  for (int iy = 0; iy < img.rows; ++iy) {
    const auto* row = img.ptr<cv::Vec3w>(iy);
    for (int ix = 0; ix < img.cols; ++ix) {
      frame.ch[2].at(ix, iy) = float(row[ix][0] / 65535.0);
      frame.ch[1].at(ix, iy) = float(row[ix][1] / 65535.0);
      frame.ch[0].at(ix, iy) = float(row[ix][2] / 65535.0);
    }
  }
  return frame;
}

}  // namespace

FrameFormat parse_frame_format(const std::string& s) {
  if (s == "raw_f32") return FrameFormat::RawF32;
  if (s == "png16") return FrameFormat::Png16;
  throw ValidationError("unknown frame format '" + s + "' (expected raw_f32 or png16)");
}

std::vector<Action7> load_trajectory(const fs::path& path) {
  json j = read_json(path);
  std::string fmt = j.value("orientation_format", "");
  if (fmt != "euler_xyz" && fmt != "matrix")
    throw ValidationError(path.string() + ": unknown orientation_format '" + fmt + "'");
  if (!j.contains("steps") || !j["steps"].is_array())
    throw ValidationError(path.string() + ": missing steps array");

  struct TimedAction {
    int t;
    Action7 a;
  };
  std::vector<TimedAction> steps;
  int idx = 0;
  for (const auto& s : j["steps"]) {
    std::string ctx = path.string() + ": step " + std::to_string(idx);
    TimedAction ta;
    ta.t = s.contains("t") ? int(finite_number(s["t"], ctx + " t")) : idx;
    ta.a.position = read_vec3(s.at("position"), ctx + " position");
    const auto& o = s.at("orientation");
    if (fmt == "euler_xyz") {
      ta.a.orientation = Rotation3::from_euler(read_vec3(o, ctx + " orientation"));
    } else {
      try {
        ta.a.orientation = Rotation3::from_matrix(read_mat3(o, ctx + " orientation"));
      } catch (const ValidationError& e) {
        throw ValidationError(ctx + " orientation: " + e.what());
      }
    }
    ta.a.gripper = finite_number(s.at("gripper"), ctx + " gripper");
    if (ta.a.gripper < 0.0 || ta.a.gripper > 1.0)
      throw ValidationError(ctx + ": gripper " + std::to_string(ta.a.gripper) +
                            " outside [0, 1]");
    steps.push_back(ta);
    ++idx;
  }
  std::stable_sort(steps.begin(), steps.end(),
                   [](const TimedAction& a, const TimedAction& b) { return a.t < b.t; });
  std::vector<Action7> traj;
  traj.reserve(steps.size());
  for (auto& s : steps) traj.push_back(s.a);
  return traj;
}

void save_trajectory(const std::vector<Action7>& traj, const fs::path& path,
                     const std::string& orientation_format) {
  json j;
  j["orientation_format"] = orientation_format;
  j["steps"] = json::array();
  for (size_t t = 0; t < traj.size(); ++t) {
    json s;
    s["t"] = int(t);
    s["position"] = {traj[t].position.x(), traj[t].position.y(), traj[t].position.z()};
    if (orientation_format == "euler_xyz") {
      Vec3 e = traj[t].orientation.to_euler();
      s["orientation"] = {e.x(), e.y(), e.z()};
    } else if (orientation_format == "matrix") {
      const Mat3& m = traj[t].orientation.matrix();
      json o = json::array();
      for (int i = 0; i < 9; ++i) o.push_back(m(i / 3, i % 3));
      s["orientation"] = o;
    } else {
      throw ValidationError("unknown orientation_format '" + orientation_format + "'");
    }
    s["gripper"] = traj[t].gripper;
    j["steps"].push_back(s);
  }
  atomic_write(path, j.dump(2) + "\n");
}

Rig load_rig(const fs::path& path) {
  json j = read_json(path);
  if (!j.contains("views") || !j["views"].is_array() || j["views"].empty())
    throw ValidationError(path.string() + ": missing views array");
  Rig rig;
  for (const auto& v : j["views"]) {
    CameraTrack track;
    track.view_id = v.value("view_id", "view" + std::to_string(rig.size()));
    std::string ctx = path.string() + ": view " + track.view_id;
    track.width = int(finite_number(v.at("width"), ctx + " width"));
    track.height = int(finite_number(v.at("height"), ctx + " height"));
    track.fx = finite_number(v.at("fx"), ctx + " fx");
    track.fy = finite_number(v.at("fy"), ctx + " fy");
    track.cx = finite_number(v.at("cx"), ctx + " cx");
    track.cy = finite_number(v.at("cy"), ctx + " cy");
    if (!v.contains("frames") || !v["frames"].is_array() || v["frames"].empty())
      throw ValidationError(ctx + ": missing frames array");
    for (const auto& f : v["frames"]) {
      CameraPose pose;
      pose.time = f.contains("time") ? int(finite_number(f["time"], ctx + " time")) : 0;
      try {
        pose.rotation = Rotation3::from_matrix(read_mat3(f.at("rotation"), ctx + " rotation"));
      } catch (const ValidationError& e) {
        throw ValidationError(ctx + " rotation: " + e.what());
      }
      pose.translation = read_vec3(f.at("translation"), ctx + " translation");
      track.poses.push_back(pose);
    }
    track.at(track.poses.front().time).validate();
    rig.push_back(std::move(track));
  }
  return rig;
}

void save_rig(const Rig& rig, const fs::path& path) {
  json j;
  j["views"] = json::array();
  for (const auto& track : rig) {
    json v;
    v["view_id"] = track.view_id;
    v["width"] = track.width;
    v["height"] = track.height;
    v["fx"] = track.fx;
    v["fy"] = track.fy;
    v["cx"] = track.cx;
    v["cy"] = track.cy;
    v["frames"] = json::array();
    for (const auto& pose : track.poses) {
      json f;
      f["time"] = pose.time;
      json r = json::array();
      for (int i = 0; i < 9; ++i) r.push_back(pose.rotation.matrix()(i / 3, i % 3));
      f["rotation"] = r;
      f["translation"] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
      v["frames"].push_back(f);
    }
    j["views"].push_back(v);
  }
  atomic_write(path, j.dump(2) + "\n");
}

void save_frames(const MultiViewVideo& videos, const Rig& rig, const fs::path& dir,
                 FrameFormat format) {
  if (videos.size() != rig.size()) throw ShapeError("save_frames: view count does not match rig");
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = format == FrameFormat::RawF32 ? "raw_f32" : "png16";
  manifest["views"] = json::array();
  for (size_t v = 0; v < videos.size(); ++v) {
    json entry;
    entry["view_id"] = rig[v].view_id;
    entry["frames"] = int(videos[v].size());
    if (format == FrameFormat::RawF32) {
      std::string file = rig[v].view_id + ".aif";
      save_raw_view(videos[v], dir / file);
      entry["file"] = file;
    } else {
      fs::path view_dir = dir / rig[v].view_id;
      fs::create_directories(view_dir);
      for (size_t t = 0; t < videos[v].size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05zu.png", t);
        save_png16_frame(videos[v][t], view_dir / name);
      }
      entry["dir"] = rig[v].view_id;
    }
    manifest["views"].push_back(entry);
  }
  atomic_write(dir / "frames.json", manifest.dump(2) + "\n");
}

MultiViewVideo load_frames(const fs::path& dir) {
  json manifest = read_json(dir / "frames.json");
  std::string fmt = manifest.value("format", "");
  FrameFormat format = parse_frame_format(fmt);
  MultiViewVideo videos;
  for (const auto& entry : manifest.at("views")) {
    if (format == FrameFormat::RawF32) {
      videos.push_back(load_raw_view(dir / entry.at("file").get<std::string>()));
    } else {
      int t_count = entry.at("frames").get<int>();
      fs::path view_dir = dir / entry.at("dir").get<std::string>();
      ActionVideo video;
      for (int t = 0; t < t_count; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05d.png", t);
        video.push_back(load_png16_frame(view_dir / name));
      }
      videos.push_back(std::move(video));
    }
  }
  return videos;
}

void atomic_write(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw ValidationError("write failed: " + tmp.string());
  }
  commit(tmp, path);
}

void save_confidence(const VideoDecodeResult& result, const fs::path& path) {
  json j;
  j["steps"] = json::array();
  for (size_t t = 0; t < result.steps.size(); ++t) {
    json s;
    s["t"] = int(t);
    if (result.steps[t]) {
      const DecodedAction& da = *result.steps[t];
      s["ok"] = true;
      s["residual"] = {da.residual[0], da.residual[1], da.residual[2]};
      s["depth_index"] = {da.depth_index[0], da.depth_index[1], da.depth_index[2]};
    } else {
      s["ok"] = false;
    }
    j["steps"].push_back(s);
  }
  for (const auto& [t, msg] : result.failures)
    j["steps"][t]["error"] = msg;
  atomic_write(path, j.dump(2) + "\n");
}

PackShard make_pack_shard(const TokenLayout& layout, MaskStrategy strategy, uint64_t seed) {
  layout.validate();
  PackShard shard;
  shard.layout = layout;
  shard.strategy = strategy;
  shard.seed = seed;
  shard.mask = sample_mask(strategy, layout);

  // Index map enumerates tokens stream-major; PackedSequence::flat_index
  // supplies the packed position.
  PackedSequence ref;
  ref.layout = layout;
  bool with_action = strategy != MaskStrategy::VideoOnly;
  for (int stream = 0; stream < (with_action ? 2 : 1); ++stream)
    for (int v = 0; v < layout.views; ++v)
      for (int t = 0; t < layout.time; ++t)
        for (int y = 0; y < layout.h; ++y)
          for (int x = 0; x < layout.w; ++x)
            shard.index_map.push_back(
                uint32_t(ref.flat_index({Stream(stream), v, t, y, x})));
  return shard;
}

void save_pack_shard(const PackShard& shard, const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write("AIPACK01", 8);
    write_u32(out, uint32_t(shard.layout.views));
    write_u32(out, uint32_t(shard.layout.time));
    write_u32(out, uint32_t(shard.layout.h));
    write_u32(out, uint32_t(shard.layout.w));
    write_u32(out, uint32_t(shard.layout.channels));
    write_u32(out, uint32_t(int(shard.strategy)));
    write_u32(out, uint32_t(shard.seed & 0xffffffffu));
    write_u32(out, uint32_t(shard.seed >> 32));
    for (TokenFlag f : shard.mask.flags) out.put(char(uint8_t(f)));
    for (uint32_t idx : shard.index_map) write_u32(out, idx);
    if (!out) throw ValidationError("write failed: " + tmp.string());
  }
  commit(tmp, path);
}

PackShard load_pack_shard(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "AIPACK01", 8) != 0)
    throw ValidationError(path.string() + ": not a pack shard");
  PackShard shard;
  shard.layout.views = int(read_u32(in));
  shard.layout.time = int(read_u32(in));
  shard.layout.h = int(read_u32(in));
  shard.layout.w = int(read_u32(in));
  shard.layout.channels = int(read_u32(in));
  shard.strategy = MaskStrategy(int(read_u32(in)));
  uint64_t lo = read_u32(in), hi = read_u32(in);
  shard.seed = lo | (hi << 32);
  shard.mask.layout = shard.layout;
  shard.mask.includes_action = shard.strategy != MaskStrategy::VideoOnly;
  size_t streams = shard.mask.includes_action ? 2 : 1;
  size_t n_tokens = shard.layout.tokens_per_stream() * streams;
  shard.mask.flags.resize(n_tokens);
  for (auto& f : shard.mask.flags) f = TokenFlag(uint8_t(in.get()));
  shard.index_map.resize(n_tokens);
  for (auto& idx : shard.index_map) idx = read_u32(in);
  if (!in) throw ValidationError(path.string() + ": truncated shard");
  return shard;
}

}  // namespace actimg
