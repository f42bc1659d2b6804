#include "actimg/harness.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace actimg {

namespace {

Vec3 catmull_rom(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, double u) {
  double u2 = u * u, u3 = u2 * u;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3);
}

Vec3 clamp_box(const Vec3& p, const WorkspaceBox& box) {
  return {std::clamp(p.x(), box.min.x(), box.max.x()), std::clamp(p.y(), box.min.y(), box.max.y()),
          std::clamp(p.z(), box.min.z(), box.max.z())};
}

}  // namespace

Aggregate aggregate(std::vector<double> values) {
  Aggregate a;
  if (values.empty()) return a;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / values.size();
  size_t n = values.size();
  a.median = (n % 2) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  a.p95 = values[std::min(n - 1, size_t(0.95 * (n - 1)))];
  return a;
}

void NoiseSpec::validate() const {
  if (gaussian_sigma < 0) throw ValidationError("gaussian_sigma must be >= 0");
  if (quantize_bits != 0 && quantize_bits != 8 && quantize_bits != 16)
    throw ValidationError("quantize_bits must be 0, 8 or 16");
  if (dropout < 0 || dropout > 1) throw ValidationError("dropout must lie in [0, 1]");
}

std::vector<Action7> gen_trajectory(uint64_t seed, int t_steps, const WorkspaceBox& box,
                                    TrajectoryStyle style) {
  if (t_steps < 1) throw ValidationError("t_steps must be >= 1");
  if (!((box.max - box.min).minCoeff() > 0)) throw ValidationError("workspace box is degenerate");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto rand_point = [&] {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = box.min[a] + unit(rng) * (box.max[a] - box.min[a]);
    return p;
  };
  auto rand_quat = [&] {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q;
  };

  int n_keys = std::max(4, t_steps / 10 + 2);
  std::vector<Vec3> keys(n_keys);
  std::vector<Eigen::Quaterniond> quats(n_keys);
  for (int i = 0; i < n_keys; ++i) {
    keys[i] = rand_point();
    quats[i] = rand_quat();
  }

  // Gripper: toggle points for binary style, random sine phase for continuous.
  double toggle_at = unit(rng);
  double phase = unit(rng) * 2 * M_PI;
  double g0 = unit(rng) < 0.5 ? 0.0 : 1.0;

  std::vector<Action7> traj(t_steps);
  for (int t = 0; t < t_steps; ++t) {
    double s = (t_steps == 1) ? 0.0 : double(t) / (t_steps - 1);
    double seg_f = s * (n_keys - 1);
    int seg = std::min(n_keys - 2, int(seg_f));
    double u = seg_f - seg;
    const Vec3& p0 = keys[std::max(0, seg - 1)];
    const Vec3& p1 = keys[seg];
    const Vec3& p2 = keys[seg + 1];
    const Vec3& p3 = keys[std::min(n_keys - 1, seg + 2)];
    traj[t].position = clamp_box(catmull_rom(p0, p1, p2, p3, u), box);
    Eigen::Quaterniond q = quats[seg].slerp(u, quats[seg + 1]);
    traj[t].orientation = Rotation3::from_matrix(q.toRotationMatrix());
    if (style == TrajectoryStyle::BinaryGripper) {
      traj[t].gripper = (s < toggle_at) ? g0 : 1.0 - g0;
    } else {
      traj[t].gripper = 0.5 + 0.5 * std::sin(phase + 4.0 * s);
    }
  }
  return traj;
}

WorkspaceBox default_workspace() {
  return {Vec3(-0.15, -0.15, -0.15), Vec3(0.15, 0.15, 0.15)};
}

Rig default_rig(const WorkspaceBox& box, int views, int width, int height) {
  Vec3 target = 0.5 * (box.min + box.max);
  double radius = 1.2;
  double elev = 15.0 * M_PI / 180.0;
  Rig rig;
  for (int v = 0; v < views; ++v) {
    // Spread views symmetrically in azimuth; two views land at +-30 deg.
    double az = (views == 1) ? 0.0 : (-30.0 + 60.0 * v / (views - 1)) * M_PI / 180.0;
    Vec3 center = target + radius * Vec3(std::sin(az) * std::cos(elev), -std::cos(az) * std::cos(elev),
                                         std::sin(elev));
    Vec3 zc = (target - center).normalized();  // camera forward
    Vec3 up(0, 0, 1);
    Vec3 xc = up.cross(zc).normalized();
    Vec3 yc = zc.cross(xc);
    Mat3 r;
    r.row(0) = xc;
    r.row(1) = yc;
    r.row(2) = zc;

    CameraTrack track;
    track.view_id = "view" + std::to_string(v);
    track.width = width;
    track.height = height;
    track.fx = track.fy = double(std::min(width, height));
    track.cx = width / 2.0;
    track.cy = height / 2.0;
    CameraPose pose;
    pose.time = 0;
    pose.rotation = Rotation3::from_matrix(r);
    pose.translation = -(r * center);
    track.poses.push_back(pose);
    rig.push_back(track);
  }
  return rig;
}

double angular_error_deg(const Rotation3& a, const Rotation3& b) {
  double c = ((a.matrix().transpose() * b.matrix()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

RoundtripReport roundtrip_eval(const std::vector<Action7>& traj, const Rig& rig,
                             const EncoderParams& enc, const DecoderParams& dec) {
  MultiViewVideo videos = encode_video(traj, rig, enc);
  RoundtripReport rep;
  rep.width = rig.empty() ? 0 : rig[0].width;
  rep.height = rig.empty() ? 0 : rig[0].height;
  rep.k = dec.k;
  rep.sigma_rel = enc.sigma_rel;
  rep.ell = enc.ell;
  rep.views = int(rig.size());

  VideoDecodeResult decoded = decode_video(videos, rig, dec, false);
  std::vector<double> pos_errs, ang_errs, grip_errs, errs2d;
  for (size_t t = 0; t < traj.size(); ++t) {
    StepError se;
    se.t = int(t);
    if (!decoded.steps[t]) {
      for (auto& [ft, msg] : decoded.failures)
        if (ft == int(t)) se.failure = msg;
      rep.failed++;
      rep.steps.push_back(se);
      continue;
    }
    const DecodedAction& da = *decoded.steps[t];
    se.ok = true;
    se.pos_err = (da.action.position - traj[t].position).norm();
    se.ang_err_deg = angular_error_deg(da.action.orientation, traj[t].orientation);
    se.grip_err = std::abs(da.action.gripper - traj[t].gripper);

    double px_sum = 0;
    int px_n = 0;
    for (const auto& track : rig) {
      CameraView cam = track.at(int(t));
      try {
        Vec2 u_true = project(cam, traj[t].position);
        Vec2 u_dec = project(cam, da.action.position);
        px_sum += (u_true - u_dec).norm();
        ++px_n;
      } catch (const BehindCameraError&) {
      }
    }
    se.err_2d_px = px_n ? px_sum / px_n : 0.0;

    pos_errs.push_back(se.pos_err);
    ang_errs.push_back(se.ang_err_deg);
    grip_errs.push_back(se.grip_err);
    errs2d.push_back(se.err_2d_px);
    rep.decoded++;
    rep.steps.push_back(se);
  }
  rep.pos = aggregate(pos_errs);
  rep.ang_deg = aggregate(ang_errs);
  rep.grip = aggregate(grip_errs);
  double s2 = 0, s3 = 0;
  for (double v : errs2d) s2 += v;
  for (double v : pos_errs) s3 += v;
  rep.err_2d_px = errs2d.empty() ? 0.0 : s2 / errs2d.size();
  rep.err_3d_m = pos_errs.empty() ? 0.0 : s3 / pos_errs.size();
  return rep;
}

SweepResult discretization_sweep(const std::vector<Action7>& traj, const WorkspaceBox& box,
                                 const std::vector<int>& resolutions, const std::vector<int>& ks,
                                 const EncoderParams& enc, const DecoderParams& dec_base) {
  if (resolutions.empty() || ks.empty()) throw ValidationError("sweep lists must be non-empty");
  SweepResult result;
  for (int res : resolutions) {
    Rig rig = default_rig(box, 2, res, res);
    for (int k : ks) {
      DecoderParams dec = dec_base;
      dec.k = k;
      if (!dec.workspace) {
        // Tighten per-ray depth bounds to the workspace, inflated by ell so
        // the up/normal points stay inside.
        Vec3 pad = Vec3::Constant(enc.ell);
        dec.workspace = WorkspaceBox{box.min - pad, box.max + pad};
      }
      SweepCell cell;
      cell.resolution = res;
      cell.k = k;
      cell.report = roundtrip_eval(traj, rig, enc, dec);
      result.cells.push_back(std::move(cell));
    }
  }
  // Monotonicity over adjacent cells along each axis.
  auto median_at = [&](size_t ri, size_t ki) {
    return result.cells[ri * ks.size() + ki].report.pos.median;
  };
  int pairs = 0, mono = 0;
  for (size_t ri = 0; ri < resolutions.size(); ++ri)
    for (size_t ki = 0; ki + 1 < ks.size(); ++ki) {
      ++pairs;
      if (median_at(ri, ki + 1) <= median_at(ri, ki)) ++mono;
    }
  for (size_t ki = 0; ki < ks.size(); ++ki)
    for (size_t ri = 0; ri + 1 < resolutions.size(); ++ri) {
      ++pairs;
      if (median_at(ri + 1, ki) <= median_at(ri, ki)) ++mono;
    }
  result.monotone_fraction = pairs ? double(mono) / pairs : 1.0;
  return result;
}

MultiViewVideo perturb(const MultiViewVideo& videos, const NoiseSpec& spec, uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.gaussian_sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MultiViewVideo out = videos;
  for (size_t v = 0; v < out.size(); ++v) {
    for (size_t t = 0; t < out[v].size(); ++t) {
      ActionFrame& f = out[v][t];
      if (spec.dropout > 0 && unit(rng) < spec.dropout) {
        for (auto& ch : f.ch) std::fill(ch.data.begin(), ch.data.end(), 0.f);
        continue;
      }
      if (spec.gaussian_sigma > 0)
        for (auto& ch : f.ch)
          for (float& x : ch.data) x = float(std::clamp(x + noise(rng), 0.0, 1.0));
      if (spec.quantize_bits > 0) {
        double levels = double((1u << spec.quantize_bits) - 1u);
        for (auto& ch : f.ch)
          for (float& x : ch.data) x = float(std::round(double(x) * levels) / levels);
      }
      for (const auto& rect : spec.occlusions) {
        if (rect.view != int(v)) continue;
        for (int iy = std::max(0, rect.y); iy < std::min(f.height, rect.y + rect.h); ++iy)
          for (int ix = std::max(0, rect.x); ix < std::min(f.width, rect.x + rect.w); ++ix)
            for (auto& ch : f.ch) ch.at(ix, iy) = 0.f;
      }
    }
  }
  return out;
}

}  // namespace actimg
