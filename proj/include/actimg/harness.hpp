#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "actimg/decoder.hpp"
#include "actimg/encoder.hpp"

namespace actimg {

struct StepError {
  int t = 0;
  bool ok = false;
  double pos_err = 0.0;      // meters
  double ang_err_deg = 0.0;  // degrees
  double grip_err = 0.0;
  double err_2d_px = 0.0;    // mean over views, position point
  std::string failure;
};

struct Aggregate {
  double mean = 0.0, median = 0.0, p95 = 0.0;
};

Aggregate aggregate(std::vector<double> values);

struct RoundtripReport {
  std::vector<StepError> steps;
  int decoded = 0, failed = 0;
  Aggregate pos, ang_deg, grip;
  double err_2d_px = 0.0;  // mean over decoded steps and views
  double err_3d_m = 0.0;   // mean position error over decoded steps

  // config echo
  int width = 0, height = 0, k = 0;
  double sigma_rel = 0.0, ell = 0.0;
  int views = 0;
};

struct NoiseSpec {
  double gaussian_sigma = 0.0;  // additive value noise on all channels
  int quantize_bits = 0;        // 8 or 16; 0 = off
  struct Rect {
    int view = 0, x = 0, y = 0, w = 0, h = 0;
  };
  std::vector<Rect> occlusions;  // zero all channels inside the rectangle
  double dropout = 0.0;          // probability a view is zeroed per step

  void validate() const;
};

enum class TrajectoryStyle { BinaryGripper, ContinuousGripper };

// Smooth seeded trajectory inside the box: Catmull-Rom positions through
// random keypoints, slerped orientations, gripper toggles (or a smooth
// openness profile for ContinuousGripper).
std::vector<Action7> gen_trajectory(uint64_t seed, int t_steps, const WorkspaceBox& box,
                                    TrajectoryStyle style = TrajectoryStyle::BinaryGripper);

// Two pinhole cameras at +-30 deg azimuth, radius 1.2 m, 15 deg elevation,
// looking at the workspace center; 512x512 unless overridden.
Rig default_rig(const WorkspaceBox& box, int views = 2, int width = 512, int height = 512);

WorkspaceBox default_workspace();

RoundtripReport roundtrip_eval(const std::vector<Action7>& traj, const Rig& rig,
                               const EncoderParams& enc, const DecoderParams& dec);

struct SweepCell {
  int resolution = 0;
  int k = 0;
  RoundtripReport report;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // resolution-major, k within
  // Fraction of adjacent cell pairs (along either axis) with non-increasing
  // median 3D error.
  double monotone_fraction = 0.0;
};

SweepResult discretization_sweep(const std::vector<Action7>& traj, const WorkspaceBox& box,
                                 const std::vector<int>& resolutions, const std::vector<int>& ks,
                                 const EncoderParams& enc, const DecoderParams& dec_base);

MultiViewVideo perturb(const MultiViewVideo& videos, const NoiseSpec& spec, uint64_t seed);

// Rotation distance in degrees between two orientations.
double angular_error_deg(const Rotation3& a, const Rotation3& b);

}  // namespace actimg
