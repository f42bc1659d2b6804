// Command-line front end: encode, decode, eval, sweep, pack.
#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "actimg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actimg;

namespace {

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_absolute()) return p;
  if (const char* base = std::getenv("ACTIMG_OUT_DIR")) return fs::path(base) / p;
  return p;
}

json report_to_json(const RoundtripReport& rep) {
  json j;
  j["config"] = {{"width", rep.width},   {"height", rep.height}, {"k", rep.k},
                 {"sigma_rel", rep.sigma_rel}, {"ell", rep.ell},  {"views", rep.views}};
  j["decoded"] = rep.decoded;
  j["failed"] = rep.failed;
  auto agg = [](const Aggregate& a) {
    return json{{"mean", a.mean}, {"median", a.median}, {"p95", a.p95}};
  };
  j["pos_err_m"] = agg(rep.pos);
  j["ang_err_deg"] = agg(rep.ang_deg);
  j["grip_err"] = agg(rep.grip);
  j["err_2d_px"] = rep.err_2d_px;
  j["err_3d_m"] = rep.err_3d_m;
  j["steps"] = json::array();
  for (const auto& s : rep.steps) {
    json step{{"t", s.t}, {"ok", s.ok}};
    if (s.ok) {
      step["pos_err_m"] = s.pos_err;
      step["ang_err_deg"] = s.ang_err_deg;
      step["grip_err"] = s.grip_err;
      step["err_2d_px"] = s.err_2d_px;
    } else {
      step["error"] = s.failure;
    }
    j["steps"].push_back(step);
  }
  return j;
}

std::string report_csv_row(const RoundtripReport& rep) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d", rep.width, rep.height,
                rep.k, rep.pos.median, rep.pos.mean, rep.ang_deg.median, rep.err_2d_px,
                rep.err_3d_m, rep.decoded, rep.failed);
  return buf;
}

constexpr const char* kCsvHeader =
    "width,height,k,pos_median_m,pos_mean_m,ang_median_deg,err_2d_px,err_3d_m,decoded,failed";

// Horizontal strip of the three channels of one frame, for eyeballing.
void write_heatmap_strip(const ActionFrame& frame, const fs::path& path) {
  cv::Mat strip(frame.height, frame.width * 3, CV_8UC1);
  for (int c = 0; c < 3; ++c)
    for (int iy = 0; iy < frame.height; ++iy)
      for (int ix = 0; ix < frame.width; ++ix)
        strip.at<uint8_t>(iy, c * frame.width + ix) =
            uint8_t(std::lround(frame.ch[c].at(ix, iy) * 255.0));
  cv::imwrite(path.string(), strip);
}

void write_error_plot(const SweepResult& sweep, const std::vector<int>& resolutions,
                      const std::vector<int>& ks, const fs::path& path) {
  const int w = 640, h = 480, margin = 60;
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(255, 255, 255));
  double max_err = 1e-12;
  for (const auto& c : sweep.cells) max_err = std::max(max_err, c.report.pos.median);
  auto px = [&](size_t ki) {
    return margin + int((w - 2 * margin) * double(ki) / std::max<size_t>(1, ks.size() - 1));
  };
  auto py = [&](double err) { return h - margin - int((h - 2 * margin) * err / max_err); };
  cv::line(img, {margin, h - margin}, {w - margin, h - margin}, {0, 0, 0});
  cv::line(img, {margin, margin}, {margin, h - margin}, {0, 0, 0});
  for (size_t ri = 0; ri < resolutions.size(); ++ri) {
    cv::Scalar color(40 + 70 * ri, 60, 220 - 60 * ri);
    for (size_t ki = 0; ki + 1 < ks.size(); ++ki) {
      double e0 = sweep.cells[ri * ks.size() + ki].report.pos.median;
      double e1 = sweep.cells[ri * ks.size() + ki + 1].report.pos.median;
      cv::line(img, {px(ki), py(e0)}, {px(ki + 1), py(e1)}, color, 2);
    }
    cv::putText(img, std::to_string(resolutions[ri]) + "px",
                {w - margin + 2, py(sweep.cells[ri * ks.size() + ks.size() - 1].report.pos.median)},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, color);
  }
  for (size_t ki = 0; ki < ks.size(); ++ki)
    cv::putText(img, "k=" + std::to_string(ks[ki]), {px(ki) - 15, h - margin + 20},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, {0, 0, 0});
  char top[64];
  std::snprintf(top, sizeof(top), "median 3D err, max %.2g m", max_err);
  cv::putText(img, top, {margin, margin - 10}, cv::FONT_HERSHEY_SIMPLEX, 0.5, {0, 0, 0});
  cv::imwrite(path.string(), img);
}

struct ErrorReporter {
  bool json_errors = false;
  int fail(const std::string& msg) const {
    if (json_errors)
      std::cerr << json{{"error", msg}}.dump() << "\n";
    else
      std::cerr << "error: " << msg << "\n";
    return 1;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view action image codec"};
  app.require_subcommand(1);
  ErrorReporter reporter;
  app.add_flag("--json-errors", reporter.json_errors, "Emit errors as JSON on stderr");
  uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every stochastic path")->capture_default_str();

  // ---- encode ----
  auto* enc_cmd = app.add_subcommand("encode", "Encode a trajectory into action image videos");
  enc_cmd->fallthrough();
  std::string enc_traj, enc_rig, enc_out, enc_format = "raw_f32";
  EncoderParams enc_params;
  enc_cmd->add_option("--traj", enc_traj, "Trajectory JSON")->required();
  enc_cmd->add_option("--rig", enc_rig, "Camera rig JSON")->required();
  enc_cmd->add_option("--out", enc_out, "Output frame directory")->required();
  enc_cmd->add_option("--format", enc_format, "raw_f32 | png16")->capture_default_str();
  enc_cmd->add_option("--sigma", enc_params.sigma_rel, "Gaussian sigma relative to resolution")
      ->capture_default_str();
  enc_cmd->add_option("--ell", enc_params.ell, "Semantic point offset in meters")
      ->capture_default_str();
  enc_cmd->add_option("--threshold", enc_params.threshold, "Gripper channel threshold")
      ->capture_default_str();

  // ---- decode ----
  auto* dec_cmd = app.add_subcommand("decode", "Decode action image videos into a trajectory");
  dec_cmd->fallthrough();
  std::string dec_frames, dec_rig, dec_out, dec_conf;
  DecoderParams dec_params;
  dec_cmd->add_option("--frames", dec_frames, "Frame directory (from encode)")->required();
  dec_cmd->add_option("--rig", dec_rig, "Camera rig JSON")->required();
  dec_cmd->add_option("--out", dec_out, "Output trajectory JSON")->required();
  dec_cmd->add_option("--near", dec_params.near, "Near plane in meters")->capture_default_str();
  dec_cmd->add_option("--far", dec_params.far, "Far plane in meters")->capture_default_str();
  dec_cmd->add_option("--k", dec_params.k, "Ray sample count")->capture_default_str();
  dec_cmd->add_option("--threshold", dec_params.threshold, "Gripper channel threshold")
      ->capture_default_str();
  dec_cmd->add_option("--confidence", dec_conf, "Optional per-step confidence sidecar JSON");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Encode/decode roundtrip evaluation");
  eval_cmd->fallthrough();
  std::string eval_traj, eval_rig, eval_out, eval_csv, eval_plots;
  NoiseSpec noise;
  EncoderParams eval_enc;
  DecoderParams eval_dec;
  eval_cmd->add_option("--traj", eval_traj, "Trajectory JSON")->required();
  eval_cmd->add_option("--rig", eval_rig, "Camera rig JSON")->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON path")->required();
  eval_cmd->add_option("--csv", eval_csv, "Optional CSV table path");
  eval_cmd->add_option("--plots", eval_plots, "Optional directory for heatmap strips");
  eval_cmd->add_option("--k", eval_dec.k, "Ray sample count")->capture_default_str();
  eval_cmd->add_option("--noise-sigma", noise.gaussian_sigma, "Additive heatmap noise sigma");
  eval_cmd->add_option("--quantize-bits", noise.quantize_bits, "Simulated storage depth (8|16)");
  eval_cmd->add_option("--dropout", noise.dropout, "Per-step view dropout probability");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "Discretization sweep over resolution and k");
  sweep_cmd->fallthrough();
  std::string sweep_config;
  sweep_cmd->add_option("--config", sweep_config, "Sweep config JSON")->required();

  // ---- pack ----
  auto* pack_cmd = app.add_subcommand("pack", "Build a masked token-packing shard");
  pack_cmd->fallthrough();
  std::string pack_manifest;
  pack_cmd->add_option("--manifest", pack_manifest, "Pack manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc_cmd->parsed()) {
      auto traj = load_trajectory(enc_traj);
      Rig rig = load_rig(enc_rig);
      enc_params.validate();
      MultiViewVideo videos = encode_video(traj, rig, enc_params);
      save_frames(videos, rig, resolve_out(enc_out), parse_frame_format(enc_format));
      std::cout << "encoded " << traj.size() << " steps x " << rig.size() << " views to "
                << resolve_out(enc_out).string() << "\n";
    } else if (dec_cmd->parsed()) {
      MultiViewVideo videos = load_frames(dec_frames);
      Rig rig = load_rig(dec_rig);
      dec_params.validate();
      VideoDecodeResult result = decode_video(videos, rig, dec_params, false);
      std::vector<Action7> traj;
      for (size_t t = 0; t < result.steps.size(); ++t) {
        if (!result.steps[t])
          throw CodecError("decode failed at t=" + std::to_string(t) + ": " +
                           (result.failures.empty() ? std::string("unknown")
                                                    : result.failures.front().second));
        traj.push_back(result.steps[t]->action);
      }
      save_trajectory(traj, resolve_out(dec_out));
      if (!dec_conf.empty()) save_confidence(result, resolve_out(dec_conf));
      std::cout << "decoded " << traj.size() << " steps to " << resolve_out(dec_out).string()
                << "\n";
    } else if (eval_cmd->parsed()) {
      auto traj = load_trajectory(eval_traj);
      Rig rig = load_rig(eval_rig);
      noise.validate();
      RoundtripReport rep;
      bool clean = noise.gaussian_sigma == 0 && noise.quantize_bits == 0 &&
                   noise.occlusions.empty() && noise.dropout == 0;
      if (clean) {
        rep = roundtrip_eval(traj, rig, eval_enc, eval_dec);
      } else {
        MultiViewVideo videos = perturb(encode_video(traj, rig, eval_enc), noise, seed);
        // evaluate against the perturbed stream
        VideoDecodeResult r = decode_video(videos, rig, eval_dec, false);
        rep.width = rig[0].width;
        rep.height = rig[0].height;
        rep.k = eval_dec.k;
        rep.sigma_rel = eval_enc.sigma_rel;
        rep.ell = eval_enc.ell;
        rep.views = int(rig.size());
        std::vector<double> pos, ang, grip;
        for (size_t t = 0; t < traj.size(); ++t) {
          StepError se;
          se.t = int(t);
          if (r.steps[t]) {
            se.ok = true;
            se.pos_err = (r.steps[t]->action.position - traj[t].position).norm();
            se.ang_err_deg = angular_error_deg(r.steps[t]->action.orientation, traj[t].orientation);
            se.grip_err = std::abs(r.steps[t]->action.gripper - traj[t].gripper);
            pos.push_back(se.pos_err);
            ang.push_back(se.ang_err_deg);
            grip.push_back(se.grip_err);
            rep.decoded++;
          } else {
            rep.failed++;
          }
          rep.steps.push_back(se);
        }
        rep.pos = aggregate(pos);
        rep.ang_deg = aggregate(ang);
        rep.grip = aggregate(grip);
        double s = 0;
        for (double v : pos) s += v;
        rep.err_3d_m = pos.empty() ? 0 : s / pos.size();
      }
      atomic_write(resolve_out(eval_out), report_to_json(rep).dump(2) + "\n");
      if (!eval_csv.empty())
        atomic_write(resolve_out(eval_csv), std::string(kCsvHeader) + "\n" + report_csv_row(rep) + "\n");
      if (!eval_plots.empty()) {
        fs::path pdir = resolve_out(eval_plots);
        fs::create_directories(pdir);
        MultiViewVideo videos = encode_video(traj, rig, eval_enc);
        for (size_t v = 0; v < videos.size(); ++v)
          if (!videos[v].empty())
            write_heatmap_strip(videos[v][0], pdir / (rig[v].view_id + "_t0.png"));
      }
      std::cout << "median 3D err " << rep.pos.median << " m over " << rep.decoded
                << " decoded steps (" << rep.failed << " failed)\n";
    } else if (sweep_cmd->parsed()) {
      json cfg = json::parse(std::ifstream(sweep_config));
      std::vector<int> resolutions = cfg.value("resolutions", std::vector<int>{128, 256, 512});
      std::vector<int> ks = cfg.value("k", std::vector<int>{64, 256, 1024});
      int actions = cfg.value("actions", 200);
      uint64_t cfg_seed = cfg.value("seed", seed);
      std::string out = cfg.value("out", std::string("sweep.json"));
      std::string csv = cfg.value("csv", std::string());
      std::string plot = cfg.value("plot", std::string());

      WorkspaceBox box = default_workspace();
      auto traj = gen_trajectory(cfg_seed, actions, box);
      EncoderParams enc;
      DecoderParams dec;
      SweepResult sweep = discretization_sweep(traj, box, resolutions, ks, enc, dec);
      json j;
      j["monotone_fraction"] = sweep.monotone_fraction;
      j["cells"] = json::array();
      std::string csv_text = std::string(kCsvHeader) + "\n";
      for (const auto& cell : sweep.cells) {
        json cj = report_to_json(cell.report);
        cj["resolution"] = cell.resolution;
        cj["k"] = cell.k;
        cj.erase("steps");
        j["cells"].push_back(cj);
        csv_text += report_csv_row(cell.report) + "\n";
      }
      atomic_write(resolve_out(out), j.dump(2) + "\n");
      if (!csv.empty()) atomic_write(resolve_out(csv), csv_text);
      if (!plot.empty()) write_error_plot(sweep, resolutions, ks, resolve_out(plot));
      std::cout << "sweep done, monotone fraction " << sweep.monotone_fraction << "\n";
    } else if (pack_cmd->parsed()) {
      json m = json::parse(std::ifstream(pack_manifest));
      TokenLayout layout;
      layout.views = m.value("views", 2);
      layout.time = m.value("time", 8);
      layout.h = m.value("h", 16);
      layout.w = m.value("w", 16);
      layout.channels = m.value("channels", 16);
      StrategyMix mix;
      if (m.contains("mix")) {
        auto w = m["mix"].get<std::vector<double>>();
        if (w.size() != 4) throw ValidationError("mix must have 4 weights");
        std::copy(w.begin(), w.end(), mix.weights.begin());
      }
      uint64_t pack_seed = m.value("seed", seed);
      std::string out = m.value("out", std::string("shard.bin"));
      std::mt19937_64 rng(pack_seed);
      MaskStrategy strategy = draw_strategy(mix, rng);
      PackShard shard = make_pack_shard(layout, strategy, pack_seed);
      save_pack_shard(shard, resolve_out(out));
      std::cout << "packed shard (" << strategy_name(strategy) << ") to "
                << resolve_out(out).string() << "\n";
    }
  } catch (const std::exception& e) {
    return reporter.fail(e.what());
  }
  return 0;
}
