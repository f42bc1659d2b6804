#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "actimg/decoder.hpp"
#include "actimg/encoder.hpp"
#include "actimg/harness.hpp"
#include "test_helpers.hpp"

using namespace actimg;

TEST_CASE("semantic_points") {
  SUBCASE("identity orientation") {
    Action7 a;
    a.position = Vec3::Zero();
    SemanticPoints sp = semantic_points(a, 0.1);
    CHECK((sp.pos - Vec3(0, 0, 0)).norm() == 0.0);
    CHECK((sp.up - Vec3(0.1, 0, 0)).norm() < 1e-15);
    CHECK((sp.normal - Vec3(0, 0, -0.1)).norm() < 1e-15);
  }

  SUBCASE("invariants: offsets of length ell, perpendicular") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
      Action7 a;
      a.position = Vec3(u(rng), u(rng), u(rng));
      a.orientation = test::random_rotation(rng);
      SemanticPoints sp = semantic_points(a, 0.1);
      CHECK(std::abs((sp.up - sp.pos).norm() - 0.1) < 1e-9);
      CHECK(std::abs((sp.normal - sp.pos).norm() - 0.1) < 1e-9);
      CHECK(std::abs((sp.up - sp.pos).dot(sp.normal - sp.pos)) < 1e-9);
    }
  }

  SUBCASE("recover R from the three points") {
    // Oracle for the decode-side formulas, no rendering involved:
    // e_x = norm(up - pos), e_z = norm(pos - normal), e_y = e_z x e_x.
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
      Action7 a;
      a.position = Vec3(0.1, -0.2, 0.3);
      a.orientation = test::random_rotation(rng);
      SemanticPoints sp = semantic_points(a, 0.1);
      Vec3 ex = (sp.up - sp.pos).normalized();
      Vec3 ez = (sp.pos - sp.normal).normalized();
      Vec3 ey = ez.cross(ex);
      Mat3 r;
      r.col(0) = ex;
      r.col(1) = ey;
      r.col(2) = ez;
      CHECK((r - a.orientation.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("convention-specific axis mapping") {
    // yaw = pi/2 maps e_x to e_y under R = Rz(yaw) Ry(pitch) Rx(roll)
    Action7 a;
    a.position = Vec3(1, 2, 3);
    a.orientation = Rotation3::from_euler({0, 0, M_PI / 2});
    SemanticPoints sp = semantic_points(a, 0.1);
    CHECK((sp.up - (a.position + Vec3(0, 0.1, 0))).norm() < 1e-12);
  }
}

TEST_CASE("render_gaussian") {
  SUBCASE("peak 1 at a pixel center") {
    Heatmap h = render_gaussian({10.5, 20.5}, 2.0, 64, 64);
    CHECK(h.at(10, 20) == 1.0f);
    // far tails underflow float, so only demand non-negativity globally and
    // strict positivity within 3 sigma
    for (float v : h.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    for (int iy = 15; iy <= 25; ++iy)
      for (int ix = 5; ix <= 15; ++ix) CHECK(h.at(ix, iy) > 0.0f);
  }

  SUBCASE("value exp(-1/2) at distance sigma") {
    double sigma = 4.0;
    Heatmap h = render_gaussian({10.5, 20.5}, sigma, 64, 64);
    CHECK(h.at(14, 20) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  }

  SUBCASE("off-image center still yields the analytic tail") {
    double sigma = 25.6;
    Heatmap h = render_gaussian({-50, -50}, sigma, 512, 512);
    float max_v = 0;
    for (float v : h.data) max_v = std::max(max_v, v);
    double d2 = (0.5 + 50.0) * (0.5 + 50.0) * 2.0;  // nearest pixel center (0.5, 0.5)
    CHECK(max_v == doctest::Approx(std::exp(-d2 / (2 * sigma * sigma))).epsilon(1e-6));
  }
}

namespace {

CameraView frontal_camera(int size = 512) {
  CameraView cam;
  cam.fx = cam.fy = size;
  cam.cx = cam.cy = size / 2.0;
  cam.width = cam.height = size;
  cam.translation = Vec3(0, 0, 1.0);  // world origin at 1 m depth
  return cam;
}

}  // namespace

TEST_CASE("encode_frame") {
  EncoderParams params;
  CameraView cam = frontal_camera();

  SUBCASE("gripper constant fills the background") {
    Action7 a;
    a.gripper = 1.0;
    ActionFrame f = encode_frame(a, cam, params);
    double sigma = params.sigma_px(cam.width, cam.height);
    Vec2 u_up = project(cam, semantic_points(a, params.ell).up);
    int below = 0;
    for (int iy = 0; iy < f.height; ++iy)
      for (int ix = 0; ix < f.width; ++ix) {
        double d2 = (ix + 0.5 - u_up.x()) * (ix + 0.5 - u_up.x()) +
                    (iy + 0.5 - u_up.y()) * (iy + 0.5 - u_up.y());
        double g = std::exp(-d2 / (2 * sigma * sigma));
        if (g <= 0.25) {
          CHECK(f.ch[2].at(ix, iy) == 0.25f);
          ++below;
        }
      }
    CHECK(below > 0);
  }

  SUBCASE("gripper 0 zeroes the background, keeps the blob") {
    Action7 a;
    a.gripper = 0.0;
    ActionFrame f = encode_frame(a, cam, params);
    int blob = 0, zero = 0;
    for (float v : f.ch[2].data) {
      if (v > 0.25f)
        ++blob;
      else {
        CHECK(v == 0.0f);
        ++zero;
      }
    }
    CHECK(blob > 0);
    CHECK(zero > 0);
  }

  SUBCASE("blue-channel partition: every pixel satisfies exactly one branch") {
    Action7 a;
    a.gripper = 0.7;
    ActionFrame f = encode_frame(a, cam, params);
    float bg = float(0.25 * 0.7);
    for (float v : f.ch[2].data) CHECK(((v > 0.25f) != (v == bg)));
  }

  SUBCASE("position channel peaks at the projected point") {
    Action7 a;
    a.position = Vec3(0.5 / 512.0, 0.5 / 512.0, 0);  // projects to (256.5, 256.5)
    ActionFrame f = encode_frame(a, cam, params);
    Vec2 u = project(cam, a.position);
    CHECK(u.x() == doctest::Approx(256.5).epsilon(1e-9));
    CHECK(f.ch[0].at(256, 256) == 1.0f);
  }

  SUBCASE("point behind camera raises EncodeError naming the point") {
    Action7 a;
    a.position = Vec3(0, 0, -2.0);  // camera sits at z=-1 looking toward +z
    CHECK_THROWS_AS(encode_frame(a, cam, params), EncodeError);
    try {
      encode_frame(a, cam, params);
    } catch (const EncodeError& e) {
      CHECK(e.point() == "pos");
    }
  }

  SUBCASE("all values in range") {
    std::mt19937_64 rng(31);
    Action7 a;
    a.orientation = test::random_rotation(rng);
    a.gripper = 0.3;
    ActionFrame f = encode_frame(a, cam, params);
    for (const auto& ch : f.ch)
      for (float v : ch.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
      }
  }
}

TEST_CASE("gripper exactness through decode") {
  EncoderParams params;
  CameraView cam = frontal_camera(128);
  for (double g : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) {
    Action7 a;
    a.gripper = g;
    ActionFrame f = encode_frame(a, cam, params);
    double decoded = decode_gripper({&f}, params.threshold);
    CHECK(std::abs(decoded - g) < 1e-6);
  }
}

TEST_CASE("channel argmax grounding over random actions and cameras") {
  EncoderParams params;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  WorkspaceBox box = default_workspace();
  Rig rig = default_rig(box, 1, 256, 256);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Action7 a;
    a.position = Vec3(u(rng), u(rng), u(rng));
    a.orientation = test::random_rotation(rng);
    CameraView cam = rig[0].at(0);
    ActionFrame f;
    try {
      f = encode_frame(a, cam, params);
    } catch (const EncodeError&) {
      continue;
    }
    SemanticPoints sp = semantic_points(a, params.ell);
    double sigma = params.sigma_px(cam.width, cam.height);
    const Vec3* pts[3] = {&sp.pos, &sp.normal, &sp.up};
    for (int c = 0; c < 3; ++c) {
      Vec2 uu = project(cam, *pts[c]);
      if (uu.x() < 3 * sigma || uu.x() > cam.width - 3 * sigma || uu.y() < 3 * sigma ||
          uu.y() > cam.height - 3 * sigma)
        continue;
      // integer-pixel argmax must be the pixel whose center is nearest
      int best_ix = 0, best_iy = 0;
      float best = -1;
      for (int iy = 0; iy < f.height; ++iy)
        for (int ix = 0; ix < f.width; ++ix)
          if (f.ch[c].at(ix, iy) > best) {
            best = f.ch[c].at(ix, iy);
            best_ix = ix;
            best_iy = iy;
          }
      CHECK(best_ix == int(std::floor(uu.x())));
      CHECK(best_iy == int(std::floor(uu.y())));
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("scale consistency: doubling resolution doubles sigma and peak coordinates") {
  EncoderParams params;
  Action7 a;
  a.position = Vec3(0.013, -0.021, 0.004);
  CameraView c1 = frontal_camera(256);
  CameraView c2 = frontal_camera(512);
  Vec2 u1 = project(c1, a.position);
  Vec2 u2 = project(c2, a.position);
  CHECK(u2.x() == doctest::Approx(2 * u1.x()).epsilon(1e-12));
  CHECK(u2.y() == doctest::Approx(2 * u1.y()).epsilon(1e-12));
  CHECK(params.sigma_px(512, 512) == doctest::Approx(2 * params.sigma_px(256, 256)));
}

TEST_CASE("encode_video") {
  EncoderParams params;
  WorkspaceBox box = default_workspace();
  Rig rig = default_rig(box, 2, 64, 64);

  SUBCASE("T=1, V=1 equals encode_frame") {
    Action7 a;
    Rig one = default_rig(box, 1, 64, 64);
    MultiViewVideo v = encode_video({a}, one, params);
    REQUIRE(v.size() == 1);
    REQUIRE(v[0].size() == 1);
    ActionFrame f = encode_frame(a, one[0].at(0), params);
    CHECK(v[0][0].ch[0].data == f.ch[0].data);
    CHECK(v[0][0].ch[2].data == f.ch[2].data);
  }

  SUBCASE("static rig, constant action: bit-identical frames") {
    Action7 a;
    a.gripper = 1.0;
    std::vector<Action7> traj(5, a);
    MultiViewVideo v = encode_video(traj, rig, params);
    for (const auto& video : v)
      for (size_t t = 1; t < video.size(); ++t) {
        CHECK(video[t].ch[0].data == video[0].ch[0].data);
        CHECK(video[t].ch[1].data == video[0].ch[1].data);
        CHECK(video[t].ch[2].data == video[0].ch[2].data);
      }
  }

  SUBCASE("frame count matches trajectory length per view") {
    auto traj = gen_trajectory(1, 41, box);
    MultiViewVideo v = encode_video(traj, rig, params);
    CHECK(v.size() == 2);
    for (const auto& video : v) CHECK(video.size() == 41);
  }
}
