#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "actimg/errors.hpp"

namespace actimg {

enum class Stream : int { Video = 0, Action = 1 };

enum class MaskStrategy : int {
  JointGen = 0,        // first video frame visible, everything else predicted
  ActionCondVideo = 1, // actions + first video frame visible, later video predicted
  VideoToAction = 2,   // video visible, actions predicted
  VideoOnly = 3,       // video stream only; actions excluded from the sequence
};

const char* strategy_name(MaskStrategy s);

// Latent token grid over (stream, view, time, space). Token payloads carry
// c channels but tokens are addressed per spatial cell.
struct TokenLayout {
  int views = 1;
  int time = 1;     // latent steps per stream
  int h = 1, w = 1; // latent spatial grid
  int channels = 1; // payload dim, metadata only

  void validate() const;
  size_t tokens_per_stream() const { return size_t(views) * time * h * w; }
  size_t tokens_total() const { return 2 * tokens_per_stream(); }
};

struct TokenIndex {
  Stream stream;
  int view, t, y, x;
};

enum class TokenFlag : uint8_t { Visible = 0, Predicted = 1 };

// Per-token visibility/supervision flags, ordered like the packed sequence.
// A VideoOnly mask covers only the video stream.
struct Mask {
  TokenLayout layout;
  bool includes_action = true;
  std::vector<TokenFlag> flags;

  size_t size() const { return flags.size(); }
};

// Packed view-major sequence: per view, video tokens (t, y, x row-major)
// followed by action tokens. flat_index is the bijection from logical token
// coordinates to packed token position.
struct PackedSequence {
  TokenLayout layout;
  std::vector<double> data;  // tokens_total() * channels

  size_t flat_index(const TokenIndex& idx) const;
  TokenIndex token_at(size_t flat) const;
};

// Both inputs are (view, t, y, x, channel) row-major, one stream each.
PackedSequence pack_sequence(const std::vector<double>& video_tokens,
                             const std::vector<double>& action_tokens, const TokenLayout& layout);

// Inverse of pack_sequence.
void unpack_sequence(const PackedSequence& seq, std::vector<double>& video_tokens,
                     std::vector<double>& action_tokens);

Mask sample_mask(MaskStrategy strategy, const TokenLayout& layout);

struct StrategyMix {
  // weights over {JointGen, ActionCondVideo, VideoToAction, VideoOnly}
  std::array<double, 4> weights = {0.85, 0.05, 0.05, 0.05};

  void validate() const;
};

MaskStrategy draw_strategy(const StrategyMix& mix, std::mt19937_64& rng);

// Flow-matching target velocity v = eps - x. The training loss this feeds
// applies only to tokens flagged Predicted.
std::vector<double> flow_target(const std::vector<double>& x, const std::vector<double>& eps);

}  // namespace actimg
