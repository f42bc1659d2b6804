#include "actimg/packing.hpp"

#include <cmath>

namespace actimg {

const char* strategy_name(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::JointGen: return "joint_gen";
    case MaskStrategy::ActionCondVideo: return "action_cond_video";
    case MaskStrategy::VideoToAction: return "video_to_action";
    case MaskStrategy::VideoOnly: return "video_only";
  }
  return "unknown";
}

void TokenLayout::validate() const {
  if (views < 1 || time < 1 || h < 1 || w < 1 || channels < 1)
    throw ValidationError("token layout dimensions must be >= 1");
}

size_t PackedSequence::flat_index(const TokenIndex& idx) const {
  size_t per_stream = size_t(layout.time) * layout.h * layout.w;
  size_t per_view = 2 * per_stream;
  size_t within = (size_t(idx.t) * layout.h + idx.y) * layout.w + idx.x;
  return size_t(idx.view) * per_view + size_t(int(idx.stream)) * per_stream + within;
}

TokenIndex PackedSequence::token_at(size_t flat) const {
  size_t per_stream = size_t(layout.time) * layout.h * layout.w;
  size_t per_view = 2 * per_stream;
  TokenIndex idx;
  idx.view = int(flat / per_view);
  size_t rem = flat % per_view;
  idx.stream = Stream(int(rem / per_stream));
  rem %= per_stream;
  idx.t = int(rem / (size_t(layout.h) * layout.w));
  rem %= size_t(layout.h) * layout.w;
  idx.y = int(rem / layout.w);
  idx.x = int(rem % layout.w);
  return idx;
}

PackedSequence pack_sequence(const std::vector<double>& video_tokens,
                             const std::vector<double>& action_tokens, const TokenLayout& layout) {
  layout.validate();
  size_t stream_len = layout.tokens_per_stream() * layout.channels;
  if (video_tokens.size() != stream_len || action_tokens.size() != stream_len)
    throw ShapeError("pack_sequence: stream size does not match layout");

  PackedSequence seq;
  seq.layout = layout;
  seq.data.resize(2 * stream_len);
  size_t per_stream = size_t(layout.time) * layout.h * layout.w;  // tokens per view per stream
  size_t c = layout.channels;
  for (int v = 0; v < layout.views; ++v) {
    size_t src = size_t(v) * per_stream * c;
    size_t dst = size_t(v) * 2 * per_stream * c;
    std::copy_n(video_tokens.begin() + src, per_stream * c, seq.data.begin() + dst);
    std::copy_n(action_tokens.begin() + src, per_stream * c, seq.data.begin() + dst + per_stream * c);
  }
  return seq;
}

void unpack_sequence(const PackedSequence& seq, std::vector<double>& video_tokens,
                     std::vector<double>& action_tokens) {
  const TokenLayout& layout = seq.layout;
  size_t stream_len = layout.tokens_per_stream() * layout.channels;
  if (seq.data.size() != 2 * stream_len) throw ShapeError("unpack_sequence: bad packed size");
  video_tokens.resize(stream_len);
  action_tokens.resize(stream_len);
  size_t per_stream = size_t(layout.time) * layout.h * layout.w;
  size_t c = layout.channels;
  for (int v = 0; v < layout.views; ++v) {
    size_t dst = size_t(v) * per_stream * c;
    size_t src = size_t(v) * 2 * per_stream * c;
    std::copy_n(seq.data.begin() + src, per_stream * c, video_tokens.begin() + dst);
    std::copy_n(seq.data.begin() + src + per_stream * c, per_stream * c,
                action_tokens.begin() + dst);
  }
}

Mask sample_mask(MaskStrategy strategy, const TokenLayout& layout) {
  layout.validate();
  Mask mask;
  mask.layout = layout;
  mask.includes_action = strategy != MaskStrategy::VideoOnly;

  size_t spatial = size_t(layout.h) * layout.w;
  size_t per_stream = size_t(layout.time) * spatial;
  size_t streams = mask.includes_action ? 2 : 1;
  mask.flags.resize(size_t(layout.views) * streams * per_stream);

  // Ordering mirrors the packed sequence: view-major, video then action.
  size_t pos = 0;
  for (int v = 0; v < layout.views; ++v) {
    for (int t = 0; t < layout.time; ++t) {
      TokenFlag f = (t == 0) ? TokenFlag::Visible
                  : (strategy == MaskStrategy::VideoToAction) ? TokenFlag::Visible
                                                              : TokenFlag::Predicted;
      std::fill_n(mask.flags.begin() + pos, spatial, f);
      pos += spatial;
    }
    if (!mask.includes_action) continue;
    TokenFlag f = (strategy == MaskStrategy::ActionCondVideo) ? TokenFlag::Visible
                                                              : TokenFlag::Predicted;
    std::fill_n(mask.flags.begin() + pos, per_stream, f);
    pos += per_stream;
  }
  return mask;
}

void StrategyMix::validate() const {
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw ValidationError("strategy weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("strategy weights must sum to 1");
}

MaskStrategy draw_strategy(const StrategyMix& mix, std::mt19937_64& rng) {
  mix.validate();
  std::discrete_distribution<int> dist(mix.weights.begin(), mix.weights.end());
  return MaskStrategy(dist(rng));
}

std::vector<double> flow_target(const std::vector<double>& x, const std::vector<double>& eps) {
  if (x.size() != eps.size()) throw ShapeError("flow_target: shape mismatch");
  std::vector<double> v(x.size());
  for (size_t i = 0; i < x.size(); ++i) v[i] = eps[i] - x[i];
  return v;
}

}  // namespace actimg
