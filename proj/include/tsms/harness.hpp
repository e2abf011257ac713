#pragma once

// Synthetic tracking world: a moving shape, a fixed toy encoder, and a
// nearest-template segmenter that reads out of the pruned memory bank.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsms/core.hpp"
#include "tsms/memory_bank.hpp"
#include "tsms/similarity.hpp"

namespace tsms {

enum class ObjectShape { square, disk };

constexpr std::string_view to_string(ObjectShape s) noexcept {
  return s == ObjectShape::square ? "square" : "disk";
}

inline std::optional<ObjectShape> parse_shape(std::string_view name) {
  if (name == "square") return ObjectShape::square;
  if (name == "disk") return ObjectShape::disk;
  return std::nullopt;
}

/// Inclusive range of frames during which the object is hidden.
struct Gap {
  FrameIndex first = 0;
  FrameIndex last = 0;
  friend bool operator==(const Gap&, const Gap&) = default;
};

struct SceneConfig {
  int height = 64;
  int width = 64;
  ObjectShape shape = ObjectShape::square;
  int size = 8;  // side length (square) or radius (disk)
  int x0 = 0;    // top-left corner of the bounding box at frame 0
  int y0 = 0;
  int vx = 0;    // pixels per frame
  int vy = 0;
  int n_frames = 20;
  std::vector<Gap> gaps;
  std::uint64_t seed = 0;  // keys the encoder noise

  [[nodiscard]] int extent() const noexcept {
    return shape == ObjectShape::square ? size : 2 * size + 1;
  }

  void validate() const {
    if (height < 1 || width < 1) throw Error(Errc::invalid_config, "grid must be at least 1x1");
    if (n_frames < 1) throw Error(Errc::invalid_config, "scene needs n_frames >= 1");
    if (size < (shape == ObjectShape::square ? 1 : 0)) {
      throw Error(Errc::invalid_config, "object size out of range");
    }
    if (x0 < 0 || y0 < 0 || x0 + extent() > width || y0 + extent() > height) {
      throw Error(Errc::invalid_config, "object does not fit the grid at frame 0");
    }
    for (const auto& g : gaps) {
      if (g.first < 0 || g.last < g.first) {
        throw Error(Errc::invalid_config, "gap [" + std::to_string(g.first) + "," +
                                              std::to_string(g.last) + "] is not a valid range");
      }
    }
  }
};

inline constexpr ObjectId kSceneObjectId = 1;

/// Ground-truth masks of the scene, object id 1, clipped at the borders.
inline FrameSequence<LabelMask> generate_scene(const SceneConfig& config) {
  config.validate();
  std::vector<LabelMask> frames;
  frames.reserve(static_cast<std::size_t>(config.n_frames));
  for (int t = 0; t < config.n_frames; ++t) {
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(config.height) *
                                     static_cast<std::size_t>(config.width));
    const bool hidden = std::ranges::any_of(
        config.gaps, [t](const Gap& g) { return t >= g.first && t <= g.last; });
    if (!hidden) {
      const int left = config.x0 + config.vx * t;
      const int top = config.y0 + config.vy * t;
      const int e = config.extent();
      for (int y = std::max(0, top); y < std::min(config.height, top + e); ++y) {
        for (int x = std::max(0, left); x < std::min(config.width, left + e); ++x) {
          bool inside = true;
          if (config.shape == ObjectShape::disk) {
            const int dx = x - (left + config.size);
            const int dy = y - (top + config.size);
            inside = dx * dx + dy * dy <= config.size * config.size;
          }
          if (inside) labels[static_cast<std::size_t>(y) * config.width + x] = kSceneObjectId;
        }
      }
    }
    frames.push_back(LabelMask::make(t, config.height, config.width, std::move(labels)));
  }
  return FrameSequence<LabelMask>(std::move(frames));
}

struct ToyEncoderConfig {
  int feature_height = 8;
  int feature_width = 8;
  double noise_sigma = 0.0;

  static constexpr int kChannels = 4;  // occupancy, x, y, noise
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normal drawn from a pure function of (seed, frame, slot).
inline double keyed_normal(std::uint64_t seed, FrameIndex frame, std::uint64_t slot) {
  const std::uint64_t key =
      splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(frame) + 0x51ed2701ULL)) ^
      slot;
  const std::uint64_t a = splitmix64(key * 2);
  const std::uint64_t b = splitmix64(key * 2 + 1);
  // 53-bit uniforms, u1 in (0, 1].
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Four-channel stand-in for a memory encoder: block-mean object occupancy,
/// fixed x and y coordinate ramps, and seeded Gaussian noise.
inline FeatureMap encode_frame(const LabelMask& mask, const ToyEncoderConfig& config,
                               std::uint64_t seed, FrameIndex frame_index) {
  const int fh = config.feature_height;
  const int fw = config.feature_width;
  if (fh < 1 || fw < 1 || fh > mask.height() || fw > mask.width() ||
      mask.height() % fh != 0 || mask.width() % fw != 0) {
    throw Error(Errc::dimension_mismatch,
                "feature resolution " + std::to_string(fh) + "x" + std::to_string(fw) +
                    " must evenly divide mask " + std::to_string(mask.height()) + "x" +
                    std::to_string(mask.width()));
  }
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw Error(Errc::invalid_config, "noise_sigma must be finite and >= 0");
  }
  const int by = mask.height() / fh;
  const int bx = mask.width() / fw;
  const auto plane = static_cast<std::size_t>(fh) * static_cast<std::size_t>(fw);
  std::vector<double> data(ToyEncoderConfig::kChannels * plane, 0.0);

  for (int i = 0; i < fh; ++i) {
    for (int j = 0; j < fw; ++j) {
      int occupied = 0;
      for (int y = i * by; y < (i + 1) * by; ++y) {
        for (int x = j * bx; x < (j + 1) * bx; ++x) occupied += mask.at(y, x) != 0;
      }
      const auto p = static_cast<std::size_t>(i) * fw + j;
      data[p] = static_cast<double>(occupied) / static_cast<double>(by * bx);
      data[plane + p] = (j + 0.5) / fw;
      data[2 * plane + p] = (i + 0.5) / fh;
      if (config.noise_sigma > 0.0) {
        data[3 * plane + p] = config.noise_sigma * detail::keyed_normal(seed, frame_index, p);
      }
    }
  }
  return FeatureMap::make(frame_index, ToyEncoderConfig::kChannels, fh, fw, std::move(data));
}

struct TrackerConfig {
  ToyEncoderConfig encoder;
  int capacity = MemoryBank::kDefaultCapacity;
  SimilarityMetric metric = SimilarityMetric::cosine;
  PruneMode mode = PruneMode::persistent;
  bool prune_enabled = true;
};

struct TrackStep {
  std::size_t step = 0;
  FrameIndex frame_index = 0;
  LabelMask observed;
  LabelMask predicted;
  std::vector<FrameIndex> bank_before;
  std::vector<FrameIndex> bank_after;
  bool prune_fired = false;
  std::vector<FrameIndex> pruned;
  std::vector<FrameIndex> retained;
  std::vector<GroupScores> group_scores;
  FrameIndex readout_frame = 0;
  double readout_score = 0.0;
  std::size_t readout_cost = 0;  // retained entries × feature positions

  friend bool operator==(const TrackStep&, const TrackStep&) = default;
};

struct TrackTrace {
  std::size_t tokens_per_entry = 0;
  std::vector<TrackStep> steps;

  friend bool operator==(const TrackTrace&, const TrackTrace&) = default;
};

struct TrackResult {
  FrameSequence<LabelMask> predicted;  // frame 0 is the prompt
  TrackTrace trace;
};

/// Streams the scene through encode -> prune -> read out -> append. Frame 0's
/// ground truth is the prompt and enters the bank before step 1.
inline TrackResult track_sequence(const FrameSequence<LabelMask>& scene,
                                  const TrackerConfig& config, std::uint64_t seed) {
  if (scene.size() < 2) {
    throw Error(Errc::out_of_range, "tracking needs at least two frames (prompt + one)");
  }
  MemoryBank bank(config.capacity);
  const auto& prompt = scene[0];
  bank.append(MemoryEntry(encode_frame(prompt, config.encoder, seed, prompt.frame_index()),
                          prompt));

  TrackTrace trace;
  trace.tokens_per_entry = static_cast<std::size_t>(config.encoder.feature_height) *
                           static_cast<std::size_t>(config.encoder.feature_width);
  std::vector<LabelMask> predicted{prompt};

  for (std::size_t t = 1; t < scene.size(); ++t) {
    const auto& observed = scene[t];
    const auto current = encode_frame(observed, config.encoder, seed, observed.frame_index());

    TrackStep step{.step = t,
                   .frame_index = observed.frame_index(),
                   .observed = observed,
                   .predicted = observed,
                   .bank_before = bank.frame_indices(),
                   .bank_after = {},
                   .prune_fired = false,
                   .pruned = {},
                   .retained = {},
                   .group_scores = {},
                   .readout_frame = 0,
                   .readout_score = 0.0,
                   .readout_cost = 0};

    std::vector<MemoryEntry> retained;
    if (config.prune_enabled) {
      auto outcome = bank.prune_step(config.metric, config.mode);
      step.prune_fired = outcome.fired;
      step.pruned = outcome.pruned_frame_indices;
      step.group_scores = std::move(outcome.groups);
      retained = std::move(outcome.retained);
    } else {
      retained.assign(bank.entries().begin(), bank.entries().end());
    }
    for (const auto& e : retained) step.retained.push_back(e.frame_index());

    const MemoryEntry* best = nullptr;
    double best_score = 0.0;
    for (const auto& e : retained) {
      const double s = similarity(config.metric, e.features(), current);
      if (best == nullptr || s > best_score) {
        best = &e;
        best_score = s;
      }
    }
    step.readout_frame = best->frame_index();
    step.readout_score = best_score;
    step.readout_cost = retained.size() * trace.tokens_per_entry;
    step.predicted = best->mask().with_frame_index(observed.frame_index());

    bank.append(MemoryEntry(current, step.predicted));
    step.bank_after = bank.frame_indices();
    predicted.push_back(step.predicted);
    trace.steps.push_back(std::move(step));
  }
  return {FrameSequence<LabelMask>(std::move(predicted)), std::move(trace)};
}

inline std::vector<std::size_t> readout_cost(const TrackTrace& trace) {
  std::vector<std::size_t> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) out.push_back(s.readout_cost);
  return out;
}

}  // namespace tsms
