#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tsms/core.hpp"

namespace tsms {

enum class PhasePolicy {
  zero,  // one view per stride, starting at frame 0
  all,   // one view per (stride, phase) with phase in [0, stride)
};

constexpr std::string_view to_string(PhasePolicy p) noexcept {
  return p == PhasePolicy::zero ? "zero" : "all";
}

inline std::optional<PhasePolicy> parse_phase_policy(std::string_view name) {
  if (name == "zero") return PhasePolicy::zero;
  if (name == "all") return PhasePolicy::all;
  return std::nullopt;
}

struct SamplingConfig {
  std::vector<int> strides{1, 2};
  PhasePolicy phase_policy = PhasePolicy::zero;
  std::optional<std::size_t> max_frames;

  void validate() const {
    if (strides.empty()) {
      throw Error(Errc::invalid_config, "sampling needs at least one stride");
    }
    std::set<int> seen;
    for (int s : strides) {
      if (s < 1) {
        throw Error(Errc::invalid_config, "stride must be >= 1, got " + std::to_string(s));
      }
      if (!seen.insert(s).second) {
        throw Error(Errc::invalid_config, "duplicate stride " + std::to_string(s));
      }
    }
    if (max_frames && *max_frames == 0) {
      throw Error(Errc::invalid_config, "max_frames must be >= 1");
    }
  }
};

struct SampledView {
  int stride = 1;
  std::size_t phase = 0;
  std::vector<std::size_t> indices;
};

struct SamplingPlan {
  std::size_t clip_length = 0;
  std::vector<SampledView> views;  // ordered by (stride, phase)
};

/// Indices t0, t0+s, ..., t0+s*K with K = floor((L-1-t0)/s).
inline std::vector<std::size_t> sample_indices(std::size_t clip_length, int stride,
                                               std::size_t phase) {
  if (stride < 1) {
    throw Error(Errc::invalid_config, "stride must be >= 1, got " + std::to_string(stride));
  }
  if (phase >= clip_length) {
    throw Error(Errc::out_of_range, "phase " + std::to_string(phase) +
                                        " outside clip of length " +
                                        std::to_string(clip_length));
  }
  const auto s = static_cast<std::size_t>(stride);
  std::vector<std::size_t> out;
  out.reserve((clip_length - 1 - phase) / s + 1);
  for (std::size_t t = phase; t < clip_length; t += s) out.push_back(t);
  return out;
}

inline SamplingPlan build_plan(std::size_t clip_length, const SamplingConfig& config) {
  if (clip_length < 1) {
    throw Error(Errc::out_of_range, "clip length must be >= 1");
  }
  config.validate();

  std::vector<int> strides = config.strides;
  std::ranges::sort(strides);

  SamplingPlan plan{clip_length, {}};
  for (int s : strides) {
    const std::size_t phases =
        config.phase_policy == PhasePolicy::all ? static_cast<std::size_t>(s) : 1;
    for (std::size_t t0 = 0; t0 < phases; ++t0) {
      // A phase past the end of a short clip yields no frames at all.
      if (t0 >= clip_length) break;
      auto indices = sample_indices(clip_length, s, t0);
      if (config.max_frames && indices.size() > *config.max_frames) {
        indices.resize(*config.max_frames);
      }
      plan.views.push_back({s, t0, std::move(indices)});
    }
  }
  return plan;
}

/// Picks frames by position; each frame keeps its original frame_index.
template <FramePayload T>
FrameSequence<T> materialize(const FrameSequence<T>& sequence,
                             const std::vector<std::size_t>& indices) {
  std::vector<T> picked;
  picked.reserve(indices.size());
  for (auto i : indices) {
    if (i >= sequence.size()) {
      throw Error(Errc::out_of_range, "index " + std::to_string(i) +
                                          " out of bounds for sequence of " +
                                          std::to_string(sequence.size()) + " frames");
    }
    picked.push_back(sequence[i]);
  }
  return FrameSequence<T>(std::move(picked));
}

}  // namespace tsms
