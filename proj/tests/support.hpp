#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "tsms/core.hpp"
#include "tsms/metrics.hpp"

namespace testing_support {

inline oracle::Tensor to_tensor(const tsms::FeatureMap& m) {
  return {m.channels(), m.height(), m.width(), {m.data().begin(), m.data().end()}};
}

inline tsms::PixelSet to_pixels(const oracle::Grid& g) {
  tsms::PixelSet out(static_cast<int>(g.size()), static_cast<int>(g[0].size()));
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (g[y][x]) out.insert(y, x);
    }
  }
  return out;
}

/// Random C×H×W map. With `quantized`, values are drawn from a handful of
/// levels so exact ties (and constant channels) occur often.
inline tsms::FeatureMap random_map(std::mt19937_64& rng, tsms::FrameIndex frame, int c, int h, int w,
                                   bool quantized = false) {
  std::vector<double> v(static_cast<std::size_t>(c) * h * w);
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  std::uniform_int_distribution<int> level(-2, 2);
  for (auto& x : v) x = quantized ? 0.5 * level(rng) : real(rng);
  return tsms::FeatureMap::make(frame, c, h, w, std::move(v));
}

inline tsms::FeatureMap with_frame(const tsms::FeatureMap& m, tsms::FrameIndex frame) {
  return tsms::FeatureMap::make(frame, m.channels(), m.height(), m.width(), {m.data().begin(), m.data().end()});
}

/// Block of `value` at rows [y0, y0+bh), cols [x0, x0+bw).
inline tsms::PixelSet block(int h, int w, int y0, int x0, int bh, int bw) {
  tsms::PixelSet out(h, w);
  for (int y = y0; y < y0 + bh; ++y) {
    for (int x = x0; x < x0 + bw; ++x) out.insert(y, x);
  }
  return out;
}

}  // namespace testing_support
