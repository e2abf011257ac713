#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsms/core.hpp"

namespace tsms {

/// Frame-pair redundancy measures. Every metric returns "higher = more
/// redundant"; distances come back negated.
enum class SimilarityMetric { cosine, manhattan, euclidean, dot, spearman, pearson };

inline constexpr std::array kAllMetrics = {
    SimilarityMetric::cosine,   SimilarityMetric::manhattan,
    SimilarityMetric::euclidean, SimilarityMetric::dot,
    SimilarityMetric::spearman, SimilarityMetric::pearson,
};

constexpr std::string_view to_string(SimilarityMetric m) noexcept {
  switch (m) {
    case SimilarityMetric::cosine: return "cosine";
    case SimilarityMetric::manhattan: return "manhattan";
    case SimilarityMetric::euclidean: return "euclidean";
    case SimilarityMetric::dot: return "dot";
    case SimilarityMetric::spearman: return "spearman";
    case SimilarityMetric::pearson: return "pearson";
  }
  return "unknown";
}

inline std::optional<SimilarityMetric> parse_metric(std::string_view name) {
  for (auto m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  // Common aliases.
  if (name == "l1") return SimilarityMetric::manhattan;
  if (name == "l2") return SimilarityMetric::euclidean;
  return std::nullopt;
}

namespace detail {

inline double pearson_flat(std::span<const double> a, std::span<const double> b) {
  const auto [amin, amax] = std::ranges::minmax(a);
  const auto [bmin, bmax] = std::ranges::minmax(b);
  if (amin == amax || bmin == bmax) return 0.0;

  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

/// 1-based fractional ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });

  std::vector<double> ranks(v.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() && v[order[stop]] == v[order[start]]) ++stop;
    // positions start..stop-1 (0-based) -> ranks start+1..stop
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = rank;
    start = stop;
  }
  return ranks;
}

}  // namespace detail

/// Redundancy between two equally shaped feature maps.
///
/// cosine sums the per-channel cosine over channels (a zero-norm channel
/// contributes 0), so it is bounded by the channel count. The other metrics
/// treat the tensor as one flat vector.
inline double similarity(SimilarityMetric metric, const FeatureMap& a,
                         const FeatureMap& b) {
  if (!a.same_shape(b)) {
    throw Error(Errc::dimension_mismatch,
                "similarity: shape mismatch between frames " +
                    std::to_string(a.frame_index()) + " and " +
                    std::to_string(b.frame_index()));
  }
  const auto da = a.data();
  const auto db = b.data();

  switch (metric) {
    case SimilarityMetric::cosine: {
      double total = 0.0;
      for (int c = 0; c < a.channels(); ++c) {
        const auto ca = a.channel(c);
        const auto cb = b.channel(c);
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < ca.size(); ++i) {
          dot += ca[i] * cb[i];
          na += ca[i] * ca[i];
          nb += cb[i] * cb[i];
        }
        if (na == 0.0 || nb == 0.0) continue;
        // Cauchy-Schwarz holds exactly; rounding can overshoot by an ulp.
        total += std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
      }
      return total;
    }
    case SimilarityMetric::manhattan: {
      double sum = 0.0;
      for (std::size_t i = 0; i < da.size(); ++i) sum += std::abs(da[i] - db[i]);
      return -sum;
    }
    case SimilarityMetric::euclidean: {
      double sum = 0.0;
      for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sum += d * d;
      }
      return -std::sqrt(sum);
    }
    case SimilarityMetric::dot:
      return std::inner_product(da.begin(), da.end(), db.begin(), 0.0);
    case SimilarityMetric::spearman: {
      const auto ra = detail::average_ranks(da);
      const auto rb = detail::average_ranks(db);
      return detail::pearson_flat(ra, rb);
    }
    case SimilarityMetric::pearson:
      return detail::pearson_flat(da, db);
  }
  return 0.0;
}

}  // namespace tsms
