#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsms/core.hpp"

namespace tsms {

/// Binary membership over an h×w grid.
class PixelSet {
 public:
  PixelSet(int height, int width)
      : height_(height),
        width_(width),
        bits_(static_cast<std::size_t>(checked(height, width)), 0) {}

  PixelSet(int height, int width, std::vector<std::uint8_t> bits)
      : height_(height), width_(width), bits_(std::move(bits)) {
    if (bits_.size() != checked(height, width)) {
      throw Error(Errc::dimension_mismatch, "pixel set membership has wrong length");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  /// Pixels of `mask` labelled `id`.
  static PixelSet from_mask(const LabelMask& mask, ObjectId id) {
    PixelSet out(mask.height(), mask.width());
    const auto labels = mask.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) out.bits_[i] = labels[i] == id;
    return out;
  }

  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] bool same_dims(const PixelSet& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_;
  }

  [[nodiscard]] bool contains(int y, int x) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void insert(int y, int x) { bits_[static_cast<std::size_t>(y) * width_ + x] = 1; }

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::ranges::count(bits_, std::uint8_t{1}));
  }
  [[nodiscard]] bool empty() const noexcept { return count() == 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const PixelSet&, const PixelSet&) = default;

 private:
  static std::size_t checked(int height, int width) {
    if (height < 1 || width < 1) {
      throw Error(Errc::dimension_mismatch, "pixel set dims must be >= 1");
    }
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }

  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

namespace detail {

inline void require_same_dims(const PixelSet& p, const PixelSet& g, const char* what) {
  if (!p.same_dims(g)) {
    throw Error(Errc::dimension_mismatch,
                std::string(what) + ": " + std::to_string(p.height()) + "x" +
                    std::to_string(p.width()) + " vs " + std::to_string(g.height()) +
                    "x" + std::to_string(g.width()));
  }
}

struct Overlap {
  std::size_t intersection = 0;
  std::size_t uni = 0;
  std::size_t p = 0;
  std::size_t g = 0;
};

inline Overlap overlap(const PixelSet& p, const PixelSet& g) {
  Overlap o;
  const auto& pb = p.bits();
  const auto& gb = g.bits();
  for (std::size_t i = 0; i < pb.size(); ++i) {
    o.intersection += pb[i] & gb[i];
    o.uni += pb[i] | gb[i];
    o.p += pb[i];
    o.g += gb[i];
  }
  return o;
}

}  // namespace detail

/// |P∩G| / |P∪G|, 1 when both are empty.
inline double jaccard(const PixelSet& p, const PixelSet& g) {
  detail::require_same_dims(p, g, "jaccard");
  const auto o = detail::overlap(p, g);
  if (o.uni == 0) return 1.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.uni);
}

/// 2|P∩G| / (|P|+|G|), 1 when both are empty.
inline double dice(const PixelSet& p, const PixelSet& g) {
  detail::require_same_dims(p, g, "dice");
  const auto o = detail::overlap(p, g);
  if (o.p + o.g == 0) return 1.0;
  return 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.p + o.g);
}

/// Members with at least one 4-neighbour outside the set or outside the image.
inline PixelSet boundary_pixels(const PixelSet& mask) {
  const int h = mask.height();
  const int w = mask.width();
  PixelSet out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.contains(y, x)) continue;
      const bool edge = y == 0 || x == 0 || y == h - 1 || x == w - 1 ||
                        !mask.contains(y - 1, x) || !mask.contains(y + 1, x) ||
                        !mask.contains(y, x - 1) || !mask.contains(y, x + 1);
      if (edge) out.insert(y, x);
    }
  }
  return out;
}

/// Integer offsets with dx² + dy² <= radius².
inline std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  const long r2 = static_cast<long>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy <= r2) {
        out.emplace_back(dy, dx);
      }
    }
  }
  return out;
}

/// Morphological dilation by the integer Euclidean disk, clipped to the image.
inline PixelSet dilate_disk(const PixelSet& pixels, int radius) {
  if (radius < 0) {
    throw Error(Errc::out_of_range, "dilation radius must be >= 0");
  }
  if (radius == 0) return pixels;
  const int h = pixels.height();
  const int w = pixels.width();

  // Per-row half widths of the disk: row dy spans |dx| <= span[|dy|].
  std::vector<int> span(static_cast<std::size_t>(radius) + 1);
  for (int dy = 0, dx = radius; dy <= radius; ++dy) {
    while (dx * dx + dy * dy > radius * radius) --dx;
    span[static_cast<std::size_t>(dy)] = dx;
  }

  PixelSet out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!pixels.contains(y, x)) continue;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int qy = y + dy;
        if (qy < 0 || qy >= h) continue;
        const int half = span[static_cast<std::size_t>(std::abs(dy))];
        const int x0 = std::max(0, x - half);
        const int x1 = std::min(w - 1, x + half);
        for (int qx = x0; qx <= x1; ++qx) out.insert(qy, qx);
      }
    }
  }
  return out;
}

inline constexpr int kDefaultBoundaryRadius = 14;

/// Boundary F-measure: precision and recall of each contour against the
/// other's disk-dilated contour, combined by harmonic mean.
inline double boundary_f(const PixelSet& p, const PixelSet& g,
                         int radius = kDefaultBoundaryRadius) {
  detail::require_same_dims(p, g, "boundary_f");
  const auto bp = boundary_pixels(p);
  const auto bg = boundary_pixels(g);
  const auto np = bp.count();
  const auto ng = bg.count();
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;

  const auto matched_p = detail::overlap(bp, dilate_disk(bg, radius)).intersection;
  const auto matched_g = detail::overlap(bg, dilate_disk(bp, radius)).intersection;
  const double precision = static_cast<double>(matched_p) / static_cast<double>(np);
  const double recall = static_cast<double>(matched_g) / static_cast<double>(ng);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

inline double j_and_f(double j, double f) {
  if (!(j >= 0.0 && j <= 1.0) || !(f >= 0.0 && f <= 1.0)) {
    throw Error(Errc::out_of_range, "J and F must lie in [0, 1]");
  }
  return (j + f) / 2.0;
}

/// IoU of the whole spatiotemporal volume, frames being disjoint time slabs.
inline double ciou(const std::vector<PixelSet>& pred, const std::vector<PixelSet>& gt) {
  if (pred.size() != gt.size()) {
    throw Error(Errc::misaligned, "ciou: " + std::to_string(pred.size()) +
                                      " predicted frames vs " +
                                      std::to_string(gt.size()) + " ground-truth frames");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    detail::require_same_dims(pred[i], gt[i], "ciou");
    const auto o = detail::overlap(pred[i], gt[i]);
    inter += o.intersection;
    uni += o.uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Sequence evaluation

struct ObjectScores {
  double j = 0.0;
  double f = 0.0;
  double jf = 0.0;
  double dice = 0.0;
  double ciou = 0.0;
};

struct FrameScores {
  ObjectId object_id = 0;
  FrameIndex frame_index = 0;
  double j = 0.0;
  double f = 0.0;
  double dice = 0.0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};

struct MetricReport {
  int radius = kDefaultBoundaryRadius;
  std::map<ObjectId, ObjectScores> per_object;
  std::vector<FrameScores> per_frame;  // sorted by (object, frame)
  // Across objects.
  MeanSd j, f, jf, dice, ciou;
};

inline MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

/// Scores every object id that occurs in `gt` (or exactly `objects`, when
/// given). Background is never scored.
inline MetricReport evaluate(const FrameSequence<LabelMask>& pred,
                             const FrameSequence<LabelMask>& gt,
                             int radius = kDefaultBoundaryRadius,
                             std::optional<std::vector<ObjectId>> objects = std::nullopt) {
  if (pred.size() != gt.size()) {
    throw Error(Errc::misaligned, "evaluate: " + std::to_string(pred.size()) +
                                      " predicted frames vs " + std::to_string(gt.size()) +
                                      " ground-truth frames");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i].frame_index() != gt[i].frame_index()) {
      throw Error(Errc::misaligned, "evaluate: frame " + std::to_string(gt[i].frame_index()) +
                                        " paired with predicted frame " +
                                        std::to_string(pred[i].frame_index()));
    }
    if (pred[i].height() != gt[i].height() || pred[i].width() != gt[i].width()) {
      throw Error(Errc::dimension_mismatch,
                  "evaluate: frame " + std::to_string(gt[i].frame_index()) +
                      " has different dimensions in prediction and ground truth");
    }
  }
  if (radius < 0) throw Error(Errc::out_of_range, "radius must be >= 0");

  std::set<ObjectId> present;
  for (const auto& m : gt) {
    for (auto v : m.labels()) {
      if (v != 0) present.insert(v);
    }
  }
  std::vector<ObjectId> ids;
  if (objects) {
    for (auto id : *objects) {
      if (id == 0 || !present.contains(id)) {
        throw Error(Errc::absent_object,
                    "object id " + std::to_string(id) + " is absent from every ground-truth frame");
      }
    }
    ids = *objects;
    std::ranges::sort(ids);
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  } else {
    ids.assign(present.begin(), present.end());
  }

  MetricReport report;
  report.radius = radius;
  std::vector<double> js, fs, jfs, dices, cious;
  for (auto id : ids) {
    std::vector<PixelSet> ps, gs;
    ps.reserve(gt.size());
    gs.reserve(gt.size());
    double sum_j = 0.0, sum_f = 0.0, sum_d = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      ps.push_back(PixelSet::from_mask(pred[i], id));
      gs.push_back(PixelSet::from_mask(gt[i], id));
      FrameScores row{id, gt[i].frame_index(), jaccard(ps.back(), gs.back()),
                      boundary_f(ps.back(), gs.back(), radius),
                      dice(ps.back(), gs.back())};
      sum_j += row.j;
      sum_f += row.f;
      sum_d += row.dice;
      report.per_frame.push_back(row);
    }
    const double n = static_cast<double>(gt.size());
    ObjectScores s;
    s.j = sum_j / n;
    s.f = sum_f / n;
    s.jf = j_and_f(std::clamp(s.j, 0.0, 1.0), std::clamp(s.f, 0.0, 1.0));
    s.dice = sum_d / n;
    s.ciou = ciou(ps, gs);
    report.per_object.emplace(id, s);
    js.push_back(s.j);
    fs.push_back(s.f);
    jfs.push_back(s.jf);
    dices.push_back(s.dice);
    cious.push_back(s.ciou);
  }
  report.j = mean_sd(js);
  report.f = mean_sd(fs);
  report.jf = mean_sd(jfs);
  report.dice = mean_sd(dices);
  report.ciou = mean_sd(cious);
  return report;
}

}  // namespace tsms
