#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsms/error.hpp"

namespace tsms {

using FrameIndex = std::int64_t;
using ObjectId = std::uint8_t;

/// A per-frame C×H×W feature tensor, row-major with channel outermost.
///
/// Values are held as doubles whatever the on-disk precision was. The payload
/// is shared and immutable, so copies are cheap and safe across threads.
class FeatureMap {
 public:
  /// Throws Errc::dimension_mismatch or Errc::non_finite (message names the
  /// offending index).
  static FeatureMap make(FrameIndex frame_index, int channels, int height,
                         int width, std::vector<double> data) {
    if (frame_index < 0) {
      throw Error(Errc::out_of_range,
                  "frame_index must be >= 0, got " + std::to_string(frame_index));
    }
    if (channels < 1 || height < 1 || width < 1) {
      throw Error(Errc::dimension_mismatch,
                  "feature dims must be >= 1, got " + std::to_string(channels) +
                      "x" + std::to_string(height) + "x" + std::to_string(width));
    }
    const auto expected = static_cast<std::size_t>(channels) *
                          static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(width);
    if (data.size() != expected) {
      throw Error(Errc::dimension_mismatch,
                  "feature data has " + std::to_string(data.size()) +
                      " values, expected " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i])) {
        throw Error(Errc::non_finite,
                    "non-finite feature value at index " + std::to_string(i));
      }
    }
    return FeatureMap(frame_index, channels, height, width,
                      std::make_shared<const std::vector<double>>(std::move(data)));
  }

  [[nodiscard]] FrameIndex frame_index() const noexcept { return frame_index_; }
  [[nodiscard]] int channels() const noexcept { return channels_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  [[nodiscard]] std::size_t size() const noexcept { return data_->size(); }

  [[nodiscard]] std::span<const double> data() const noexcept { return *data_; }

  [[nodiscard]] std::span<const double> channel(int c) const {
    return data().subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
  }

  [[nodiscard]] double at(int c, int y, int x) const {
    return (*data_)[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  [[nodiscard]] bool same_shape(const FeatureMap& other) const noexcept {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

 private:
  FeatureMap(FrameIndex frame_index, int channels, int height, int width,
             std::shared_ptr<const std::vector<double>> data)
      : frame_index_(frame_index),
        channels_(channels),
        height_(height),
        width_(width),
        data_(std::move(data)) {}

  FrameIndex frame_index_;
  int channels_;
  int height_;
  int width_;
  std::shared_ptr<const std::vector<double>> data_;
};

inline FeatureMap make_feature_map(FrameIndex frame_index, int channels,
                                   int height, int width,
                                   std::vector<double> data) {
  return FeatureMap::make(frame_index, channels, height, width, std::move(data));
}

/// True iff shapes match and every elementwise |a - b| <= tol.
inline bool approx_equal(const FeatureMap& a, const FeatureMap& b, double tol) {
  if (!a.same_shape(b)) return false;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!(std::abs(da[i] - db[i]) <= tol)) return false;
  }
  return true;
}

/// Per-frame label map: 0 is background, 1..255 are object ids.
class LabelMask {
 public:
  static LabelMask make(FrameIndex frame_index, int height, int width,
                        std::vector<std::uint8_t> labels) {
    check_header(frame_index, height, width, labels.size());
    return LabelMask(frame_index, height, width,
                     std::make_shared<const std::vector<std::uint8_t>>(std::move(labels)));
  }

  /// Accepts wider integers and rejects anything outside 0..255.
  static LabelMask from_ints(FrameIndex frame_index, int height, int width,
                             const std::vector<int>& labels) {
    check_header(frame_index, height, width, labels.size());
    std::vector<std::uint8_t> narrowed(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || labels[i] > 255) {
        throw Error(Errc::out_of_range, "label " + std::to_string(labels[i]) +
                                            " at index " + std::to_string(i) +
                                            " does not fit in 8 bits");
      }
      narrowed[i] = static_cast<std::uint8_t>(labels[i]);
    }
    return make(frame_index, height, width, std::move(narrowed));
  }

  static LabelMask background(FrameIndex frame_index, int height, int width) {
    return make(frame_index, height, width,
                std::vector<std::uint8_t>(static_cast<std::size_t>(height) *
                                          static_cast<std::size_t>(width)));
  }

  [[nodiscard]] FrameIndex frame_index() const noexcept { return frame_index_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] std::size_t size() const noexcept { return labels_->size(); }
  [[nodiscard]] std::span<const std::uint8_t> labels() const noexcept { return *labels_; }

  [[nodiscard]] std::uint8_t at(int y, int x) const {
    return (*labels_)[static_cast<std::size_t>(y) * width_ + x];
  }

  /// Same pixels, different timestamp.
  [[nodiscard]] LabelMask with_frame_index(FrameIndex frame_index) const {
    if (frame_index < 0) {
      throw Error(Errc::out_of_range, "frame_index must be >= 0");
    }
    return LabelMask(frame_index, height_, width_, labels_);
  }

  [[nodiscard]] bool same_pixels(const LabelMask& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           std::ranges::equal(*labels_, *other.labels_);
  }

  friend bool operator==(const LabelMask& a, const LabelMask& b) noexcept {
    return a.frame_index_ == b.frame_index_ && a.same_pixels(b);
  }

 private:
  LabelMask(FrameIndex frame_index, int height, int width,
            std::shared_ptr<const std::vector<std::uint8_t>> labels)
      : frame_index_(frame_index),
        height_(height),
        width_(width),
        labels_(std::move(labels)) {}

  static void check_header(FrameIndex frame_index, int height, int width,
                           std::size_t n) {
    if (frame_index < 0) {
      throw Error(Errc::out_of_range,
                  "frame_index must be >= 0, got " + std::to_string(frame_index));
    }
    if (height < 1 || width < 1) {
      throw Error(Errc::dimension_mismatch, "mask dims must be >= 1");
    }
    const auto expected = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    if (n != expected) {
      throw Error(Errc::dimension_mismatch, "mask has " + std::to_string(n) +
                                                " labels, expected " +
                                                std::to_string(expected));
    }
  }

  FrameIndex frame_index_;
  int height_;
  int width_;
  std::shared_ptr<const std::vector<std::uint8_t>> labels_;
};

template <class T>
concept FramePayload = requires(const T& t) {
  { t.frame_index() } -> std::convertible_to<FrameIndex>;
  { t.height() } -> std::convertible_to<int>;
  { t.width() } -> std::convertible_to<int>;
};

/// Temporally ordered, non-empty run of frames sharing one spatial size.
template <FramePayload T>
class FrameSequence {
 public:
  explicit FrameSequence(std::vector<T> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) {
      throw Error(Errc::out_of_range, "frame sequence must hold at least one frame");
    }
    for (std::size_t i = 1; i < frames_.size(); ++i) {
      if (frames_[i].frame_index() <= frames_[i - 1].frame_index()) {
        throw Error(Errc::ordering,
                    "frame_index not strictly increasing at position " +
                        std::to_string(i) + " (" +
                        std::to_string(frames_[i - 1].frame_index()) + " then " +
                        std::to_string(frames_[i].frame_index()) + ")");
      }
      if (frames_[i].height() != frames_[0].height() ||
          frames_[i].width() != frames_[0].width()) {
        throw Error(Errc::dimension_mismatch,
                    "frame at position " + std::to_string(i) +
                        " has different spatial dimensions");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return frames_.size(); }
  [[nodiscard]] const T& operator[](std::size_t i) const { return frames_[i]; }
  [[nodiscard]] const std::vector<T>& frames() const noexcept { return frames_; }
  [[nodiscard]] int height() const noexcept { return frames_.front().height(); }
  [[nodiscard]] int width() const noexcept { return frames_.front().width(); }
  [[nodiscard]] auto begin() const noexcept { return frames_.begin(); }
  [[nodiscard]] auto end() const noexcept { return frames_.end(); }

 private:
  std::vector<T> frames_;
};

}  // namespace tsms
