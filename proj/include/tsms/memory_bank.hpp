#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsms/core.hpp"
#include "tsms/similarity.hpp"

namespace tsms {

/// One stored frame: its memory features plus the mask that went with it.
class MemoryEntry {
 public:
  MemoryEntry(FeatureMap features, LabelMask mask)
      : features_(std::move(features)), mask_(std::move(mask)) {
    if (features_.frame_index() != mask_.frame_index()) {
      throw Error(Errc::misaligned,
                  "memory entry features are frame " +
                      std::to_string(features_.frame_index()) + " but mask is frame " +
                      std::to_string(mask_.frame_index()));
    }
  }

  [[nodiscard]] FrameIndex frame_index() const noexcept { return features_.frame_index(); }
  [[nodiscard]] const FeatureMap& features() const noexcept { return features_; }
  [[nodiscard]] const LabelMask& mask() const noexcept { return mask_; }

 private:
  FeatureMap features_;
  LabelMask mask_;
};

enum class PruneMode {
  persistent,  // survivors replace the bank contents
  select,      // survivors are a per-step view; the bank is left intact
};

constexpr std::string_view to_string(PruneMode m) noexcept {
  return m == PruneMode::persistent ? "persistent" : "select";
}

inline std::optional<PruneMode> parse_prune_mode(std::string_view name) {
  if (name == "persistent") return PruneMode::persistent;
  if (name == "select") return PruneMode::select;
  return std::nullopt;
}

/// A reference frame and the candidates scored against it.
struct MemoryGroup {
  MemoryEntry reference;
  std::vector<MemoryEntry> candidates;  // oldest -> newest
};

struct BankSplit {
  MemoryGroup short_term;  // reference = newest entry
  MemoryGroup long_term;   // reference = oldest entry
};

struct GroupScores {
  FrameIndex reference = 0;
  std::map<FrameIndex, double> scores;

  friend bool operator==(const GroupScores&, const GroupScores&) = default;
};

struct PruneOutcome {
  bool fired = false;
  std::vector<MemoryEntry> retained;  // temporal order
  std::vector<FrameIndex> pruned_frame_indices;  // ascending
  std::vector<GroupScores> groups;  // short-term first, then long-term; empty if !fired

  [[nodiscard]] std::vector<FrameIndex> retained_frame_indices() const {
    std::vector<FrameIndex> out;
    out.reserve(retained.size());
    for (const auto& e : retained) out.push_back(e.frame_index());
    return out;
  }
};

/// Scores every candidate of `group` against its reference. The reference
/// itself is never scored.
inline std::map<FrameIndex, double> redundancy_scores(SimilarityMetric metric,
                                                      const MemoryGroup& group) {
  if (group.candidates.empty()) {
    throw Error(Errc::empty_candidates,
                "group with reference frame " +
                    std::to_string(group.reference.frame_index()) + " has no candidates");
  }
  std::map<FrameIndex, double> scores;
  for (const auto& candidate : group.candidates) {
    scores.emplace(candidate.frame_index(),
                   similarity(metric, group.reference.features(), candidate.features()));
  }
  return scores;
}

/// Highest score wins; among equal scores the smallest frame index wins.
inline FrameIndex most_redundant(const std::map<FrameIndex, double>& scores) {
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

/// FIFO store of the last `capacity` frames, split into a short-term half
/// (newest ceil(n/2) entries) and a long-term half (the rest) for pruning.
class MemoryBank {
 public:
  static constexpr int kDefaultCapacity = 7;

  explicit MemoryBank(int capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity < 2) {
      throw Error(Errc::invalid_config,
                  "memory bank capacity must be >= 2, got " + std::to_string(capacity));
    }
  }

  [[nodiscard]] int capacity() const noexcept { return capacity_; }
  [[nodiscard]] int short_size() const noexcept { return (capacity_ + 1) / 2; }
  [[nodiscard]] int long_size() const noexcept { return capacity_ - short_size(); }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] bool full() const noexcept {
    return entries_.size() == static_cast<std::size_t>(capacity_);
  }
  [[nodiscard]] const std::deque<MemoryEntry>& entries() const noexcept { return entries_; }

  [[nodiscard]] std::vector<FrameIndex> frame_indices() const {
    std::vector<FrameIndex> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.frame_index());
    return out;
  }

  /// Appends the newest frame, evicting the oldest if the bank is full.
  void append(MemoryEntry entry) {
    if (!entries_.empty() && entry.frame_index() <= entries_.back().frame_index()) {
      throw Error(Errc::ordering,
                  "append frame " + std::to_string(entry.frame_index()) +
                      " is not newer than bank head " +
                      std::to_string(entries_.back().frame_index()));
    }
    if (full()) entries_.pop_front();
    entries_.push_back(std::move(entry));
  }

  [[nodiscard]] BankSplit split() const {
    if (!full()) {
      throw Error(Errc::bank_not_full,
                  "split needs a full bank (" + std::to_string(capacity_) +
                      " entries), have " + std::to_string(entries_.size()));
    }
    const auto n = static_cast<std::size_t>(capacity_);
    const auto first_short = n - static_cast<std::size_t>(short_size());
    const auto n_long = static_cast<std::size_t>(long_size());

    BankSplit out{
        MemoryGroup{entries_[n - 1], {}},
        MemoryGroup{entries_[0], {}},
    };
    for (std::size_t i = first_short; i + 1 < n; ++i) {
      out.short_term.candidates.push_back(entries_[i]);
    }
    for (std::size_t i = 1; i < n_long; ++i) {
      out.long_term.candidates.push_back(entries_[i]);
    }
    return out;
  }

  /// Below capacity nothing happens. On a full bank each group drops its
  /// most redundant candidate. A group holding only its reference (n < 4)
  /// has nothing to drop.
  PruneOutcome prune_step(SimilarityMetric metric, PruneMode mode = PruneMode::persistent) {
    PruneOutcome outcome;
    if (!full()) {
      outcome.retained.assign(entries_.begin(), entries_.end());
      return outcome;
    }
    outcome.fired = true;

    const auto groups = split();
    for (const MemoryGroup* group : {&groups.short_term, &groups.long_term}) {
      GroupScores gs{group->reference.frame_index(), {}};
      if (!group->candidates.empty()) {
        gs.scores = redundancy_scores(metric, *group);
        outcome.pruned_frame_indices.push_back(most_redundant(gs.scores));
      }
      outcome.groups.push_back(std::move(gs));
    }
    std::ranges::sort(outcome.pruned_frame_indices);

    for (const auto& e : entries_) {
      if (!std::ranges::binary_search(outcome.pruned_frame_indices, e.frame_index())) {
        outcome.retained.push_back(e);
      }
    }
    if (mode == PruneMode::persistent) {
      entries_.assign(outcome.retained.begin(), outcome.retained.end());
    }
    return outcome;
  }

 private:
  int capacity_;
  std::deque<MemoryEntry> entries_;
};

inline BankSplit split(const MemoryBank& bank) { return bank.split(); }

inline PruneOutcome prune_step(MemoryBank& bank, SimilarityMetric metric,
                               PruneMode mode = PruneMode::persistent) {
  return bank.prune_step(metric, mode);
}

}  // namespace tsms
