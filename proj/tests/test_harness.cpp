#include <gtest/gtest.h>

#include "tsms/harness.hpp"
#include "tsms/metrics.hpp"

using namespace tsms;

namespace {

int left_edge(const LabelMask& m) {
  for (int x = 0; x < m.width(); ++x) {
    for (int y = 0; y < m.height(); ++y) {
      if (m.at(y, x) != 0) return x;
    }
  }
  return -1;
}

std::size_t object_pixels(const LabelMask& m) {
  std::size_t n = 0;
  for (auto v : m.labels()) n += v != 0;
  return n;
}

SceneConfig moving_scene() {
  SceneConfig s;
  s.height = 32;
  s.width = 32;
  s.size = 6;
  s.x0 = 2;
  s.y0 = 4;
  s.vx = 1;
  s.vy = 1;
  s.n_frames = 20;
  s.seed = 17;
  return s;
}

}  // namespace

TEST(Scene, SquareKinematics) {
  SceneConfig s;
  s.height = 32;
  s.width = 32;
  s.size = 4;
  s.vx = 2;
  s.n_frames = 5;
  const auto scene = generate_scene(s);
  ASSERT_EQ(scene.size(), 5u);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(left_edge(scene[t]), 2 * t);
    EXPECT_EQ(object_pixels(scene[t]), 16u);
    EXPECT_EQ(scene[t].frame_index(), t);
  }
}

TEST(Scene, GapsHideTheObject) {
  SceneConfig s;
  s.height = 16;
  s.width = 16;
  s.size = 4;
  s.n_frames = 5;
  s.gaps = {{2, 3}};
  const auto scene = generate_scene(s);
  EXPECT_EQ(object_pixels(scene[1]), 16u);
  EXPECT_EQ(object_pixels(scene[2]), 0u);
  EXPECT_EQ(object_pixels(scene[3]), 0u);
  EXPECT_EQ(object_pixels(scene[4]), 16u);
}

TEST(Scene, StaticObjectRepeats) {
  SceneConfig s;
  s.height = 16;
  s.width = 16;
  s.n_frames = 5;
  const auto scene = generate_scene(s);
  for (int t = 1; t < 5; ++t) EXPECT_TRUE(scene[t].same_pixels(scene[0]));
}

TEST(Scene, ClipsAtBorderAndDrawsDisks) {
  SceneConfig s;
  s.height = 16;
  s.width = 16;
  s.size = 4;
  s.x0 = 12;
  s.vx = 2;
  s.n_frames = 3;
  const auto scene = generate_scene(s);
  EXPECT_EQ(object_pixels(scene[1]), 8u);
  EXPECT_EQ(object_pixels(scene[2]), 0u);

  SceneConfig d;
  d.height = 16;
  d.width = 16;
  d.shape = ObjectShape::disk;
  d.size = 2;
  d.n_frames = 1;
  EXPECT_EQ(object_pixels(generate_scene(d)[0]), 13u);  // lattice points within radius 2
}

TEST(Scene, InvalidGeometry) {
  SceneConfig s;
  s.height = 8;
  s.width = 8;
  s.size = 9;
  EXPECT_THROW(generate_scene(s), Error);
  s.size = 4;
  s.x0 = 5;
  EXPECT_THROW(generate_scene(s), Error);
  s.x0 = 0;
  s.n_frames = 0;
  EXPECT_THROW(generate_scene(s), Error);
  s.n_frames = 3;
  s.gaps = {{2, 1}};
  EXPECT_THROW(generate_scene(s), Error);
}

TEST(Encoder, BackgroundNoiseless) {
  const auto m = encode_frame(LabelMask::background(0, 16, 16), ToyEncoderConfig{4, 4, 0.0}, 1, 0);
  ASSERT_EQ(m.channels(), 4);
  for (double v : m.channel(0)) EXPECT_EQ(v, 0.0);
  for (double v : m.channel(3)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(m.at(1, 0, 0), 0.125);
  EXPECT_EQ(m.at(1, 0, 3), 0.875);
  EXPECT_EQ(m.at(2, 3, 0), 0.875);
}

TEST(Encoder, OccupancyIsBlockMean) {
  SceneConfig s;
  s.height = 16;
  s.width = 16;
  s.size = 6;
  s.n_frames = 1;
  const auto m = encode_frame(generate_scene(s)[0], ToyEncoderConfig{4, 4, 0.0}, 0, 0);
  EXPECT_EQ(m.at(0, 0, 0), 1.0);
  EXPECT_EQ(m.at(0, 0, 1), 0.5);   // columns 4..5 of 4..7
  EXPECT_EQ(m.at(0, 1, 1), 0.25);  // rows 4..5 × columns 4..5
  EXPECT_EQ(m.at(0, 2, 2), 0.0);
}

TEST(Encoder, DeterministicNoiseKeyedByFrame) {
  const auto mask = LabelMask::background(0, 8, 8);
  const ToyEncoderConfig cfg{4, 4, 0.3};
  const auto a = encode_frame(mask, cfg, 9, 5);
  const auto b = encode_frame(mask, cfg, 9, 5);
  EXPECT_TRUE(approx_equal(a, b, 0.0));
  const auto c = encode_frame(mask, cfg, 9, 6);
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < a.plane_size(); ++i) EXPECT_EQ(a.channel(ch)[i], c.channel(ch)[i]);
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.plane_size(); ++i) differs |= a.channel(3)[i] != c.channel(3)[i];
  EXPECT_TRUE(differs);
  EXPECT_FALSE(approx_equal(a, encode_frame(mask, cfg, 10, 5), 0.0));
}

TEST(Encoder, RejectsIndivisibleResolution) {
  EXPECT_THROW(encode_frame(LabelMask::background(0, 10, 10), ToyEncoderConfig{4, 4, 0.0}, 0, 0), Error);
  EXPECT_THROW(encode_frame(LabelMask::background(0, 4, 4), ToyEncoderConfig{8, 8, 0.0}, 0, 0), Error);
}

TEST(Track, StaticNoiselessSceneIsPerfect) {
  SceneConfig s;
  s.height = 32;
  s.width = 32;
  s.size = 8;
  s.x0 = 10;
  s.y0 = 10;
  s.n_frames = 20;
  const auto scene = generate_scene(s);
  const auto result = track_sequence(scene, TrackerConfig{}, 0);
  ASSERT_EQ(result.predicted.size(), scene.size());
  for (std::size_t t = 0; t < scene.size(); ++t) {
    EXPECT_TRUE(result.predicted[t].same_pixels(scene[0]));
    EXPECT_EQ(dice(PixelSet::from_mask(result.predicted[t], 1), PixelSet::from_mask(scene[t], 1)), 1.0);
  }
}

TEST(Track, GatingAndReadoutCost) {
  const auto scene = generate_scene(moving_scene());
  TrackerConfig cfg;
  cfg.encoder = {8, 8, 0.05};
  const auto result = track_sequence(scene, cfg, 17);
  const auto& steps = result.trace.steps;
  const std::size_t hw = 64;
  ASSERT_EQ(steps.size(), 19u);
  for (std::size_t t = 1; t < 7; ++t) {
    EXPECT_FALSE(steps[t - 1].prune_fired);
    EXPECT_EQ(steps[t - 1].readout_cost, t * hw);
  }
  EXPECT_EQ(steps[2].readout_cost, 3 * hw);
  // First full bank at step 7.
  EXPECT_TRUE(steps[6].prune_fired);
  EXPECT_EQ(steps[6].bank_before.size(), 7u);
  EXPECT_EQ(steps[6].retained.size(), 5u);
  EXPECT_EQ(readout_cost(result.trace)[6], 5 * hw);
  // Persistent mode alternates 7 (prune) / 6 (no prune).
  EXPECT_FALSE(steps[7].prune_fired);
  EXPECT_EQ(steps[7].readout_cost, 6 * hw);
  EXPECT_TRUE(steps[8].prune_fired);

  cfg.prune_enabled = false;
  const auto unpruned = track_sequence(scene, cfg, 17);
  EXPECT_EQ(unpruned.trace.steps[6].readout_cost, 7 * hw);
  EXPECT_EQ(unpruned.trace.steps.back().readout_cost, 7 * hw);

  cfg.prune_enabled = true;
  cfg.mode = PruneMode::select;
  const auto selected = track_sequence(scene, cfg, 17);
  for (std::size_t i = 6; i < selected.trace.steps.size(); ++i) {
    EXPECT_TRUE(selected.trace.steps[i].prune_fired);
    EXPECT_EQ(selected.trace.steps[i].readout_cost, 5 * hw);
    EXPECT_EQ(selected.trace.steps[i].bank_before.size(), 7u);
  }
}

TEST(Track, Deterministic) {
  const auto scene = generate_scene(moving_scene());
  TrackerConfig cfg;
  cfg.encoder = {8, 8, 0.2};
  const auto a = track_sequence(scene, cfg, 5);
  const auto b = track_sequence(scene, cfg, 5);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.predicted.frames(), b.predicted.frames());
}

TEST(Track, DuplicatePruningDoesNotChangePredictions) {
  SceneConfig s;
  s.height = 32;
  s.width = 32;
  s.size = 8;
  s.x0 = 4;
  s.y0 = 4;
  s.n_frames = 20;
  s.gaps = {{8, 10}};
  const auto scene = generate_scene(s);
  TrackerConfig off;
  off.prune_enabled = false;
  const auto base = track_sequence(scene, off, 0);
  for (auto mode : {PruneMode::persistent, PruneMode::select}) {
    TrackerConfig on;
    on.mode = mode;
    const auto pruned = track_sequence(scene, on, 0);
    EXPECT_EQ(pruned.predicted.frames(), base.predicted.frames());
  }
}

TEST(Track, NeedsTwoFrames) {
  SceneConfig s;
  s.height = 8;
  s.width = 8;
  s.size = 2;
  s.n_frames = 1;
  try {
    track_sequence(generate_scene(s), TrackerConfig{}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_range);
  }
}
