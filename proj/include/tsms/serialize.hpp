#pragma once

// JSON documents emitted by the tools. Keys are written in a fixed order and
// carry no timestamps, so identical runs give byte-identical files.

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsms/harness.hpp"
#include "tsms/memory_bank.hpp"
#include "tsms/metrics.hpp"
#include "tsms/sampler.hpp"
#include "tsms/similarity.hpp"

namespace tsms {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline Json to_json(const SamplingPlan& plan) {
  Json views = Json::array();
  for (const auto& v : plan.views) {
    views.push_back(Json{{"stride", v.stride}, {"phase", v.phase}, {"indices", v.indices}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"clip_length", plan.clip_length}, {"views", views}};
}

inline Json to_json(const GroupScores& g, std::string_view name) {
  Json candidates = Json::array();
  for (const auto& [frame, score] : g.scores) {
    candidates.push_back(Json{{"frame", frame}, {"score", score}});
  }
  return Json{{"group", name}, {"reference", g.reference}, {"candidates", candidates}};
}

inline Json groups_to_json(const std::vector<GroupScores>& groups) {
  Json out = Json::array();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    out.push_back(to_json(groups[i], i == 0 ? "short_term" : "long_term"));
  }
  return out;
}

/// One line of a `prune` trace.
inline Json prune_record(std::size_t step, const std::vector<FrameIndex>& bank_before,
                         const PruneOutcome& outcome, PruneMode mode, SimilarityMetric metric) {
  return Json{{"schema_version", kSchemaVersion},
              {"step", step},
              {"bank_before", bank_before},
              {"fired", outcome.fired},
              {"scores", groups_to_json(outcome.groups)},
              {"pruned", outcome.pruned_frame_indices},
              {"retained", outcome.retained_frame_indices()},
              {"mode", to_string(mode)},
              {"metric", to_string(metric)}};
}

/// One line of a `simulate` trace.
inline Json track_record(const TrackStep& s, const TrackerConfig& config) {
  return Json{{"schema_version", kSchemaVersion},
              {"step", s.step},
              {"frame_index", s.frame_index},
              {"bank_before", s.bank_before},
              {"fired", s.prune_fired},
              {"scores", groups_to_json(s.group_scores)},
              {"pruned", s.pruned},
              {"retained", s.retained},
              {"readout_frame", s.readout_frame},
              {"readout_score", s.readout_score},
              {"readout_cost", s.readout_cost},
              {"bank_after", s.bank_after},
              {"mode", config.prune_enabled ? std::string(to_string(config.mode)) : "disabled"},
              {"metric", to_string(config.metric)}};
}

inline std::string to_json_lines(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric reports

/// Which columns a report shows. Everything is always computed.
struct MetricSelection {
  bool j = true, f = true, jf = true, dice = true, ciou = true;

  static MetricSelection parse(std::string_view list) {
    MetricSelection s{false, false, false, false, false};
    std::size_t start = 0;
    while (start <= list.size()) {
      auto end = list.find(',', start);
      if (end == std::string_view::npos) end = list.size();
      const auto name = list.substr(start, end - start);
      if (name == "J") s.j = true;
      else if (name == "F") s.f = true;
      else if (name == "JF" || name == "J&F") s.jf = true;
      else if (name == "Dice") s.dice = true;
      else if (name == "CIoU") s.ciou = true;
      else throw Error(Errc::invalid_config, "unknown metric '" + std::string(name) + "' (use J,F,JF,Dice,CIoU)");
      start = end + 1;
    }
    return s;
  }
};

inline Json to_json(const MetricReport& r, const MetricSelection& sel = {}) {
  auto scores = [&](double j, double f, double jf, double d, double c) {
    Json o = Json::object();
    if (sel.j) o["J"] = j;
    if (sel.f) o["F"] = f;
    if (sel.jf) o["JF"] = jf;
    if (sel.dice) o["Dice"] = d;
    if (sel.ciou) o["CIoU"] = c;
    return o;
  };
  auto ms = [](const MeanSd& m) { return Json{{"mean", m.mean}, {"sd", m.sd}}; };

  Json objects = Json::array();
  for (const auto& [id, s] : r.per_object) {
    Json o{{"id", id}};
    o.update(scores(s.j, s.f, s.jf, s.dice, s.ciou));
    objects.push_back(o);
  }
  Json aggregate = Json::object();
  if (sel.j) aggregate["J"] = ms(r.j);
  if (sel.f) aggregate["F"] = ms(r.f);
  if (sel.jf) aggregate["JF"] = ms(r.jf);
  if (sel.dice) aggregate["Dice"] = ms(r.dice);
  if (sel.ciou) aggregate["CIoU"] = ms(r.ciou);

  Json frames = Json::array();
  for (const auto& row : r.per_frame) {
    Json o{{"object", row.object_id}, {"frame", row.frame_index}};
    if (sel.j) o["J"] = row.j;
    if (sel.f) o["F"] = row.f;
    if (sel.dice) o["Dice"] = row.dice;
    frames.push_back(o);
  }
  return Json{{"schema_version", kSchemaVersion},
              {"radius", r.radius},
              {"objects", objects},
              {"aggregate", aggregate},
              {"per_frame", frames}};
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

/// Aligned text table, percentages to two decimals, "mean±sd" summary row.
inline std::string format_report_table(const MetricReport& r, const MetricSelection& sel = {}) {
  std::vector<std::string> header{"object"};
  if (sel.j) header.emplace_back("J");
  if (sel.f) header.emplace_back("F");
  if (sel.jf) header.emplace_back("J&F");
  if (sel.dice) header.emplace_back("Dice");
  if (sel.ciou) header.emplace_back("CIoU");

  std::vector<std::vector<std::string>> rows{header};
  for (const auto& [id, s] : r.per_object) {
    std::vector<std::string> row{std::to_string(id)};
    if (sel.j) row.push_back(percent(s.j));
    if (sel.f) row.push_back(percent(s.f));
    if (sel.jf) row.push_back(percent(s.jf));
    if (sel.dice) row.push_back(percent(s.dice));
    if (sel.ciou) row.push_back(percent(s.ciou));
    rows.push_back(std::move(row));
  }
  auto pm = [](const MeanSd& m) { return percent(m.mean) + "±" + percent(m.sd); };
  std::vector<std::string> summary{"mean±sd"};
  if (sel.j) summary.push_back(pm(r.j));
  if (sel.f) summary.push_back(pm(r.f));
  if (sel.jf) summary.push_back(pm(r.jf));
  if (sel.dice) summary.push_back(pm(r.dice));
  if (sel.ciou) summary.push_back(pm(r.ciou));
  rows.push_back(std::move(summary));

  // Column widths in code points; "±" is two bytes in UTF-8.
  auto display_width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xc0) != 0x80;
    return n;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto pad = widths[i] - display_width(row[i]);
      if (i == 0) {
        out << row[i] << std::string(pad, ' ');
      } else {
        out << "  " << std::string(pad, ' ') << row[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Run configuration

/// Every tunable the tools accept. Defaults reproduce the reference setup:
/// capacity 7, cosine, strides {1, 2}, boundary radius 14.
struct RunConfig {
  // memory bank
  int capacity = MemoryBank::kDefaultCapacity;
  SimilarityMetric metric = SimilarityMetric::cosine;
  PruneMode mode = PruneMode::persistent;
  bool prune = true;
  // sampler
  std::vector<int> strides{1, 2};
  PhasePolicy phase_policy = PhasePolicy::zero;
  std::optional<std::size_t> max_frames;
  // metrics
  int radius = kDefaultBoundaryRadius;
  std::string metrics = "J,F,JF,Dice,CIoU";
  // harness
  SceneConfig scene;
  ToyEncoderConfig encoder;
  std::uint64_t seed = 0;
  // paths
  std::string pred;
  std::string gt;
  std::string features;
  std::string out;
};

namespace detail {

template <class E, class Parse>
E enum_field(const Json& v, std::string_view key, Parse parse) {
  if (!v.is_string()) throw Error(Errc::invalid_config, std::string(key) + " must be a string");
  const auto parsed = parse(v.get<std::string>());
  if (!parsed) throw Error(Errc::invalid_config, std::string(key) + ": unknown value '" + v.get<std::string>() + "'");
  return *parsed;
}

}  // namespace detail

/// Unknown keys are rejected; missing keys keep their defaults.
inline RunConfig run_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(Errc::invalid_config, "run config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "schema_version") {
        if (v.get<int>() != kSchemaVersion) {
          throw Error(Errc::unsupported_version, "run config schema_version " + v.dump() + " is not supported");
        }
      }
      else if (key == "capacity") c.capacity = v.get<int>();
      else if (key == "metric") c.metric = detail::enum_field<SimilarityMetric>(v, key, parse_metric);
      else if (key == "mode") c.mode = detail::enum_field<PruneMode>(v, key, parse_prune_mode);
      else if (key == "prune") c.prune = v.get<bool>();
      else if (key == "strides") c.strides = v.get<std::vector<int>>();
      else if (key == "phase_policy") c.phase_policy = detail::enum_field<PhasePolicy>(v, key, parse_phase_policy);
      else if (key == "max_frames") {
        if (v.is_null()) c.max_frames.reset();
        else c.max_frames = v.get<std::size_t>();
      }
      else if (key == "radius") c.radius = v.get<int>();
      else if (key == "metrics") c.metrics = v.get<std::string>();
      else if (key == "height") c.scene.height = v.get<int>();
      else if (key == "width") c.scene.width = v.get<int>();
      else if (key == "shape") c.scene.shape = detail::enum_field<ObjectShape>(v, key, parse_shape);
      else if (key == "size") c.scene.size = v.get<int>();
      else if (key == "x0") c.scene.x0 = v.get<int>();
      else if (key == "y0") c.scene.y0 = v.get<int>();
      else if (key == "vx") c.scene.vx = v.get<int>();
      else if (key == "vy") c.scene.vy = v.get<int>();
      else if (key == "frames") c.scene.n_frames = v.get<int>();
      else if (key == "gaps") {
        c.scene.gaps.clear();
        for (const auto& g : v) {
          const auto pair = g.get<std::vector<FrameIndex>>();
          if (pair.size() != 2) throw Error(Errc::invalid_config, "each gap must be [first, last]");
          c.scene.gaps.push_back({pair[0], pair[1]});
        }
      }
      else if (key == "feature_height") c.encoder.feature_height = v.get<int>();
      else if (key == "feature_width") c.encoder.feature_width = v.get<int>();
      else if (key == "sigma") c.encoder.noise_sigma = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "pred") c.pred = v.get<std::string>();
      else if (key == "gt") c.gt = v.get<std::string>();
      else if (key == "features") c.features = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else throw Error(Errc::unknown_key, "unknown run config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("run config: ") + e.what());
  }
  return c;
}

inline Json to_json(const RunConfig& c) {
  Json gaps = Json::array();
  for (const auto& g : c.scene.gaps) gaps.push_back(Json::array({g.first, g.last}));
  return Json{{"schema_version", kSchemaVersion},
              {"capacity", c.capacity},
              {"metric", to_string(c.metric)},
              {"mode", to_string(c.mode)},
              {"prune", c.prune},
              {"strides", c.strides},
              {"phase_policy", to_string(c.phase_policy)},
              {"max_frames", c.max_frames ? Json(*c.max_frames) : Json(nullptr)},
              {"radius", c.radius},
              {"metrics", c.metrics},
              {"height", c.scene.height},
              {"width", c.scene.width},
              {"shape", to_string(c.scene.shape)},
              {"size", c.scene.size},
              {"x0", c.scene.x0},
              {"y0", c.scene.y0},
              {"vx", c.scene.vx},
              {"vy", c.scene.vy},
              {"frames", c.scene.n_frames},
              {"gaps", gaps},
              {"feature_height", c.encoder.feature_height},
              {"feature_width", c.encoder.feature_width},
              {"sigma", c.encoder.noise_sigma},
              {"seed", c.seed},
              {"pred", c.pred},
              {"gt", c.gt},
              {"features", c.features},
              {"out", c.out}};
}

}  // namespace tsms
