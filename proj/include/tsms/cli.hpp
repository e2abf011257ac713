#pragma once

// Command-line front end: sample | prune | eval | simulate.
//
// Every subcommand accepts --config FILE (a JSON RunConfig); flags given on
// the command line override values from the file. Failures print one line
//   tsms: error[<code>]: <message>
// to the error stream and return a nonzero status (2 for usage errors).

#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"

#include "tsms/core.hpp"
#include "tsms/harness.hpp"
#include "tsms/io.hpp"
#include "tsms/memory_bank.hpp"
#include "tsms/metrics.hpp"
#include "tsms/sampler.hpp"
#include "tsms/serialize.hpp"

namespace tsms::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

/// Looks for --config ahead of the real parse so file values become the
/// defaults that explicit flags then override.
inline RunConfig preload_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    Json doc;
    try {
      doc = Json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_config, path + ": " + e.what());
    }
    return run_config_from_json(doc);
  }
  return {};
}

template <class E, class Parse>
E parse_enum(const std::string& value, std::string_view flag, Parse parse) {
  const auto parsed = parse(value);
  if (!parsed) throw Error(Errc::invalid_config, "--" + std::string(flag) + ": unknown value '" + value + "'");
  return *parsed;
}

inline Gap parse_gap(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const FrameIndex v = std::stoll(text);
      return {v, v};
    }
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::invalid_config, "--gap expects FIRST:LAST, got '" + text + "'");
  }
}

inline void emit(const std::string& out_path, const std::string& payload, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << payload;
  } else {
    io::atomic_write(out_path, payload);
  }
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  auto fail = [&](std::string_view code, const std::string& message, int status) {
    err << "tsms: error[" << code << "]: " << message << '\n';
    return status;
  };

  RunConfig cfg;
  try {
    cfg = detail::preload_config(args);
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(), kExitFailure);
  }

  CLI::App app{"Memory pruning, temporal sampling, and segmentation metrics for video object tracking", "tsms"};
  app.require_subcommand(1);
  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config; flags override its values");
  };

  std::string metric_name(to_string(cfg.metric));
  std::string mode_name(to_string(cfg.mode));
  std::string phase_name(to_string(cfg.phase_policy));
  std::string shape_name(to_string(cfg.scene.shape));
  std::size_t max_frames = cfg.max_frames.value_or(0);
  std::vector<std::string> gap_texts;
  bool no_prune = !cfg.prune;
  bool json_stdout = false;
  std::size_t clip_length = 0;

  auto add_bank_flags = [&](CLI::App* sub) {
    sub->add_option("--capacity", cfg.capacity, "memory bank capacity n")->capture_default_str();
    sub->add_option("--metric", metric_name, "cosine|manhattan|euclidean|dot|spearman|pearson")
        ->capture_default_str();
    sub->add_option("--mode", mode_name, "persistent|select")->capture_default_str();
  };

  auto* sample = app.add_subcommand("sample", "Emit a multi-stride sampling plan as JSON");
  add_config(sample);
  sample->add_option("--length", clip_length, "clip length L")->required();
  sample->add_option("--strides", cfg.strides, "comma-separated strides")->delimiter(',')->capture_default_str();
  sample->add_option("--phase", phase_name, "zero|all")->capture_default_str();
  sample->add_option("--max-frames", max_frames, "cap on frames per view (0 = none)");
  sample->add_option("--out", cfg.out, "output file (default stdout)");

  auto* prune = app.add_subcommand("prune", "Stream a directory of tensors through the memory bank");
  add_config(prune);
  prune->add_option("--features", cfg.features, "directory of .ften tensors named by frame index");
  add_bank_flags(prune);
  prune->add_option("--out", cfg.out, "JSON-lines trace file (default stdout)");

  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  add_config(eval);
  eval->add_option("--pred", cfg.pred, "directory of predicted .pgm masks");
  eval->add_option("--gt", cfg.gt, "directory of ground-truth .pgm masks");
  eval->add_option("--radius", cfg.radius, "boundary dilation radius")->capture_default_str();
  eval->add_option("--metrics", cfg.metrics, "subset of J,F,JF,Dice,CIoU")->capture_default_str();
  eval->add_option("--out", cfg.out, "write the JSON report here");
  eval->add_flag("--json", json_stdout, "print the JSON report instead of the table");

  auto* simulate = app.add_subcommand("simulate", "Track a synthetic scene through the pruned memory bank");
  add_config(simulate);
  simulate->add_option("--height", cfg.scene.height)->capture_default_str();
  simulate->add_option("--width", cfg.scene.width)->capture_default_str();
  simulate->add_option("--shape", shape_name, "square|disk")->capture_default_str();
  simulate->add_option("--size", cfg.scene.size, "square side or disk radius")->capture_default_str();
  simulate->add_option("--x0", cfg.scene.x0)->capture_default_str();
  simulate->add_option("--y0", cfg.scene.y0)->capture_default_str();
  simulate->add_option("--vx", cfg.scene.vx, "pixels per frame")->capture_default_str();
  simulate->add_option("--vy", cfg.scene.vy, "pixels per frame")->capture_default_str();
  simulate->add_option("--frames", cfg.scene.n_frames)->capture_default_str();
  simulate->add_option("--gap", gap_texts, "FIRST:LAST frames with the object hidden (repeatable)");
  simulate->add_option("--seed", cfg.seed)->capture_default_str();
  simulate->add_option("--feature-height", cfg.encoder.feature_height)->capture_default_str();
  simulate->add_option("--feature-width", cfg.encoder.feature_width)->capture_default_str();
  simulate->add_option("--sigma", cfg.encoder.noise_sigma, "encoder noise level")->capture_default_str();
  add_bank_flags(simulate);
  simulate->add_flag("--no-prune", no_prune, "disable pruning");
  simulate->add_option("--radius", cfg.radius, "boundary dilation radius")->capture_default_str();
  simulate->add_option("--out", cfg.out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    return fail("usage", e.what(), kExitUsage);
  }

  try {
    cfg.metric = detail::parse_enum<SimilarityMetric>(metric_name, "metric", parse_metric);
    cfg.mode = detail::parse_enum<PruneMode>(mode_name, "mode", parse_prune_mode);
    cfg.phase_policy = detail::parse_enum<PhasePolicy>(phase_name, "phase", parse_phase_policy);
    cfg.scene.shape = detail::parse_enum<ObjectShape>(shape_name, "shape", parse_shape);
    cfg.prune = !no_prune;
    if (sample->count("--max-frames") > 0) {
      cfg.max_frames = max_frames == 0 ? std::nullopt : std::optional<std::size_t>(max_frames);
    }
    if (!gap_texts.empty()) {
      cfg.scene.gaps.clear();
      for (const auto& g : gap_texts) cfg.scene.gaps.push_back(detail::parse_gap(g));
    }

    if (sample->parsed()) {
      SamplingConfig sc{cfg.strides, cfg.phase_policy, cfg.max_frames};
      const auto plan = build_plan(clip_length, sc);
      detail::emit(cfg.out, to_json(plan).dump() + "\n", out);
      return kExitOk;
    }

    if (prune->parsed()) {
      if (cfg.features.empty()) throw Error(Errc::invalid_config, "--features is required");
      MemoryBank bank(cfg.capacity);
      std::vector<Json> records;
      std::size_t step = 0;
      for (const auto& features : io::read_tensor_dir(cfg.features)) {
        // Stored masks play no part in pruning; keep a blank placeholder.
        bank.append(MemoryEntry(features, LabelMask::background(features.frame_index(), features.height(),
                                                                features.width())));
        const auto before = bank.frame_indices();
        const auto outcome = bank.prune_step(cfg.metric, cfg.mode);
        records.push_back(prune_record(step++, before, outcome, cfg.mode, cfg.metric));
      }
      detail::emit(cfg.out, to_json_lines(records), out);
      return kExitOk;
    }

    if (eval->parsed()) {
      if (cfg.pred.empty() || cfg.gt.empty()) throw Error(Errc::invalid_config, "--pred and --gt are required");
      const auto selection = MetricSelection::parse(cfg.metrics);
      const auto pred_files = io::index_directory(cfg.pred, io::kMaskExtension);
      const auto gt_files = io::index_directory(cfg.gt, io::kMaskExtension);
      for (const auto& [index, path] : gt_files) {
        const auto it = pred_files.find(index);
        if (it == pred_files.end() || it->second.filename() != path.filename()) {
          throw Error(Errc::misaligned, "no prediction named " + path.filename().string() + " in " + cfg.pred);
        }
      }
      if (pred_files.size() != gt_files.size()) {
        throw Error(Errc::misaligned, cfg.pred + " has masks with no ground-truth counterpart");
      }
      const auto report = evaluate(io::read_mask_dir(cfg.pred), io::read_mask_dir(cfg.gt), cfg.radius);
      const auto doc = to_json(report, selection).dump(2) + "\n";
      if (!cfg.out.empty()) io::atomic_write(cfg.out, doc);
      out << (json_stdout ? doc : format_report_table(report, selection));
      return kExitOk;
    }

    if (simulate->parsed()) {
      if (cfg.out.empty()) throw Error(Errc::invalid_config, "--out directory is required");
      cfg.scene.seed = cfg.seed;
      const auto scene = generate_scene(cfg.scene);
      const TrackerConfig tracker{cfg.encoder, cfg.capacity, cfg.metric, cfg.mode, cfg.prune};
      const auto result = track_sequence(scene, tracker, cfg.seed);

      const fs::path dir = cfg.out;
      io::write_mask_dir(scene, dir / "gt");
      io::write_mask_dir(result.predicted, dir / "pred");
      std::vector<Json> records;
      for (const auto& s : result.trace.steps) records.push_back(track_record(s, tracker));
      io::atomic_write(dir / "trace.jsonl", to_json_lines(records));
      const auto report = evaluate(result.predicted, scene, cfg.radius);
      io::atomic_write(dir / "report.json", to_json(report).dump(2) + "\n");
      io::atomic_write(dir / "config.json", to_json(cfg).dump(2) + "\n");
      out << format_report_table(report);
      return kExitOk;
    }
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(), kExitFailure);
  } catch (const fs::filesystem_error& e) {
    return fail(to_string(Errc::io), e.what(), kExitFailure);
  }
  return fail("usage", "no subcommand given", kExitUsage);
}

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run_command(args, out, err);
}

}  // namespace tsms::cli
