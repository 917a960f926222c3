#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "reamot/difficulty.hpp"
#include "reamot/error.hpp"
#include "reamot/ingest.hpp"
#include "reamot/metrics.hpp"
#include "reamot/propagator.hpp"
#include "reamot/report.hpp"
#include "reamot/synth.hpp"
#include "reamot/tracker.hpp"

namespace fs = std::filesystem;

namespace reamot::cli {
namespace {

std::string fmt(double v) { return format_number(v); }

// Runs a shell command and returns its standard output.
std::string capture_command(const std::string& command) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(command.c_str(), "r"), ::pclose);
  if (!pipe) throw LoadError("cannot start detector command: " + command);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
  const int status = ::pclose(pipe.release());
  if (status != 0) {
    throw LoadError("detector command failed (status " + std::to_string(status) +
                    "): " + command);
  }
  return out;
}

std::optional<FrameRange> segment_range(const std::string& segment, double fraction,
                                        std::int64_t n_frames) {
  if (segment == "all") return std::nullopt;
  const auto split = split_frames(n_frames, fraction);
  if (segment == "train") return split.train;
  if (segment == "test") return split.test;
  throw ValidationError("unknown segment '" + segment + "' (all, train or test)");
}

std::string overlay_lines(std::span<const TrackRecord> records,
                          std::span<const std::string> frame_names) {
  std::map<FrameIndex, std::vector<const TrackRecord*>> by_frame;
  for (const auto& r : records) by_frame[r.frame].push_back(&r);
  std::string out;
  for (std::size_t f = 0; f < frame_names.size(); ++f) {
    nlohmann::ordered_json j{{"frame", f}, {"frame_name", frame_names[f]},
                             {"tracks", nlohmann::ordered_json::array()}};
    if (const auto it = by_frame.find(static_cast<FrameIndex>(f)); it != by_frame.end()) {
      for (const auto* r : it->second) {
        j["tracks"].push_back(
            {{"id", r->track_id}, {"box", {r->box.x1, r->box.y1, r->box.x2, r->box.y2}}});
      }
    }
    out += j.dump() + "\n";
  }
  return out;
}

struct TrackArgs {
  std::string task;
  std::string detections;
  std::string detector;
  int max_age = kDefaultMaxAge;
  double gate = assignment::kDefaultGate;
  std::string propagator = "persist";
  int propagator_timeout_ms = 5000;
  std::optional<double> min_score;
  bool emit_propagated = false;
  std::string out;
  std::string overlay;
  std::string manifest;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
  const auto task = load_task(a.task);
  std::string stream_text;
  RunManifest manifest;
  manifest.command = "track";
  manifest.add_input(a.task);
  if (!a.detections.empty()) {
    stream_text = read_file(a.detections);
    manifest.add_input(a.detections);
  } else {
    stream_text = capture_command(a.detector);
    manifest.inputs.emplace_back("detector:" + a.detector, digest(stream_text));
  }
  const auto stream = read_detections(stream_text);

  TrackerConfig config;
  config.max_age = a.max_age;
  config.iou_gate = a.gate;
  config.min_score = a.min_score;
  config.emit_propagated = a.emit_propagated;
  config.validate();

  auto propagator = make_propagator(
      a.propagator, ExternalPropagatorOptions{std::chrono::milliseconds(a.propagator_timeout_ms)});
  const auto trajectories = run(task.frame_paths, stream, config, *propagator);
  const auto records = to_records(trajectories, config.emit_propagated);

  write_file(a.out, write_tracks(records, task.frame_names));
  if (!a.overlay.empty()) write_file(a.overlay, overlay_lines(records, task.frame_names));

  manifest.set("max_age", std::to_string(config.max_age));
  manifest.set("iou_gate", fmt(config.iou_gate));
  manifest.set("propagator", propagator->id());
  manifest.set("min_score", config.min_score ? fmt(*config.min_score) : "disabled");
  manifest.set("emit_propagated", config.emit_propagated ? "true" : "false");
  const auto manifest_path = a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  write_file(manifest_path, render_manifest_json(manifest));

  out << "tracked " << task.task_id << ": " << trajectories.size() << " trajectories, "
      << records.size() << " boxes -> " << a.out << "\n";
  return kOk;
}

struct EvalArgs {
  std::string task;
  std::string pred;
  std::string root;
  std::string pred_root;
  double tp_iou = metrics::kDefaultTpIou;
  std::string segment = "all";
  double fraction = kDefaultTrainFraction;
  bool by_level = false;
  int jobs = 1;
  std::string out;
  std::string json;
};

metrics::InstructionResult evaluate_files(const fs::path& task_dir, const fs::path& pred,
                                          const EvalArgs& a) {
  const auto task = load_task(task_dir);
  const auto predictions = parse_gt(read_file(pred));
  const auto segment = segment_range(a.segment, a.fraction, task.frame_count());
  const auto gt_seq = metrics::to_sequence(task.gt, task.frame_names, segment);
  const auto pred_seq = metrics::to_sequence(predictions, task.frame_names, segment);
  return metrics::evaluate_instruction(task.task_id, task.level, gt_seq, pred_seq, a.tp_iou);
}

void config_manifest(RunManifest& m, const EvalArgs& a) {
  m.set("tp_iou", fmt(a.tp_iou));
  m.set("segment", a.segment);
  if (a.segment != "all") m.set("train_fraction", fmt(a.fraction));
}

int emit_report(metrics::MetricsReport report, const RunManifest& manifest,
                const std::vector<std::string>& skipped, const EvalArgs& a, std::ostream& out) {
  if (!a.json.empty()) write_file(a.json, render_json(report, manifest, skipped));
  if (!a.by_level) report.by_level.clear();
  const auto text = render_text(report, manifest, skipped);
  if (a.out.empty()) {
    out << text;
  } else {
    write_file(a.out, text);
  }
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "eval";
  manifest.add_input(a.task);
  manifest.add_input(a.pred);
  config_manifest(manifest, a);
  auto result = evaluate_files(a.task, a.pred, a);
  std::vector<metrics::InstructionResult> results{std::move(result)};
  return emit_report(metrics::aggregate(std::move(results), a.tp_iou), manifest, {}, a, out);
}

int cmd_eval_suite(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "eval-suite";
  manifest.add_input(a.root);
  manifest.add_input(a.pred_root);
  config_manifest(manifest, a);
  manifest.set("jobs", std::to_string(a.jobs));

  if (!fs::is_directory(a.pred_root)) {
    throw LoadError("prediction directory not found: " + a.pred_root);
  }
  std::vector<std::pair<fs::path, fs::path>> work;
  std::vector<std::string> skipped;
  std::set<std::string> gt_ids;
  for (const auto& dir : find_tasks(a.root)) {
    const auto id = dir.filename().string();
    gt_ids.insert(id);
    const auto pred = fs::path(a.pred_root) / (id + ".txt");
    if (fs::is_regular_file(pred)) {
      work.emplace_back(dir, pred);
    } else {
      skipped.push_back(id + " (no prediction file)");
    }
  }
  std::vector<fs::path> pred_files;
  for (const auto& e : fs::directory_iterator(a.pred_root)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") pred_files.push_back(e.path());
  }
  std::sort(pred_files.begin(), pred_files.end());
  for (const auto& p : pred_files) {
    if (!gt_ids.count(p.stem().string())) {
      skipped.push_back(p.stem().string() + " (no ground-truth task)");
    }
  }
  std::sort(skipped.begin(), skipped.end());
  for (const auto& s : skipped) err << "warning: skipped " << s << "\n";

  std::vector<std::optional<metrics::InstructionResult>> results(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto k = next++; k < work.size(); k = next++) {
      try {
        results[k] = evaluate_files(work[k].first, work[k].second, a);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto n_threads =
      static_cast<std::size_t>(std::clamp<int>(a.jobs, 1, 64));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n_threads, work.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<metrics::InstructionResult> done;
  for (auto& r : results) done.push_back(std::move(*r));
  return emit_report(metrics::aggregate(std::move(done), a.tp_iou), manifest, skipped, a, out);
}

int cmd_difficulty(const std::string& attrs, bool as_json, std::ostream& out) {
  const auto tasks = difficulty::read_attributes(read_file(attrs));
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::map<int, int> histogram;
  char line[256];
  if (!as_json) {
    std::snprintf(line, sizeof line, "%-40s %5s %s\n", "task", "total", "level");
    out << line;
  }
  for (const auto& t : tasks) {
    difficulty::DifficultyResult r;
    try {
      r = difficulty::score(t.tags);
    } catch (const ValidationError& e) {
      throw ValidationError("task " + t.task_id + ": " + e.what());
    }
    ++histogram[r.total];
    if (as_json) {
      rows.push_back({{"task_id", t.task_id},
                      {"total", r.total},
                      {"level", std::string(to_string(r.level))}});
    } else {
      std::snprintf(line, sizeof line, "%-40s %5d %s\n", t.task_id.c_str(), r.total,
                    std::string(to_string(r.level)).c_str());
      out << line;
    }
  }
  if (as_json) {
    out << rows.dump(2) << "\n";
    return kOk;
  }
  out << "\nscore";
  for (const auto& [s, n] : histogram) out << " " << s << ":" << n;
  out << "\n";
  return kOk;
}

struct SynthArgs {
  int objects = 5;
  int frames = 50;
  std::uint64_t seed = 0;
  int tasks = 1;
  double miss = 0.0;
  double fp = 0.0;
  double jitter = 0.0;
  double fragment = 0.0;
  int fragment_length = 5;
  double width = 1920.0;
  double height = 1080.0;
  double min_size = 40.0;
  double max_size = 120.0;
  double max_speed = 3.0;
  double lateral = 0.0;
  std::string layout = "lanes";
  std::string split = "test";
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.tasks < 1) throw ValidationError("--tasks must be positive");
  if (a.layout != "lanes" && a.layout != "free") {
    throw ValidationError("--layout must be lanes or free");
  }
  if (a.split != "train" && a.split != "test") {
    throw ValidationError("--split must be train or test");
  }
  std::vector<difficulty::TaskAttributes> attributes;
  for (int i = 0; i < a.tasks; ++i) {
    synth::SceneSpec spec;
    spec.n_objects = a.objects;
    spec.n_frames = a.frames;
    spec.width = a.width;
    spec.height = a.height;
    spec.min_size = a.min_size;
    spec.max_size = a.max_size;
    spec.max_speed = a.max_speed;
    spec.lateral_amplitude = a.lateral;
    spec.layout = a.layout == "free" ? synth::Layout::Free : synth::Layout::Lanes;
    spec.seed = a.seed + static_cast<std::uint64_t>(i);
    const auto scene = synth::generate(spec);

    synth::CorruptionSpec c;
    c.miss_prob = a.miss;
    c.fp_rate = a.fp;
    c.jitter_sigma = a.jitter;
    c.fragment_prob = a.fragment;
    c.fragment_length = a.fragment_length;
    c.width = a.width;
    c.height = a.height;
    c.fp_min_size = a.min_size;
    c.fp_max_size = a.max_size;
    c.seed = spec.seed;
    const auto stream = synth::corrupt(scene.gt, scene.frame_names, c);

    const auto tags = synth::placeholder_tags();
    const auto level = difficulty::score(tags).level;
    const auto name = synth::task_name(spec.seed);
    const fs::path dir = a.split == "test"
                             ? fs::path(a.out) / "test" / std::string(to_string(level)) / name
                             : fs::path(a.out) / "train" / name;
    synth::emit_task(dir, scene, synth::EmitOptions{a.split == "test"});
    write_file(dir / "detections.jsonl", write_detections(stream));
    attributes.push_back({name, tags});
    out << "wrote " << dir.generic_string() << " (" << scene.gt.size() << " gt boxes, "
        << stream.box_count() << " detections)\n";
  }
  write_file(fs::path(a.out) / "attributes.jsonl", difficulty::write_attributes(attributes));
  return kOk;
}

std::string range_text(const FrameRange& r) {
  if (r.empty()) return "(empty)";
  return std::to_string(r.begin) + ".." + std::to_string(r.end - 1);
}

int cmd_split(std::optional<std::int64_t> frames, std::optional<std::int64_t> videos,
              double fraction, std::ostream& out) {
  if (frames.has_value() == videos.has_value()) {
    throw ValidationError("give exactly one of --frames or --videos");
  }
  const auto split = split_frames(frames ? *frames : *videos, fraction);
  const char* unit = frames ? "" : " (videos)";
  out << "train " << range_text(split.train) << ", test " << range_text(split.test) << unit
      << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reasoning-based multi-object tracking and evaluation toolkit", "reamot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(REAMOT_VERSION_STRING));

  TrackArgs track;
  auto* t = app.add_subcommand("track", "Run the online tracker over one task");
  t->add_option("--task", track.task, "Task directory (gt, path listing, description)")
      ->required();
  auto* det_opt = t->add_option("--detections", track.detections, "Detection stream file");
  auto* detector_opt =
      t->add_option("--detector", track.detector, "Command whose stdout is a detection stream");
  det_opt->excludes(detector_opt);
  t->add_option("--max-age", track.max_age, "Frames an unmatched track survives")
      ->capture_default_str();
  t->add_option("--gate", track.gate, "Minimum IoU for an association")->capture_default_str();
  t->add_option("--propagator", track.propagator, "persist | velocity | extern:<command>")
      ->capture_default_str();
  t->add_option("--propagator-timeout-ms", track.propagator_timeout_ms)->capture_default_str();
  t->add_option("--min-score", track.min_score, "Drop detections scoring below this");
  t->add_flag("--emit-propagated", track.emit_propagated,
              "Also write propagator boxes at unmatched frames");
  t->add_option("--out", track.out, "Track output file")->required();
  t->add_option("--overlay", track.overlay, "Per-frame box/id records for rendering");
  t->add_option("--manifest", track.manifest, "Manifest path (default <out>.manifest.json)");

  EvalArgs ev;
  auto add_eval_common = [&](CLI::App* sub) {
    sub->add_option("--tp-iou", ev.tp_iou, "IoU for a true positive")->capture_default_str();
    sub->add_option("--segment", ev.segment, "all | train | test")->capture_default_str();
    sub->add_option("--fraction", ev.fraction, "Train fraction for --segment")
        ->capture_default_str();
    sub->add_flag("--by-level", ev.by_level, "Print Easy/Medium/Hard blocks");
    sub->add_option("--out", ev.out, "Text report path (default stdout)");
    sub->add_option("--json", ev.json, "Machine-readable report path");
  };
  auto* e = app.add_subcommand("eval", "Evaluate one prediction file against one task");
  e->add_option("--task", ev.task)->required();
  e->add_option("--pred", ev.pred)->required();
  add_eval_common(e);

  auto* es = app.add_subcommand("eval-suite", "Evaluate every task below a benchmark root");
  es->add_option("--root", ev.root, "Benchmark split root, e.g. <bench>/test")->required();
  es->add_option("--pred-root", ev.pred_root, "Directory of <task_id>.txt predictions")
      ->required();
  es->add_option("--jobs", ev.jobs, "Parallel evaluations")->capture_default_str();
  add_eval_common(es);

  std::string attrs;
  bool attrs_json = false;
  auto* d = app.add_subcommand("difficulty", "Score attribute annotations");
  d->add_option("--attrs", attrs, "Attribute annotation file (JSON lines)")->required();
  d->add_flag("--json", attrs_json, "Emit JSON");

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Generate synthetic benchmark tasks");
  s->add_option("--objects", sy.objects)->capture_default_str();
  s->add_option("--frames", sy.frames)->capture_default_str();
  s->add_option("--seed", sy.seed)->capture_default_str();
  s->add_option("--tasks", sy.tasks, "Number of tasks (seeds seed..seed+tasks-1)")
      ->capture_default_str();
  s->add_option("--miss", sy.miss, "Detection miss probability")->capture_default_str();
  s->add_option("--fp", sy.fp, "Mean false positives per frame")->capture_default_str();
  s->add_option("--jitter", sy.jitter, "Box jitter sigma in pixels")->capture_default_str();
  s->add_option("--fragment", sy.fragment, "Probability an object loses a run of frames")
      ->capture_default_str();
  s->add_option("--fragment-length", sy.fragment_length)->capture_default_str();
  s->add_option("--width", sy.width)->capture_default_str();
  s->add_option("--height", sy.height)->capture_default_str();
  s->add_option("--min-size", sy.min_size)->capture_default_str();
  s->add_option("--max-size", sy.max_size)->capture_default_str();
  s->add_option("--max-speed", sy.max_speed)->capture_default_str();
  s->add_option("--lateral", sy.lateral, "Max sinusoidal lateral amplitude")
      ->capture_default_str();
  s->add_option("--layout", sy.layout, "lanes | free")->capture_default_str();
  s->add_option("--split", sy.split, "test | train")->capture_default_str();
  s->add_option("--out", sy.out, "Benchmark root to write into")->required();

  std::optional<std::int64_t> split_frames_n, split_videos_n;
  double split_fraction = kDefaultTrainFraction;
  auto* sp = app.add_subcommand("split", "Print the train/test split");
  sp->add_option("--frames", split_frames_n, "Frames in the video");
  sp->add_option("--videos", split_videos_n, "Split whole videos instead of frames");
  sp->add_option("--fraction", split_fraction)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << REAMOT_VERSION_STRING << "\n";
    return kOk;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n";
    return kInputError;
  }

  try {
    if (t->parsed()) {
      if (track.detections.empty() && track.detector.empty()) {
        throw ValidationError("track needs --detections or --detector");
      }
      return cmd_track(track, out);
    }
    if (e->parsed()) return cmd_eval(ev, out);
    if (es->parsed()) return cmd_eval_suite(ev, out, err);
    if (d->parsed()) return cmd_difficulty(attrs, attrs_json, out);
    if (s->parsed()) return cmd_synth(sy, out);
    if (sp->parsed()) return cmd_split(split_frames_n, split_videos_n, split_fraction, out);
  } catch (const EmptyEvaluationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kEmptyEvaluation;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace reamot::cli
