#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reamot/difficulty.hpp"
#include "reamot/geometry.hpp"
#include "reamot/ingest.hpp"

namespace reamot::synth {

struct ObjectMotion {
  BoundingBox start;  // box at frame 0 (before any offset)
  double vx = 0.0;
  double vy = 0.0;
  // Oscillation perpendicular to the velocity (along y when at rest).
  double lateral_amplitude = 0.0;
  double lateral_period = 0.0;  // frames; 0 disables
  // Frames where the object may appear; unbounded by default.
  FrameRange visible{0, std::numeric_limits<FrameIndex>::max()};
};

enum class Layout {
  Lanes,  // one horizontal band per object; paths never overlap
  Free,   // positions and headings drawn over the whole canvas
};

struct SceneSpec {
  int n_objects = 1;
  int n_frames = 1;
  double width = 1920.0;
  double height = 1080.0;
  double min_size = 40.0;
  double max_size = 120.0;
  double max_speed = 3.0;          // pixels per frame
  double lateral_amplitude = 0.0;  // upper bound for drawn objects
  bool random_visibility = true;
  Layout layout = Layout::Lanes;
  std::uint64_t seed = 0;
  // When non-empty these are used verbatim and n_objects is ignored.
  std::vector<ObjectMotion> objects;

  void validate() const;
};

struct Scene {
  std::vector<std::string> frame_names;
  std::vector<std::string> frame_paths;
  std::vector<ObjectMotion> objects;
  std::vector<GtRecord> gt;  // sorted by frame, then object id
};

// Deterministic in the spec. Object k gets id k + 1. A box is emitted only
// while at least half of it lies on the canvas; emitted boxes are clipped to
// the canvas and rounded to 1/100 pixel.
Scene generate(const SceneSpec& spec);

struct CorruptionSpec {
  double miss_prob = 0.0;
  double fp_rate = 0.0;  // mean false boxes per frame
  double jitter_sigma = 0.0;
  double fragment_prob = 0.0;  // chance an object loses a run of detections
  int fragment_length = 5;
  double width = 1920.0;
  double height = 1080.0;
  double fp_min_size = 40.0;
  double fp_max_size = 120.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Turns ground truth into a detector-like stream. Every frame of the task is
// present in the output, possibly with no boxes.
DetectionStream corrupt(std::span<const GtRecord> gt,
                        std::span<const std::string> frame_names,
                        const CorruptionSpec& spec);

struct EmitOptions {
  bool test_layout = true;  // img/path.txt instead of path.txt
  std::string instruction_en = "all moving objects in the synthetic scene";
  std::string instruction_zh = "合成场景中所有移动的目标";
};

// Writes gt/gt.txt, the frame listing and description.txt into `task_dir`.
void emit_task(const std::filesystem::path& task_dir, const Scene& scene,
               const EmitOptions& options = {});

// Attribute tags shipped with generated tasks; scores to Easy.
std::vector<difficulty::AttributeTag> placeholder_tags();

// Task folder name in the benchmark's "<source>_<sequence>_<n>" form.
std::string task_name(std::uint64_t seed, int conversation = 0);

}  // namespace reamot::synth
