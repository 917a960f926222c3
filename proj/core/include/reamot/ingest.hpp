#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reamot/geometry.hpp"

namespace reamot {

enum class Level { Easy, Medium, Hard };

std::string_view to_string(Level level) noexcept;
// Accepts "easy", "medium", "hard" in any case, plus the "meidum" spelling
// found in released copies of the benchmark tree.
std::optional<Level> parse_level(std::string_view name) noexcept;

struct GtRecord {
  std::string frame_name;
  std::int64_t object_id = 0;
  BoundingBox box;

  friend bool operator==(const GtRecord&, const GtRecord&) = default;
};

// `frame_name, object_id, x1, y1, x2, y2` per line. Blank lines are skipped.
std::vector<GtRecord> parse_gt(std::string_view text);
std::string format_gt(std::span<const GtRecord> records);

// Shortest round-trip decimal form; integral values print without a
// fractional part ("10", not "10.0").
std::string format_number(double value);

struct InstructionTask {
  std::string task_id;
  std::string instruction_text;
  std::vector<std::string> description_lines;
  std::vector<std::string> frame_paths;
  std::vector<std::string> frame_names;  // path stems, parallel to frame_paths
  std::vector<GtRecord> gt;
  std::optional<Level> level;

  std::int64_t frame_count() const noexcept {
    return static_cast<std::int64_t>(frame_paths.size());
  }
  std::optional<FrameIndex> frame_of(std::string_view frame_name) const;
};

InstructionTask load_task(const std::filesystem::path& dir);

// Every task directory (one holding description.txt) below `root`, sorted.
std::vector<std::filesystem::path> find_tasks(const std::filesystem::path& root);

// Picks the English line out of a bilingual description.
std::string select_english_line(std::span<const std::string> lines);

// Half-open frame range [begin, end).
struct FrameRange {
  FrameIndex begin = 0;
  FrameIndex end = 0;

  std::int64_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  bool contains(FrameIndex f) const noexcept { return f >= begin && f < end; }

  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

struct FrameSplit {
  FrameRange train;
  FrameRange test;
};

inline constexpr double kDefaultTrainFraction = 0.4;

// Train gets the first floor(fraction * n) frames, test the rest.
FrameSplit split_frames(std::int64_t n_frames,
                        double train_fraction = kDefaultTrainFraction);

// Same rule applied to a list of whole videos instead of frames, for sources
// whose videos are too short to split in time. Order of `items` is kept.
std::pair<std::vector<std::string>, std::vector<std::string>> split_videos(
    std::span<const std::string> items,
    double train_fraction = kDefaultTrainFraction);

struct DetectionFrame {
  FrameIndex frame = 0;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

// Per-frame detector output with strictly increasing frame indices.
struct DetectionStream {
  std::vector<DetectionFrame> frames;

  std::size_t box_count() const noexcept;
  friend bool operator==(const DetectionStream&, const DetectionStream&) = default;
};

// One JSON object per line: {"frame":int,"boxes":[[x1,y1,x2,y2],...],
// "scores":[...]} with "scores" optional.
DetectionStream read_detections(std::string_view text);
std::string write_detections(const DetectionStream& stream);

struct TrackRecord {
  FrameIndex frame = 0;
  std::int64_t track_id = 0;
  BoundingBox box;

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

// Emits GT-compatible lines sorted by (frame, track_id); frame indices are
// mapped through `frame_names` so the output re-loads with parse_gt.
std::string write_tracks(std::span<const TrackRecord> records,
                         std::span<const std::string> frame_names);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace reamot
