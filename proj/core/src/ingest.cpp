#include "reamot/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "reamot/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace reamot {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Splits on '\n', keeping 1-based line numbers; '\r' is trimmed by callers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string stem_of(std::string_view path) {
  return fs::path(std::string(path)).stem().string();
}

std::vector<std::string> nonempty_lines(std::string_view text) {
  std::vector<std::string> out;
  for_each_line(text, [&](std::size_t, std::string_view line) {
    const auto t = trim(line);
    if (!t.empty()) out.emplace_back(t);
  });
  return out;
}

BoundingBox box_from_json(const json& j, std::size_t line_no) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError(line_no, "box must be a list of 4 numbers");
  }
  std::array<double, 4> v{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j[k].is_number()) {
      throw ParseError(line_no, "box coordinate is not a number");
    }
    v[k] = j[k].get<double>();
  }
  BoundingBox b{v[0], v[1], v[2], v[3]};
  if (!b.is_valid()) {
    throw ParseError(line_no, "malformed box " + to_string(b));
  }
  return b;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::Easy:
      return "easy";
    case Level::Medium:
      return "medium";
    case Level::Hard:
      return "hard";
  }
  return "unknown";
}

std::optional<Level> parse_level(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "easy") return Level::Easy;
  if (lower == "medium" || lower == "meidum") return Level::Medium;
  if (lower == "hard") return Level::Hard;
  return std::nullopt;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // fold -0 into 0
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw ValidationError("unformattable number");
  return std::string(buf.data(), ptr);
}

std::vector<GtRecord> parse_gt(std::string_view text) {
  std::vector<GtRecord> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty()) return;

    std::array<std::string_view, 6> fields;
    std::size_t n = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      if (n == fields.size()) {
        throw ParseError(line_no, "expected 6 comma-separated fields, got more");
      }
      fields[n++] = trim(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (n != fields.size()) {
      throw ParseError(line_no, "expected 6 comma-separated fields, got " +
                                    std::to_string(n));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty frame_name");

    const auto id = parse_int(fields[1]);
    if (!id || *id < 0) {
      throw ParseError(line_no, "object_id must be a nonnegative integer, got '" +
                                    std::string(fields[1]) + "'");
    }
    std::array<double, 4> c{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto v = parse_double(fields[2 + k]);
      if (!v) {
        throw ParseError(line_no, "non-numeric coordinate '" +
                                      std::string(fields[2 + k]) + "'");
      }
      c[k] = *v;
    }
    BoundingBox box{c[0], c[1], c[2], c[3]};
    if (!box.is_valid()) {
      throw ParseError(line_no, "malformed box " + to_string(box) +
                                    " (x1>x2 or y1>y2)");
    }
    out.push_back(GtRecord{std::string(fields[0]), *id, box});
  });
  return out;
}

std::string format_gt(std::span<const GtRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.frame_name;
    out += ", ";
    out += std::to_string(r.object_id);
    for (double v : {r.box.x1, r.box.y1, r.box.x2, r.box.y2}) {
      out += ", ";
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::optional<FrameIndex> InstructionTask::frame_of(
    std::string_view frame_name) const {
  const auto it = std::find(frame_names.begin(), frame_names.end(), frame_name);
  if (it == frame_names.end()) return std::nullopt;
  return static_cast<FrameIndex>(it - frame_names.begin());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw LoadError("short write to " + path.string());
}

std::string select_english_line(std::span<const std::string> lines) {
  for (const auto& line : lines) {
    std::size_t ascii = 0, total = 0;
    for (unsigned char c : line) {
      if (c == ' ' || c == '\t') continue;
      // Count UTF-8 code points: skip continuation bytes.
      if ((c & 0xC0) == 0x80) continue;
      ++total;
      if (c < 0x80) ++ascii;
    }
    if (total > 0 && 2 * ascii > total) return line;
  }
  return lines.empty() ? std::string{} : lines.front();
}

InstructionTask load_task(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw LoadError("task directory not found: " + dir.string());
  }
  InstructionTask task;
  task.task_id = dir.filename().string();
  if (task.task_id.empty()) task.task_id = dir.parent_path().filename().string();

  fs::path path_txt = dir / "path.txt";
  if (!fs::is_regular_file(path_txt)) path_txt = dir / "img" / "path.txt";
  if (!fs::is_regular_file(path_txt)) {
    throw LoadError("missing frame listing: " + (dir / "path.txt").string() +
                    " (or img/path.txt)");
  }
  task.frame_paths = nonempty_lines(read_file(path_txt));
  if (task.frame_paths.empty()) {
    throw LoadError("empty frame listing: " + path_txt.string());
  }
  std::set<std::string> seen;
  for (const auto& p : task.frame_paths) {
    auto stem = stem_of(p);
    if (!seen.insert(stem).second) {
      throw ConsistencyError("duplicate frame name '" + stem + "' in " +
                             path_txt.string());
    }
    task.frame_names.push_back(std::move(stem));
  }

  const fs::path desc = dir / "description.txt";
  if (!fs::is_regular_file(desc)) {
    throw LoadError("missing description: " + desc.string());
  }
  task.description_lines = nonempty_lines(read_file(desc));
  if (task.description_lines.empty()) {
    throw LoadError("empty description: " + desc.string());
  }
  task.instruction_text = select_english_line(task.description_lines);

  fs::path gt_path = dir / "gt";
  if (!fs::exists(gt_path)) gt_path = dir / "gt.txt";
  if (!fs::exists(gt_path)) {
    throw LoadError("missing ground truth: " + (dir / "gt").string());
  }
  auto parse_file = [&](const fs::path& p) {
    try {
      auto records = parse_gt(read_file(p));
      task.gt.insert(task.gt.end(), records.begin(), records.end());
    } catch (const ParseError& e) {
      throw ParseError(e.line(), p.string() + ": " + e.what());
    }
  };
  if (fs::is_directory(gt_path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(gt_path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) parse_file(f);
  } else {
    parse_file(gt_path);
  }

  std::set<std::pair<std::string, std::int64_t>> keys;
  for (const auto& r : task.gt) {
    if (!seen.count(r.frame_name)) {
      throw ConsistencyError("gt references frame '" + r.frame_name +
                             "' not listed in " + path_txt.string());
    }
    if (!keys.emplace(r.frame_name, r.object_id).second) {
      throw ConsistencyError("duplicate gt record for frame '" + r.frame_name +
                             "', object " + std::to_string(r.object_id));
    }
  }

  const auto parent = fs::absolute(dir).lexically_normal();
  const auto level_dir = parent.has_filename() ? parent.parent_path()
                                               : parent.parent_path().parent_path();
  task.level = parse_level(level_dir.filename().string());
  return task;
}

std::vector<fs::path> find_tasks(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw LoadError("benchmark root not found: " + root.string());
  }
  std::vector<fs::path> out;
  if (fs::is_regular_file(root / "description.txt")) out.push_back(root);
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_directory() &&
        fs::is_regular_file(entry.path() / "description.txt")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrameSplit split_frames(std::int64_t n_frames, double train_fraction) {
  if (n_frames <= 0) throw ValidationError("split needs at least one frame");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  const auto n_train = static_cast<std::int64_t>(
      std::floor(train_fraction * static_cast<double>(n_frames)));
  return {FrameRange{0, n_train}, FrameRange{n_train, n_frames}};
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_videos(
    std::span<const std::string> items, double train_fraction) {
  if (items.empty()) throw ValidationError("split needs at least one video");
  const auto split =
      split_frames(static_cast<std::int64_t>(items.size()), train_fraction);
  const auto cut = static_cast<std::size_t>(split.train.end);
  return {std::vector<std::string>(items.begin(), items.begin() + cut),
          std::vector<std::string>(items.begin() + cut, items.end())};
}

std::size_t DetectionStream::box_count() const noexcept {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.detections.size();
  return n;
}

DetectionStream read_detections(std::string_view text) {
  DetectionStream stream;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty()) return;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    if (!j.contains("frame") || !j["frame"].is_number_integer()) {
      throw ParseError(line_no, "missing integer field 'frame'");
    }
    const auto frame = j["frame"].get<std::int64_t>();
    if (frame < 0) throw ParseError(line_no, "negative frame index");
    if (!stream.frames.empty() && frame <= stream.frames.back().frame) {
      throw ParseError(line_no, "frame " + std::to_string(frame) +
                                    " not after frame " +
                                    std::to_string(stream.frames.back().frame));
    }
    if (!j.contains("boxes") || !j["boxes"].is_array()) {
      throw ParseError(line_no, "missing list field 'boxes'");
    }
    const auto& boxes = j["boxes"];
    const json* scores = nullptr;
    if (j.contains("scores") && !j["scores"].is_null()) {
      scores = &j["scores"];
      if (!scores->is_array() || scores->size() != boxes.size()) {
        throw ParseError(line_no, "'scores' must list one number per box");
      }
    }
    DetectionFrame df{frame, {}};
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      Detection d{frame, box_from_json(boxes[k], line_no), std::nullopt};
      if (scores) {
        const auto& s = (*scores)[k];
        if (!s.is_number()) throw ParseError(line_no, "score is not a number");
        const double v = s.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ParseError(line_no, "score outside [0,1]");
        }
        d.score = v;
      }
      df.detections.push_back(d);
    }
    stream.frames.push_back(std::move(df));
  });
  return stream;
}

std::string write_detections(const DetectionStream& stream) {
  std::string out;
  for (const auto& f : stream.frames) {
    out += "{\"frame\":";
    out += std::to_string(f.frame);
    out += ",\"boxes\":[";
    bool any_score = false;
    for (std::size_t k = 0; k < f.detections.size(); ++k) {
      const auto& b = f.detections[k].box;
      if (k) out += ',';
      out += '[' + format_number(b.x1) + ',' + format_number(b.y1) + ',' +
             format_number(b.x2) + ',' + format_number(b.y2) + ']';
      any_score = any_score || f.detections[k].score.has_value();
    }
    out += ']';
    if (any_score) {
      out += ",\"scores\":[";
      for (std::size_t k = 0; k < f.detections.size(); ++k) {
        if (k) out += ',';
        const auto& s = f.detections[k].score;
        if (!s) {
          throw ValidationError("frame " + std::to_string(f.frame) +
                                ": scores must be given for all boxes or none");
        }
        out += format_number(*s);
      }
      out += ']';
    }
    out += "}\n";
  }
  return out;
}

std::string write_tracks(std::span<const TrackRecord> records,
                         std::span<const std::string> frame_names) {
  std::vector<TrackRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.track_id) < std::tie(b.frame, b.track_id);
  });
  std::vector<GtRecord> rows;
  rows.reserve(sorted.size());
  for (const auto& r : sorted) {
    if (r.frame < 0 || r.frame >= static_cast<FrameIndex>(frame_names.size())) {
      throw ConsistencyError("track record at frame " + std::to_string(r.frame) +
                             " outside the task's " +
                             std::to_string(frame_names.size()) + " frames");
    }
    rows.push_back(GtRecord{frame_names[static_cast<std::size_t>(r.frame)],
                            r.track_id, r.box});
  }
  return format_gt(rows);
}

}  // namespace reamot
