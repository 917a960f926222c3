#include "reamot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <unordered_map>

#include "reamot/error.hpp"
#include "reamot/rng.hpp"

namespace reamot::synth {
namespace {

// Stream tags for CounterRng; changing them changes every fixture.
enum : std::uint64_t { kObjectStream = 1, kMissStream, kJitterStream, kFpStream, kFragmentStream };

double round_centi(double v) { return std::round(v * 100.0) / 100.0; }

BoundingBox round_box(const BoundingBox& b) {
  return {round_centi(b.x1), round_centi(b.y1), round_centi(b.x2), round_centi(b.y2)};
}

BoundingBox clip(const BoundingBox& b, double width, double height) {
  return {std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height),
          std::clamp(b.x2, 0.0, width), std::clamp(b.y2, 0.0, height)};
}

ObjectMotion draw_object(const SceneSpec& spec, int k) {
  CounterRng rng(spec.seed, {kObjectStream, static_cast<std::uint64_t>(k)});
  ObjectMotion m;
  const double amp = spec.lateral_amplitude * rng.uniform();
  const double w = std::min(rng.uniform(spec.min_size, spec.max_size), spec.width);

  if (spec.layout == Layout::Lanes) {
    const double lane = spec.height / spec.n_objects;
    const double h_hi = std::min(spec.max_size, lane - 2.0 * amp - 2.0);
    if (h_hi < 2.0) {
      throw ValidationError("canvas too short for " + std::to_string(spec.n_objects) +
                            " lanes");
    }
    const double h = rng.uniform(std::min(spec.min_size, h_hi), h_hi);
    const double y1 = k * lane + (lane - h) / 2.0;
    const double x1 = rng.uniform(0.0, spec.width - w);
    m.start = {x1, y1, x1 + w, y1 + h};
    m.vx = rng.uniform(-spec.max_speed, spec.max_speed);
    m.vy = 0.0;
  } else {
    const double h = std::min(rng.uniform(spec.min_size, spec.max_size), spec.height);
    const double x1 = rng.uniform(0.0, spec.width - w);
    const double y1 = rng.uniform(0.0, spec.height - h);
    m.start = {x1, y1, x1 + w, y1 + h};
    const double speed = rng.uniform(0.0, spec.max_speed);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    m.vx = speed * std::cos(heading);
    m.vy = speed * std::sin(heading);
  }
  m.lateral_amplitude = amp;
  m.lateral_period = amp > 0.0 ? rng.uniform(30.0, 90.0) : 0.0;

  const FrameIndex n = spec.n_frames;
  if (spec.random_visibility) {
    const auto begin = static_cast<FrameIndex>(std::floor(rng.uniform() * n / 3.0));
    const auto end = n - static_cast<FrameIndex>(std::floor(rng.uniform() * n / 3.0));
    m.visible = {begin, std::max(end, begin + 1)};
  } else {
    m.visible = {0, n};
  }
  return m;
}

std::optional<BoundingBox> box_at(const ObjectMotion& m, FrameIndex t, double width,
                                  double height) {
  double dx = m.vx * static_cast<double>(t);
  double dy = m.vy * static_cast<double>(t);
  if (m.lateral_amplitude > 0.0 && m.lateral_period > 0.0) {
    const double s = m.lateral_amplitude *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / m.lateral_period);
    const double speed = std::hypot(m.vx, m.vy);
    const double nx = speed > 0.0 ? -m.vy / speed : 0.0;
    const double ny = speed > 0.0 ? m.vx / speed : 1.0;
    dx += s * nx;
    dy += s * ny;
  }
  const BoundingBox raw = m.start.translated(dx, dy);
  const BoundingBox clipped = clip(raw, width, height);
  if (clipped.width() <= 0.0 || clipped.height() <= 0.0) return std::nullopt;
  if (clipped.area() < 0.5 * raw.area()) return std::nullopt;
  const auto rounded = round_box(clipped);
  if (rounded.width() <= 0.0 || rounded.height() <= 0.0) return std::nullopt;
  return rounded;
}

std::string frame_name(FrameIndex f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(f + 1));
  return buf;
}

}  // namespace

void SceneSpec::validate() const {
  if (n_frames < 1) throw ValidationError("scene needs at least one frame");
  if (objects.empty() && n_objects < 1) {
    throw ValidationError("scene needs at least one object");
  }
  if (!(width > 0.0 && height > 0.0)) throw ValidationError("canvas must be positive");
  if (!(min_size > 0.0 && min_size <= max_size)) {
    throw ValidationError("box size range must satisfy 0 < min <= max");
  }
  if (max_speed < 0.0 || lateral_amplitude < 0.0) {
    throw ValidationError("speed and lateral amplitude must be nonnegative");
  }
  for (const auto& o : objects) o.start.validate();
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.objects = spec.objects;
  if (scene.objects.empty()) {
    for (int k = 0; k < spec.n_objects; ++k) scene.objects.push_back(draw_object(spec, k));
  }
  for (FrameIndex f = 0; f < spec.n_frames; ++f) {
    auto name = frame_name(f);
    scene.frame_paths.push_back("img/" + name + ".jpg");
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
      const auto& m = scene.objects[k];
      if (!m.visible.contains(f)) continue;
      if (auto b = box_at(m, f, spec.width, spec.height)) {
        scene.gt.push_back(GtRecord{name, static_cast<std::int64_t>(k + 1), *b});
      }
    }
    scene.frame_names.push_back(std::move(name));
  }
  return scene;
}

void CorruptionSpec::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(miss_prob) || !prob(fragment_prob)) {
    throw ValidationError("probabilities must lie in [0,1]");
  }
  if (!(fp_rate >= 0.0 && fp_rate <= 100.0)) {
    throw ValidationError("fp_rate must lie in [0,100]");
  }
  if (!(jitter_sigma >= 0.0)) throw ValidationError("jitter_sigma must be nonnegative");
  if (fragment_length < 1) throw ValidationError("fragment_length must be positive");
  if (!(width > 0.0 && height > 0.0)) throw ValidationError("canvas must be positive");
  if (!(fp_min_size > 0.0 && fp_min_size <= fp_max_size)) {
    throw ValidationError("false-positive size range must satisfy 0 < min <= max");
  }
}

DetectionStream corrupt(std::span<const GtRecord> gt,
                        std::span<const std::string> frame_names,
                        const CorruptionSpec& spec) {
  spec.validate();
  std::unordered_map<std::string, FrameIndex> index;
  for (std::size_t k = 0; k < frame_names.size(); ++k) {
    index.emplace(frame_names[k], static_cast<FrameIndex>(k));
  }

  // frame -> (object id -> box), ordered for deterministic output.
  std::vector<std::map<std::int64_t, BoundingBox>> per_frame(frame_names.size());
  std::map<std::int64_t, std::vector<FrameIndex>> frames_of;
  for (const auto& r : gt) {
    const auto it = index.find(r.frame_name);
    if (it == index.end()) {
      throw ConsistencyError("gt references unknown frame '" + r.frame_name + "'");
    }
    per_frame[static_cast<std::size_t>(it->second)][r.object_id] = r.box;
    frames_of[r.object_id].push_back(it->second);
  }

  std::map<std::int64_t, FrameRange> gaps;
  for (auto& [id, frames] : frames_of) {
    CounterRng rng(spec.seed, {kFragmentStream, static_cast<std::uint64_t>(id)});
    if (rng.uniform() >= spec.fragment_prob) continue;
    std::sort(frames.begin(), frames.end());
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(frames.size()));
    const FrameIndex start = frames[std::min(pick, frames.size() - 1)];
    gaps[id] = {start, start + spec.fragment_length};
  }

  DetectionStream stream;
  for (std::size_t f = 0; f < per_frame.size(); ++f) {
    const auto frame = static_cast<FrameIndex>(f);
    const auto uf = static_cast<std::uint64_t>(f);
    DetectionFrame out{frame, {}};
    for (const auto& [id, box] : per_frame[f]) {
      const auto uid = static_cast<std::uint64_t>(id);
      if (CounterRng(spec.seed, {kMissStream, uf, uid}).uniform() < spec.miss_prob) continue;
      if (const auto g = gaps.find(id); g != gaps.end() && g->second.contains(frame)) continue;
      BoundingBox b = box;
      if (spec.jitter_sigma > 0.0) {
        CounterRng rng(spec.seed, {kJitterStream, uf, uid});
        BoundingBox j{b.x1 + rng.truncated_normal(spec.jitter_sigma),
                      b.y1 + rng.truncated_normal(spec.jitter_sigma),
                      b.x2 + rng.truncated_normal(spec.jitter_sigma),
                      b.y2 + rng.truncated_normal(spec.jitter_sigma)};
        j = round_box(clip(j, spec.width, spec.height));
        if (j.width() >= 1.0 && j.height() >= 1.0) b = j;
      }
      out.detections.push_back(Detection{frame, b, std::nullopt});
    }
    CounterRng rng(spec.seed, {kFpStream, uf});
    const auto n_fp = rng.poisson(spec.fp_rate);
    for (std::int64_t k = 0; k < n_fp; ++k) {
      const double w = std::min(rng.uniform(spec.fp_min_size, spec.fp_max_size), spec.width);
      const double h = std::min(rng.uniform(spec.fp_min_size, spec.fp_max_size), spec.height);
      const double x1 = rng.uniform(0.0, spec.width - w);
      const double y1 = rng.uniform(0.0, spec.height - h);
      BoundingBox b = round_box({x1, y1, x1 + w, y1 + h});
      b = clip(b, spec.width, spec.height);
      out.detections.push_back(Detection{frame, b, std::nullopt});
    }
    stream.frames.push_back(std::move(out));
  }
  return stream;
}

void emit_task(const std::filesystem::path& task_dir, const Scene& scene,
               const EmitOptions& options) {
  write_file(task_dir / "gt" / "gt.txt", format_gt(scene.gt));
  std::string listing;
  for (const auto& p : scene.frame_paths) listing += p + '\n';
  write_file(options.test_layout ? task_dir / "img" / "path.txt" : task_dir / "path.txt",
             listing);
  write_file(task_dir / "description.txt",
             options.instruction_zh + '\n' + options.instruction_en + '\n');
}

std::vector<difficulty::AttributeTag> placeholder_tags() {
  return {difficulty::AttributeTag{difficulty::Category::SpatialPosition, "orientation", 1}};
}

std::string task_name(std::uint64_t seed, int conversation) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "Synthetic_seq%04llu_%d",
                static_cast<unsigned long long>(seed), conversation);
  return buf;
}

}  // namespace reamot::synth
