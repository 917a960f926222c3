#include "reamot/tracker.hpp"

#include <algorithm>
#include <unordered_set>

#include "reamot/error.hpp"

namespace reamot {

void TrackerConfig::validate() const {
  if (max_age < 1) throw ValidationError("max_age must be at least 1");
  if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) {
    throw ValidationError("iou_gate must lie in [0,1]");
  }
  if (min_score && !(*min_score >= 0.0 && *min_score <= 1.0)) {
    throw ValidationError("min_score must lie in [0,1]");
  }
}

std::vector<Trajectory> trajectory_update(std::vector<Trajectory> matched,
                                          std::vector<Trajectory> unmatched_tracks,
                                          std::span<const Detection> unmatched_detections,
                                          FrameIndex current_frame, int max_age,
                                          TrackId& next_id) {
  std::vector<Trajectory> output;
  output.reserve(matched.size() + unmatched_detections.size() +
                 unmatched_tracks.size());

  for (auto& t : matched) {
    t.last_matched_frame = current_frame;
    t.committed[current_frame] = t.last_matched_box;
    output.push_back(std::move(t));
  }
  for (const auto& d : unmatched_detections) {
    output.push_back(Trajectory::start(next_id++, current_frame, d.box));
  }
  for (auto& t : unmatched_tracks) {
    if (current_frame - t.last_matched_frame <= max_age) {
      output.push_back(std::move(t));
    }
  }
  return output;
}

Tracker::Tracker(TrackerConfig config, Propagator& propagator,
                 std::vector<std::string> frame_paths)
    : config_(config), propagator_(propagator), frame_paths_(std::move(frame_paths)) {
  config_.validate();
}

FrameContext Tracker::context_for(const Trajectory& t, FrameIndex frame) const {
  const auto n = static_cast<FrameIndex>(frame_paths_.size());
  if (frame >= n) return {};
  const auto first = std::clamp<FrameIndex>(t.first_frame, 0, frame);
  return FrameContext{
      std::span<const std::string>(frame_paths_).subspan(
          static_cast<std::size_t>(first), static_cast<std::size_t>(frame - first)),
      frame_paths_[static_cast<std::size_t>(frame)]};
}

const std::vector<Trajectory>& Tracker::step(FrameIndex frame,
                                             std::span<const Detection> detections) {
  if (frame < 0) throw SequencingError("negative frame index");
  if (last_frame_ && frame <= *last_frame_) {
    throw SequencingError("frame " + std::to_string(frame) +
                          " stepped after frame " + std::to_string(*last_frame_));
  }
  if (!frame_paths_.empty() && frame >= static_cast<FrameIndex>(frame_paths_.size())) {
    throw SequencingError("frame " + std::to_string(frame) + " beyond the " +
                          std::to_string(frame_paths_.size()) + "-frame sequence");
  }
  last_frame_ = frame;
  last_ = {};

  std::vector<Detection> accepted;
  accepted.reserve(detections.size());
  for (const auto& d : detections) {
    if (d.frame_index != frame) {
      throw SequencingError("detection for frame " + std::to_string(d.frame_index) +
                            " passed at frame " + std::to_string(frame));
    }
    d.box.validate();
    const bool degenerate = d.box.width() <= 0.0 || d.box.height() <= 0.0;
    const bool weak = config_.min_score && d.score && *d.score < *config_.min_score;
    if (degenerate || weak) {
      ++last_.rejected_detections;
      continue;
    }
    accepted.push_back(d);
  }

  // Propagate every live trajectory into this frame.
  std::vector<BoundingBox> predictions;
  predictions.reserve(live_.size());
  for (const auto& t : live_) {
    auto p = propagator_.predict(t, frame, context_for(t, frame));
    predictions.push_back(p && p->is_valid() ? *p : t.last_matched_box);
  }

  std::vector<BoundingBox> det_boxes;
  det_boxes.reserve(accepted.size());
  for (const auto& d : accepted) det_boxes.push_back(d.box);

  const auto cost = assignment::build_cost_matrix(det_boxes, predictions);
  const auto assoc = assignment::solve(cost, config_.iou_gate);

  std::vector<Trajectory> matched;
  matched.reserve(assoc.matches.size());
  for (const auto& m : assoc.matches) {
    Trajectory t = std::move(live_[m.track]);
    t.last_matched_box = accepted[m.detection].box;
    matched.push_back(std::move(t));
  }
  std::vector<Trajectory> unmatched;
  unmatched.reserve(assoc.unmatched_tracks.size());
  for (auto j : assoc.unmatched_tracks) {
    Trajectory t = std::move(live_[j]);
    if (config_.emit_propagated) t.propagated[frame] = predictions[j];
    unmatched.push_back(std::move(t));
  }
  std::vector<Detection> fresh;
  fresh.reserve(assoc.unmatched_detections.size());
  for (auto i : assoc.unmatched_detections) fresh.push_back(accepted[i]);

  std::unordered_set<TrackId> before;
  for (const auto& t : unmatched) before.insert(t.track_id);
  std::vector<Trajectory> unmatched_copy = unmatched;

  last_.matched = matched.size();
  last_.created = fresh.size();
  live_ = trajectory_update(std::move(matched), std::move(unmatched), fresh, frame,
                            config_.max_age, next_id_);

  std::unordered_set<TrackId> survivors;
  for (const auto& t : live_) survivors.insert(t.track_id);
  for (auto& t : unmatched_copy) {
    if (survivors.count(t.track_id)) {
      ++last_.retained;
    } else {
      ++last_.deleted;
      retired_.push_back(std::move(t));
    }
  }
  std::sort(live_.begin(), live_.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  return live_;
}

std::vector<Trajectory> Tracker::all_trajectories() const {
  std::vector<Trajectory> all = retired_;
  all.insert(all.end(), live_.begin(), live_.end());
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  return all;
}

std::vector<Trajectory> run(std::span<const std::string> frame_paths,
                            const DetectionStream& stream,
                            const TrackerConfig& config, Propagator& propagator) {
  const auto n = static_cast<FrameIndex>(frame_paths.size());
  if (!stream.frames.empty() && stream.frames.back().frame >= n) {
    throw ConsistencyError("detection stream reaches frame " +
                           std::to_string(stream.frames.back().frame) +
                           " but the task has " + std::to_string(n) + " frames");
  }
  Tracker tracker(config, propagator,
                  std::vector<std::string>(frame_paths.begin(), frame_paths.end()));
  auto next = stream.frames.begin();
  for (FrameIndex f = 0; f < n; ++f) {
    if (next != stream.frames.end() && next->frame == f) {
      tracker.step(f, next->detections);
      ++next;
    } else {
      tracker.step(f, {});
    }
  }
  return tracker.all_trajectories();
}

std::vector<TrackRecord> to_records(std::span<const Trajectory> trajectories,
                                    bool include_propagated) {
  std::vector<TrackRecord> out;
  for (const auto& t : trajectories) {
    for (const auto& [frame, box] : t.committed) {
      out.push_back(TrackRecord{frame, t.track_id, box});
    }
    if (include_propagated) {
      for (const auto& [frame, box] : t.propagated) {
        if (!t.committed.count(frame)) out.push_back(TrackRecord{frame, t.track_id, box});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.track_id) < std::tie(b.frame, b.track_id);
  });
  return out;
}

}  // namespace reamot
