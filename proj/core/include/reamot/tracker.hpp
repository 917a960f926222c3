#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reamot/assignment.hpp"
#include "reamot/geometry.hpp"
#include "reamot/ingest.hpp"
#include "reamot/propagator.hpp"
#include "reamot/trajectory.hpp"

namespace reamot {

inline constexpr int kDefaultMaxAge = 10;

struct TrackerConfig {
  int max_age = kDefaultMaxAge;  // A_t, in frames
  double iou_gate = assignment::kDefaultGate;
  // Detections scoring below this are ignored. Disabled by default.
  std::optional<double> min_score;
  // Record propagator boxes at unmatched frames so they can be written out.
  bool emit_propagated = false;

  void validate() const;
};

// Trajectory update: matched trajectories are re-emitted with their latest
// matching frame set to `current_frame`; every unmatched detection starts a
// new trajectory; unmatched trajectories survive while
// current_frame - last_matched_frame <= max_age, unchanged.
//
// Matched trajectories must already carry the matching box in
// last_matched_box. New ids are taken from `next_id`, which is advanced.
std::vector<Trajectory> trajectory_update(std::vector<Trajectory> matched,
                                          std::vector<Trajectory> unmatched_tracks,
                                          std::span<const Detection> unmatched_detections,
                                          FrameIndex current_frame, int max_age,
                                          TrackId& next_id);

struct StepStats {
  std::size_t matched = 0;
  std::size_t created = 0;
  std::size_t retained = 0;
  std::size_t deleted = 0;
  std::size_t rejected_detections = 0;  // zero-area or below min_score
};

class Tracker {
 public:
  Tracker(TrackerConfig config, Propagator& propagator,
          std::vector<std::string> frame_paths = {});

  // Propagate, associate, update. `frame` must exceed every frame stepped
  // before; detections must all belong to `frame`.
  const std::vector<Trajectory>& step(FrameIndex frame,
                                      std::span<const Detection> detections);

  const std::vector<Trajectory>& live() const noexcept { return live_; }
  const StepStats& last_step() const noexcept { return last_; }
  const TrackerConfig& config() const noexcept { return config_; }

  // Every trajectory created so far, live or deleted, ordered by id.
  std::vector<Trajectory> all_trajectories() const;

 private:
  FrameContext context_for(const Trajectory& t, FrameIndex frame) const;

  TrackerConfig config_;
  Propagator& propagator_;
  std::vector<std::string> frame_paths_;
  std::vector<Trajectory> live_;
  std::vector<Trajectory> retired_;
  std::optional<FrameIndex> last_frame_;
  TrackId next_id_ = 1;
  StepStats last_;
};

// Runs the tracker over every frame of a task. Frames missing from the stream
// are stepped with no detections.
std::vector<Trajectory> run(std::span<const std::string> frame_paths,
                            const DetectionStream& stream,
                            const TrackerConfig& config, Propagator& propagator);

// Flattens trajectories to output records; propagated boxes are included only
// when asked for.
std::vector<TrackRecord> to_records(std::span<const Trajectory> trajectories,
                                    bool include_propagated = false);

}  // namespace reamot
