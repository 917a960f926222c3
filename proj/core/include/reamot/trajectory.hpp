#pragma once

#include <cstdint>
#include <map>

#include "reamot/geometry.hpp"

namespace reamot {

using TrackId = std::int64_t;

// An identity-carrying track. `committed` holds the output trajectory: boxes
// at the creation frame and at every frame a detection was matched.
struct Trajectory {
  TrackId track_id = 0;
  FrameIndex first_frame = 0;
  BoundingBox first_box;
  std::map<FrameIndex, BoundingBox> committed;
  FrameIndex last_matched_frame = 0;
  BoundingBox last_matched_box;
  // Propagator output at unmatched frames; filled only when the tracker runs
  // with emit_propagated.
  std::map<FrameIndex, BoundingBox> propagated;

  static Trajectory start(TrackId id, FrameIndex frame, const BoundingBox& box) {
    Trajectory t;
    t.track_id = id;
    t.first_frame = frame;
    t.first_box = box;
    t.committed.emplace(frame, box);
    t.last_matched_frame = frame;
    t.last_matched_box = box;
    return t;
  }

  std::int64_t age(FrameIndex current) const noexcept {
    return current - last_matched_frame;
  }
};

}  // namespace reamot
