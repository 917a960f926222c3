#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reamot/geometry.hpp"
#include "reamot/ingest.hpp"

namespace reamot::metrics {

// IoU at or above which a predicted box may count as a true positive.
inline constexpr double kDefaultTpIou = 0.5;

struct TrackedBox {
  std::int64_t id = 0;
  BoundingBox box;
};

// Boxes present in one frame. A sequence is indexed by frame.
using FrameBoxes = std::vector<TrackedBox>;
using Sequence = std::vector<FrameBoxes>;

struct InstructionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt = 0;  // total ground-truth boxes, tp + fn
  std::int64_t pred = 0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;

  friend bool operator==(const InstructionCounts&, const InstructionCounts&) = default;
};

struct FrameCorrespondence {
  FrameIndex frame = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (gt id, pred id)
};

struct FrameMatching {
  std::vector<FrameCorrespondence> frames;
  InstructionCounts counts;  // CLEAR fields only; identity fields stay 0
};

// CLEAR-style per-frame correspondence. Each frame first keeps the previous
// frame's (gt, pred) pairs that still overlap by tp_iou, then matches what is
// left to maximise the number of pairs, breaking ties by total IoU. An
// identity switch is counted when a gt id's partner differs from the one at
// its previous matched frame. Throws ValidationError on a repeated id within
// a frame or on sequences of different length.
FrameMatching match_frames(std::span<const FrameBoxes> gt,
                           std::span<const FrameBoxes> pred,
                           double tp_iou = kDefaultTpIou);

struct IdentityScore {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  double idf1 = 0.0;
};

// Global one-to-one gt-id/pred-id assignment maximising co-located frames
// (IoU >= tp_iou); IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN).
IdentityScore idf1(std::span<const FrameBoxes> gt, std::span<const FrameBoxes> pred,
                   double tp_iou = kDefaultTpIou);

// 1 - (FN + FP + IDSW) / GT, unclamped. Throws when GT is 0.
double mota(const InstructionCounts& counts);

struct InstructionResult {
  std::string task_id;
  std::optional<Level> level;
  InstructionCounts counts;
  double idf1 = 0.0;
  double mota_raw = 0.0;
  double mota_clamped = 0.0;
  double recall = 0.0;
  double precision = 0.0;  // 0 when nothing was predicted

  bool evaluable() const noexcept { return counts.gt > 0; }
};

InstructionResult evaluate_instruction(std::string task_id, std::optional<Level> level,
                                       std::span<const FrameBoxes> gt,
                                       std::span<const FrameBoxes> pred,
                                       double tp_iou = kDefaultTpIou);

struct AggregateScores {
  std::size_t n = 0;
  double ridf1 = 0.0;
  double rmota = 0.0;  // mean of max(MOTA_i, 0)
  double rrcll = 0.0;
  double rprcn = 0.0;
};

struct MetricsReport {
  double tp_iou = kDefaultTpIou;
  std::vector<InstructionResult> instructions;  // sorted by task id
  AggregateScores overall;
  std::map<Level, AggregateScores> by_level;
  std::size_t excluded = 0;  // instructions with no ground truth
};

// Per-instruction means. Instructions without ground truth are excluded and
// counted; throws EmptyEvaluationError when none remain.
MetricsReport aggregate(std::vector<InstructionResult> results,
                        double tp_iou = kDefaultTpIou);

// Builds a per-frame sequence from GT-format records, restricted to `segment`
// when given (frames re-indexed from the segment start). Unknown frame names
// raise ConsistencyError; duplicate (frame, id) pairs raise ValidationError.
Sequence to_sequence(std::span<const GtRecord> records,
                     std::span<const std::string> frame_names,
                     std::optional<FrameRange> segment = std::nullopt);

}  // namespace reamot::metrics
