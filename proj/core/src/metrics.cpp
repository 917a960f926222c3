#include "reamot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "reamot/assignment.hpp"
#include "reamot/error.hpp"

namespace reamot::metrics {
namespace {

void check_tp_iou(double tp_iou) {
  if (!(tp_iou > 0.0 && tp_iou <= 1.0)) {
    throw ValidationError("tp_iou must lie in (0,1]");
  }
}

void check_unique_ids(const FrameBoxes& boxes, std::size_t frame, const char* side) {
  std::set<std::int64_t> ids;
  for (const auto& b : boxes) {
    if (!ids.insert(b.id).second) {
      throw ValidationError(std::string("duplicate ") + side + " id " +
                            std::to_string(b.id) + " in frame " +
                            std::to_string(frame));
    }
  }
}

// Indices of `boxes` sorted by id.
std::vector<std::size_t> by_id(const FrameBoxes& boxes) {
  std::vector<std::size_t> idx(boxes.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(),
            [&](auto a, auto b) { return boxes[a].id < boxes[b].id; });
  return idx;
}

}  // namespace

FrameMatching match_frames(std::span<const FrameBoxes> gt,
                           std::span<const FrameBoxes> pred, double tp_iou) {
  check_tp_iou(tp_iou);
  if (gt.size() != pred.size()) {
    throw ValidationError("gt and prediction cover different frame counts (" +
                          std::to_string(gt.size()) + " vs " +
                          std::to_string(pred.size()) + ")");
  }
  FrameMatching out;
  auto& c = out.counts;
  std::map<std::int64_t, std::int64_t> previous;    // last frame's pairs
  std::unordered_map<std::int64_t, std::int64_t> last_partner;

  for (std::size_t f = 0; f < gt.size(); ++f) {
    const auto& g = gt[f];
    const auto& p = pred[f];
    check_unique_ids(g, f, "gt");
    check_unique_ids(p, f, "prediction");

    const auto gi = by_id(g);
    const auto pi = by_id(p);
    std::unordered_map<std::int64_t, std::size_t> g_at, p_at;
    for (std::size_t k = 0; k < g.size(); ++k) g_at.emplace(g[k].id, k);
    for (std::size_t k = 0; k < p.size(); ++k) p_at.emplace(p[k].id, k);

    std::vector<char> g_used(g.size(), 0), p_used(p.size(), 0);
    FrameCorrespondence corr{static_cast<FrameIndex>(f), {}};

    for (const auto& [gid, pid] : previous) {
      const auto a = g_at.find(gid);
      const auto b = p_at.find(pid);
      if (a == g_at.end() || b == p_at.end()) continue;
      if (iou(g[a->second].box, p[b->second].box) >= tp_iou) {
        g_used[a->second] = p_used[b->second] = 1;
        corr.pairs.emplace_back(gid, pid);
      }
    }

    std::vector<std::size_t> rows, cols;
    for (auto k : gi) if (!g_used[k]) rows.push_back(k);
    for (auto k : pi) if (!p_used[k]) cols.push_back(k);
    if (!rows.empty() && !cols.empty()) {
      // Sub-threshold pairs cost as much as leaving both sides unmatched;
      // valid pairs are scaled below 1/K so one more pair always beats any
      // IoU gain among fewer pairs.
      const double k = static_cast<double>(std::min(rows.size(), cols.size()) + 1);
      assignment::Matrix<std::int64_t> cost(rows.size(), cols.size());
      std::vector<double> overlap(rows.size() * cols.size());
      const auto unit = std::llround(assignment::kCostScale);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t s = 0; s < cols.size(); ++s) {
          const double o = iou(g[rows[r]].box, p[cols[s]].box);
          overlap[r * cols.size() + s] = o;
          cost(r, s) = o >= tp_iou
                           ? std::llround((1.0 - o) / k * assignment::kCostScale)
                           : unit;
        }
      }
      const auto assigned = assignment::solve_exact(cost, unit);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (assigned[r] < 0) continue;
        const auto s = static_cast<std::size_t>(assigned[r]);
        if (overlap[r * cols.size() + s] >= tp_iou) {
          corr.pairs.emplace_back(g[rows[r]].id, p[cols[s]].id);
        }
      }
    }
    std::sort(corr.pairs.begin(), corr.pairs.end());

    const auto matched = static_cast<std::int64_t>(corr.pairs.size());
    c.tp += matched;
    c.fn += static_cast<std::int64_t>(g.size()) - matched;
    c.fp += static_cast<std::int64_t>(p.size()) - matched;
    c.gt += static_cast<std::int64_t>(g.size());
    c.pred += static_cast<std::int64_t>(p.size());

    previous.clear();
    for (const auto& [gid, pid] : corr.pairs) {
      const auto it = last_partner.find(gid);
      if (it != last_partner.end() && it->second != pid) ++c.idsw;
      last_partner[gid] = pid;
      previous.emplace(gid, pid);
    }
    out.frames.push_back(std::move(corr));
  }
  return out;
}

IdentityScore idf1(std::span<const FrameBoxes> gt, std::span<const FrameBoxes> pred,
                   double tp_iou) {
  check_tp_iou(tp_iou);
  if (gt.size() != pred.size()) {
    throw ValidationError("gt and prediction cover different frame counts");
  }
  std::map<std::int64_t, std::size_t> g_index, p_index;
  std::int64_t g_total = 0, p_total = 0;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    check_unique_ids(gt[f], f, "gt");
    check_unique_ids(pred[f], f, "prediction");
    for (const auto& b : gt[f]) g_index.emplace(b.id, 0);
    for (const auto& b : pred[f]) p_index.emplace(b.id, 0);
    g_total += static_cast<std::int64_t>(gt[f].size());
    p_total += static_cast<std::int64_t>(pred[f].size());
  }
  std::size_t k = 0;
  for (auto& [id, idx] : g_index) idx = k++;
  k = 0;
  for (auto& [id, idx] : p_index) idx = k++;

  IdentityScore s;
  if (!g_index.empty() && !p_index.empty()) {
    assignment::Matrix<std::int64_t> coloc(g_index.size(), p_index.size(), 0);
    for (std::size_t f = 0; f < gt.size(); ++f) {
      for (const auto& a : gt[f]) {
        for (const auto& b : pred[f]) {
          if (iou(a.box, b.box) >= tp_iou) {
            coloc(g_index[a.id], p_index[b.id]) -= 1;  // negated: we minimise
          }
        }
      }
    }
    const auto assigned = assignment::solve_exact(coloc, 0);
    for (std::size_t r = 0; r < assigned.size(); ++r) {
      if (assigned[r] >= 0) s.idtp -= coloc(r, static_cast<std::size_t>(assigned[r]));
    }
  }
  s.idfn = g_total - s.idtp;
  s.idfp = p_total - s.idtp;
  const auto denom = 2 * s.idtp + s.idfp + s.idfn;
  s.idf1 = denom > 0 ? 2.0 * static_cast<double>(s.idtp) / static_cast<double>(denom)
                     : 0.0;
  return s;
}

double mota(const InstructionCounts& counts) {
  if (counts.gt <= 0) throw ValidationError("MOTA is undefined without ground truth");
  return 1.0 - static_cast<double>(counts.fn + counts.fp + counts.idsw) /
                   static_cast<double>(counts.gt);
}

InstructionResult evaluate_instruction(std::string task_id, std::optional<Level> level,
                                       std::span<const FrameBoxes> gt,
                                       std::span<const FrameBoxes> pred,
                                       double tp_iou) {
  InstructionResult r;
  r.task_id = std::move(task_id);
  r.level = level;
  const auto matching = match_frames(gt, pred, tp_iou);
  const auto identity = idf1(gt, pred, tp_iou);
  r.counts = matching.counts;
  r.counts.idtp = identity.idtp;
  r.counts.idfp = identity.idfp;
  r.counts.idfn = identity.idfn;
  r.idf1 = identity.idf1;
  if (r.counts.gt > 0) {
    r.mota_raw = mota(r.counts);
    r.mota_clamped = std::max(r.mota_raw, 0.0);
    r.recall = static_cast<double>(r.counts.tp) / static_cast<double>(r.counts.gt);
    const auto claimed = r.counts.tp + r.counts.fp;
    r.precision = claimed > 0 ? static_cast<double>(r.counts.tp) /
                                    static_cast<double>(claimed)
                              : 0.0;
  }
  return r;
}

namespace {

AggregateScores mean_of(const std::vector<const InstructionResult*>& rs) {
  AggregateScores a;
  a.n = rs.size();
  if (rs.empty()) return a;
  for (const auto* r : rs) {
    a.ridf1 += r->idf1;
    a.rmota += std::max(r->mota_raw, 0.0);
    a.rrcll += r->recall;
    a.rprcn += r->precision;
  }
  const auto n = static_cast<double>(rs.size());
  a.ridf1 /= n;
  a.rmota /= n;
  a.rrcll /= n;
  a.rprcn /= n;
  return a;
}

}  // namespace

MetricsReport aggregate(std::vector<InstructionResult> results, double tp_iou) {
  MetricsReport report;
  report.tp_iou = tp_iou;
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  report.instructions = std::move(results);

  std::vector<const InstructionResult*> all;
  std::map<Level, std::vector<const InstructionResult*>> grouped;
  for (const auto& r : report.instructions) {
    if (!r.evaluable()) {
      ++report.excluded;
      continue;
    }
    all.push_back(&r);
    if (r.level) grouped[*r.level].push_back(&r);
  }
  if (all.empty()) throw EmptyEvaluationError("no evaluable instructions");
  report.overall = mean_of(all);
  for (const auto& [level, rs] : grouped) report.by_level[level] = mean_of(rs);
  return report;
}

Sequence to_sequence(std::span<const GtRecord> records,
                     std::span<const std::string> frame_names,
                     std::optional<FrameRange> segment) {
  std::unordered_map<std::string, FrameIndex> index;
  for (std::size_t k = 0; k < frame_names.size(); ++k) {
    index.emplace(frame_names[k], static_cast<FrameIndex>(k));
  }
  const FrameRange range =
      segment.value_or(FrameRange{0, static_cast<FrameIndex>(frame_names.size())});
  Sequence seq(static_cast<std::size_t>(std::max<FrameIndex>(range.size(), 0)));
  std::set<std::pair<FrameIndex, std::int64_t>> seen;
  for (const auto& r : records) {
    const auto it = index.find(r.frame_name);
    if (it == index.end()) {
      throw ConsistencyError("record references unknown frame '" + r.frame_name + "'");
    }
    if (!seen.emplace(it->second, r.object_id).second) {
      throw ValidationError("duplicate record for frame '" + r.frame_name +
                            "', id " + std::to_string(r.object_id));
    }
    if (!range.contains(it->second)) continue;
    seq[static_cast<std::size_t>(it->second - range.begin)].push_back(
        TrackedBox{r.object_id, r.box});
  }
  return seq;
}

}  // namespace reamot::metrics
