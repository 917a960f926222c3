#include <gtest/gtest.h>

#include <random>
#include <set>

#include "reamot/error.hpp"
#include "reamot/synth.hpp"
#include "reamot/tracker.hpp"

using namespace reamot;

namespace {

std::vector<std::string> frame_paths(int n) {
  std::vector<std::string> out;
  for (int f = 1; f <= n; ++f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img/%06d.jpg", f);
    out.emplace_back(buf);
  }
  return out;
}

std::vector<Detection> dets(FrameIndex f, std::initializer_list<BoundingBox> boxes) {
  std::vector<Detection> out;
  for (const auto& b : boxes) out.push_back({f, b, std::nullopt});
  return out;
}

DetectionStream stream_from_gt(const synth::Scene& scene) {
  DetectionStream s;
  std::map<std::string, FrameIndex> index;
  for (std::size_t k = 0; k < scene.frame_names.size(); ++k)
    index[scene.frame_names[k]] = static_cast<FrameIndex>(k);
  std::map<FrameIndex, std::vector<Detection>> by_frame;
  for (const auto& r : scene.gt) {
    const auto f = index.at(r.frame_name);
    by_frame[f].push_back({f, r.box, std::nullopt});
  }
  for (auto& [f, d] : by_frame) s.frames.push_back({f, std::move(d)});
  return s;
}

}  // namespace

// Every case of the update rule with A_t = 10 and a track last matched at 0.
TEST(TrajectoryUpdate, RetentionTableForDefaultMaxAge) {
  for (FrameIndex fc = 1; fc <= 12; ++fc) {
    TrackId next = 5;
    auto t = Trajectory::start(1, 0, {0, 0, 10, 10});
    const auto out = trajectory_update({}, {t}, {}, fc, kDefaultMaxAge, next);
    if (fc <= 10) {
      ASSERT_EQ(out.size(), 1u) << "F_c=" << fc;
      EXPECT_EQ(out[0].last_matched_frame, 0);
      EXPECT_EQ(out[0].committed.size(), 1u);
    } else {
      EXPECT_TRUE(out.empty()) << "F_c=" << fc;
    }
    EXPECT_EQ(next, 5);
  }
}

TEST(TrajectoryUpdate, MatchedTracksAdvanceToCurrentFrame) {
  for (FrameIndex last = 0; last < 6; ++last) {
    for (FrameIndex fc = last + 1; fc <= last + 15; ++fc) {
      TrackId next = 2;
      auto t = Trajectory::start(1, 0, {0, 0, 10, 10});
      t.last_matched_frame = last;
      t.last_matched_box = {1, 1, 11, 11};
      const auto out = trajectory_update({t}, {}, {}, fc, kDefaultMaxAge, next);
      ASSERT_EQ(out.size(), 1u);
      EXPECT_EQ(out[0].last_matched_frame, fc);
      EXPECT_EQ(out[0].committed.at(fc), (BoundingBox{1, 1, 11, 11}));
    }
  }
}

TEST(TrajectoryUpdate, EachUnmatchedDetectionSpawnsOneId) {
  for (std::size_t n = 0; n <= 6; ++n) {
    TrackId next = 3;
    std::vector<Detection> fresh;
    for (std::size_t k = 0; k < n; ++k)
      fresh.push_back({7, {double(k), 0, double(k) + 5, 5}, std::nullopt});
    const auto out = trajectory_update({}, {}, fresh, 7, kDefaultMaxAge, next);
    ASSERT_EQ(out.size(), n);
    EXPECT_EQ(next, 3 + static_cast<TrackId>(n));
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_EQ(out[k].track_id, 3 + static_cast<TrackId>(k));
      EXPECT_EQ(out[k].first_frame, 7);
      EXPECT_EQ(out[k].first_box, fresh[k].box);
      EXPECT_EQ(out[k].last_matched_frame, 7);
    }
  }
}

TEST(TrajectoryUpdate, BoundaryFollowsMaxAge) {
  for (int age = 1; age <= 12; ++age) {
    for (FrameIndex fc = 1; fc <= 15; ++fc) {
      TrackId next = 2;
      const auto out = trajectory_update({}, {Trajectory::start(1, 0, {0, 0, 1, 1})}, {},
                                         fc, age, next);
      EXPECT_EQ(out.size(), fc <= age ? 1u : 0u);
    }
  }
}

TEST(TrackerStep, EmptyStateCreatesTracks) {
  PersistencePropagator p;
  Tracker tr({}, p);
  const auto& live = tr.step(4, dets(4, {{0, 0, 10, 10}, {50, 50, 60, 60}}));
  ASSERT_EQ(live.size(), 2u);
  EXPECT_EQ(live[0].track_id, 1);
  EXPECT_EQ(live[1].track_id, 2);
  EXPECT_EQ(live[0].first_frame, 4);
  EXPECT_EQ(tr.last_step().created, 2u);
}

TEST(TrackerStep, HighOverlapMatches) {
  PersistencePropagator p;
  Tracker tr({}, p);
  tr.step(0, dets(0, {{0, 0, 100, 100}}));
  const auto& live = tr.step(1, dets(1, {{0, 0, 100, 90}}));
  ASSERT_EQ(live.size(), 1u);
  EXPECT_EQ(live[0].track_id, 1);
  EXPECT_EQ(live[0].last_matched_frame, 1);
  EXPECT_EQ(live[0].committed.at(1), (BoundingBox{0, 0, 100, 90}));
  EXPECT_EQ(tr.last_step().matched, 1u);
}

TEST(TrackerStep, LowOverlapSpawnsNewTrack) {
  PersistencePropagator p;
  Tracker tr({}, p);
  tr.step(0, dets(0, {{0, 0, 10, 10}}));
  const auto& live = tr.step(1, dets(1, {{8, 8, 18, 18}}));
  ASSERT_EQ(live.size(), 2u);
  EXPECT_EQ(tr.last_step().created, 1u);
  EXPECT_EQ(tr.last_step().retained, 1u);
}

TEST(TrackerStep, TrackDeletedOneFrameAfterMaxAge) {
  PersistencePropagator p;
  Tracker tr({}, p);
  tr.step(0, dets(0, {{0, 0, 10, 10}}));
  for (FrameIndex f = 1; f <= 10; ++f) EXPECT_EQ(tr.step(f, {}).size(), 1u) << f;
  EXPECT_TRUE(tr.step(11, {}).empty());
  EXPECT_EQ(tr.last_step().deleted, 1u);
  EXPECT_EQ(tr.all_trajectories().size(), 1u);
}

TEST(TrackerStep, OutOfOrderFramesAreRejected) {
  PersistencePropagator p;
  Tracker tr({}, p, frame_paths(5));
  tr.step(2, {});
  EXPECT_THROW(tr.step(2, {}), SequencingError);
  EXPECT_THROW(tr.step(1, {}), SequencingError);
  EXPECT_THROW(tr.step(3, dets(4, {{0, 0, 1, 1}})), SequencingError);
  EXPECT_THROW(tr.step(5, {}), SequencingError);
}

TEST(TrackerStep, DegenerateAndWeakDetectionsAreDropped) {
  PersistencePropagator p;
  TrackerConfig cfg;
  cfg.min_score = 0.5;
  Tracker tr(cfg, p);
  std::vector<Detection> d{{0, {0, 0, 0, 10}, std::nullopt},
                           {0, {0, 0, 10, 10}, 0.2},
                           {0, {20, 20, 30, 30}, 0.9},
                           {0, {40, 40, 50, 50}, std::nullopt}};
  EXPECT_EQ(tr.step(0, d).size(), 2u);
  EXPECT_EQ(tr.last_step().rejected_detections, 2u);
  EXPECT_THROW(tr.step(1, dets(1, {{5, 0, 1, 1}})), ValidationError);
}

TEST(TrackerConfig, RejectsInvalidValues) {
  PersistencePropagator p;
  TrackerConfig cfg;
  cfg.max_age = 0;
  EXPECT_THROW(Tracker(cfg, p), ValidationError);
  cfg = {};
  cfg.iou_gate = 1.5;
  EXPECT_THROW(Tracker(cfg, p), ValidationError);
}

TEST(Propagators, PersistenceReturnsLastBox) {
  PersistencePropagator p;
  auto t = Trajectory::start(1, 0, {0, 0, 10, 10});
  EXPECT_EQ(p.predict(t, 9, {}), (BoundingBox{0, 0, 10, 10}));
}

TEST(Propagators, ConstantVelocityExtrapolates) {
  ConstantVelocityPropagator v;
  auto t = Trajectory::start(1, 3, {0, 0, 10, 10});
  t.committed[4] = {2, 0, 12, 10};
  t.last_matched_frame = 4;
  t.last_matched_box = {2, 0, 12, 10};
  EXPECT_EQ(v.predict(t, 5, {}), (BoundingBox{4, 0, 14, 10}));
  EXPECT_EQ(v.predict(t, 7, {}), (BoundingBox{8, 0, 18, 10}));
}

TEST(Propagators, ConstantVelocityUsesGapBetweenCommits) {
  ConstantVelocityPropagator v;
  auto t = Trajectory::start(1, 0, {0, 0, 10, 10});
  t.committed[4] = {8, 4, 18, 14};
  t.last_matched_frame = 4;
  t.last_matched_box = {8, 4, 18, 14};
  EXPECT_EQ(v.predict(t, 6, {}), (BoundingBox{12, 6, 22, 16}));
}

TEST(Propagators, ConstantVelocityWithOneBoxIsPersistence) {
  ConstantVelocityPropagator v;
  PersistencePropagator p;
  auto t = Trajectory::start(1, 2, {3, 4, 13, 14});
  EXPECT_EQ(v.predict(t, 8, {}), p.predict(t, 8, {}));
}

TEST(Propagators, FactoryKnowsBuiltins) {
  EXPECT_EQ(make_propagator("persist")->id(), "persist");
  EXPECT_EQ(make_propagator("velocity")->id(), "velocity");
  EXPECT_THROW(make_propagator("kalman"), ValidationError);
}

TEST(Run, EmptyStreamGivesNoTrajectories) {
  PersistencePropagator p;
  const auto paths = frame_paths(10);
  EXPECT_TRUE(run(paths, {}, {}, p).empty());
}

TEST(Run, StreamBeyondTaskIsRejected) {
  PersistencePropagator p;
  const auto paths = frame_paths(3);
  DetectionStream s;
  s.frames.push_back({5, dets(5, {{0, 0, 1, 1}})});
  EXPECT_THROW(run(paths, s, {}, p), ConsistencyError);
}

TEST(Run, ObjectThatDisappearsKeepsOnlyItsFrames) {
  PersistencePropagator p;
  const auto paths = frame_paths(21);
  DetectionStream s;
  for (FrameIndex f = 0; f <= 4; ++f)
    s.frames.push_back({f, dets(f, {{10.0 + f, 10, 50.0 + f, 50}})});
  const auto out = run(paths, s, {}, p);
  ASSERT_EQ(out.size(), 1u);
  std::vector<FrameIndex> keys;
  for (const auto& [f, b] : out[0].committed) keys.push_back(f);
  EXPECT_EQ(keys, (std::vector<FrameIndex>{0, 1, 2, 3, 4}));
}

TEST(Run, GtReplayReproducesGroundTruth) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synth::SceneSpec spec;
    spec.n_objects = 6;
    spec.n_frames = 80;
    spec.seed = seed;
    const auto scene = synth::generate(spec);
    PersistencePropagator p;
    const auto out = run(scene.frame_paths, stream_from_gt(scene), {}, p);
    ASSERT_EQ(out.size(), 6u) << seed;
    std::set<std::tuple<std::string, double, double, double, double>> want, got;
    for (const auto& r : scene.gt) want.emplace(r.frame_name, r.box.x1, r.box.y1, r.box.x2, r.box.y2);
    for (const auto& r : to_records(out))
      got.emplace(scene.frame_names[static_cast<std::size_t>(r.frame)], r.box.x1, r.box.y1,
                  r.box.x2, r.box.y2);
    EXPECT_EQ(got, want);
  }
}

TEST(Run, EmitPropagatedAddsPredictedBoxes) {
  PersistencePropagator p;
  const auto paths = frame_paths(5);
  DetectionStream s;
  s.frames.push_back({0, dets(0, {{0, 0, 10, 10}})});
  TrackerConfig cfg;
  cfg.emit_propagated = true;
  const auto out = run(paths, s, cfg, p);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].propagated.size(), 4u);
  EXPECT_EQ(to_records(out, false).size(), 1u);
  EXPECT_EQ(to_records(out, true).size(), 5u);
}

class TrackerProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(TrackerProperties, InvariantsHoldOnCorruptedScenes) {
  const std::uint64_t seed = GetParam();
  synth::SceneSpec spec;
  spec.n_objects = 8;
  spec.n_frames = 120;
  spec.layout = synth::Layout::Free;
  spec.max_speed = 6.0;
  spec.seed = seed;
  const auto scene = synth::generate(spec);
  synth::CorruptionSpec cs;
  cs.miss_prob = 0.3;
  cs.fp_rate = 1.5;
  cs.jitter_sigma = 3.0;
  cs.fragment_prob = 0.3;
  cs.seed = seed;
  const auto stream = synth::corrupt(scene.gt, scene.frame_names, cs);

  TrackerConfig cfg;
  cfg.max_age = 4;
  ConstantVelocityPropagator prop;
  Tracker tr(cfg, prop, scene.frame_paths);
  TrackId highest = 0;
  std::size_t prev_live = 0;
  std::map<FrameIndex, std::vector<BoundingBox>> seen;
  for (const auto& fr : stream.frames) {
    for (const auto& d : fr.detections) seen[fr.frame].push_back(d.box);
    const auto& live = tr.step(fr.frame, fr.detections);
    const auto& st = tr.last_step();
    EXPECT_EQ(live.size(), st.matched + st.created + st.retained);
    EXPECT_EQ(prev_live, st.matched + st.retained + st.deleted);
    prev_live = live.size();
    for (const auto& t : live) {
      EXPECT_LE(fr.frame - t.last_matched_frame, cfg.max_age);
      EXPECT_EQ(t.committed.begin()->first, t.first_frame);
      EXPECT_EQ(t.committed.rbegin()->first, t.last_matched_frame);
      if (t.track_id > highest) {
        EXPECT_EQ(t.first_frame, fr.frame);
        highest = t.track_id;
      }
    }
  }
  const auto all = tr.all_trajectories();
  for (std::size_t k = 0; k < all.size(); ++k) {
    EXPECT_EQ(all[k].track_id, static_cast<TrackId>(k + 1));
    if (k > 0) EXPECT_GE(all[k].first_frame, all[k - 1].first_frame);
    for (const auto& [f, b] : all[k].committed) {
      const auto& boxes = seen[f];
      EXPECT_NE(std::find(boxes.begin(), boxes.end(), b), boxes.end());
    }
  }

  ConstantVelocityPropagator prop2;
  const auto again = run(scene.frame_paths, stream, cfg, prop2);
  EXPECT_EQ(write_tracks(to_records(again), scene.frame_names),
            write_tracks(to_records(all), scene.frame_names));
}

INSTANTIATE_TEST_SUITE_P(Seeds, TrackerProperties, ::testing::Range<std::uint64_t>(1, 11));
