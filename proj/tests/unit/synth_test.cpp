#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "fixtures.hpp"
#include "reamot/error.hpp"
#include "reamot/ingest.hpp"
#include "reamot/rng.hpp"
#include "reamot/synth.hpp"

using namespace reamot;
using namespace reamot::synth;

namespace {

// Ten motionless objects over 100 frames: exactly 1000 gt boxes.
Scene thousand_boxes() {
  SceneSpec spec;
  spec.n_frames = 100;
  for (int k = 0; k < 10; ++k) {
    ObjectMotion m;
    m.start = {100.0 * k, 100.0, 100.0 * k + 50.0, 150.0};
    spec.objects.push_back(m);
  }
  return generate(spec);
}

std::vector<std::tuple<double, double, double, double>> box_multiset(
    const std::vector<BoundingBox>& boxes) {
  std::vector<std::tuple<double, double, double, double>> out;
  for (const auto& b : boxes) out.emplace_back(b.x1, b.y1, b.x2, b.y2);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Generate, ConstantVelocityIsArithmetic) {
  SceneSpec spec;
  spec.n_frames = 5;
  ObjectMotion m;
  m.start = {0, 0, 10, 10};
  m.vx = 2.0;
  spec.objects.push_back(m);
  const auto scene = generate(spec);
  ASSERT_EQ(scene.gt.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(scene.gt[f].box.x1, 2.0 * static_cast<double>(f));
    EXPECT_EQ(scene.gt[f].object_id, 1);
  }
  EXPECT_EQ(scene.frame_names[0], "000001");
  EXPECT_EQ(scene.frame_paths[4], "img/000005.jpg");
}

TEST(Generate, VisibilityWindowLimitsRows) {
  SceneSpec spec;
  spec.n_frames = 6;
  ObjectMotion m;
  m.start = {0, 0, 10, 10};
  m.visible = {2, 4};
  spec.objects.push_back(m);
  const auto scene = generate(spec);
  ASSERT_EQ(scene.gt.size(), 2u);
  EXPECT_EQ(scene.gt[0].frame_name, "000003");
  EXPECT_EQ(scene.gt[1].frame_name, "000004");
}

TEST(Generate, SameSeedSameOutput) {
  SceneSpec spec;
  spec.n_objects = 7;
  spec.n_frames = 60;
  spec.lateral_amplitude = 10.0;
  spec.layout = Layout::Free;
  spec.seed = 42;
  EXPECT_EQ(format_gt(generate(spec).gt), format_gt(generate(spec).gt));
  auto other = spec;
  other.seed = 43;
  EXPECT_NE(format_gt(generate(spec).gt), format_gt(generate(other).gt));
}

TEST(Generate, RejectsEmptyScenes) {
  SceneSpec spec;
  spec.n_frames = 0;
  EXPECT_THROW(generate(spec), ValidationError);
  spec.n_frames = 3;
  spec.n_objects = 0;
  EXPECT_THROW(generate(spec), ValidationError);
}

TEST(GenerateProperty, BoxesStayOnCanvasAndLanesNeverOverlap) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (auto layout : {Layout::Lanes, Layout::Free}) {
      SceneSpec spec;
      spec.n_objects = 10;
      spec.n_frames = 200;
      spec.max_speed = 8.0;
      spec.layout = layout;
      spec.seed = seed;
      const auto scene = generate(spec);
      std::map<std::string, std::vector<BoundingBox>> per_frame;
      for (const auto& r : scene.gt) {
        EXPECT_TRUE(r.box.is_valid());
        EXPECT_GE(r.box.x1, 0.0);
        EXPECT_GE(r.box.y1, 0.0);
        EXPECT_LE(r.box.x2, spec.width);
        EXPECT_LE(r.box.y2, spec.height);
        per_frame[r.frame_name].push_back(r.box);
      }
      if (layout != Layout::Lanes) continue;
      for (const auto& [name, boxes] : per_frame)
        for (std::size_t a = 0; a < boxes.size(); ++a)
          for (std::size_t b = a + 1; b < boxes.size(); ++b)
            EXPECT_EQ(iou(boxes[a], boxes[b]), 0.0);
    }
  }
}

TEST(Corrupt, IdentitySpecReproducesGt) {
  SceneSpec spec;
  spec.n_objects = 5;
  spec.n_frames = 50;
  spec.seed = 3;
  const auto scene = generate(spec);
  const auto stream = corrupt(scene.gt, scene.frame_names, {});
  EXPECT_EQ(stream.frames.size(), 50u);
  std::vector<BoundingBox> got, want;
  for (const auto& f : stream.frames)
    for (const auto& d : f.detections) got.push_back(d.box);
  for (const auto& r : scene.gt) want.push_back(r.box);
  EXPECT_EQ(box_multiset(got), box_multiset(want));
}

TEST(Corrupt, CertainMissEmptiesStream) {
  const auto scene = thousand_boxes();
  CorruptionSpec cs;
  cs.miss_prob = 1.0;
  EXPECT_EQ(corrupt(scene.gt, scene.frame_names, cs).box_count(), 0u);
}

TEST(Corrupt, MissRateFixture) {
  const auto scene = thousand_boxes();
  ASSERT_EQ(scene.gt.size(), 1000u);
  CorruptionSpec cs;
  cs.miss_prob = 0.3;
  cs.seed = 2024;
  const auto survivors = corrupt(scene.gt, scene.frame_names, cs).box_count();
  EXPECT_GE(survivors, 665u);
  EXPECT_LE(survivors, 735u);
  EXPECT_EQ(survivors, 705u);
}

TEST(Corrupt, FalsePositiveRateFixture) {
  const auto scene = thousand_boxes();
  CorruptionSpec cs;
  cs.fp_rate = 2.0;
  cs.seed = 5;
  const auto n = corrupt(scene.gt, scene.frame_names, cs).box_count() - 1000;
  EXPECT_NEAR(static_cast<double>(n) / 100.0, 2.0, 0.35);
}

TEST(Corrupt, DeterministicAndValid) {
  const auto scene = thousand_boxes();
  CorruptionSpec cs;
  cs.miss_prob = 0.2;
  cs.fp_rate = 1.0;
  cs.jitter_sigma = 4.0;
  cs.fragment_prob = 0.5;
  cs.seed = 8;
  const auto a = corrupt(scene.gt, scene.frame_names, cs);
  EXPECT_EQ(a, corrupt(scene.gt, scene.frame_names, cs));
  for (const auto& f : a.frames)
    for (const auto& d : f.detections) {
      EXPECT_TRUE(d.box.is_valid());
      EXPECT_LE(d.box.x2, cs.width);
      EXPECT_LE(d.box.y2, cs.height);
    }
}

TEST(Corrupt, RejectsBadSpec) {
  const auto scene = thousand_boxes();
  CorruptionSpec cs;
  cs.miss_prob = 1.5;
  EXPECT_THROW(corrupt(scene.gt, scene.frame_names, cs), ValidationError);
  cs = {};
  cs.jitter_sigma = -1.0;
  EXPECT_THROW(corrupt(scene.gt, scene.frame_names, cs), ValidationError);
}

TEST(EmitTask, LoadsBackLosslessly) {
  fixture::TempDir tmp("emit");
  SceneSpec spec;
  spec.n_objects = 4;
  spec.n_frames = 30;
  spec.seed = 12;
  const auto scene = generate(spec);
  const auto dir = tmp.path() / "test" / "easy" / task_name(12);
  emit_task(dir, scene);
  const auto task = load_task(dir);
  EXPECT_EQ(task.task_id, "Synthetic_seq0012_0");
  EXPECT_EQ(task.level, Level::Easy);
  EXPECT_EQ(task.gt, scene.gt);
  EXPECT_EQ(task.frame_paths, scene.frame_paths);
  EXPECT_EQ(task.frame_names, scene.frame_names);
  EXPECT_EQ(task.instruction_text, EmitOptions{}.instruction_en);
}

TEST(PlaceholderTags, ScoreEasy) {
  const auto tags = placeholder_tags();
  EXPECT_EQ(difficulty::score(tags).level, Level::Easy);
}

TEST(CounterRng, StreamsDependOnlyOnKeys) {
  CounterRng a(1, {2, 3}), b(1, {2, 3}), c(1, {3, 2});
  const auto x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
  CounterRng u(9, {1});
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LE(std::abs(u.truncated_normal(2.0)), 6.0);
    EXPECT_GE(u.poisson(1.5), 0);
  }
}
