#pragma once

// Seeded generators for test inputs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "reamot/assignment.hpp"
#include "reamot/geometry.hpp"
#include "reamot/metrics.hpp"

namespace fixture {

inline reamot::BoundingBox random_box(std::mt19937_64& rng, double extent, double min_side,
                                      double max_side) {
  std::uniform_real_distribution<double> side(min_side, max_side);
  const double w = side(rng), h = side(rng);
  std::uniform_real_distribution<double> px(0.0, extent - w), py(0.0, extent - h);
  const double x = px(rng), y = py(rng);
  return {x, y, x + w, y + h};
}

// Cost matrix up to 7x7. Half of the matrices use multiples of 1/1024 so that
// ties are common and sums are exact; the rest use continuous entries.
inline reamot::assignment::CostMatrix random_cost_matrix(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(0, 7);
  const std::size_t rows = dim(rng), cols = dim(rng);
  reamot::assignment::CostMatrix m(rows, cols);
  const bool dyadic = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
  std::uniform_int_distribution<int> coarse(0, 16);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = dyadic ? coarse(rng) * 64.0 / 1024.0 : fine(rng);
  return m;
}

// Small crowded sequences: up to 3 gt ids and 3 pred ids over up to 5 frames.
// Predictions shadow a gt id with noise and may switch targets, so matches,
// misses, false positives and identity switches all occur.
struct SmallCase {
  reamot::metrics::Sequence gt;
  reamot::metrics::Sequence pred;
};

inline SmallCase random_small_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_ids(0, 3), n_frames(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0), noise(-3.0, 3.0);
  const int frames = n_frames(rng), gts = n_ids(rng), preds = n_ids(rng);
  SmallCase c;
  c.gt.resize(static_cast<std::size_t>(frames));
  c.pred.resize(static_cast<std::size_t>(frames));

  std::vector<reamot::BoundingBox> pos;
  for (int k = 0; k < gts; ++k) pos.push_back(random_box(rng, 60.0, 10.0, 30.0));
  std::vector<int> target(static_cast<std::size_t>(preds));
  for (auto& t : target) t = gts > 0 ? std::uniform_int_distribution<int>(0, gts - 1)(rng) : -1;

  for (int f = 0; f < frames; ++f) {
    auto& gf = c.gt[static_cast<std::size_t>(f)];
    for (int k = 0; k < gts; ++k) {
      auto& b = pos[static_cast<std::size_t>(k)];
      b = b.translated(noise(rng), noise(rng));
      if (unit(rng) < 0.8) gf.push_back({k + 1, b});
    }
    for (int k = 0; k < preds; ++k) {
      auto& t = target[static_cast<std::size_t>(k)];
      if (gts > 0 && unit(rng) < 0.3) t = std::uniform_int_distribution<int>(0, gts - 1)(rng);
      if (unit(rng) >= 0.75) continue;
      reamot::BoundingBox b;
      if (t >= 0 && unit(rng) < 0.7) {
        const auto& src = pos[static_cast<std::size_t>(t)];
        b = {src.x1 + noise(rng), src.y1 + noise(rng), src.x2 + noise(rng), src.y2 + noise(rng)};
      } else {
        b = random_box(rng, 60.0, 10.0, 30.0);
      }
      c.pred[static_cast<std::size_t>(f)].push_back({100 + k, b});
    }
  }
  return c;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("reamot_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
