#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reamot/geometry.hpp"

namespace reamot::assignment {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using CostMatrix = Matrix<double>;

inline constexpr double kDefaultGate = 0.3;

struct Match {
  std::size_t detection = 0;
  std::size_t track = 0;
  double iou = 0.0;
};

struct AssignmentResult {
  std::vector<Match> matches;  // ascending by detection index
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_tracks;
  // Sum of cost over the optimal one-to-one assignment before gating.
  double total_cost = 0.0;
};

// Entry (i, j) = 1 - iou(detections[i], predictions[j]).
CostMatrix build_cost_matrix(std::span<const BoundingBox> detections,
                             std::span<const BoundingBox> predictions);

// Minimum-cost one-to-one assignment of rows (detections) to columns
// (tracks). Rectangular inputs are padded with cost 1; padded pairs are never
// reported. Pairs whose IoU (1 - cost) falls below `gate` are demoted to
// unmatched after the solve.
AssignmentResult solve(const CostMatrix& cost, double gate = kDefaultGate);

// Exact integer core used by `solve` and by identity matching. Returns, for
// each row, the assigned column or -1. Rectangular inputs are padded with
// `pad_cost`. Among optimal assignments the lexicographically smallest
// row-to-column vector wins.
std::vector<std::ptrdiff_t> solve_exact(const Matrix<std::int64_t>& cost,
                                        std::int64_t pad_cost);

// Fixed-point scale applied to real costs before solving; real costs that
// differ by less than 1/kCostScale are treated as ties.
inline constexpr double kCostScale = 1099511627776.0;  // 2^40

}  // namespace reamot::assignment
