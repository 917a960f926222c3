#include "reamot/assignment.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "reamot/error.hpp"

namespace reamot::assignment {
namespace {

using i64 = std::int64_t;

struct SquareSolution {
  std::vector<std::size_t> col_of;  // row -> col
  std::vector<i64> u;               // row potentials
  std::vector<i64> v;               // column potentials
};

// Shortest augmenting path Hungarian method on an n x n matrix. Keeps
// u[i] + v[j] <= c(i, j) throughout, with equality on the final matching.
SquareSolution hungarian(const Matrix<i64>& c) {
  const std::size_t n = c.rows();
  constexpr i64 kInf = std::numeric_limits<i64>::max() / 4;
  // 1-based with column 0 as the virtual root.
  std::vector<i64> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<i64> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      i64 delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const i64 cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  SquareSolution s;
  s.col_of.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) s.col_of[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

// Rewrites an optimal matching into the lexicographically smallest optimal
// one. Every optimal matching uses only tight edges (zero reduced cost), so
// the search stays inside the tight subgraph: rows are fixed in order, each
// taking the smallest column that still admits a perfect tight matching of
// the remaining rows.
void canonicalize(const Matrix<i64>& c, SquareSolution& s) {
  const std::size_t n = c.rows();
  auto tight = [&](std::size_t i, std::size_t j) {
    return c(i, j) - s.u[i] - s.v[j] == 0;
  };
  std::vector<std::size_t> row_of(n);
  for (std::size_t i = 0; i < n; ++i) row_of[s.col_of[i]] = i;

  std::vector<char> seen(n);
  std::vector<std::size_t> parent_row(n);  // column -> row that reached it
  std::vector<std::size_t> stack;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t target = s.col_of[i];
    for (std::size_t j = 0; j < target; ++j) {
      if (row_of[j] < i || !tight(i, j)) continue;
      // Row i takes column j. The row losing j must reach `target` (released
      // by row i) along an alternating path of tight edges through rows > i.
      std::fill(seen.begin(), seen.end(), 0);
      seen[j] = 1;
      seen[target] = 0;
      stack.assign(1, row_of[j]);
      bool found = false;
      while (!stack.empty() && !found) {
        const std::size_t r = stack.back();
        stack.pop_back();
        for (std::size_t col = 0; col < n; ++col) {
          if (seen[col] || row_of[col] < i || !tight(r, col)) continue;
          seen[col] = 1;
          parent_row[col] = r;
          if (col == target) {
            found = true;
            break;
          }
          stack.push_back(row_of[col]);
        }
      }
      if (!found) continue;
      std::size_t col = target;
      while (true) {
        const std::size_t r = parent_row[col];
        const std::size_t held = s.col_of[r];
        s.col_of[r] = col;
        row_of[col] = r;
        if (held == j) break;
        col = held;
      }
      s.col_of[i] = j;
      row_of[j] = i;
      break;
    }
  }
}

}  // namespace

std::vector<std::ptrdiff_t> solve_exact(const Matrix<i64>& cost, i64 pad_cost) {
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  std::vector<std::ptrdiff_t> out(rows, -1);
  if (rows == 0 || cols == 0) return out;

  const std::size_t n = std::max(rows, cols);
  Matrix<i64> square(n, n, pad_cost);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) square(i, j) = cost(i, j);
  }
  auto sol = hungarian(square);
  canonicalize(square, sol);
  for (std::size_t i = 0; i < rows; ++i) {
    if (sol.col_of[i] < cols) out[i] = static_cast<std::ptrdiff_t>(sol.col_of[i]);
  }
  return out;
}

CostMatrix build_cost_matrix(std::span<const BoundingBox> detections,
                             std::span<const BoundingBox> predictions) {
  CostMatrix m(detections.size(), predictions.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      m(i, j) = 1.0 - iou(detections[i], predictions[j]);
    }
  }
  return m;
}

AssignmentResult solve(const CostMatrix& cost, double gate) {
  if (!(gate >= 0.0 && gate <= 1.0)) {
    throw ValidationError("gate must lie in [0,1]");
  }
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  Matrix<i64> fixed(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = cost(i, j);
      if (!std::isfinite(c)) {
        throw ValidationError("non-finite cost at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
      if (c < 0.0 || c > 1.0) {
        throw ValidationError("cost outside [0,1] at (" + std::to_string(i) +
                              "," + std::to_string(j) + ")");
      }
      fixed(i, j) = std::llround(c * kCostScale);
    }
  }
  const auto col_of = solve_exact(fixed, std::llround(kCostScale));

  AssignmentResult result;
  std::vector<char> track_used(cols, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (col_of[i] < 0) {
      result.unmatched_detections.push_back(i);
      continue;
    }
    const auto j = static_cast<std::size_t>(col_of[i]);
    result.total_cost += cost(i, j);
    const double overlap = 1.0 - cost(i, j);
    if (overlap >= gate) {
      result.matches.push_back(Match{i, j, overlap});
      track_used[j] = 1;
    } else {
      result.unmatched_detections.push_back(i);
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (!track_used[j]) result.unmatched_tracks.push_back(j);
  }
  return result;
}

}  // namespace reamot::assignment
