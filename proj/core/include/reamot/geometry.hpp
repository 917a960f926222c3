#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reamot {

// Axis-aligned box in pixel coordinates; (x1, y1) is the top-left corner and
// (x2, y2) the bottom-right. Construction through `make` validates ordering;
// aggregate initialization does not, so callers that accept foreign data
// should call `validate()` or `is_valid()`.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  static BoundingBox make(double x1, double y1, double x2, double y2);

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  bool is_valid() const noexcept;
  void validate() const;  // throws ValidationError

  BoundingBox translated(double dx, double dy) const noexcept {
    return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

std::string to_string(const BoundingBox& b);

using FrameIndex = std::int64_t;

struct Detection {
  FrameIndex frame_index = 0;
  BoundingBox box;
  std::optional<double> score;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Sparse foreground mask. Coordinates are (row, col) with row < height and
// col < width.
class BinaryMask {
 public:
  using Pixel = std::pair<int, int>;

  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<Pixel> foreground);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<Pixel>& foreground() const noexcept { return pixels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  void set(int row, int col);

 private:
  int width_;
  int height_;
  std::vector<Pixel> pixels_;
};

// Intersection over union. Zero-area boxes are accepted and yield 0 unless
// the union itself is empty, in which case the result is also 0.
double iou(const BoundingBox& a, const BoundingBox& b);

// Tight box around the foreground, right/bottom edges exclusive so that one
// pixel has unit area. Empty masks give nullopt.
std::optional<BoundingBox> mask_to_box(const BinaryMask& mask);

}  // namespace reamot
