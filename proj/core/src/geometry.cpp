#include "reamot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reamot/error.hpp"

namespace reamot {

BoundingBox BoundingBox::make(double x1, double y1, double x2, double y2) {
  BoundingBox b{x1, y1, x2, y2};
  b.validate();
  return b;
}

bool BoundingBox::is_valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x1 <= x2 && y1 <= y2;
}

void BoundingBox::validate() const {
  if (!is_valid()) {
    throw ValidationError("malformed box " + to_string(*this) +
                          " (need finite x1<=x2, y1<=y2)");
  }
}

std::string to_string(const BoundingBox& b) {
  std::ostringstream os;
  os << '[' << b.x1 << ',' << b.y1 << ',' << b.x2 << ',' << b.y2 << ']';
  return os.str();
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("mask dimensions must be positive");
  }
}

BinaryMask::BinaryMask(int width, int height, std::vector<Pixel> foreground)
    : BinaryMask(width, height) {
  pixels_.reserve(foreground.size());
  for (const auto& [row, col] : foreground) set(row, col);
}

void BinaryMask::set(int row, int col) {
  if (row < 0 || col < 0 || row >= height_ || col >= width_) {
    throw ValidationError("mask pixel (" + std::to_string(row) + "," +
                          std::to_string(col) + ") outside " +
                          std::to_string(width_) + "x" +
                          std::to_string(height_));
  }
  pixels_.emplace_back(row, col);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  a.validate();
  b.validate();
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::optional<BoundingBox> mask_to_box(const BinaryMask& mask) {
  if (mask.empty()) return std::nullopt;
  int rmin = mask.height(), rmax = -1;
  int cmin = mask.width(), cmax = -1;
  for (const auto& [row, col] : mask.foreground()) {
    rmin = std::min(rmin, row);
    rmax = std::max(rmax, row);
    cmin = std::min(cmin, col);
    cmax = std::max(cmax, col);
  }
  return BoundingBox{static_cast<double>(cmin), static_cast<double>(rmin),
                     static_cast<double>(cmax + 1),
                     static_cast<double>(rmax + 1)};
}

}  // namespace reamot
