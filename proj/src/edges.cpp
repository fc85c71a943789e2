#include "roisweep/edges.hpp"

#include <cmath>
#include <cstdlib>

#include "roisweep/errors.hpp"

namespace roisweep {

double LineSegment::length() const { return std::hypot(x1 - x0, y1 - y0); }

namespace {

void stamp(LineMask& mask, int x, int y, bool x_major, int thickness) {
  const int lo = -(thickness - 1) / 2;
  const int hi = lo + thickness - 1;
  for (int k = lo; k <= hi; ++k) {
    const int px = x_major ? x : x + k;
    const int py = x_major ? y + k : y;
    if (mask.contains(px, py)) mask(px, py) = 1;
  }
}

}  // namespace

LineMask rasterize_mask(const std::vector<LineSegment>& segments, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
  }
  LineMask mask(width, height, 0);
  // Bound the walk so far-away segments cannot stall rasterization.
  const double limit = 4.0 * (static_cast<double>(width) + height);
  for (const auto& s : segments) {
    if (!std::isfinite(s.x0) || !std::isfinite(s.y0) || !std::isfinite(s.x1) || !std::isfinite(s.y1)) continue;
    if (std::abs(s.x0) > limit || std::abs(s.x1) > limit || std::abs(s.y0) > limit || std::abs(s.y1) > limit) continue;

    int x = static_cast<int>(std::lround(s.x0));
    int y = static_cast<int>(std::lround(s.y0));
    const int xe = static_cast<int>(std::lround(s.x1));
    const int ye = static_cast<int>(std::lround(s.y1));
    const int dx = std::abs(xe - x);
    const int dy = -std::abs(ye - y);
    const int sx = x < xe ? 1 : -1;
    const int sy = y < ye ? 1 : -1;
    const bool x_major = dx >= -dy;
    const int thickness = std::max(1, static_cast<int>(std::lround(s.width)));

    int err = dx + dy;
    while (true) {
      stamp(mask, x, y, x_major, thickness);
      if (x == xe && y == ye) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }
  return mask;
}

LineMask gradient_mask(const GrayImage& image, float threshold) {
  LineMask mask(image.width(), image.height(), 0);
  const int w = image.width();
  const int h = image.height();
  auto at = [&](int x, int y) {
    return image(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = (at(x + 1, y - 1) + 2.f * at(x + 1, y) + at(x + 1, y + 1)) -
                       (at(x - 1, y - 1) + 2.f * at(x - 1, y) + at(x - 1, y + 1));
      const float gy = (at(x - 1, y + 1) + 2.f * at(x, y + 1) + at(x + 1, y + 1)) -
                       (at(x - 1, y - 1) + 2.f * at(x, y - 1) + at(x + 1, y - 1));
      if (std::sqrt(gx * gx + gy * gy) / 8.f > threshold) mask(x, y) = 1;
    }
  }
  return mask;
}

}  // namespace roisweep
