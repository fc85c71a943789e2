#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace roisweep {

/// Dense row-major raster.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Grayscale intensities, nominally in [0, 255].
using GrayImage = Image<float>;
/// Byte mask, nonzero = set.
using Mask = Image<std::uint8_t>;

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  long long area() const noexcept {
    return empty() ? 0 : static_cast<long long>(width()) * height();
  }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool within(int w, int h) const noexcept { return x0 >= 0 && y0 >= 0 && x1 <= w && y1 <= h; }

  bool operator==(const PixelRect&) const = default;
};

inline PixelRect full_rect(int width, int height) { return {0, 0, width, height}; }

inline PixelRect intersect(const PixelRect& a, const PixelRect& b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
}

template <typename T>
Image<T> crop(const Image<T>& image, const PixelRect& rect) {
  Image<T> out(rect.width(), rect.height());
  for (int y = 0; y < rect.height(); ++y) {
    const T* src = image.row(rect.y0 + y) + rect.x0;
    std::copy(src, src + rect.width(), out.row(y));
  }
  return out;
}

}  // namespace roisweep
