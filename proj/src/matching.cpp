#include "roisweep/matching.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "roisweep/errors.hpp"
#include "roisweep/parallel.hpp"

namespace roisweep {

namespace {

bool window_inside(int width, int height, int x, int y) {
  return x - kCensusRadiusX >= 0 && x + kCensusRadiusX < width && y - kCensusRadiusY >= 0 &&
         y + kCensusRadiusY < height;
}

CensusDescriptor census_unchecked(const GrayImage& image, int x, int y) {
  const float center = image(x, y);
  CensusDescriptor bits = 0;
  int k = 0;
  for (int dy = -kCensusRadiusY; dy <= kCensusRadiusY; ++dy) {
    const float* row = image.row(y + dy) + x;
    for (int dx = -kCensusRadiusX; dx <= kCensusRadiusX; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (row[dx] < center) bits |= CensusDescriptor{1} << k;
      ++k;
    }
  }
  return bits;
}

/// Descriptors for x in [x_begin, x_end) of row y; every window must lie inside
/// the image. Offsets are processed one at a time so the inner loop vectorizes.
void census_row(const GrayImage& image, int y, int x_begin, int x_end, CensusDescriptor* out) {
  const int n = x_end - x_begin;
  if (n <= 0) return;
  std::fill_n(out, n, CensusDescriptor{0});
  const float* center = image.row(y) + x_begin;
  int k = 0;
  for (int dy = -kCensusRadiusY; dy <= kCensusRadiusY; ++dy) {
    const float* row = image.row(y + dy) + x_begin;
    for (int dx = -kCensusRadiusX; dx <= kCensusRadiusX; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const float* neighbor = row + dx;
      for (int i = 0; i < n; ++i) {
        out[i] |= static_cast<CensusDescriptor>(neighbor[i] < center[i]) << k;
      }
      ++k;
    }
  }
}

/// Summed-area table of invalid pixels, for O(1) window validity queries.
class InvalidCounter {
 public:
  explicit InvalidCounter(const Mask& valid)
      : width_(valid.width() + 1), sums_(static_cast<std::size_t>(valid.width() + 1) * (valid.height() + 1), 0) {
    for (int y = 0; y < valid.height(); ++y) {
      int row_sum = 0;
      for (int x = 0; x < valid.width(); ++x) {
        row_sum += valid(x, y) == 0 ? 1 : 0;
        at(x + 1, y + 1) = at(x + 1, y) + row_sum;
      }
    }
  }

  /// True when the census window centered at (x, y) holds no invalid pixel.
  bool window_clear(int x, int y) const {
    const int x0 = x - kCensusRadiusX, x1 = x + kCensusRadiusX + 1;
    const int y0 = y - kCensusRadiusY, y1 = y + kCensusRadiusY + 1;
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0) == 0;
  }

 private:
  int& at(int x, int y) { return sums_[static_cast<std::size_t>(y) * width_ + x]; }
  int at(int x, int y) const { return sums_[static_cast<std::size_t>(y) * width_ + x]; }

  int width_;
  std::vector<int> sums_;
};

void check_homography(const Mat3& h) {
  if (!h.allFinite()) {
    throw Error(ErrorCode::NumericalDegeneracy, "homography has non-finite entries");
  }
  const Eigen::JacobiSVD<Mat3> svd(h);
  const auto sv = svd.singularValues();
  if (!(sv(2) > 0.0) || sv(0) / sv(2) > 1e12) {
    throw Error(ErrorCode::NumericalDegeneracy, "homography is singular");
  }
}

void check_rois(std::span<const PixelRect> rois, int width, int height) {
  for (const auto& r : rois) {
    if (r.empty()) throw Error(ErrorCode::EmptyRoi, "region of interest has zero area");
    if (!r.within(width, height)) throw Error(ErrorCode::OutOfRange, "region of interest leaves the image");
  }
}

/// Reference descriptors computed only inside the requested regions.
CensusImage reference_census(const GrayImage& image, std::span<const PixelRect> rois, int threads) {
  CensusImage out;
  out.width = image.width();
  out.height = image.height();
  out.bits.assign(image.size(), 0);
  out.valid.assign(image.size(), 0);
  for (const auto& r : rois) {
    parallel_for(r.y0, r.y1, threads, [&](int y) {
      for (int x = r.x0; x < r.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * out.width + x;
        if (out.valid[i] || !window_inside(out.width, out.height, x, y)) continue;
        out.bits[i] = census_unchecked(image, x, y);
        out.valid[i] = 1;
      }
    });
  }
  return out;
}

/// Core sweep: each cell is the minimum over `subsets` of the mean Hamming
/// cost across that subset's valid views.
std::vector<CostVolume> sweep(const CameraView& reference, std::span<const CameraView* const> views,
                              std::span<const std::vector<int>> subsets, const PlaneStack& stack,
                              std::span<const PixelRect> rois, int threads) {
  const int width = reference.image.width();
  const int height = reference.image.height();
  if (width < kCensusWidth || height < kCensusHeight) {
    throw Error(ErrorCode::ImageTooSmall, "images must be at least 9x7");
  }
  check_rois(rois, width, height);
  if (stack.size() < 1) throw Error(ErrorCode::InvalidCount, "plane stack is empty");

  std::vector<CostVolume> volumes;
  volumes.reserve(rois.size());
  for (const auto& r : rois) volumes.emplace_back(r.width(), r.height(), stack.size());

  const CensusImage ref_census = reference_census(reference.image, rois, threads);
  const int view_count = static_cast<int>(views.size());

  parallel_for(0, stack.size(), threads, [&](int d) {
    std::vector<WarpedImage> warped;
    std::vector<InvalidCounter> counters;
    warped.reserve(static_cast<std::size_t>(view_count));
    counters.reserve(static_cast<std::size_t>(view_count));
    for (const CameraView* view : views) {
      const Mat3 h = plane_homography(reference.intrinsics, reference.pose, view->pose, stack[d]);
      warped.push_back(warp_image(view->image, h, width, height));
      counters.emplace_back(warped.back().valid);
    }

    std::vector<std::vector<CensusDescriptor>> rows(static_cast<std::size_t>(view_count));
    for (std::size_t r = 0; r < rois.size(); ++r) {
      const PixelRect& roi = rois[r];
      CostVolume& volume = volumes[r];
      // Columns whose census window fits horizontally.
      const int xb = std::max(roi.x0, kCensusRadiusX);
      const int xe = std::min(roi.x1, width - kCensusRadiusX);
      if (xb >= xe) continue;
      for (auto& row : rows) row.resize(static_cast<std::size_t>(xe - xb));
      for (int y = std::max(roi.y0, kCensusRadiusY); y < std::min(roi.y1, height - kCensusRadiusY); ++y) {
        for (int v = 0; v < view_count; ++v) {
          census_row(warped[static_cast<std::size_t>(v)].image, y, xb, xe, rows[static_cast<std::size_t>(v)].data());
        }
        for (int x = xb; x < xe; ++x) {
          if (!ref_census.valid_at(x, y)) continue;
          const CensusDescriptor ref_bits = ref_census.at(x, y);
          bool any = false;
          float best = kMaxCost;
          for (const auto& subset : subsets) {
            int sum = 0;
            int n = 0;
            for (int v : subset) {
              const auto sv = static_cast<std::size_t>(v);
              if (!counters[sv].window_clear(x, y)) continue;
              sum += hamming_cost(ref_bits, rows[sv][static_cast<std::size_t>(x - xb)]);
              ++n;
            }
            if (n == 0) continue;
            const float mean = static_cast<float>(sum) / static_cast<float>(n);
            best = any ? std::min(best, mean) : mean;
            any = true;
          }
          if (!any) continue;
          const std::size_t cell = volume.index(x - roi.x0, y - roi.y0, d);
          volume.cost[cell] = best;
          volume.valid[cell] = 1;
        }
      }
    }
  });
  return volumes;
}

}  // namespace

CensusImage census_transform(const GrayImage& image) {
  if (image.width() < kCensusWidth || image.height() < kCensusHeight) {
    throw Error(ErrorCode::ImageTooSmall, "census transform needs at least a 9x7 image");
  }
  const PixelRect all = full_rect(image.width(), image.height());
  return reference_census(image, std::span<const PixelRect>(&all, 1), 1);
}

bool census_at(const GrayImage& image, const Mask* valid, int x, int y, CensusDescriptor& out) {
  if (!window_inside(image.width(), image.height(), x, y)) return false;
  if (valid != nullptr) {
    for (int dy = -kCensusRadiusY; dy <= kCensusRadiusY; ++dy) {
      for (int dx = -kCensusRadiusX; dx <= kCensusRadiusX; ++dx) {
        if ((*valid)(x + dx, y + dy) == 0) return false;
      }
    }
  }
  out = census_unchecked(image, x, y);
  return true;
}

namespace {

// Rounding noise in H p would otherwise push exact grid samples (e.g. row 0
// under a pure x translation) just outside the image.
double snap(double c) {
  const double r = std::round(c);
  return std::abs(c - r) <= 1e-9 ? r : c;
}

}  // namespace

WarpedImage warp_image(const GrayImage& source, const Mat3& homography, int width, int height) {
  check_homography(homography);
  if (width < 0) width = source.width();
  if (height < 0) height = source.height();

  WarpedImage out{GrayImage(width, height, 0.f), Mask(width, height, 0)};
  const int sw = source.width();
  const int sh = source.height();
  const Mat3& h = homography;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double qz = h(2, 0) * x + h(2, 1) * y + h(2, 2);
      if (!(qz > 0.0)) continue;
      const double u = snap((h(0, 0) * x + h(0, 1) * y + h(0, 2)) / qz);
      const double v = snap((h(1, 0) * x + h(1, 1) * y + h(1, 2)) / qz);
      if (!(u >= 0.0) || !(v >= 0.0) || u > sw - 1 || v > sh - 1) continue;
      const int u0 = static_cast<int>(u);
      const int v0 = static_cast<int>(v);
      const double fu = u - u0;
      const double fv = v - v0;
      // Taps with zero weight are not required to exist.
      const int u1 = fu > 0.0 ? u0 + 1 : u0;
      const int v1 = fv > 0.0 ? v0 + 1 : v0;
      if (u1 >= sw || v1 >= sh) continue;
      const double top = (1.0 - fu) * source(u0, v0) + fu * source(u1, v0);
      const double bottom = (1.0 - fu) * source(u0, v1) + fu * source(u1, v1);
      out.image(x, y) = static_cast<float>((1.0 - fv) * top + fv * bottom);
      out.valid(x, y) = 1;
    }
  }
  return out;
}

void ImageBundle::validate() const {
  const int w = width();
  const int h = height();
  reference.intrinsics.validate();
  reference.pose.validate();
  auto check = [&](const CameraView& view) {
    if (view.image.width() != w || view.image.height() != h) {
      throw Error(ErrorCode::DimensionMismatch, "bundle images differ in size");
    }
    if (!(view.intrinsics == reference.intrinsics)) {
      throw Error(ErrorCode::InvalidArgument, "bundle views must share intrinsics");
    }
    view.pose.validate();
  };
  for (const auto& v : before) check(v);
  for (const auto& v : after) check(v);
}

CostVolume CostVolume::crop(const PixelRect& rect) const {
  CostVolume out(rect.width(), rect.height(), planes);
  for (int y = 0; y < rect.height(); ++y) {
    for (int x = 0; x < rect.width(); ++x) {
      const std::size_t src = index(rect.x0 + x, rect.y0 + y, 0);
      const std::size_t dst = out.index(x, y, 0);
      std::copy_n(cost.begin() + static_cast<std::ptrdiff_t>(src), planes,
                  out.cost.begin() + static_cast<std::ptrdiff_t>(dst));
      std::copy_n(valid.begin() + static_cast<std::ptrdiff_t>(src), planes,
                  out.valid.begin() + static_cast<std::ptrdiff_t>(dst));
    }
  }
  return out;
}

std::vector<CostVolume> build_cost_volumes(const ImageBundle& bundle, const PlaneStack& stack,
                                           std::span<const PixelRect> rois, int threads) {
  bundle.validate();
  const std::array<const CameraView*, 4> views{&bundle.before[0], &bundle.before[1], &bundle.after[0],
                                               &bundle.after[1]};
  const std::array<std::vector<int>, 2> subsets{std::vector<int>{0, 1}, std::vector<int>{2, 3}};
  return sweep(bundle.reference, views, subsets, stack, rois, threads);
}

CostVolume build_cost_volume(const ImageBundle& bundle, const PlaneStack& stack, std::optional<PixelRect> roi,
                             int threads) {
  const PixelRect rect = roi.value_or(full_rect(bundle.width(), bundle.height()));
  return std::move(build_cost_volumes(bundle, stack, std::span<const PixelRect>(&rect, 1), threads).front());
}

CostVolume subset_cost_volume(const CameraView& reference, std::span<const CameraView> matching,
                              const PlaneStack& stack, std::optional<PixelRect> roi, int threads) {
  std::vector<const CameraView*> views;
  std::vector<int> subset;
  for (const auto& v : matching) {
    if (v.image.width() != reference.image.width() || v.image.height() != reference.image.height()) {
      throw Error(ErrorCode::DimensionMismatch, "matching image differs in size from the reference");
    }
    subset.push_back(static_cast<int>(views.size()));
    views.push_back(&v);
  }
  const std::array<std::vector<int>, 1> subsets{subset};
  const PixelRect rect = roi.value_or(full_rect(reference.image.width(), reference.image.height()));
  return std::move(sweep(reference, views, subsets, stack, std::span<const PixelRect>(&rect, 1), threads).front());
}

}  // namespace roisweep
