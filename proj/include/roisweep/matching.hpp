#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roisweep/geometry.hpp"
#include "roisweep/image.hpp"

namespace roisweep {

inline constexpr int kCensusWidth = 9;
inline constexpr int kCensusHeight = 7;
inline constexpr int kCensusBits = kCensusWidth * kCensusHeight - 1;
inline constexpr int kCensusRadiusX = kCensusWidth / 2;
inline constexpr int kCensusRadiusY = kCensusHeight / 2;
inline constexpr float kMaxCost = static_cast<float>(kCensusBits);

/// Bit k is set iff the k-th non-center neighbor of the 9x7 window (row-major)
/// is strictly darker than the center.
using CensusDescriptor = std::uint64_t;

struct CensusImage {
  int width = 0;
  int height = 0;
  std::vector<CensusDescriptor> bits;
  std::vector<std::uint8_t> valid;

  CensusDescriptor at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  bool valid_at(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Descriptors for every pixel; pixels whose window leaves the image are
/// invalid. Throws ImageTooSmall below 9x7.
CensusImage census_transform(const GrayImage& image);

/// Descriptor at one pixel. Returns false when the window leaves the image or,
/// if `valid` is given, touches a pixel flagged invalid.
bool census_at(const GrayImage& image, const Mask* valid, int x, int y, CensusDescriptor& out);

inline int hamming_cost(CensusDescriptor a, CensusDescriptor b) {
  return static_cast<int>(__builtin_popcountll(a ^ b));
}

struct WarpedImage {
  GrayImage image;
  Mask valid;
};

/// Output pixel p samples `source` bilinearly at H p. A pixel is valid only if
/// every interpolation tap with nonzero weight lies inside the source.
/// The output has the size of `source` unless width/height are given.
/// Throws NumericalDegeneracy on a singular H.
WarpedImage warp_image(const GrayImage& source, const Mat3& homography, int width = -1, int height = -1);

/// Reference view plus two matching views on either side.
struct ImageBundle {
  CameraView reference;
  std::array<CameraView, 2> before;  // I_ref-1, I_ref-2
  std::array<CameraView, 2> after;   // I_ref+1, I_ref+2

  int width() const { return reference.image.width(); }
  int height() const { return reference.image.height(); }
  /// Throws DimensionMismatch / InvalidArgument on inconsistent views.
  void validate() const;
};

/// W x H x D dissimilarity volume, plane index fastest.
struct CostVolume {
  int width = 0;
  int height = 0;
  int planes = 0;
  std::vector<float> cost;
  std::vector<std::uint8_t> valid;

  CostVolume() = default;
  CostVolume(int w, int h, int d, float fill = kMaxCost)
      : width(w), height(h), planes(d),
        cost(static_cast<std::size_t>(w) * h * d, fill),
        valid(static_cast<std::size_t>(w) * h * d, 0) {}

  std::size_t index(int x, int y, int d) const {
    return (static_cast<std::size_t>(y) * width + x) * planes + d;
  }
  float& at(int x, int y, int d) { return cost[index(x, y, d)]; }
  float at(int x, int y, int d) const { return cost[index(x, y, d)]; }
  bool valid_at(int x, int y, int d) const { return valid[index(x, y, d)] != 0; }

  CostVolume crop(const PixelRect& rect) const;
  bool operator==(const CostVolume&) const = default;
};

/// Plane-sweep cost volume for `roi` (full frame when absent). Cells hold
/// min(left subset mean, right subset mean) of Census Hamming costs over the
/// matching views whose warped window is valid; cells with no valid view are
/// flagged invalid and carry kMaxCost. Warping always covers the full image.
/// Throws EmptyRoi, OutOfRange when roi leaves the image.
CostVolume build_cost_volume(const ImageBundle& bundle, const PlaneStack& stack,
                             std::optional<PixelRect> roi = std::nullopt, int threads = 0);

/// Same as build_cost_volume for several regions, warping each plane once.
std::vector<CostVolume> build_cost_volumes(const ImageBundle& bundle, const PlaneStack& stack,
                                           std::span<const PixelRect> rois, int threads = 0);

/// Mean Census cost of the reference against one subset of matching views.
CostVolume subset_cost_volume(const CameraView& reference, std::span<const CameraView> matching,
                              const PlaneStack& stack, std::optional<PixelRect> roi = std::nullopt,
                              int threads = 0);

}  // namespace roisweep
