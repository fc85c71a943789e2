#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "roisweep/edges.hpp"
#include "roisweep/geometry.hpp"
#include "roisweep/matching.hpp"

namespace roisweep {

struct SgmParams {
  float p1 = 5.f;
  float p2 = 50.f;
  int paths = 8;

  /// Throws InvalidArgument unless 0 < p1 <= p2 and paths == 8.
  void validate() const;
};

/// Step from the predecessor q to the current pixel p along a path.
struct PathDirection {
  int dx = 0;
  int dy = 0;
};

/// E, W, S, N, then the four diagonals. Aggregation sums in this order.
inline constexpr std::array<PathDirection, 8> kPathDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
}};

/// Path costs L_dir for a single direction:
///   L(p, i) = C(p, i) + min(L(q, i), L(q, i -/+ 1) + P1, min_k L(q, k) + P2(p)) - min_k L(q, k)
/// with P2(p) = P1 where the line mask is set at p. Pixels without a
/// predecessor take C(p, i). An empty mask means no lines.
/// Throws DimensionMismatch if the mask size differs from the volume.
CostVolume path_costs(const CostVolume& volume, const LineMask& lines, const SgmParams& params,
                      PathDirection direction, int threads = 0);

/// Sum of path costs over all eight directions. Validity flags are copied
/// from the input.
CostVolume aggregate(const CostVolume& volume, const LineMask& lines, const SgmParams& params, int threads = 0);

struct PlaneIndexMap {
  static constexpr std::int32_t kInvalid = -1;
  Image<std::int32_t> index;
};

/// Per-pixel argmin over valid cells, ties to the smaller index.
PlaneIndexMap winner_take_all(const CostVolume& aggregated);

/// Depth in meters; invalid pixels hold +infinity.
using DepthMap = Image<float>;
inline constexpr float kInvalidDepth = std::numeric_limits<float>::infinity();
inline bool is_valid_depth(float d) { return d != kInvalidDepth && d == d; }

/// Depth of the winning plane along each pixel's viewing ray. Invalid
/// indices, and rays parallel to their plane, give invalid depth.
DepthMap extract_depth(const PlaneIndexMap& indices, const PlaneStack& stack, const CameraIntrinsics& intrinsics);

/// Median of the valid values in each truncated 3x3 window (lower median for
/// even counts). A pixel is invalid only if its whole window is invalid.
DepthMap median_filter_3x3(const DepthMap& depth);

}  // namespace roisweep
