#include "roisweep/sgm.hpp"

#include <algorithm>
#include <vector>

#include "roisweep/errors.hpp"
#include "roisweep/parallel.hpp"

namespace roisweep {

void SgmParams::validate() const {
  if (!(p1 > 0.f) || !(p1 <= p2)) {
    throw Error(ErrorCode::InvalidArgument, "SGM penalties require 0 < P1 <= P2");
  }
  if (paths != 8) {
    throw Error(ErrorCode::InvalidArgument, "SGM uses exactly eight paths");
  }
}

namespace {

void path_step(const float* cost, const float* prev, int planes, float p1, float p2, float* out) {
  if (prev == nullptr) {
    std::copy_n(cost, planes, out);
    return;
  }
  const float min_prev = *std::min_element(prev, prev + planes);
  const float jump = min_prev + p2;
  for (int i = 0; i < planes; ++i) {
    float best = prev[i];
    if (i > 0) best = std::min(best, prev[i - 1] + p1);
    if (i + 1 < planes) best = std::min(best, prev[i + 1] + p1);
    best = std::min(best, jump);
    out[i] = cost[i] + best - min_prev;
  }
}

void check_mask(const CostVolume& volume, const LineMask& lines) {
  if (lines.empty()) return;
  if (lines.width() != volume.width || lines.height() != volume.height) {
    throw Error(ErrorCode::DimensionMismatch, "line mask size differs from the cost volume");
  }
}

/// Runs one direction and hands each finished row of path costs to `emit(y, row)`.
/// Rows for horizontal directions are independent; otherwise rows are processed
/// in path order and parallelism is across the pixels of a row.
template <typename Emit>
void run_direction(const CostVolume& volume, const LineMask& lines, const SgmParams& params, PathDirection dir,
                   int threads, Emit&& emit) {
  const int w = volume.width;
  const int h = volume.height;
  const int d = volume.planes;
  if (w == 0 || h == 0 || d == 0) return;
  const std::size_t row_size = static_cast<std::size_t>(w) * d;

  auto penalty = [&](int x, int y) {
    return !lines.empty() && lines(x, y) != 0 ? params.p1 : params.p2;
  };
  auto cost_at = [&](int x, int y) { return volume.cost.data() + volume.index(x, y, 0); };

  if (dir.dy == 0) {
    parallel_for(0, h, threads, [&](int y) {
      std::vector<float> row(row_size);
      const int x_begin = dir.dx > 0 ? 0 : w - 1;
      for (int n = 0; n < w; ++n) {
        const int x = x_begin + n * (dir.dx > 0 ? 1 : -1);
        const int qx = x - dir.dx;
        const float* prev = (qx >= 0 && qx < w) ? row.data() + static_cast<std::size_t>(qx) * d : nullptr;
        path_step(cost_at(x, y), prev, d, params.p1, penalty(x, y), row.data() + static_cast<std::size_t>(x) * d);
      }
      emit(y, row.data());
    });
    return;
  }

  std::vector<float> prev_row(row_size);
  std::vector<float> cur_row(row_size);
  const int y_begin = dir.dy > 0 ? 0 : h - 1;
  for (int n = 0; n < h; ++n) {
    const int y = y_begin + n * dir.dy;
    const bool first = n == 0;
    const int chunks = row_size > 8192 ? threads : 1;
    parallel_for(0, w, chunks, [&](int x) {
      const int qx = x - dir.dx;
      const float* prev = (!first && qx >= 0 && qx < w) ? prev_row.data() + static_cast<std::size_t>(qx) * d : nullptr;
      path_step(cost_at(x, y), prev, d, params.p1, penalty(x, y), cur_row.data() + static_cast<std::size_t>(x) * d);
    });
    emit(y, cur_row.data());
    std::swap(prev_row, cur_row);
  }
}

}  // namespace

CostVolume path_costs(const CostVolume& volume, const LineMask& lines, const SgmParams& params,
                      PathDirection direction, int threads) {
  check_mask(volume, lines);
  CostVolume out(volume.width, volume.height, volume.planes, 0.f);
  out.valid = volume.valid;
  const std::size_t row_size = static_cast<std::size_t>(volume.width) * volume.planes;
  run_direction(volume, lines, params, direction, threads, [&](int y, const float* row) {
    std::copy_n(row, row_size, out.cost.begin() + static_cast<std::ptrdiff_t>(row_size * y));
  });
  return out;
}

CostVolume aggregate(const CostVolume& volume, const LineMask& lines, const SgmParams& params, int threads) {
  check_mask(volume, lines);
  CostVolume out(volume.width, volume.height, volume.planes, 0.f);
  out.valid = volume.valid;
  const std::size_t row_size = static_cast<std::size_t>(volume.width) * volume.planes;
  // Directions are accumulated strictly in kPathDirections order.
  for (const PathDirection dir : kPathDirections) {
    run_direction(volume, lines, params, dir, threads, [&](int y, const float* row) {
      float* dst = out.cost.data() + row_size * static_cast<std::size_t>(y);
      for (std::size_t i = 0; i < row_size; ++i) dst[i] += row[i];
    });
  }
  return out;
}

PlaneIndexMap winner_take_all(const CostVolume& aggregated) {
  PlaneIndexMap map{Image<std::int32_t>(aggregated.width, aggregated.height, PlaneIndexMap::kInvalid)};
  for (int y = 0; y < aggregated.height; ++y) {
    for (int x = 0; x < aggregated.width; ++x) {
      const std::size_t base = aggregated.index(x, y, 0);
      std::int32_t best = PlaneIndexMap::kInvalid;
      float best_cost = 0.f;
      for (int d = 0; d < aggregated.planes; ++d) {
        if (!aggregated.valid[base + d]) continue;
        const float c = aggregated.cost[base + d];
        if (best == PlaneIndexMap::kInvalid || c < best_cost) {
          best = d;
          best_cost = c;
        }
      }
      map.index(x, y) = best;
    }
  }
  return map;
}

DepthMap extract_depth(const PlaneIndexMap& indices, const PlaneStack& stack, const CameraIntrinsics& intrinsics) {
  const auto& idx = indices.index;
  DepthMap depth(idx.width(), idx.height(), kInvalidDepth);
  for (int y = 0; y < idx.height(); ++y) {
    for (int x = 0; x < idx.width(); ++x) {
      const std::int32_t i = idx(x, y);
      if (i < 0 || i >= stack.size()) continue;
      try {
        depth(x, y) = static_cast<float>(depth_from_plane(x, y, stack[i], intrinsics));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RayParallel) throw;
      }
    }
  }
  return depth;
}

DepthMap median_filter_3x3(const DepthMap& depth) {
  DepthMap out(depth.width(), depth.height(), kInvalidDepth);
  std::array<float, 9> window{};
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      std::size_t n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!depth.contains(x + dx, y + dy)) continue;
          const float v = depth(x + dx, y + dy);
          if (is_valid_depth(v)) window[n++] = v;
        }
      }
      if (n == 0) continue;
      const auto mid = window.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
      std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(n));
      out(x, y) = *mid;
    }
  }
  return out;
}

}  // namespace roisweep
