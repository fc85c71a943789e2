#include "roisweep/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roisweep/errors.hpp"

namespace roisweep {

void DetectionBox::validate() const {
  if (!(x0 < x1) || !(y0 < y1)) {
    throw Error(ErrorCode::InvalidArgument, "detection box has no area");
  }
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "detection score must lie in [0, 1]");
  }
}

double iou(const DetectionBox& a, const DetectionBox& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<DetectionBox> soft_nms(std::span<const DetectionBox> boxes, const SoftNmsOptions& options) {
  if (!(options.overlap_threshold >= 0.0 && options.overlap_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "overlap threshold must lie in [0, 1]");
  }
  for (const auto& b : boxes) b.validate();

  const std::size_t n = boxes.size();
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) score[i] = boxes[i].score;

  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  while (!remaining.empty()) {
    // Highest score, earliest input index on ties.
    auto top = remaining.begin();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if (score[*it] > score[*top]) top = it;
    }
    const std::size_t m = *top;
    remaining.erase(top);
    for (const std::size_t j : remaining) {
      const double overlap = iou(boxes[m], boxes[j]);
      if (overlap < options.overlap_threshold) continue;
      score[j] = options.decay == DecayKind::Linear ? score[j] * (1.0 - overlap) : 0.0;
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (score[i] >= options.score_cutoff) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  std::vector<DetectionBox> out;
  out.reserve(order.size());
  for (const std::size_t i : order) {
    DetectionBox box = boxes[i];
    box.score = score[i];
    out.push_back(std::move(box));
  }
  return out;
}

PixelRect pixel_extent(const DetectionBox& box) {
  return {static_cast<int>(std::floor(box.x0)), static_cast<int>(std::floor(box.y0)),
          static_cast<int>(std::ceil(box.x1)), static_cast<int>(std::ceil(box.y1))};
}

DepthMap fuse_selective_depth(int width, int height, std::span<const DepthFragment> fragments) {
  for (const auto& f : fragments) {
    const PixelRect r = pixel_extent(f.box);
    if (f.depth.width() != r.width() || f.depth.height() != r.height()) {
      throw Error(ErrorCode::FragmentMismatch, "depth fragment size differs from its box");
    }
  }

  std::vector<std::size_t> order(fragments.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fragments[a].box.score > fragments[b].box.score; });

  DepthMap out(width, height, kInvalidDepth);
  Mask owned(width, height, 0);
  for (const std::size_t i : order) {
    const DepthFragment& f = fragments[i];
    const PixelRect r = pixel_extent(f.box);
    const PixelRect clip = intersect(r, full_rect(width, height));
    for (int y = clip.y0; y < clip.y1; ++y) {
      for (int x = clip.x0; x < clip.x1; ++x) {
        if (owned(x, y)) continue;
        owned(x, y) = 1;
        out(x, y) = f.depth(x - r.x0, y - r.y0);
      }
    }
  }
  return out;
}

}  // namespace roisweep
