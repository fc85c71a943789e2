#pragma once

#include <span>
#include <string>
#include <vector>

#include "roisweep/image.hpp"
#include "roisweep/sgm.hpp"

namespace roisweep {

/// Axis-aligned detection in pixel coordinates.
struct DetectionBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  double score = 0.0;
  std::string label = "building";
  std::string frame;

  double area() const { return (x1 - x0) * (y1 - y0); }
  /// Throws InvalidArgument on degenerate geometry or a score outside [0, 1].
  void validate() const;

  bool operator==(const DetectionBox&) const = default;
};

double iou(const DetectionBox& a, const DetectionBox& b);

enum class DecayKind {
  Linear,       ///< score *= 1 - IoU
  Rectangular,  ///< score = 0, i.e. classic NMS
};

struct SoftNmsOptions {
  double overlap_threshold = 0.3;
  double score_cutoff = 0.8;
  DecayKind decay = DecayKind::Linear;
};

/// Greedy Soft-NMS: repeatedly take the highest remaining box and decay every
/// remaining box whose IoU with it is at least the threshold. Boxes whose final
/// score falls below the cutoff are dropped. Output is sorted by score
/// descending, ties in input order.
std::vector<DetectionBox> soft_nms(std::span<const DetectionBox> boxes, const SoftNmsOptions& options = {});

/// Pixel extent of a box: floor of the minimum corner, ceil of the maximum.
PixelRect pixel_extent(const DetectionBox& box);

struct DepthFragment {
  DetectionBox box;
  DepthMap depth;
};

/// Pastes fragments into a width x height map. Where boxes overlap the higher
/// score wins, ties to the earlier fragment; pixels outside every box are
/// invalid. Throws FragmentMismatch when a fragment does not match its box.
DepthMap fuse_selective_depth(int width, int height, std::span<const DepthFragment> fragments);

}  // namespace roisweep
