#pragma once

#include <vector>

#include "roisweep/image.hpp"

namespace roisweep {

/// Binary line image at processing resolution; nonzero where a segment lies.
using LineMask = Mask;

struct LineSegment {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  double width = 1.0;
  /// -log10(NFA) of the supporting rectangle; 0 when not produced by LSD.
  double log_nfa = 0.0;

  double length() const;
};

/// Line segment detector settings. The defaults are the reference LSD ones.
struct LsdParams {
  double scale = 0.8;
  double sigma_scale = 0.6;
  double quant = 2.0;
  double angle_tolerance_deg = 22.5;
  double log_eps = 0.0;
  double density_threshold = 0.7;
  int n_bins = 1024;
};

/// Straight segments found by gradient-orientation region growing, validated
/// a contrario (NFA <= 10^-log_eps). Coordinates put pixel centers at integers.
std::vector<LineSegment> detect_lines(const GrayImage& image, const LsdParams& params = {});

/// Marks every pixel covered by a segment. Each segment is drawn with
/// Bresenham and widened across its minor axis to round(width) pixels
/// (at least one). Pixels outside the raster are dropped.
LineMask rasterize_mask(const std::vector<LineSegment>& segments, int width, int height);

/// Alternative edge provider: Sobel gradient magnitude above threshold.
LineMask gradient_mask(const GrayImage& image, float threshold);

}  // namespace roisweep
