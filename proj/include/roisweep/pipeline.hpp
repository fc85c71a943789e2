#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roisweep/edges.hpp"
#include "roisweep/geometry.hpp"
#include "roisweep/matching.hpp"
#include "roisweep/roi.hpp"
#include "roisweep/sgm.hpp"

namespace roisweep {

enum class EdgeProvider { Lsd, Gradient, None };

EdgeProvider parse_edge_provider(const std::string& name);
const char* to_string(EdgeProvider provider);

struct PipelineConfig {
  int plane_count = 128;
  double d_min = 0.0;  // required
  double d_max = 0.0;  // required
  float p1 = 5.f;
  float p2 = 50.f;
  double scale = 0.5;
  double overlap_threshold = 0.3;
  double score_cutoff = 0.8;
  bool selective = false;
  EdgeProvider edge_provider = EdgeProvider::Lsd;
  LsdParams lsd;
  float gradient_threshold = 20.f;
  int threads = 0;

  void validate() const;
  SgmParams sgm() const { return {p1, p2, 8}; }
};

/// Five consecutive frames centered on `center`. Throws OutOfRange when fewer
/// than two frames exist on either side.
ImageBundle select_bundle(std::span<const CameraView> sequence, int center);

/// Box-filter resampling to an arbitrary smaller size (fractional coverage).
GrayImage downscale_area(const GrayImage& image, int width, int height);

struct ScaledInputs {
  ImageBundle bundle;
  std::vector<DetectionBox> rois;
};

/// Resizes images to round(W*scale) x round(H*scale), scales intrinsics by the
/// realized per-axis factors and scales ROIs outward (floor mins, ceil maxes).
/// Throws DegenerateSize below the 9x7 Census window.
ScaledInputs rescale_inputs(const ImageBundle& bundle, std::span<const DetectionBox> rois, double scale);

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct TimingReport {
  std::vector<StageTiming> stages;
  double total_ms = 0.0;

  /// Sum of all entries for `stage` (ROI stages repeat per box).
  double stage_ms(const std::string& stage) const;
  double stages_ms() const;
};

void write_timing_report(const TimingReport& report, const std::filesystem::path& path);

struct RunResult {
  DepthMap depth;
  TimingReport timing;
  std::vector<std::string> warnings;
  LineMask line_mask;
  std::vector<DetectionBox> kept_rois;
  PlaneStack stack;
  CameraIntrinsics intrinsics;  // at processing resolution
};

LineMask compute_line_mask(const GrayImage& reference, const PipelineConfig& config);

/// SGM, winner extraction, depth and median filtering of one region treated as
/// an independent image. `rect` positions the region in the reference frame.
DepthMap reconstruct_region(const CostVolume& volume, const LineMask& lines, const PixelRect& rect,
                            const PlaneStack& stack, const CameraIntrinsics& intrinsics, const SgmParams& params,
                            int threads, TimingReport* timing = nullptr);

/// Full pipeline. In selective mode the ROIs (in input-image pixels) go through
/// Soft-NMS and the score cutoff; matching and SGM then run per surviving box
/// and the fragments are fused. With no surviving box the result is an
/// all-invalid map plus a warning. `line_mask`, when given, replaces the edge
/// provider and must match the processing resolution.
RunResult run(const ImageBundle& bundle, std::span<const DetectionBox> rois, const PipelineConfig& config,
              const LineMask* line_mask = nullptr);

}  // namespace roisweep
