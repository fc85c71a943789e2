#include "roisweep/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "roisweep/errors.hpp"

namespace roisweep {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Runs fn and records its wall time under `stage`.
template <typename Fn>
decltype(auto) timed(TimingReport* report, const char* stage, Fn&& fn) {
  const auto start = Clock::now();
  if constexpr (std::is_void_v<std::invoke_result_t<Fn>>) {
    fn();
    if (report) report->stages.push_back({stage, elapsed_ms(start)});
  } else {
    auto result = fn();
    if (report) report->stages.push_back({stage, elapsed_ms(start)});
    return result;
  }
}

struct AxisTaps {
  std::vector<std::vector<std::pair<int, double>>> taps;  // per output index
};

AxisTaps area_taps(int source, int target) {
  AxisTaps out;
  out.taps.resize(static_cast<std::size_t>(target));
  const double ratio = static_cast<double>(source) / target;
  for (int i = 0; i < target; ++i) {
    const double lo = i * ratio;
    const double hi = (i + 1) * ratio;
    auto& taps = out.taps[static_cast<std::size_t>(i)];
    for (int s = static_cast<int>(std::floor(lo)); s < static_cast<int>(std::ceil(hi)) && s < source; ++s) {
      const double cover = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (cover > 0.0) taps.emplace_back(s, cover / ratio);
    }
  }
  return out;
}

CameraView rescale_view(const CameraView& view, int width, int height, double sx, double sy) {
  return {view.intrinsics.scaled(sx, sy), view.pose, downscale_area(view.image, width, height)};
}

}  // namespace

EdgeProvider parse_edge_provider(const std::string& name) {
  if (name == "lsd") return EdgeProvider::Lsd;
  if (name == "gradient") return EdgeProvider::Gradient;
  if (name == "none") return EdgeProvider::None;
  throw Error(ErrorCode::InvalidArgument, "unknown edge provider '" + name + "' (expected lsd, gradient or none)");
}

const char* to_string(EdgeProvider provider) {
  switch (provider) {
    case EdgeProvider::Lsd: return "lsd";
    case EdgeProvider::Gradient: return "gradient";
    case EdgeProvider::None: return "none";
  }
  return "none";
}

void PipelineConfig::validate() const {
  if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorCode::InvalidArgument, "scale must lie in (0, 1]");
  if (plane_count < 2) throw Error(ErrorCode::InvalidCount, "plane count must be at least 2");
  if (!(d_min > 0.0) || !(d_min < d_max)) {
    throw Error(ErrorCode::InvalidRange, "plane range requires 0 < d_min < d_max");
  }
  if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "overlap threshold must lie in [0, 1]");
  }
  sgm().validate();
}

ImageBundle select_bundle(std::span<const CameraView> sequence, int center) {
  const int n = static_cast<int>(sequence.size());
  if (center < 2 || center > n - 3) {
    throw Error(ErrorCode::OutOfRange, "center index " + std::to_string(center) +
                                           " needs two frames on each side in a sequence of " + std::to_string(n));
  }
  auto at = [&](int i) { return sequence[static_cast<std::size_t>(i)]; };
  return {at(center), {at(center - 1), at(center - 2)}, {at(center + 1), at(center + 2)}};
}

GrayImage downscale_area(const GrayImage& image, int width, int height) {
  if (width == image.width() && height == image.height()) return image;
  if (width <= 0 || height <= 0) throw Error(ErrorCode::DegenerateSize, "target size must be positive");
  const AxisTaps xs = area_taps(image.width(), width);
  const AxisTaps ys = area_taps(image.height(), height);

  std::vector<double> rows(static_cast<std::size_t>(width) * image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      for (const auto& [s, wgt] : xs.taps[static_cast<std::size_t>(x)]) sum += wgt * image(s, y);
      rows[static_cast<std::size_t>(y) * width + x] = sum;
    }
  }
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sum = 0.0;
      for (const auto& [s, wgt] : ys.taps[static_cast<std::size_t>(y)]) sum += wgt * rows[static_cast<std::size_t>(s) * width + x];
      out(x, y) = static_cast<float>(sum);
    }
  }
  return out;
}

ScaledInputs rescale_inputs(const ImageBundle& bundle, std::span<const DetectionBox> rois, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorCode::InvalidArgument, "scale must lie in (0, 1]");
  const int w = static_cast<int>(std::lround(bundle.width() * scale));
  const int h = static_cast<int>(std::lround(bundle.height() * scale));
  if (w < kCensusWidth || h < kCensusHeight) {
    throw Error(ErrorCode::DegenerateSize, "scaled image " + std::to_string(w) + "x" + std::to_string(h) +
                                               " is smaller than the 9x7 Census window");
  }
  ScaledInputs out;
  out.rois.assign(rois.begin(), rois.end());
  if (w == bundle.width() && h == bundle.height()) {
    out.bundle = bundle;
    return out;
  }

  const double sx = static_cast<double>(w) / bundle.width();
  const double sy = static_cast<double>(h) / bundle.height();
  out.bundle.reference = rescale_view(bundle.reference, w, h, sx, sy);
  for (std::size_t i = 0; i < 2; ++i) {
    out.bundle.before[i] = rescale_view(bundle.before[i], w, h, sx, sy);
    out.bundle.after[i] = rescale_view(bundle.after[i], w, h, sx, sy);
  }
  for (auto& box : out.rois) {
    box.x0 = std::floor(box.x0 * sx);
    box.y0 = std::floor(box.y0 * sy);
    box.x1 = std::ceil(box.x1 * sx);
    box.y1 = std::ceil(box.y1 * sy);
  }
  return out;
}

double TimingReport::stage_ms(const std::string& stage) const {
  double sum = 0.0;
  for (const auto& s : stages) {
    if (s.stage == stage) sum += s.milliseconds;
  }
  return sum;
}

double TimingReport::stages_ms() const {
  double sum = 0.0;
  for (const auto& s : stages) sum += s.milliseconds;
  return sum;
}

void write_timing_report(const TimingReport& report, const std::filesystem::path& path) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : report.stages) stages.push_back({{"stage", s.stage}, {"ms", s.milliseconds}});
  const nlohmann::json doc{{"stages", stages}, {"total_ms", report.total_ms}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

LineMask compute_line_mask(const GrayImage& reference, const PipelineConfig& config) {
  switch (config.edge_provider) {
    case EdgeProvider::Lsd:
      return rasterize_mask(detect_lines(reference, config.lsd), reference.width(), reference.height());
    case EdgeProvider::Gradient:
      return gradient_mask(reference, config.gradient_threshold);
    case EdgeProvider::None:
      break;
  }
  return LineMask(reference.width(), reference.height(), 0);
}

DepthMap reconstruct_region(const CostVolume& volume, const LineMask& lines, const PixelRect& rect,
                            const PlaneStack& stack, const CameraIntrinsics& intrinsics, const SgmParams& params,
                            int threads, TimingReport* timing) {
  const CostVolume aggregated = timed(timing, "sgm", [&] { return aggregate(volume, lines, params, threads); });
  const PlaneIndexMap winners = timed(timing, "wta", [&] { return winner_take_all(aggregated); });
  const DepthMap depth = timed(timing, "depth", [&] {
    return extract_depth(winners, stack, intrinsics.shifted(rect.x0, rect.y0));
  });
  return timed(timing, "median", [&] { return median_filter_3x3(depth); });
}

RunResult run(const ImageBundle& bundle, std::span<const DetectionBox> rois, const PipelineConfig& config,
              const LineMask* line_mask) {
  const auto start = Clock::now();
  config.validate();
  bundle.validate();

  RunResult result;
  TimingReport* timing = &result.timing;

  std::vector<DetectionBox> kept;
  if (config.selective) {
    kept = timed(timing, "nms", [&] {
      return soft_nms(rois, {config.overlap_threshold, config.score_cutoff, DecayKind::Linear});
    });
  }

  const ScaledInputs scaled = timed(timing, "rescale", [&] { return rescale_inputs(bundle, kept, config.scale); });
  const ImageBundle& work = scaled.bundle;
  const int w = work.width();
  const int h = work.height();
  result.intrinsics = work.reference.intrinsics;
  result.stack = timed(timing, "planes", [&] { return sample_planes(config.d_min, config.d_max, config.plane_count); });

  result.line_mask = timed(timing, "edges", [&] {
    if (line_mask != nullptr) {
      if (line_mask->width() != w || line_mask->height() != h) {
        throw Error(ErrorCode::DimensionMismatch, "line mask does not match the processing resolution");
      }
      return *line_mask;
    }
    return compute_line_mask(work.reference.image, config);
  });

  std::vector<PixelRect> rects;
  std::vector<double> scores;
  if (config.selective) {
    for (const auto& box : scaled.rois) {
      const PixelRect r = intersect(pixel_extent(box), full_rect(w, h));
      if (r.empty()) continue;
      rects.push_back(r);
      scores.push_back(box.score);
    }
    result.kept_rois = scaled.rois;
  } else {
    rects.push_back(full_rect(w, h));
    scores.push_back(1.0);
  }

  if (rects.empty()) {
    result.depth = DepthMap(w, h, kInvalidDepth);
    result.warnings.push_back(std::string(to_string(ErrorCode::NoRois)) +
                              ": no region of interest survived Soft-NMS and the score cutoff");
    result.timing.total_ms = elapsed_ms(start);
    return result;
  }

  const std::vector<CostVolume> volumes =
      timed(timing, "matching", [&] { return build_cost_volumes(work, result.stack, rects, config.threads); });

  std::vector<DepthFragment> fragments;
  fragments.reserve(rects.size());
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const PixelRect& r = rects[i];
    const LineMask lines = timed(timing, "sgm", [&] { return crop(result.line_mask, r); });
    DetectionBox box;
    box.x0 = r.x0;
    box.y0 = r.y0;
    box.x1 = r.x1;
    box.y1 = r.y1;
    box.score = scores[i];
    fragments.push_back({box, reconstruct_region(volumes[i], lines, r, result.stack, work.reference.intrinsics,
                                                 config.sgm(), config.threads, timing)});
  }

  result.depth = timed(timing, "fuse", [&] { return fuse_selective_depth(w, h, fragments); });
  result.timing.total_ms = elapsed_ms(start);
  return result;
}

}  // namespace roisweep
