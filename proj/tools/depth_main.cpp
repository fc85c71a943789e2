// depth: plane-sweep depth estimation for one reference frame (or a batch of
// centers) with optional selective reconstruction inside detection boxes.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roisweep/errors.hpp"
#include "roisweep/io.hpp"
#include "roisweep/pipeline.hpp"

namespace fs = std::filesystem;
using namespace roisweep;

namespace {

void emit_record(const char* kind, const std::string& code, const std::string& message) {
  const nlohmann::json record{{kind, {{"code", code}, {"message", message}}}};
  std::cerr << record.dump() << '\n';
}

fs::path with_suffix(const fs::path& path, int center, bool batch) {
  if (!batch || path.empty()) return path;
  fs::path out = path;
  out.replace_filename(path.stem().string() + "_" + std::to_string(center) + path.extension().string());
  return out;
}

struct Options {
  std::string cameras;
  std::string frames;
  std::optional<int> center;
  bool batch = false;
  std::string rois;
  std::string edge = "lsd";
  std::string out_pfm;
  std::string out_png;
  std::string timing;
  std::string debug_mask;
  std::string debug_cost_dir;
  PipelineConfig config;
};

int run_cli(const Options& opt) {
  PipelineConfig config = opt.config;
  config.edge_provider = parse_edge_provider(opt.edge);
  config.validate();

  const fs::path camera_path(opt.cameras);
  const fs::path frame_dir = opt.frames.empty() ? camera_path.parent_path() : fs::path(opt.frames);
  const std::vector<CameraFrame> frames = read_camera_file(camera_path);

  std::vector<DetectionBox> all_rois;
  if (!opt.rois.empty()) all_rois = read_roi_file(opt.rois);
  if (config.selective && opt.rois.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--selective needs --rois");
  }

  std::vector<int> centers;
  if (opt.batch) {
    for (int c = 2; c + 2 < static_cast<int>(frames.size()); ++c) centers.push_back(c);
  } else if (opt.center) {
    centers.push_back(*opt.center);
  } else {
    throw Error(ErrorCode::InvalidArgument, "either --center or --batch is required");
  }

  std::vector<std::optional<CameraView>> cache(frames.size());
  auto view_at = [&](int i) -> const CameraView& {
    auto& slot = cache[static_cast<std::size_t>(i)];
    if (!slot) {
      const CameraFrame& f = frames[static_cast<std::size_t>(i)];
      slot = CameraView{f.intrinsics, f.pose, read_image(frame_dir / f.image_path)};
    }
    return *slot;
  };

  for (const int center : centers) {
    if (center < 2 || center + 2 >= static_cast<int>(frames.size())) {
      throw Error(ErrorCode::OutOfRange, "center index " + std::to_string(center) +
                                             " needs two frames on each side");
    }
    std::vector<CameraView> window;
    for (int i = center - 2; i <= center + 2; ++i) window.push_back(view_at(i));
    const ImageBundle bundle = select_bundle(window, 2);

    const std::string& ref_id = frames[static_cast<std::size_t>(center)].id;
    std::vector<DetectionBox> rois;
    for (const auto& b : all_rois) {
      if (b.frame.empty() || b.frame == ref_id) rois.push_back(b);
    }

    const RunResult result = run(bundle, rois, config);
    for (const auto& w : result.warnings) emit_record("warning", "NoRois", w);

    if (!opt.out_pfm.empty()) write_depth_pfm(result.depth, with_suffix(opt.out_pfm, center, opt.batch));
    if (!opt.out_png.empty()) {
      write_depth_png(result.depth, with_suffix(opt.out_png, center, opt.batch),
                      std::make_pair(config.d_min, config.d_max));
    }
    if (!opt.timing.empty()) write_timing_report(result.timing, with_suffix(opt.timing, center, opt.batch));
    if (!opt.debug_mask.empty()) write_mask_png(result.line_mask, with_suffix(opt.debug_mask, center, opt.batch));
    if (!opt.debug_cost_dir.empty()) {
      const ScaledInputs scaled = rescale_inputs(bundle, {}, config.scale);
      const CostVolume volume = build_cost_volume(scaled.bundle, result.stack, std::nullopt, config.threads);
      fs::path dir(opt.debug_cost_dir);
      if (opt.batch) dir /= "center_" + std::to_string(center);
      write_cost_slices(volume, dir);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-sweep depth estimation with edge-aware semi-global matching"};
  Options opt;
  auto& cfg = opt.config;
  int center = -1;

  app.add_option("--cameras", opt.cameras, "Camera file (JSON list of frames)")->required();
  app.add_option("--frames", opt.frames, "Directory holding the frame images (default: camera file directory)");
  auto* center_opt = app.add_option("--center", center, "Index of the reference frame");
  app.add_flag("--batch", opt.batch, "Process every valid center with stride 1");
  app.add_option("--rois", opt.rois, "Detection file (JSON list of boxes)");
  app.add_flag("--selective", cfg.selective, "Reconstruct only inside detection boxes");
  app.add_option("--planes", cfg.plane_count, "Number of sweep planes")->capture_default_str();
  app.add_option("--dmin", cfg.d_min, "Nearest plane distance in meters")->required();
  app.add_option("--dmax", cfg.d_max, "Farthest plane distance in meters")->required();
  app.add_option("--p1", cfg.p1, "SGM penalty for unit plane-index changes")->capture_default_str();
  app.add_option("--p2", cfg.p2, "SGM penalty for larger plane-index changes")->capture_default_str();
  app.add_option("--scale", cfg.scale, "Processing downscale factor in (0, 1]")->capture_default_str();
  app.add_option("--nms-threshold", cfg.overlap_threshold, "Soft-NMS IoU threshold")->capture_default_str();
  app.add_option("--score-cutoff", cfg.score_cutoff, "Minimum decayed detection score")->capture_default_str();
  app.add_option("--edge", opt.edge, "Edge provider: lsd, gradient or none")->capture_default_str();
  app.add_option("--gradient-threshold", cfg.gradient_threshold, "Gradient provider threshold")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out-pfm", opt.out_pfm, "Depth map output (PFM)");
  app.add_option("--out-png", opt.out_png, "Color-coded depth output (PNG)");
  app.add_option("--timing", opt.timing, "Per-stage timing report (JSON)");
  app.add_option("--debug-mask", opt.debug_mask, "Line mask output (PNG)");
  app.add_option("--debug-cost-dir", opt.debug_cost_dir, "Directory for per-plane cost slices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_record("error", "UsageError", e.what());
    return 64;
  }
  if (center_opt->count() > 0) opt.center = center;

  try {
    return run_cli(opt);
  } catch (const Error& e) {
    emit_record("error", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_record("error", "Internal", e.what());
    return 3;
  }
}
