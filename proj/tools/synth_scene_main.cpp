// synth-scene: writes a synthetic two-plane scene (frames, cameras, ground
// truth depth and detection boxes) in the format the depth tool reads.

#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "roisweep/errors.hpp"
#include "roisweep/io.hpp"
#include "roisweep/synth.hpp"

using namespace roisweep;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic two-plane scene generator"};
  std::string out;
  synth::TwoPlaneOptions options;
  int threads = 0;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--width", options.width)->capture_default_str();
  app.add_option("--height", options.height)->capture_default_str();
  app.add_option("--focal", options.focal)->capture_default_str();
  app.add_option("--frames", options.frames)->capture_default_str();
  app.add_option("--baseline", options.baseline, "Meters between frames")->capture_default_str();
  app.add_option("--threads", threads)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const synth::SyntheticScene scene = synth::make_two_plane_scene(options);
    synth::export_scene(scene, out, threads);

    // Slab detection plus an overlapping duplicate and a weak false positive.
    const std::size_t ref = scene.trajectory.size() / 2;
    const PixelRect slab = synth::patch_footprint(scene, 1, ref);
    const std::string frame = std::to_string(ref);
    std::vector<DetectionBox> boxes{
        {double(slab.x0), double(slab.y0), double(slab.x1), double(slab.y1), 0.95, "building", frame},
        {slab.x0 + 4.0, slab.y0 + 3.0, slab.x1 + 4.0, slab.y1 + 3.0, 0.9, "building", frame},
        {2.0, 2.0, 40.0, 30.0, 0.4, "building", frame},
    };
    write_roi_file(boxes, std::filesystem::path(out) / "rois.json");
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }
  return 0;
}
