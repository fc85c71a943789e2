#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "roisweep/io.hpp"

using namespace roisweep;
namespace fs = std::filesystem;

namespace {

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& scene_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::path(ROISWEEP_TEST_TMP) / "scene";
    fs::remove_all(d);
    const std::string cmd = std::string(ROISWEEP_SYNTH_EXE) + " --out " + d.string() +
                            " --width 128 --height 96 --focal 120";
    REQUIRE(run_command(cmd) == 0);
    return d;
  }();
  return dir;
}

std::string depth_cmd(const std::string& extra) {
  const fs::path& d = scene_dir();
  return std::string(ROISWEEP_DEPTH_EXE) + " --cameras " + (d / "cameras.json").string() + " --frames " +
         (d / "frames").string() + " --center 2 --dmin 6 --dmax 40 --planes 48 --scale 1 " + extra;
}

double fraction_within_step(const DepthMap& est, const DepthMap& gt, double step) {
  int valid = 0, good = 0;
  for (int y = 0; y < est.height(); ++y) {
    for (int x = 0; x < est.width(); ++x) {
      if (!is_valid_depth(est(x, y)) || !is_valid_depth(gt(x, y))) continue;
      ++valid;
      good += std::abs(1.0 / est(x, y) - 1.0 / gt(x, y)) <= step + 1e-9;
    }
  }
  return valid == 0 ? 0.0 : static_cast<double>(good) / valid;
}

}  // namespace

TEST_CASE("synth-scene writes a complete scene") {
  const fs::path& d = scene_dir();
  CHECK(fs::exists(d / "cameras.json"));
  CHECK(fs::exists(d / "rois.json"));
  CHECK(fs::exists(d / "gt_depth_02.pfm"));
  for (int i = 0; i < 5; ++i) CHECK(fs::exists(d / "frames" / ("frame_0" + std::to_string(i) + ".png")));
  CHECK(read_camera_file(d / "cameras.json").size() == 5);
}

TEST_CASE("depth CLI full mode") {
  const fs::path out = fs::path(ROISWEEP_TEST_TMP) / "full";
  fs::create_directories(out);
  const int rc = run_command(depth_cmd("--out-pfm " + (out / "d.pfm").string() + " --out-png " +
                                       (out / "d.png").string() + " --timing " + (out / "t.json").string() +
                                       " --debug-mask " + (out / "m.png").string()));
  REQUIRE(rc == 0);
  const DepthMap est = read_depth_pfm(out / "d.pfm");
  const DepthMap gt = read_depth_pfm(scene_dir() / "gt_depth_02.pfm");
  REQUIRE(est.width() == gt.width());
  const double step = sample_planes(6, 40, 48).inverse_step();
  CHECK(fraction_within_step(est, gt, step) >= 0.9);
  CHECK(fs::exists(out / "d.png"));
  CHECK(fs::exists(out / "m.png"));
  CHECK(slurp(out / "t.json").find("total_ms") != std::string::npos);
}

TEST_CASE("depth CLI selective mode") {
  const fs::path out = fs::path(ROISWEEP_TEST_TMP) / "sel";
  fs::create_directories(out);
  const int rc = run_command(depth_cmd("--selective --rois " + (scene_dir() / "rois.json").string() +
                                       " --out-pfm " + (out / "d.pfm").string()));
  REQUIRE(rc == 0);
  const DepthMap est = read_depth_pfm(out / "d.pfm");
  int valid = 0;
  for (float v : est.pixels()) valid += is_valid_depth(v);
  CHECK(valid > 0);
  CHECK(valid < est.width() * est.height());
}

TEST_CASE("depth CLI batch mode names outputs per center") {
  const fs::path out = fs::path(ROISWEEP_TEST_TMP) / "batch";
  fs::remove_all(out);
  fs::create_directories(out);
  std::string cmd = depth_cmd("--batch --out-pfm " + (out / "d.pfm").string());
  REQUIRE(run_command(cmd) == 0);
  CHECK(fs::exists(out / "d_2.pfm"));
}

TEST_CASE("depth CLI reports errors as JSON") {
  const fs::path err = fs::path(ROISWEEP_TEST_TMP) / "err.txt";
  const fs::path& d = scene_dir();
  const std::string cmd = std::string(ROISWEEP_DEPTH_EXE) + " --cameras " + (d / "cameras.json").string() +
                          " --frames " + (d / "frames").string() + " --center 0 --dmin 6 --dmax 40 2> " +
                          err.string();
  const int rc = run_command(cmd);
  CHECK(rc != 0);
  const std::string text = slurp(err);
  CHECK(text.find("\"error\"") != std::string::npos);
  CHECK(text.find("OutOfRange") != std::string::npos);

  const std::string bad_range = depth_cmd("--dmin 10 --dmax 5 2> " + err.string());
  CHECK(run_command(bad_range) != 0);
  CHECK(slurp(err).find("\"error\"") != std::string::npos);
}
