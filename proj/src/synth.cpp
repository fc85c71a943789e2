#include "roisweep/synth.hpp"

#include <cmath>
#include <cstdio>

#include "roisweep/errors.hpp"
#include "roisweep/io.hpp"
#include "roisweep/parallel.hpp"

namespace roisweep::synth {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, long long ix, long long iy) {
  const std::uint64_t h = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(ix) * 0x632BE59BD9B4E019ull ^
                                                   static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<long long>(fx);
  const auto iy = static_cast<long long>(fy);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double tx = smooth(x - fx);
  const double ty = smooth(y - fy);
  const double a = lattice(seed, ix, iy);
  const double b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1);
  const double d = lattice(seed, ix + 1, iy + 1);
  return (a + (b - a) * tx) * (1.0 - ty) + (c + (d - c) * tx) * ty;
}

Vec3 pixel_ray(const CameraIntrinsics& k, double x, double y) {
  const double ry = (y - k.cy) / k.fy;
  const double rx = (x - k.cx - k.skew * ry) / k.fx;
  return {rx, ry, 1.0};
}

}  // namespace

std::optional<Hit> intersect_patch(const TexturedPatch& patch, const Vec3& origin, const Vec3& direction) {
  const Vec3 n = patch.normal();
  const double denom = n.dot(direction);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = n.dot(patch.origin - origin) / denom;
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 offset = origin + t * direction - patch.origin;
  const double u = offset.dot(patch.axis_u);
  const double v = offset.dot(patch.axis_v);
  if (std::abs(u) > patch.half_u || std::abs(v) > patch.half_v) return std::nullopt;
  return Hit{t, 0, u, v};
}

std::optional<Hit> cast_ray(const SyntheticScene& scene, const Vec3& origin, const Vec3& direction) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < scene.patches.size(); ++i) {
    auto hit = intersect_patch(scene.patches[i], origin, direction);
    if (hit && (!best || hit->t < best->t)) {
      hit->patch = i;
      best = hit;
    }
  }
  return best;
}

float texture_value(const TexturedPatch& patch, double u, double v) {
  const double s = u / patch.texel;
  const double t = v / patch.texel;
  const double n = 0.65 * value_noise(patch.seed, s, t) + 0.35 * value_noise(patch.seed + 1, 2.3 * s, 2.3 * t);
  return static_cast<float>(patch.mean + patch.contrast * (2.0 * n - 1.0));
}

RenderedView render(const SyntheticScene& scene, std::size_t view_index, int threads) {
  if (view_index >= scene.trajectory.size()) {
    throw Error(ErrorCode::OutOfRange, "view index outside the camera trajectory");
  }
  const CameraPose& pose = scene.trajectory[view_index];
  const Mat3 to_world = pose.rotation.transpose();
  const int ss = std::max(1, scene.supersample);

  RenderedView out{GrayImage(scene.width, scene.height), DepthMap(scene.width, scene.height, kInvalidDepth)};
  parallel_for(0, scene.height, threads, [&](int y) {
    for (int x = 0; x < scene.width; ++x) {
      if (const auto hit = cast_ray(scene, pose.center, to_world * pixel_ray(scene.intrinsics, x, y))) {
        out.depth(x, y) = static_cast<float>(hit->t);
      }
      double sum = 0.0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) / ss - 0.5;
          const double py = y + (sy + 0.5) / ss - 0.5;
          const auto hit = cast_ray(scene, pose.center, to_world * pixel_ray(scene.intrinsics, px, py));
          sum += hit ? texture_value(scene.patches[hit->patch], hit->u, hit->v) : scene.background;
        }
      }
      out.image(x, y) = static_cast<float>(std::clamp(std::round(sum / (ss * ss)), 0.0, 255.0));
    }
  });
  return out;
}

CameraView render_view(const SyntheticScene& scene, std::size_t view_index, int threads) {
  return {scene.intrinsics, scene.trajectory.at(view_index), render(scene, view_index, threads).image};
}

std::vector<CameraView> render_sequence(const SyntheticScene& scene, int threads) {
  std::vector<CameraView> views;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) views.push_back(render_view(scene, i, threads));
  return views;
}

std::vector<LineSegment> patch_outline(const SyntheticScene& scene, std::size_t patch_index, std::size_t view_index) {
  const TexturedPatch& p = scene.patches.at(patch_index);
  const CameraPose& pose = scene.trajectory.at(view_index);
  std::array<Vec2, 4> corners;
  const std::array<std::pair<double, double>, 4> signs{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec3 world = p.origin + signs[i].first * p.half_u * p.axis_u + signs[i].second * p.half_v * p.axis_v;
    corners[i] = project(scene.intrinsics, pose, world).pixel;
  }
  std::vector<LineSegment> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2& a = corners[i];
    const Vec2& b = corners[(i + 1) % 4];
    out.push_back({a.x(), a.y(), b.x(), b.y(), 1.0, 0.0});
  }
  return out;
}

PixelRect patch_footprint(const SyntheticScene& scene, std::size_t patch_index, std::size_t view_index) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& s : patch_outline(scene, patch_index, view_index)) {
    x0 = std::min({x0, s.x0, s.x1});
    x1 = std::max({x1, s.x0, s.x1});
    y0 = std::min({y0, s.y0, s.y1});
    y1 = std::max({y1, s.y0, s.y1});
  }
  const PixelRect r{static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0)),
                    static_cast<int>(std::ceil(x1)) + 1, static_cast<int>(std::ceil(y1)) + 1};
  return intersect(r, full_rect(scene.width, scene.height));
}

SyntheticScene make_two_plane_scene(const TwoPlaneOptions& o) {
  SyntheticScene scene;
  scene.width = o.width;
  scene.height = o.height;
  scene.intrinsics = {o.focal, o.focal, (o.width - 1) / 2.0, (o.height - 1) / 2.0, 0.0};
  const int center = o.frames / 2;
  for (int i = 0; i < o.frames; ++i) {
    CameraPose pose;
    pose.center = Vec3((i - center) * o.baseline, 0.0, 0.0);
    scene.trajectory.push_back(pose);
  }

  // Background sized to cover every view; texture scaled so features stay a few pixels wide.
  TexturedPatch ground;
  ground.origin = Vec3(0.0, 0.0, o.ground_depth);
  ground.half_u = o.ground_depth * o.width / o.focal + o.baseline * o.frames;
  ground.half_v = o.ground_depth * o.height / o.focal + o.baseline;
  ground.seed = 11;
  ground.texel = 3.0 * o.ground_depth / o.focal;
  ground.mean = 120.f;
  ground.contrast = 90.f;

  TexturedPatch slab;
  slab.origin = o.slab_center;
  slab.half_u = o.slab_half_width;
  slab.half_v = o.slab_half_height;
  slab.seed = 29;
  slab.texel = 3.0 * o.slab_center.z() / o.focal;
  slab.mean = 135.f;
  slab.contrast = 100.f;

  scene.patches = {ground, slab};
  return scene;
}

void export_scene(const SyntheticScene& scene, const std::filesystem::path& directory, int threads) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory / "frames", ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create directory: " + directory.string());

  std::vector<CameraFrame> frames;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    const RenderedView view = render(scene, i, threads);
    char name[64];
    std::snprintf(name, sizeof(name), "frame_%02zu.png", i);
    write_image(view.image, directory / "frames" / name);
    std::snprintf(name, sizeof(name), "gt_depth_%02zu.pfm", i);
    write_depth_pfm(view.depth, directory / name);

    std::snprintf(name, sizeof(name), "frame_%02zu.png", i);
    frames.push_back({std::to_string(i), name, scene.intrinsics, scene.trajectory[i]});
  }
  write_camera_file(frames, directory / "cameras.json");
}

}  // namespace roisweep::synth
