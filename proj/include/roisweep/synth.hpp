#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "roisweep/edges.hpp"
#include "roisweep/geometry.hpp"
#include "roisweep/roi.hpp"
#include "roisweep/sgm.hpp"

namespace roisweep::synth {

/// Rectangular planar patch: origin + a * axis_u + b * axis_v with
/// |a| <= half_u and |b| <= half_v, textured with seeded value noise.
struct TexturedPatch {
  Vec3 origin = Vec3::Zero();
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double half_u = 1.0;
  double half_v = 1.0;
  std::uint64_t seed = 1;
  /// Size of one noise cell in meters.
  double texel = 0.1;
  float mean = 128.f;
  float contrast = 100.f;

  Vec3 normal() const { return axis_u.cross(axis_v).normalized(); }
};

struct SyntheticScene {
  int width = 320;
  int height = 240;
  CameraIntrinsics intrinsics;
  std::vector<CameraPose> trajectory;
  std::vector<TexturedPatch> patches;
  float background = 0.f;
  /// Samples per pixel along each axis for the intensity image.
  int supersample = 2;
};

struct Hit {
  double t = 0.0;  // ray parameter; equals camera-frame depth for rays with unit z
  std::size_t patch = 0;
  double u = 0.0;
  double v = 0.0;
};

std::optional<Hit> intersect_patch(const TexturedPatch& patch, const Vec3& origin, const Vec3& direction);
/// Nearest hit over all patches.
std::optional<Hit> cast_ray(const SyntheticScene& scene, const Vec3& origin, const Vec3& direction);

/// Texture intensity at in-plane coordinates (u, v), in [mean - contrast, mean + contrast].
float texture_value(const TexturedPatch& patch, double u, double v);

struct RenderedView {
  GrayImage image;  // integer-valued intensities
  DepthMap depth;   // optical-axis depth at pixel centers; background invalid
};

RenderedView render(const SyntheticScene& scene, std::size_t view_index, int threads = 0);
CameraView render_view(const SyntheticScene& scene, std::size_t view_index, int threads = 0);
std::vector<CameraView> render_sequence(const SyntheticScene& scene, int threads = 0);

/// Pixel bounding box of a patch as seen from a view (floor/ceil, clipped).
PixelRect patch_footprint(const SyntheticScene& scene, std::size_t patch_index, std::size_t view_index);
/// The four projected patch borders.
std::vector<LineSegment> patch_outline(const SyntheticScene& scene, std::size_t patch_index, std::size_t view_index);

struct TwoPlaneOptions {
  int width = 320;
  int height = 240;
  double focal = 300.0;
  int frames = 5;
  double baseline = 1.5;      // meters between consecutive frames, along x
  double slab_depth = 10.0;
  double ground_depth = 30.0;
  Vec3 slab_center{0.5, 0.3, 10.0};
  double slab_half_width = 2.0;
  double slab_half_height = 1.5;
};

/// A textured slab in front of a textured background plane, camera moving
/// sideways with the reference at the center frame looking down +z.
SyntheticScene make_two_plane_scene(const TwoPlaneOptions& options = {});

/// Writes frames/frame_NN.png, cameras.json and gt_depth_NN.pfm under `directory`.
void export_scene(const SyntheticScene& scene, const std::filesystem::path& directory, int threads = 0);

}  // namespace roisweep::synth
