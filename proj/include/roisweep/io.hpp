#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roisweep/edges.hpp"
#include "roisweep/geometry.hpp"
#include "roisweep/matching.hpp"
#include "roisweep/roi.hpp"
#include "roisweep/sgm.hpp"

namespace roisweep {

/// Reads an 8/16-bit PNG (converted to gray) or a binary PGM. Intensities in [0, 255].
GrayImage read_image(const std::filesystem::path& path);
/// Writes intensities rounded and clamped to 8 bits, as PNG or PGM by extension.
void write_image(const GrayImage& image, const std::filesystem::path& path);

void write_gray_png(const Image<std::uint8_t>& image, const std::filesystem::path& path);
void write_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb, const std::filesystem::path& path);

/// Single-channel little-endian PFM, rows bottom-to-top, invalid = +inf.
void write_depth_pfm(const DepthMap& depth, const std::filesystem::path& path);
DepthMap read_depth_pfm(const std::filesystem::path& path);

/// Red (near) -> green -> blue (far), linear in inverse depth between
/// near and far; invalid pixels black. Without a range the valid extrema of
/// the map are used.
std::array<std::uint8_t, 3> depth_color(float depth, double near, double far);
std::vector<std::uint8_t> colorize_depth(const DepthMap& depth, std::optional<std::pair<double, double>> range = {});
void write_depth_png(const DepthMap& depth, const std::filesystem::path& path,
                     std::optional<std::pair<double, double>> range = {});

/// 0 = no line, 255 = line.
void write_mask_png(const LineMask& mask, const std::filesystem::path& path);
/// One PNG per plane, cost scaled by 4.
void write_cost_slices(const CostVolume& volume, const std::filesystem::path& directory);

struct CameraFrame {
  std::string id;
  std::string image_path;
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

/// JSON list of frames: {id, image_path, fx, fy, cx, cy, skew, R[9], C[3]}.
/// A top-level {"frames": [...]} object is accepted as well.
std::vector<CameraFrame> read_camera_file(const std::filesystem::path& path);
void write_camera_file(const std::vector<CameraFrame>& frames, const std::filesystem::path& path);

/// JSON list of detections: {frame, x0, y0, x1, y1, score, label}.
std::vector<DetectionBox> read_roi_file(const std::filesystem::path& path);
void write_roi_file(const std::vector<DetectionBox>& boxes, const std::filesystem::path& path);

}  // namespace roisweep
