#include "roisweep/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roisweep/errors.hpp"

namespace roisweep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

[[noreturn]] void io_failure(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::IoFailure, what + ": " + path.string());
}

std::string next_token(std::istream& in) {
  std::string token;
  while (in >> token) {
    if (token[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return token;
  }
  return {};
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_failure("cannot open image", path);
  if (next_token(in) != "P5") throw Error(ErrorCode::ParseError, "only binary PGM (P5) is supported: " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "malformed PGM header: " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorCode::ParseError, "malformed PGM header: " + path.string());
  }
  in.get();
  GrayImage image(w, h);
  const bool wide = maxval > 255;
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * (wide ? 2 : 1));
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    io_failure("truncated PGM", path);
  }
  const float scale = 255.f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const int v = wide ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
    image.pixels()[i] = maxval == 255 ? static_cast<float>(v) : static_cast<float>(v) * scale;
  }
  return image;
}

GrayImage read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    io_failure(std::string("cannot read PNG (") + png.message + ")", path);
  }
  png.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&png);
    io_failure(std::string("cannot decode PNG (") + png.message + ")", path);
  }
  GrayImage image(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < image.size(); ++i) image.pixels()[i] = buf[i];
  return image;
}

void write_png(const fs::path& path, int width, int height, png_uint_32 format, const std::uint8_t* data) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = format;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, data, 0, nullptr)) {
    io_failure(std::string("cannot write PNG (") + png.message + ")", path);
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_failure("cannot open", path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) io_failure("cannot open for writing", path);
  out << doc.dump(2) << '\n';
  if (!out) io_failure("write failed", path);
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_null()) return {};
  return v.dump();
}

}  // namespace

GrayImage read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  return read_png(path);
}

void write_image(const GrayImage& image, const fs::path& path) {
  Image<std::uint8_t> bytes(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    bytes.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(image.pixels()[i]), 0L, 255L));
  }
  if (lower_extension(path) == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_failure("cannot open for writing", path);
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.pixels().data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) io_failure("write failed", path);
    return;
  }
  write_gray_png(bytes, path);
}

void write_gray_png(const Image<std::uint8_t>& image, const fs::path& path) {
  write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, image.pixels().data());
}

void write_rgb_png(int width, int height, const std::vector<std::uint8_t>& rgb, const fs::path& path) {
  write_png(path, width, height, PNG_FORMAT_RGB, rgb.data());
}

void write_depth_pfm(const DepthMap& depth, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_failure("cannot open for writing", path);
  out << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(depth.width()) * 4);
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(depth(x, y));
      for (int b = 0; b < 4; ++b) row[static_cast<std::size_t>(x) * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) io_failure("write failed", path);
}

DepthMap read_depth_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_failure("cannot open", path);
  std::string magic, ws, hs, ss;
  in >> magic >> ws >> hs >> ss;
  if (magic != "Pf") throw Error(ErrorCode::ParseError, "not a single-channel PFM: " + path.string());
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    scale = std::stod(ss);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "malformed PFM header: " + path.string());
  }
  if (w <= 0 || h <= 0 || scale == 0.0) throw Error(ErrorCode::ParseError, "malformed PFM header: " + path.string());
  in.get();
  const bool little = scale < 0.0;
  DepthMap depth(w, h);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 4);
  for (int y = h - 1; y >= 0; --y) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()))) {
      io_failure("truncated PFM", path);
    }
    for (int x = 0; x < w; ++x) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(row[static_cast<std::size_t>(x) * 4 + b]) << shift;
      }
      depth(x, y) = std::bit_cast<float>(bits);
    }
  }
  return depth;
}

std::array<std::uint8_t, 3> depth_color(float depth, double near, double far) {
  if (!is_valid_depth(depth) || !(depth > 0.f)) return {0, 0, 0};
  const double inv_near = 1.0 / near;
  const double inv_far = 1.0 / far;
  double t = inv_near == inv_far ? 0.0 : (inv_near - 1.0 / depth) / (inv_near - inv_far);
  t = std::clamp(t, 0.0, 1.0);
  double r, g, b;
  if (t <= 0.5) {
    r = 1.0 - 2.0 * t;
    g = 2.0 * t;
    b = 0.0;
  } else {
    r = 0.0;
    g = 2.0 - 2.0 * t;
    b = 2.0 * t - 1.0;
  }
  auto byte = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
  return {byte(r), byte(g), byte(b)};
}

std::vector<std::uint8_t> colorize_depth(const DepthMap& depth, std::optional<std::pair<double, double>> range) {
  if (!range) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (float v : depth.pixels()) {
      if (!is_valid_depth(v) || !(v > 0.f)) continue;
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
    range = std::isfinite(lo) ? std::make_pair(lo, hi) : std::make_pair(1.0, 1.0);
  }
  std::vector<std::uint8_t> rgb(depth.size() * 3);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const auto c = depth_color(depth.pixels()[i], range->first, range->second);
    std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return rgb;
}

void write_depth_png(const DepthMap& depth, const fs::path& path, std::optional<std::pair<double, double>> range) {
  write_rgb_png(depth.width(), depth.height(), colorize_depth(depth, range), path);
}

void write_mask_png(const LineMask& mask, const fs::path& path) {
  Image<std::uint8_t> bytes(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes.pixels()[i] = mask.pixels()[i] ? 255 : 0;
  write_gray_png(bytes, path);
}

void write_cost_slices(const CostVolume& volume, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) io_failure("cannot create directory", directory);
  Image<std::uint8_t> slice(volume.width, volume.height);
  for (int d = 0; d < volume.planes; ++d) {
    for (int y = 0; y < volume.height; ++y) {
      for (int x = 0; x < volume.width; ++x) {
        slice(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(volume.at(x, y, d) * 4.f), 0L, 255L));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "cost_%04d.png", d);
    write_gray_png(slice, directory / name);
  }
}

std::vector<CameraFrame> read_camera_file(const fs::path& path) {
  json doc = read_json(path);
  const json& list = doc.is_object() && doc.contains("frames") ? doc.at("frames") : doc;
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "camera file must hold a list of frames");

  std::vector<CameraFrame> frames;
  try {
    for (const auto& f : list) {
      CameraFrame frame;
      frame.id = id_string(f.value("id", json()));
      frame.image_path = f.at("image_path").get<std::string>();
      frame.intrinsics = {f.at("fx").get<double>(), f.at("fy").get<double>(), f.at("cx").get<double>(),
                          f.at("cy").get<double>(), f.value("skew", 0.0)};
      const auto r = f.at("R").get<std::vector<double>>();
      const auto c = f.at("C").get<std::vector<double>>();
      if (r.size() != 9 || c.size() != 3) {
        throw Error(ErrorCode::ParseError, "frame " + frame.id + ": R needs 9 entries and C needs 3");
      }
      for (int i = 0; i < 9; ++i) frame.pose.rotation(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
      frame.pose.center = Vec3(c[0], c[1], c[2]);
      frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return frames;
}

void write_camera_file(const std::vector<CameraFrame>& frames, const fs::path& path) {
  json list = json::array();
  for (const auto& f : frames) {
    std::vector<double> r(9);
    for (int i = 0; i < 9; ++i) r[static_cast<std::size_t>(i)] = f.pose.rotation(i / 3, i % 3);
    list.push_back({{"id", f.id},
                    {"image_path", f.image_path},
                    {"fx", f.intrinsics.fx},
                    {"fy", f.intrinsics.fy},
                    {"cx", f.intrinsics.cx},
                    {"cy", f.intrinsics.cy},
                    {"skew", f.intrinsics.skew},
                    {"R", r},
                    {"C", {f.pose.center.x(), f.pose.center.y(), f.pose.center.z()}}});
  }
  write_json(list, path);
}

std::vector<DetectionBox> read_roi_file(const fs::path& path) {
  json doc = read_json(path);
  const json& list = doc.is_object() && doc.contains("detections") ? doc.at("detections") : doc;
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "ROI file must hold a list of detections");
  std::vector<DetectionBox> boxes;
  try {
    for (const auto& d : list) {
      DetectionBox box;
      box.frame = id_string(d.value("frame", json()));
      box.x0 = d.at("x0").get<double>();
      box.y0 = d.at("y0").get<double>();
      box.x1 = d.at("x1").get<double>();
      box.y1 = d.at("y1").get<double>();
      box.score = d.at("score").get<double>();
      box.label = d.value("label", std::string("building"));
      box.validate();
      boxes.push_back(std::move(box));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return boxes;
}

void write_roi_file(const std::vector<DetectionBox>& boxes, const fs::path& path) {
  json list = json::array();
  for (const auto& b : boxes) {
    list.push_back({{"frame", b.frame},
                    {"x0", b.x0},
                    {"y0", b.y0},
                    {"x1", b.x1},
                    {"y1", b.y1},
                    {"score", b.score},
                    {"label", b.label}});
  }
  write_json(list, path);
}

}  // namespace roisweep
