#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "roisweep/errors.hpp"
#include "roisweep/io.hpp"
#include "roisweep/pipeline.hpp"
#include "roisweep/synth.hpp"

namespace py = pybind11;
using namespace roisweep;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const FloatArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-D array");
  GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.pixels().data(), a.data(), img.pixels().size_bytes());
  return img;
}

template <typename T>
py::array_t<T> to_array(const Image<T>& img) {
  py::array_t<T> out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.pixels().size_bytes());
  return out;
}

py::dict rendered(const synth::SyntheticScene& scene) {
  py::list images, depths, poses;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    const synth::RenderedView v = synth::render(scene, i);
    images.append(to_array(v.image));
    depths.append(to_array(v.depth));
    poses.append(scene.trajectory[i]);
  }
  py::dict out;
  out["images"] = images;
  out["depths"] = depths;
  out["poses"] = poses;
  out["intrinsics"] = scene.intrinsics;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Plane-sweep depth estimation core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "RoisweepError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type.get_stored(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, double skew) {
             return CameraIntrinsics{fx, fy, cx, cy, skew};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("skew") = 0.0)
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("skew", &CameraIntrinsics::skew)
      .def("matrix", &CameraIntrinsics::matrix);

  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init([](const Mat3& r, const Vec3& c) { return CameraPose{r, c}; }),
           py::arg("rotation") = Mat3::Identity(), py::arg("center") = Vec3::Zero())
      .def_readwrite("rotation", &CameraPose::rotation)
      .def_readwrite("center", &CameraPose::center);

  py::class_<CameraView>(m, "CameraView")
      .def(py::init([](const CameraIntrinsics& k, const CameraPose& pose, const FloatArray& image) {
             return CameraView{k, pose, to_image(image)};
           }),
           py::arg("intrinsics"), py::arg("pose"), py::arg("image"))
      .def_readwrite("intrinsics", &CameraView::intrinsics)
      .def_readwrite("pose", &CameraView::pose)
      .def_property_readonly("image", [](const CameraView& v) { return to_array(v.image); });

  py::class_<DetectionBox>(m, "DetectionBox")
      .def(py::init([](double x0, double y0, double x1, double y1, double score, std::string label,
                       std::string frame) {
             DetectionBox b{x0, y0, x1, y1, score, std::move(label), std::move(frame)};
             b.validate();
             return b;
           }),
           py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"), py::arg("score"),
           py::arg("label") = "building", py::arg("frame") = "")
      .def_readwrite("x0", &DetectionBox::x0)
      .def_readwrite("y0", &DetectionBox::y0)
      .def_readwrite("x1", &DetectionBox::x1)
      .def_readwrite("y1", &DetectionBox::y1)
      .def_readwrite("score", &DetectionBox::score)
      .def_readwrite("label", &DetectionBox::label)
      .def_readwrite("frame", &DetectionBox::frame)
      .def("__repr__", [](const DetectionBox& b) {
        return "DetectionBox(" + std::to_string(b.x0) + ", " + std::to_string(b.y0) + ", " + std::to_string(b.x1) +
               ", " + std::to_string(b.y1) + ", score=" + std::to_string(b.score) + ")";
      });

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init([](double d_min, double d_max, int plane_count, float p1, float p2, double scale,
                       double overlap_threshold, double score_cutoff, bool selective, const std::string& edge,
                       int threads) {
             PipelineConfig c;
             c.d_min = d_min;
             c.d_max = d_max;
             c.plane_count = plane_count;
             c.p1 = p1;
             c.p2 = p2;
             c.scale = scale;
             c.overlap_threshold = overlap_threshold;
             c.score_cutoff = score_cutoff;
             c.selective = selective;
             c.edge_provider = parse_edge_provider(edge);
             c.threads = threads;
             c.validate();
             return c;
           }),
           py::arg("d_min"), py::arg("d_max"), py::arg("plane_count") = 128, py::arg("p1") = 5.f,
           py::arg("p2") = 50.f, py::arg("scale") = 0.5, py::arg("overlap_threshold") = 0.3,
           py::arg("score_cutoff") = 0.8, py::arg("selective") = false, py::arg("edge_provider") = "lsd",
           py::arg("threads") = 0)
      .def_readwrite("d_min", &PipelineConfig::d_min)
      .def_readwrite("d_max", &PipelineConfig::d_max)
      .def_readwrite("plane_count", &PipelineConfig::plane_count)
      .def_readwrite("scale", &PipelineConfig::scale)
      .def_readwrite("selective", &PipelineConfig::selective)
      .def_readwrite("threads", &PipelineConfig::threads);

  m.def(
      "sample_planes",
      [](double d_min, double d_max, int count) {
        const PlaneStack s = sample_planes(d_min, d_max, count);
        std::vector<double> out;
        for (const auto& p : s.planes) out.push_back(p.distance);
        return out;
      },
      py::arg("d_min"), py::arg("d_max"), py::arg("count"),
      "Distances of frontoparallel planes spaced uniformly in inverse depth.");

  m.def(
      "plane_homography",
      [](const CameraIntrinsics& k, const CameraPose& ref, const CameraPose& other, const Vec3& normal,
         double distance) { return plane_homography(k, ref, other, SweepPlane{normal, distance}); },
      py::arg("intrinsics"), py::arg("ref"), py::arg("other"), py::arg("normal"), py::arg("distance"),
      "Maps reference pixels onto the other view for points on the plane n.X = d (reference frame).");

  m.def(
      "depth_from_plane",
      [](double x, double y, const Vec3& normal, double distance, const CameraIntrinsics& k) {
        return depth_from_plane(x, y, SweepPlane{normal, distance}, k);
      },
      py::arg("x"), py::arg("y"), py::arg("normal"), py::arg("distance"), py::arg("intrinsics"));

  m.def(
      "census_transform",
      [](const FloatArray& image) {
        const CensusImage c = census_transform(to_image(image));
        py::array_t<std::uint64_t> bits({c.height, c.width});
        py::array_t<bool> valid({c.height, c.width});
        std::memcpy(bits.mutable_data(), c.bits.data(), c.bits.size() * sizeof(std::uint64_t));
        for (std::size_t i = 0; i < c.valid.size(); ++i) valid.mutable_data()[i] = c.valid[i] != 0;
        return py::make_tuple(bits, valid);
      },
      py::arg("image"), "9x7 Census descriptors and their validity.");

  m.def("hamming_cost", &hamming_cost, py::arg("a"), py::arg("b"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"));

  m.def(
      "soft_nms",
      [](const std::vector<DetectionBox>& boxes, double overlap_threshold, double score_cutoff, bool rectangular) {
        return soft_nms(boxes, {overlap_threshold, score_cutoff, rectangular ? DecayKind::Rectangular : DecayKind::Linear});
      },
      py::arg("boxes"), py::arg("overlap_threshold") = 0.3, py::arg("score_cutoff") = 0.8,
      py::arg("rectangular") = false);

  m.def(
      "detect_lines",
      [](const FloatArray& image) {
        const auto segs = detect_lines(to_image(image));
        py::array_t<double> out({static_cast<py::ssize_t>(segs.size()), py::ssize_t{6}});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < segs.size(); ++i) {
          const auto& s = segs[i];
          const double row[6] = {s.x0, s.y0, s.x1, s.y1, s.width, s.log_nfa};
          for (int j = 0; j < 6; ++j) v(static_cast<py::ssize_t>(i), j) = row[j];
        }
        return out;
      },
      py::arg("image"), "Line segments as rows (x0, y0, x1, y1, width, log_nfa).");

  m.def(
      "run",
      [](const std::vector<CameraView>& views, int center, const std::vector<DetectionBox>& rois,
         const PipelineConfig& config) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(select_bundle(views, center), rois, config);
        }
        py::dict timing;
        for (const auto& s : r.timing.stages) {
          const double prev = timing.contains(s.stage) ? timing[py::str(s.stage)].cast<double>() : 0.0;
          timing[py::str(s.stage)] = prev + s.milliseconds;
        }
        py::dict out;
        out["depth"] = to_array(r.depth);
        out["warnings"] = r.warnings;
        out["timing_ms"] = timing;
        out["total_ms"] = r.timing.total_ms;
        out["line_mask"] = to_array(r.line_mask);
        out["kept_rois"] = r.kept_rois;
        return out;
      },
      py::arg("views"), py::arg("center"), py::arg("rois"), py::arg("config"),
      "Depth map for views[center]; invalid pixels are +inf.");

  m.def(
      "render_two_plane",
      [](int width, int height, double focal, int frames, double baseline) {
        synth::TwoPlaneOptions o;
        o.width = width;
        o.height = height;
        o.focal = focal;
        o.frames = frames;
        o.baseline = baseline;
        return rendered(synth::make_two_plane_scene(o));
      },
      py::arg("width") = 320, py::arg("height") = 240, py::arg("focal") = 300.0, py::arg("frames") = 5,
      py::arg("baseline") = 1.5, "Synthetic slab-over-ground sequence with ground-truth depth.");

  m.def(
      "write_depth_pfm", [](const FloatArray& depth, const std::filesystem::path& path) {
        write_depth_pfm(to_image(depth), path);
      },
      py::arg("depth"), py::arg("path"));
  m.def(
      "read_depth_pfm", [](const std::filesystem::path& path) { return to_array(read_depth_pfm(path)); },
      py::arg("path"));
}
