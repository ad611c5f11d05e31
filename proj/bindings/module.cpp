#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cmtext/eval.hpp"
#include "cmtext/io.hpp"
#include "cmtext/labels.hpp"
#include "cmtext/losses.hpp"
#include "cmtext/reconstruct.hpp"
#include "cmtext/synth.hpp"
#include "cmtext/trainer.hpp"

namespace py = pybind11;
using namespace cmtext;

namespace {

TextPolygon polygon_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> pts,
                               bool ignore = false) {
  if (pts.ndim() != 2 || pts.shape(1) != 2) {
    throw std::invalid_argument("polygon must be an (N, 2) array");
  }
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(pts.shape(0)));
  auto r = pts.unchecked<2>();
  for (py::ssize_t i = 0; i < pts.shape(0); ++i) vertices.push_back({r(i, 0), r(i, 1)});
  return TextPolygon(std::move(vertices), ignore);
}

py::array_t<double> polygon_to_array(const TextPolygon& poly) {
  py::array_t<double> out({static_cast<py::ssize_t>(poly.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    w(static_cast<py::ssize_t>(i), 0) = poly.vertices()[i].x;
    w(static_cast<py::ssize_t>(i), 1) = poly.vertices()[i].y;
  }
  return out;
}

BinaryGrid binary_from_array(
    py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("grid must be 2-D");
  BinaryGrid g(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  auto r = arr.unchecked<2>();
  for (py::ssize_t y = 0; y < arr.shape(0); ++y) {
    for (py::ssize_t x = 0; x < arr.shape(1); ++x) {
      g.cells[static_cast<std::size_t>(y) * g.width + static_cast<std::size_t>(x)] =
          r(y, x) ? 1 : 0;
    }
  }
  return g;
}

SoftGrid soft_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("grid must be 2-D");
  SoftGrid g(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  auto r = arr.unchecked<2>();
  for (py::ssize_t y = 0; y < arr.shape(0); ++y) {
    for (py::ssize_t x = 0; x < arr.shape(1); ++x) {
      g.cells[static_cast<std::size_t>(y) * g.width + static_cast<std::size_t>(x)] = r(y, x);
    }
  }
  return g;
}

py::array_t<std::uint8_t> binary_to_array(const BinaryGrid& g) {
  py::array_t<std::uint8_t> out({py::ssize_t(g.height), py::ssize_t(g.width)});
  std::memcpy(out.mutable_data(), g.cells.data(), g.cells.size());
  return out;
}

py::array_t<double> soft_to_array(const SoftGrid& g) {
  py::array_t<double> out({py::ssize_t(g.height), py::ssize_t(g.width)});
  std::memcpy(out.mutable_data(), g.cells.data(), g.cells.size() * sizeof(double));
  return out;
}

// Instances that fail polygon validation are dropped (reported through
// `warnings` when given), matching how whole-image label generation
// treats bad geometry.
std::vector<TextPolygon> polygons_from_lists(const py::list& polys, const py::object& ignore,
                                             std::vector<std::string>* warnings = nullptr) {
  std::vector<bool> flags;
  if (!ignore.is_none()) flags = ignore.cast<std::vector<bool>>();
  std::vector<TextPolygon> out;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    try {
      out.push_back(polygon_from_array(polys[i].cast<py::array_t<double>>(),
                                       i < flags.size() ? static_cast<bool>(flags[i]) : false));
    } catch (const std::runtime_error& e) {
      if (!warnings) throw;
      warnings->push_back("instance " + std::to_string(i) + " dropped: " + e.what());
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Center-mask scene text representation: label generation, losses, "
            "reconstruction, evaluation";

  py::register_exception<DegeneratePolygon>(m, "DegeneratePolygonError", PyExc_ValueError);
  py::register_exception<ChordMiss>(m, "ChordMissError", PyExc_ValueError);
  py::register_exception<PointOutside>(m, "PointOutsideError", PyExc_ValueError);
  py::register_exception<NoIntersection>(m, "NoIntersectionError", PyExc_ValueError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatchError", PyExc_ValueError);
  py::register_exception<TooSmall>(m, "TooSmallError", PyExc_ValueError);
  py::register_exception<NonPositiveInput>(m, "NonPositiveInputError", PyExc_ValueError);
  py::register_exception<Diverged>(m, "DivergedError", PyExc_RuntimeError);

  m.def(
      "center_point",
      [](py::array_t<double> poly, double fraction) {
        const Point p = center_point(polygon_from_array(poly), fraction);
        return py::make_tuple(p.x, p.y);
      },
      py::arg("polygon"), py::arg("fraction") = 0.5,
      "Chord midpoint of the vertical line at the given bbox fraction.");

  m.def(
      "polar_min_distance",
      [](py::array_t<double> poly, double x, double y) {
        return polar_min_distance(polygon_from_array(poly), {x, y});
      },
      py::arg("polygon"), py::arg("x"), py::arg("y"));

  m.def(
      "ray_distances",
      [](py::array_t<double> poly, double x, double y) {
        const auto rd = ray_distances(polygon_from_array(poly), {x, y});
        return std::vector<double>(rd.begin(), rd.end());
      },
      py::arg("polygon"), py::arg("x"), py::arg("y"),
      "Distances along up, down, left, right and the four diagonals.");

  m.def(
      "offset_polygon",
      [](py::array_t<double> poly, double d) {
        py::list out;
        for (const auto& p : offset_polygon(polygon_from_array(poly), d)) {
          out.append(polygon_to_array(p));
        }
        return out;
      },
      py::arg("polygon"), py::arg("distance"),
      "Signed parallel offset; negative shrinks, positive expands.");

  m.def(
      "generate_labels",
      [](const py::list& polys, int height, int width, double mu, int centers, int scale,
         const py::object& ignore) {
        LabelConfig lc;
        lc.mu = mu;
        lc.n_centers = centers;
        lc.scale = scale;
        std::vector<std::string> drop_warnings;
        LabelBundle bundle = generate_labels(polygons_from_lists(polys, ignore, &drop_warnings),
                                             height, width, lc);
        bundle.warnings.insert(bundle.warnings.begin(), drop_warnings.begin(),
                               drop_warnings.end());
        py::list instances;
        for (const auto& inst : bundle.instances) {
          py::dict d;
          d["pmd"] = inst.pmd_text;
          d["ignore"] = inst.ignore;
          py::list centers_out;
          for (const auto& c : inst.centers) {
            py::dict cd;
            cd["x"] = c.point.x;
            cd["y"] = c.point.y;
            cd["pmd"] = c.pmd;
            cd["rd"] = std::vector<double>(c.ray_distances.begin(), c.ray_distances.end());
            centers_out.append(cd);
          }
          d["centers"] = centers_out;
          instances.append(d);
        }
        py::dict out;
        out["cm"] = binary_to_array(bundle.cm);
        out["gap"] = binary_to_array(bundle.gap);
        out["text"] = binary_to_array(bundle.text);
        out["instances"] = instances;
        out["warnings"] = bundle.warnings;
        return out;
      },
      py::arg("polygons"), py::arg("height"), py::arg("width"), py::arg("mu") = 0.5,
      py::arg("centers") = 5, py::arg("scale") = 4, py::arg("ignore") = py::none(),
      "Ground-truth CM/GAP masks plus per-center PMD and ray-distance targets.");

  m.def(
      "reconstruct",
      [](py::array_t<double> cm, double threshold, int min_area, double mu, int scale,
         const std::string& mode) {
        ReconstructConfig cfg;
        cfg.threshold = threshold;
        cfg.min_area = min_area;
        cfg.mu = mu;
        cfg.scale = scale;
        cfg.mode = mode == "mu_corrected" ? ExpansionMode::kMuCorrected : ExpansionMode::kLiteral;
        py::list out;
        for (const auto& det : reconstruct(soft_from_array(cm), cfg)) {
          out.append(py::make_tuple(polygon_to_array(det.polygon), det.score));
        }
        return out;
      },
      py::arg("cm"), py::arg("threshold") = 0.5, py::arg("min_area") = 16, py::arg("mu") = 0.5,
      py::arg("scale") = 4, py::arg("mode") = "literal",
      "CM probability grid -> list of (polygon, score) detections.");

  m.def(
      "pixel_expand_baseline",
      [](py::array_t<std::uint8_t> kernel, py::array_t<std::uint8_t> text) {
        py::list out;
        for (const auto& det :
             pixel_expand_baseline(binary_from_array(kernel), binary_from_array(text))) {
          out.append(py::make_tuple(polygon_to_array(det.polygon), det.score));
        }
        return out;
      },
      py::arg("kernel"), py::arg("text"));

  m.def(
      "dice_loss",
      [](py::array_t<double> pred, py::array_t<std::uint8_t> gt) {
        DiceResult r = dice_loss(soft_from_array(pred), binary_from_array(gt));
        return py::make_tuple(r.value, soft_to_array(r.gradient));
      },
      py::arg("pred"), py::arg("gt"), "Returns (value, gradient).");

  m.def(
      "ratio_loss",
      [](double pred, double gt) {
        RatioResult r = ratio_loss(pred, gt);
        return py::make_tuple(r.value, r.derivative);
      },
      py::arg("pred"), py::arg("gt"), "Returns (value, derivative).");

  m.def(
      "polygon_iou",
      [](py::array_t<double> a, py::array_t<double> b) {
        return polygon_iou(polygon_from_array(a), polygon_from_array(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "match_detections",
      [](const py::list& det_polys, const std::vector<double>& scores, const py::list& gt_polys,
         const py::object& gt_ignore, double iou_thresh) {
        std::vector<Detection> dets;
        for (std::size_t i = 0; i < det_polys.size(); ++i) {
          dets.push_back({polygon_from_array(det_polys[i].cast<py::array_t<double>>()),
                          i < scores.size() ? scores[i] : 1.0});
        }
        EvalResult r =
            match_detections(dets, polygons_from_lists(gt_polys, gt_ignore), iou_thresh);
        py::dict out;
        out["precision"] = r.precision;
        out["recall"] = r.recall;
        out["f_measure"] = r.f_measure;
        out["tp"] = r.tp;
        out["fp"] = r.fp;
        out["fn"] = r.fn;
        out["ignored"] = r.ignored;
        py::list matches;
        for (const auto& match : r.matches) {
          matches.append(py::make_tuple(match.det, match.gt, match.iou));
        }
        out["matches"] = matches;
        return out;
      },
      py::arg("detections"), py::arg("scores"), py::arg("ground_truths"),
      py::arg("gt_ignore") = py::none(), py::arg("iou_thresh") = 0.5);

  m.def(
      "fit_direct",
      [](const py::list& polys, int height, int width, int steps, double lr, std::uint64_t seed,
         double mu, int centers, int scale) {
        LabelConfig lc;
        lc.mu = mu;
        lc.n_centers = centers;
        lc.scale = scale;
        LabelBundle labels = generate_labels(polygons_from_lists(polys, py::none()), height,
                                             width, lc);
        FitReport r = fit_direct(labels, steps, lr, seed);
        py::dict out;
        std::vector<double> trace;
        trace.reserve(r.trace.size());
        for (const auto& t : r.trace) trace.push_back(t.total);
        out["trace"] = trace;
        out["final_total"] = r.final_report.total;
        out["cm"] = soft_to_array(r.final_prediction.cm);
        out["gap"] = soft_to_array(r.final_prediction.gap);
        out["wall_ms"] = r.wall_ms;
        return out;
      },
      py::arg("polygons"), py::arg("height"), py::arg("width"), py::arg("steps") = 500,
      py::arg("lr") = 0.5, py::arg("seed") = 0, py::arg("mu") = 0.5, py::arg("centers") = 5,
      py::arg("scale") = 1,
      "Desk-scale training: optimizes free predictions against the combined loss.");

  m.def(
      "grad_check",
      [](const py::list& polys, int height, int width, double h, std::uint64_t seed, double mu,
         int centers, int scale) {
        LabelConfig lc;
        lc.mu = mu;
        lc.n_centers = centers;
        lc.scale = scale;
        LabelBundle labels = generate_labels(polygons_from_lists(polys, py::none()), height,
                                             width, lc);
        ParamState state = ParamState::init(labels, seed);
        return grad_check(labels, state, h);
      },
      py::arg("polygons"), py::arg("height"), py::arg("width"), py::arg("h") = 1e-4,
      py::arg("seed") = 0, py::arg("mu") = 0.5, py::arg("centers") = 3, py::arg("scale") = 1,
      "Max relative error between analytic and finite-difference gradients.");

  m.def(
      "bench_reconstruct",
      [](int size, int n_instances, int repeats, std::uint64_t seed) {
        BenchReport r = bench_reconstruct(size, n_instances, repeats, seed);
        py::dict out;
        out["grid_size"] = r.grid_size;
        out["instance_count"] = r.instance_count;
        out["repeats"] = r.repeats;
        out["cm_median_ms"] = r.cm_median_ms;
        out["baseline_median_ms"] = r.baseline_median_ms;
        out["speed_ratio"] = r.speed_ratio;
        return out;
      },
      py::arg("size") = 640, py::arg("n_instances") = 10, py::arg("repeats") = 100,
      py::arg("seed") = 0);

  m.def(
      "make_annular_sector",
      [](double cx, double cy, double r_inner, double r_outer, double angle_begin,
         double angle_end, int arc_samples) {
        return polygon_to_array(
            make_annular_sector({cx, cy}, r_inner, r_outer, angle_begin, angle_end, arc_samples));
      },
      py::arg("cx"), py::arg("cy"), py::arg("r_inner"), py::arg("r_outer"),
      py::arg("angle_begin"), py::arg("angle_end"), py::arg("arc_samples") = 16);

  m.attr("__version__") = "0.1.0";
}
