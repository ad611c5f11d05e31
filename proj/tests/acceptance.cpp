// Acceptance suite: one pass/fail line per criterion, nonzero exit if
// any fails. Runs the library the way the pipeline is meant to be run;
// each criterion carries its tolerance inline.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmtext/eval.hpp"
#include "cmtext/io.hpp"
#include "cmtext/labels.hpp"
#include "cmtext/losses.hpp"
#include "cmtext/reconstruct.hpp"
#include "cmtext/synth.hpp"
#include "cmtext/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cmtext;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double roundtrip_iou(const TextPolygon& instance, int h, int w, int n_centers = 1) {
  LabelConfig lc;
  lc.mu = 0.5;
  lc.n_centers = n_centers;
  lc.scale = 1;
  LabelBundle labels = generate_labels({instance}, h, w, lc);
  if (labels.instances.empty() || labels.instances[0].ignore) return 0.0;
  ReconstructConfig rc;
  rc.scale = 1;
  auto dets = reconstruct(to_soft(labels.cm), rc);
  if (dets.size() != 1) return 0.0;
  return polygon_iou(dets[0].polygon, instance);
}

// ---------------------------------------------------------------- 1
void criterion_roundtrip() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(20240501);

  double rect_min = 1.0;
  for (int i = 0; i < 200; ++i) {
    std::uniform_int_distribution<int> hd(3, 50);   // heights 12..200, multiple of 4
    const int h = 4 * hd(rng);
    std::uniform_int_distribution<int> wd(std::max(5, h / 4), 100);  // widths 20..400
    const int w = 4 * wd(rng);
    const int gw = w + 20, gh = h + 20;
    TextPolygon rect = make_rect(10, 10, 10 + w, 10 + h);
    rect_min = std::min(rect_min, roundtrip_iou(rect, gh, gw));
  }

  double convex_min = 1.0;
  int convex_done = 0;
  while (convex_done < 200) {
    std::uniform_real_distribution<double> rx(50.0, 110.0), ratio(0.3, 0.7), rot(-0.6, 0.6);
    const double ax = rx(rng);
    const double ay = std::max(22.0, ax * ratio(rng));
    std::uniform_int_distribution<int> nv(8, 12);
    auto hull = oracles::text_like_convex(rng, {ax + 20.0, ax + 20.0}, ax, ay, nv(rng), rot(rng));
    TextPolygon poly(hull);
    double pmd;
    try {
      pmd = polar_min_distance(poly, center_point(poly, 0.5));
    } catch (const std::runtime_error&) {
      continue;
    }
    if (pmd < 8.0) continue;
    ++convex_done;
    const int gw = static_cast<int>(poly.bbox().max_x) + 20;
    const int gh = static_cast<int>(poly.bbox().max_y) + 20;
    convex_min = std::min(convex_min, roundtrip_iou(poly, gh, gw));
  }

  // Curved-text analogue: bands bulging up or down, the orientation
  // where the mid-chord crosses the band perpendicular to its run.
  double arc_min = 1.0;
  int arc_done = 0;
  while (arc_done < 50) {
    std::uniform_real_distribution<double> ro(60.0, 110.0);
    const double r_outer = ro(rng);
    std::uniform_real_distribution<double> th(28.0, std::min(64.0, r_outer - 10.0));
    const double thickness = th(rng);
    std::uniform_real_distribution<double> span(1.7, 3.0), wobble(-0.4, 0.4);
    const double arc_span = span(rng);
    const double apex = (arc_done % 2 == 0 ? 1.5707963 : -1.5707963) + wobble(rng);
    const double begin = apex - arc_span / 2;
    TextPolygon arc = make_annular_sector({r_outer + 20.0, r_outer + 20.0},
                                          r_outer - thickness, r_outer, begin,
                                          begin + arc_span);
    double pmd;
    try {
      pmd = polar_min_distance(arc, center_point(arc, 0.5));
    } catch (const std::runtime_error&) {
      continue;
    }
    if (pmd < 8.0) continue;
    ++arc_done;
    const int side = static_cast<int>(2 * r_outer) + 40;
    arc_min = std::min(arc_min, roundtrip_iou(arc, side, side));
  }

  const double secs = seconds_since(t0);
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "rect min IoU %.6f (>=0.999), convex min IoU %.4f (>=0.9), "
                "arc min IoU %.4f (>=0.9), %.1fs (<=10s)",
                rect_min, convex_min, arc_min, secs);
  report(1, "round-trip fidelity", rect_min >= 0.999 && convex_min >= 0.9 && arc_min >= 0.9 &&
                                       secs <= 10.0,
         detail);
}

// ---------------------------------------------------------------- 2
void criterion_gradients() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    std::uniform_int_distribution<int> m(1, 3), e(8, 12);
    const int x0 = m(rng), y0 = m(rng);
    TextPolygon rect = make_rect(x0, y0, x0 + e(rng), y0 + e(rng) - 2);
    LabelConfig lc;
    lc.scale = 1;
    lc.n_centers = 3;
    LabelBundle labels = generate_labels({rect}, 16, 16, lc);
    ParamState state = ParamState::init(labels, 1000 + static_cast<std::uint64_t>(s));
    worst = std::max(worst, grad_check(labels, state, 1e-4));
  }
  const double secs = seconds_since(t0);
  char detail[160];
  std::snprintf(detail, sizeof(detail), "max relative error %.3e (<=1e-4), %.2fs (<=5s)", worst,
                secs);
  report(2, "gradient correctness", worst <= 1e-4 && secs <= 5.0, detail);
}

// ---------------------------------------------------------------- 3
void criterion_ratio_loss() {
  const auto t0 = clock_type::now();
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> val(1e-4, 1e4), scale(1e-4, 1e4);
  double worst_scale = 0.0;
  bool symmetric = true, zero_iff_equal = true;
  for (int i = 0; i < 100000; ++i) {
    const double p = val(rng), g = val(rng), c = scale(rng);
    const double v = ratio_loss(p, g).value;
    worst_scale = std::max(worst_scale, std::abs(ratio_loss(c * p, c * g).value - v));
    if (ratio_loss(g, p).value != v) symmetric = false;
    if (ratio_loss(p, p).value != 0.0) zero_iff_equal = false;
    if (p != g && v <= 0.0 && std::abs(p - g) > 1e-9 * std::max(p, g)) zero_iff_equal = false;
  }
  const double secs = seconds_since(t0);
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "scale drift %.2e (<=1e-12), symmetric %s, zero-iff-equal %s, %.2fs (<=1s)",
                worst_scale, symmetric ? "yes" : "no", zero_iff_equal ? "yes" : "no", secs);
  report(3, "ratio-loss properties",
         worst_scale <= 1e-12 && symmetric && zero_iff_equal && secs <= 1.0, detail);
}

// ---------------------------------------------------------------- 4
void criterion_desk_training() {
  const auto t0 = clock_type::now();
  std::vector<TextPolygon> instances = {
      make_rect(16, 16, 120, 64),
      make_rect(140, 24, 236, 72),
      make_rect(24, 160, 140, 224),
      make_annular_sector({196, 176}, 28, 58, -0.8, 2.2),
  };
  LabelConfig lc;
  lc.scale = 1;
  lc.n_centers = 5;
  LabelBundle labels = generate_labels(instances, 256, 256, lc);

  FitReport fit = fit_direct(labels, 2000, 0.5, 7);

  // Per-instance thresholded IoU of the predicted CM, with cells owned
  // by other instances excluded from the union.
  double min_iou = 1.0;
  const SoftGrid& pred = fit.final_prediction.cm;
  for (std::size_t i = 0; i < labels.instances.size(); ++i) {
    if (labels.instances[i].ignore) continue;
    BinaryGrid mine(labels.cm.height, labels.cm.width);
    for (const auto& poly : labels.instances[i].cm_polygons) {
      BinaryGrid r = rasterize(poly, labels.cm.height, labels.cm.width);
      for (std::size_t k = 0; k < mine.cells.size(); ++k) mine.cells[k] |= r.cells[k];
    }
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < mine.cells.size(); ++k) {
      const bool others = labels.cm.cells[k] && !mine.cells[k];
      if (others) continue;
      const bool p = pred.cells[k] >= 0.5;
      const bool g = mine.cells[k] != 0;
      inter += p && g;
      uni += p || g;
    }
    min_iou = std::min(min_iou, uni ? static_cast<double>(inter) / uni : 0.0);
  }

  ReconstructConfig rc;
  rc.scale = 1;
  auto dets = reconstruct(pred, rc);
  EvalResult ev = match_detections(dets, instances, 0.5);

  const double secs = seconds_since(t0);
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "final loss %.4f, min per-instance CM IoU %.4f (>=0.99), F %.3f (=1.0), "
                "%zu detections, %.1fs (<=60s)",
                fit.final_report.total, min_iou, ev.f_measure, dets.size(), secs);
  report(4, "desk-training closure",
         min_iou >= 0.99 && ev.f_measure == 1.0 && fit.trace.size() == 2001 && secs <= 60.0,
         detail);
}

// ---------------------------------------------------------------- 5
void criterion_adhesion() {
  std::vector<TextPolygon> instances = {make_rect(10, 10, 110, 50),
                                        make_rect(10, 54, 110, 94)};
  LabelConfig lc;
  lc.scale = 1;
  LabelBundle labels = generate_labels(instances, 128, 128, lc);
  const auto comps = connected_components(labels.cm);

  ReconstructConfig rc;
  rc.scale = 1;
  auto dets = reconstruct(to_soft(labels.cm), rc);
  double iou0 = 0.0, iou1 = 0.0;
  if (dets.size() == 2) {
    iou0 = polygon_iou(dets[0].polygon, instances[0]);
    iou1 = polygon_iou(dets[1].polygon, instances[1]);
  }
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "%zu CM components (=2), %zu detections (=2), IoUs %.4f / %.4f (>=0.9)",
                comps.size(), dets.size(), iou0, iou1);
  report(5, "adhesion separation",
         comps.size() == 2 && dets.size() == 2 && iou0 >= 0.9 && iou1 >= 0.9, detail);
}

// ---------------------------------------------------------------- 6
void criterion_speed() {
  BenchReport r = bench_reconstruct(640, 10, 100, 99);
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "reconstruct median %.3f ms vs pixel expansion %.3f ms, ratio %.2fx (>=5x), "
                "%d vs %d detections",
                r.cm_median_ms, r.baseline_median_ms, r.speed_ratio, r.cm_detections,
                r.baseline_detections);
  report(6, "relative reconstruction speed",
         r.speed_ratio >= 5.0 && r.cm_detections == 10 && r.baseline_detections == 10, detail);
}

// ---------------------------------------------------------------- 7
void criterion_matching_oracle() {
  std::mt19937_64 rng(271828);
  std::uniform_int_distribution<int> n_gt(1, 6), jit(-4, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int ng = n_gt(rng);
    std::vector<TextPolygon> gts;
    for (int g = 0; g < ng; ++g) {
      const double x0 = 10 + 64.0 * g;
      gts.push_back(make_rect(x0, 10, x0 + 44, 36));
    }
    std::vector<Detection> dets;
    for (int g = 0; g < ng && dets.size() < 6; ++g) {
      if (u(rng) < 0.75) {
        dets.push_back({gts[static_cast<std::size_t>(g)].translated(jit(rng), jit(rng)), 0.9});
      }
      if (u(rng) < 0.2) {
        dets.push_back({gts[static_cast<std::size_t>(g)].translated(jit(rng), jit(rng)), 0.6});
      }
    }
    if (u(rng) < 0.3 && dets.size() < 6) dets.push_back({make_rect(600, 300, 640, 326), 0.2});

    EvalResult r = match_detections(dets, gts, 0.5);
    std::vector<std::vector<double>> iou(dets.size(), std::vector<double>(gts.size(), 0.0));
    for (std::size_t d = 0; d < dets.size(); ++d) {
      for (std::size_t g = 0; g < gts.size(); ++g) {
        iou[d][g] = polygon_iou(dets[d].polygon, gts[g]);
      }
    }
    if (r.tp != oracles::max_matching_tp(iou, 0.5)) ++mismatches;
  }
  char detail[120];
  std::snprintf(detail, sizeof(detail), "%d/1000 trials disagree with the exhaustive optimum (=0)",
                mismatches);
  report(7, "matching oracle equivalence", mismatches == 0, detail);
}

// ---------------------------------------------------------------- 8
void criterion_center_configurations() {
  bool counts_ok = true;
  for (int n : {1, 3, 5, 7}) {
    std::vector<TextPolygon> instances = {make_rect(8, 8, 208, 72),
                                          make_rect(8, 96, 158, 146)};
    LabelConfig lc;
    lc.n_centers = n;
    lc.scale = 1;
    LabelBundle labels = generate_labels(instances, 160, 224, lc);
    for (const auto& inst : labels.instances) {
      if (inst.ignore) continue;
      if (inst.centers.size() != static_cast<std::size_t>(n)) counts_ok = false;
      std::size_t rd = 0;
      for (const auto& c : inst.centers) rd += c.ray_distances.size();
      if (rd != static_cast<std::size_t>(8 * n)) counts_ok = false;
    }
  }

  // n = 5 positions must sit at the {1,3,5,7,9}/10 fractions exactly.
  std::vector<TextPolygon> instances = {make_rect(0, 0, 100, 40)};
  LabelConfig lc;
  lc.n_centers = 5;
  lc.scale = 1;
  LabelBundle labels = generate_labels(instances, 40, 100, lc);
  double worst = 0.0;
  const double want[] = {10.0, 30.0, 50.0, 70.0, 90.0};
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(labels.instances[0].centers[static_cast<std::size_t>(i)]
                                         .point.x -
                                     want[i]));
  }

  // The labelgen subcommand emits the same counts through the file
  // interface.
  bool cli_ok = true;
  std::string cli_note;
#ifdef CMTEXT_CLI_PATH
  const fs::path dir = fs::temp_directory_path() / "cmtext_acceptance_c8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (int n : {1, 3, 5, 7}) {
    const fs::path scenes = dir / ("scenes" + std::to_string(n) + ".ndjson");
    const fs::path out = dir / ("labels" + std::to_string(n));
    std::string cmd = std::string(CMTEXT_CLI_PATH) + " synth --out " + scenes.string() +
                      " --width 512 --height 512 --count 1 --rects 4 --rotated 0 --arcs 0"
                      " --seed 5 > /dev/null";
    if (std::system(cmd.c_str()) != 0) cli_ok = false;
    cmd = std::string(CMTEXT_CLI_PATH) + " labelgen --input " + scenes.string() + " --out " +
          out.string() + " --centers " + std::to_string(n) + " --scale 1 > /dev/null";
    if (std::system(cmd.c_str()) != 0) cli_ok = false;
    std::ifstream in(out / "labels.ndjson");
    const auto records = read_ndjson_labels(in);
    if (records.size() != 1) {
      cli_ok = false;
      continue;
    }
    for (const auto& inst : records[0].instances) {
      if (inst.ignore) continue;
      if (inst.centers.size() != static_cast<std::size_t>(n)) cli_ok = false;
      for (const auto& c : inst.centers) {
        if (c.rd.size() != 8) cli_ok = false;
      }
    }
  }
  cli_note = cli_ok ? "cli counts match" : "cli counts WRONG";
#else
  cli_note = "cli not checked";
#endif

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "counts n/8n %s, n=5 position error %.2e (<=1e-9), %s",
                counts_ok ? "ok" : "WRONG", worst, cli_note.c_str());
  report(8, "center-count configuration space", counts_ok && worst <= 1e-9 && cli_ok, detail);
}

// ---------------------------------------------------------------- 9
void criterion_format_roundtrips() {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> coord(0.0, 999.0), score(0.0, 1.0);
  std::uniform_int_distribution<int> n_inst(0, 6), n_pts(3, 10), coin(0, 1), dim(1, 24);
  bool ok = true;

  for (int i = 0; i < 100 && ok; ++i) {
    // Annotations
    AnnotationRecord ar;
    ar.image = "img" + std::to_string(i);
    ar.width = 640;
    ar.height = 480;
    for (int j = n_inst(rng); j > 0; --j) {
      AnnotationInstance inst;
      for (int p = n_pts(rng); p > 0; --p) inst.points.push_back({coord(rng), coord(rng)});
      inst.ignore = coin(rng);
      if (coin(rng)) inst.text = "word" + std::to_string(j);
      ar.instances.push_back(inst);
    }
    std::stringstream abuf;
    write_ndjson_annotations(abuf, {ar});
    const auto aback = read_ndjson_annotations(abuf);
    if (aback.size() != 1 || aback[0].instances.size() != ar.instances.size()) ok = false;
    for (std::size_t j = 0; ok && j < ar.instances.size(); ++j) {
      if (aback[0].instances[j].ignore != ar.instances[j].ignore) ok = false;
      if (aback[0].instances[j].text != ar.instances[j].text) ok = false;
      for (std::size_t p = 0; ok && p < ar.instances[j].points.size(); ++p) {
        if (aback[0].instances[j].points[p].x != quantize4(ar.instances[j].points[p].x)) {
          ok = false;
        }
      }
    }
    std::stringstream abuf2, abuf3;
    write_ndjson_annotations(abuf2, aback);
    write_ndjson_annotations(abuf3, {ar});
    if (abuf2.str() != abuf3.str()) ok = false;

    // Detections
    DetectionRecord dr;
    dr.image = ar.image;
    for (int j = n_inst(rng); j > 0; --j) {
      DetectionInstance det;
      for (int p = 0; p < 4; ++p) det.points.push_back({coord(rng), coord(rng)});
      det.score = score(rng);
      dr.detections.push_back(det);
    }
    std::stringstream dbuf;
    write_ndjson_detections(dbuf, {dr});
    const auto dback = read_ndjson_detections(dbuf);
    if (dback.size() != 1 || dback[0].detections.size() != dr.detections.size()) ok = false;
    for (std::size_t j = 0; ok && j < dr.detections.size(); ++j) {
      if (std::abs(dback[0].detections[j].score - dr.detections[j].score) > 1e-4) ok = false;
    }

    // Labels
    LabelRecord lr;
    lr.image = ar.image;
    lr.mu = 0.5;
    lr.scale = coin(rng) ? 1 : 4;
    for (int j = n_inst(rng); j > 0; --j) {
      LabelInstanceRecord inst;
      inst.pmd = coord(rng);
      inst.ignore = coin(rng);
      for (int k = coin(rng) ? 1 : 5; k > 0; --k) {
        CenterRecord c;
        c.x = coord(rng);
        c.y = coord(rng);
        c.pmd = coord(rng);
        for (auto& v : c.rd) v = coord(rng);
        inst.centers.push_back(c);
      }
      lr.instances.push_back(inst);
    }
    std::stringstream lbuf;
    write_ndjson_labels(lbuf, {lr});
    const auto lback = read_ndjson_labels(lbuf);
    if (lback.size() != 1 || lback[0].instances.size() != lr.instances.size()) ok = false;

    // PGM
    BinaryGrid bg(dim(rng), dim(rng));
    for (auto& c : bg.cells) c = static_cast<std::uint8_t>(coin(rng));
    std::stringstream pbuf;
    write_pgm(pbuf, bg);
    const BinaryGrid pback = read_pgm(pbuf);
    if (pback.cells != bg.cells || pback.width != bg.width) ok = false;

    // SOFTMASK
    SoftGrid sg(dim(rng), dim(rng));
    for (auto& c : sg.cells) c = static_cast<double>(static_cast<float>(score(rng)));
    std::stringstream sbuf;
    write_softmask(sbuf, sg);
    const SoftGrid sback = read_softmask(sbuf);
    if (sback.cells != sg.cells) ok = false;
  }

  report(9, "format round-trips", ok, ok ? "100 random payloads per format" : "mismatch found");
}

}  // namespace

int main() {
  criterion_roundtrip();
  criterion_gradients();
  criterion_ratio_loss();
  criterion_desk_training();
  criterion_adhesion();
  criterion_speed();
  criterion_matching_oracle();
  criterion_center_configurations();
  criterion_format_roundtrips();

  if (g_failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
