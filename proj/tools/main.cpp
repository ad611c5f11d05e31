#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmtext/eval.hpp"
#include "cmtext/io.hpp"
#include "cmtext/labels.hpp"
#include "cmtext/losses.hpp"
#include "cmtext/reconstruct.hpp"
#include "cmtext/synth.hpp"
#include "cmtext/trainer.hpp"

namespace fs = std::filesystem;
using namespace cmtext;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct SharedFlags {
  double mu = 0.5;
  int centers = 5;
  int scale = 4;
  double threshold = 0.5;
  int min_area = 16;
  double l1 = 0.25, l2 = 0.25, l3 = 0.25, l4 = 0.25;
  std::uint64_t seed = 0;
};

std::vector<TextPolygon> instances_from_record(const AnnotationRecord& record,
                                               std::vector<std::string>* drops) {
  std::vector<TextPolygon> out;
  for (std::size_t i = 0; i < record.instances.size(); ++i) {
    try {
      out.emplace_back(record.instances[i].points, record.instances[i].ignore);
    } catch (const std::runtime_error& e) {
      if (drops) {
        drops->push_back(record.image + ": instance " + std::to_string(i) +
                         " dropped: " + e.what());
      }
    }
  }
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_ndjson_annotations(in);
}

template <typename Fn>
void write_to(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  fn(out);
}

// PGM overlay: background 0, text 90, gap annulus 170, CM 255.
void write_overlay(const fs::path& path, const LabelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << bundle.cm.width << ' ' << bundle.cm.height << "\n255\n";
  for (std::size_t i = 0; i < bundle.cm.cells.size(); ++i) {
    unsigned char v = 0;
    if (bundle.cm.cells[i]) {
      v = 255;
    } else if (bundle.text.cells[i]) {
      v = 170;
    } else if (!bundle.gap.cells[i]) {
      v = 90;
    }
    out.put(static_cast<char>(v));
  }
}

int cmd_labelgen(const std::string& input, const std::string& out_dir, const SharedFlags& flags,
                 bool dump_overlay) {
  const auto records = load_annotations(input);
  fs::create_directories(out_dir);

  LabelConfig lc;
  lc.mu = flags.mu;
  lc.n_centers = flags.centers;
  lc.scale = flags.scale;

  std::vector<LabelRecord> label_records;
  for (const auto& record : records) {
    std::vector<std::string> drops;
    const auto instances = instances_from_record(record, &drops);
    for (const auto& d : drops) std::cerr << "warning: " << d << '\n';
    LabelBundle bundle = generate_labels(instances, record.height, record.width, lc);
    for (const auto& w : bundle.warnings) {
      std::cerr << "warning: " << record.image << ": " << w << '\n';
    }

    write_to(fs::path(out_dir) / (record.image + "_cm.pgm"),
             [&](std::ostream& o) { write_pgm(o, bundle.cm); });
    write_to(fs::path(out_dir) / (record.image + "_gap.pgm"),
             [&](std::ostream& o) { write_pgm(o, bundle.gap); });
    if (dump_overlay) {
      write_overlay(fs::path(out_dir) / (record.image + "_overlay.pgm"), bundle);
    }

    LabelRecord lr;
    lr.image = record.image;
    lr.mu = flags.mu;
    lr.scale = flags.scale;
    for (const auto& inst : bundle.instances) {
      LabelInstanceRecord ir;
      ir.pmd = inst.pmd_text;
      ir.ignore = inst.ignore;
      for (const auto& c : inst.centers) {
        CenterRecord cr;
        cr.x = c.point.x;
        cr.y = c.point.y;
        cr.pmd = c.pmd;
        cr.rd = c.ray_distances;
        ir.centers.push_back(cr);
      }
      lr.instances.push_back(std::move(ir));
    }
    label_records.push_back(std::move(lr));
  }

  write_to(fs::path(out_dir) / "labels.ndjson",
           [&](std::ostream& o) { write_ndjson_labels(o, label_records); });
  std::cout << "wrote labels for " << label_records.size() << " image(s) to " << out_dir << '\n';
  return kExitOk;
}

int cmd_reconstruct(const std::string& mask_dir, const std::string& out_path,
                    const SharedFlags& flags, const std::string& mode) {
  ReconstructConfig rc;
  rc.threshold = flags.threshold;
  rc.min_area = flags.min_area;
  rc.mu = flags.mu;
  rc.scale = flags.scale;
  rc.mode = mode == "mu_corrected" ? ExpansionMode::kMuCorrected : ExpansionMode::kLiteral;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(mask_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".sm" && ext != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    // labelgen drops GAP masks and overlays next to the CM masks.
    if (stem.ends_with("_gap") || stem.ends_with("_overlay")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError("no CM masks (.sm or .pgm) in " + mask_dir);

  std::vector<DetectionRecord> records;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    SoftGrid cm;
    if (file.extension() == ".sm") {
      cm = read_softmask(in);
    } else {
      cm = to_soft(read_pgm(in));
    }
    std::string image = file.stem().string();
    if (image.size() > 3 && image.ends_with("_cm")) image.resize(image.size() - 3);

    DetectionRecord rec;
    rec.image = image;
    for (const auto& det : reconstruct(cm, rc)) {
      rec.detections.push_back({det.polygon.vertices(), det.score});
    }
    records.push_back(std::move(rec));
  }
  write_to(out_path, [&](std::ostream& o) { write_ndjson_detections(o, records); });
  std::cout << "wrote detections for " << records.size() << " image(s) to " << out_path << '\n';
  return kExitOk;
}

int cmd_evaluate(const std::string& dets_path, const std::string& gt_path, double iou,
                 const std::string& out_json) {
  const auto gt_records = load_annotations(gt_path);
  std::ifstream din(dets_path);
  if (!din) throw ParseError("cannot open " + dets_path);
  const auto det_records = read_ndjson_detections(din);

  int tp = 0, fp = 0, fn = 0, ignored = 0;
  std::ostringstream per_image;
  per_image << "[";
  bool first = true;
  for (const auto& gt_record : gt_records) {
    const auto gts = instances_from_record(gt_record, nullptr);
    std::vector<Detection> dets;
    for (const auto& dr : det_records) {
      if (dr.image != gt_record.image) continue;
      for (const auto& d : dr.detections) {
        try {
          dets.push_back({TextPolygon(d.points), d.score});
        } catch (const std::runtime_error&) {
          // Degenerate detection polygons count as misses, not crashes.
        }
      }
    }
    EvalResult r = match_detections(dets, gts, iou);
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    ignored += r.ignored;
    if (!first) per_image << ",";
    first = false;
    per_image << "{\"image\":\"" << gt_record.image << "\",\"tp\":" << r.tp
              << ",\"fp\":" << r.fp << ",\"fn\":" << r.fn << "}";
  }
  per_image << "]";

  const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double f = (precision + recall) > 0.0 ? 2 * precision * recall / (precision + recall)
                                              : 0.0;
  char line[128];
  std::snprintf(line, sizeof(line), "P=%.3f R=%.3f F=%.3f", precision, recall, f);
  std::cout << line << '\n';

  if (!out_json.empty()) {
    write_to(out_json, [&](std::ostream& o) {
      o << "{\"precision\":" << precision << ",\"recall\":" << recall << ",\"f_measure\":" << f
        << ",\"tp\":" << tp << ",\"fp\":" << fp << ",\"fn\":" << fn << ",\"ignored\":" << ignored
        << ",\"iou_thresh\":" << iou << ",\"images\":" << per_image.str() << "}\n";
    });
  }
  return kExitOk;
}

int cmd_bench(int size, int instances, int repeats, std::uint64_t seed,
              const std::string& csv_path) {
  BenchReport r = bench_reconstruct(size, instances, repeats, seed);
  std::printf("grid %dx%d, %d instances, %d repeats\n", r.grid_size, r.grid_size,
              r.instance_count, r.repeats);
  std::printf("reconstruct      min %.3f ms  median %.3f ms  mean %.3f ms  (%d detections)\n",
              r.cm_min_ms, r.cm_median_ms, r.cm_mean_ms, r.cm_detections);
  std::printf("pixel_expand     min %.3f ms  median %.3f ms  mean %.3f ms  (%d detections)\n",
              r.baseline_min_ms, r.baseline_median_ms, r.baseline_mean_ms,
              r.baseline_detections);
  std::printf("speed ratio (pixel_expand / reconstruct, medians): %.2fx\n", r.speed_ratio);

  if (!csv_path.empty()) {
    write_to(csv_path, [&](std::ostream& o) {
      o << "algorithm,grid,instances,repeats,min_ms,median_ms,mean_ms\n";
      o << "reconstruct," << r.grid_size << ',' << r.instance_count << ',' << r.repeats << ','
        << r.cm_min_ms << ',' << r.cm_median_ms << ',' << r.cm_mean_ms << '\n';
      o << "pixel_expand," << r.grid_size << ',' << r.instance_count << ',' << r.repeats << ','
        << r.baseline_min_ms << ',' << r.baseline_median_ms << ',' << r.baseline_mean_ms << '\n';
    });
  }
  return kExitOk;
}

int cmd_synth(const std::string& out_path, int width, int height, int count, int rects,
              int rotated, int arcs, std::uint64_t seed) {
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < count; ++i) {
    SynthConfig sc;
    sc.width = width;
    sc.height = height;
    sc.n_rects = rects;
    sc.n_rotated = rotated;
    sc.n_arcs = arcs;
    sc.seed = seed + static_cast<std::uint64_t>(i);
    Scene scene = synth_scene(sc);

    AnnotationRecord record;
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", i);
    record.image = name;
    record.width = width;
    record.height = height;
    for (const auto& inst : scene.instances) {
      AnnotationInstance ai;
      ai.points = inst.vertices();
      ai.ignore = inst.ignore();
      record.instances.push_back(std::move(ai));
    }
    records.push_back(std::move(record));
  }
  write_to(out_path, [&](std::ostream& o) { write_ndjson_annotations(o, records); });
  std::cout << "wrote " << records.size() << " scene(s) to " << out_path << '\n';
  return kExitOk;
}

int cmd_train_desk(const std::string& input, const std::string& image, int steps, double lr,
                   const SharedFlags& flags, const std::string& trace_path,
                   const std::string& dump_cm, const std::string& dump_gap) {
  const auto records = load_annotations(input);
  const AnnotationRecord* record = nullptr;
  for (const auto& r : records) {
    if (image.empty() || r.image == image) {
      record = &r;
      break;
    }
  }
  if (!record) throw ParseError("image not found in " + input);

  LabelConfig lc;
  lc.mu = flags.mu;
  lc.n_centers = flags.centers;
  lc.scale = flags.scale;
  const auto instances = instances_from_record(*record, nullptr);
  LabelBundle labels = generate_labels(instances, record->height, record->width, lc);

  LossWeights weights{flags.l1, flags.l2, flags.l3, flags.l4};
  FitReport report = fit_direct(labels, steps, lr, flags.seed, weights);

  std::printf("image %s: %d steps in %.1f ms\n", record->image.c_str(), steps, report.wall_ms);
  std::printf("final: l_cm=%.6f l_gap=%.6f l_pmd=%.6f l_rd=%.6f total=%.6f\n",
              report.final_report.l_cm, report.final_report.l_gap, report.final_report.l_pmd,
              report.final_report.l_rd, report.final_report.total);

  if (!trace_path.empty()) {
    write_to(trace_path, [&](std::ostream& o) {
      o << "step,l_cm,l_gap,l_pmd,l_rd,total\n";
      for (std::size_t i = 0; i < report.trace.size(); ++i) {
        const TraceEntry& t = report.trace[i];
        char row[160];
        std::snprintf(row, sizeof(row), "%zu,%.9f,%.9f,%.9f,%.9f,%.9f\n", i, t.l_cm, t.l_gap,
                      t.l_pmd, t.l_rd, t.total);
        o << row;
      }
    });
  }
  if (!dump_cm.empty()) {
    write_to(dump_cm, [&](std::ostream& o) { write_softmask(o, report.final_prediction.cm); });
  }
  if (!dump_gap.empty()) {
    write_to(dump_gap, [&](std::ostream& o) { write_softmask(o, report.final_prediction.gap); });
  }
  return kExitOk;
}

int cmd_gradcheck(int scenes, int size, double h, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < scenes; ++s) {
    std::uniform_int_distribution<int> margin(1, 3);
    const int m = margin(rng);
    std::uniform_int_distribution<int> extent(size / 2, size - 2 * m - 1);
    const int w = extent(rng), hgt = extent(rng);
    std::vector<TextPolygon> instances = {
        make_rect(m, m, m + std::max(8, w), m + std::max(6, hgt))};

    LabelConfig lc;
    lc.scale = 1;
    lc.n_centers = 3;
    LabelBundle labels = generate_labels(instances, size, size, lc);
    ParamState state = ParamState::init(labels, seed + static_cast<std::uint64_t>(s) + 1);
    worst = std::max(worst, grad_check(labels, state, h));
  }
  std::printf("max relative gradient error over %d scene(s): %.3e\n", scenes, worst);
  return worst <= tol ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Center-mask text representation toolkit"};
  app.require_subcommand(1);

  SharedFlags flags;

  // labelgen
  auto* labelgen = app.add_subcommand("labelgen", "Generate CM/GAP/PMD/RD labels from annotations");
  std::string lg_input, lg_out = "labels";
  bool lg_overlay = false;
  labelgen->add_option("--input", lg_input, "Annotation NDJSON file")->required();
  labelgen->add_option("--out", lg_out, "Output directory")->capture_default_str();
  labelgen->add_option("--mu", flags.mu, "Shrink factor in (0,1)")->capture_default_str();
  labelgen->add_option("--centers", flags.centers, "Center samples per instance (1/3/5/7)")
      ->check(CLI::IsMember({1, 3, 5, 7}))
      ->capture_default_str();
  labelgen->add_option("--scale", flags.scale, "Label downsample factor (1 or 4)")
      ->check(CLI::IsMember({1, 4}))
      ->capture_default_str();
  labelgen->add_flag("--dump-overlay", lg_overlay, "Also write PGM overlays");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Convert CM probability masks into detections");
  std::string rc_masks, rc_out = "detections.ndjson", rc_mode = "literal";
  rec->add_option("--masks", rc_masks, "Directory of .sm/.pgm CM masks")->required();
  rec->add_option("--out", rc_out, "Output detection NDJSON")->capture_default_str();
  rec->add_option("--threshold", flags.threshold, "Binarization threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  rec->add_option("--min-area", flags.min_area, "Minimum component area in cells")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  rec->add_option("--mu", flags.mu, "Shrink factor used for the labels")->capture_default_str();
  rec->add_option("--scale", flags.scale, "Upsample factor back to image scale")
      ->check(CLI::Range(1, 64))
      ->capture_default_str();
  rec->add_option("--mode", rc_mode, "Expansion mode")
      ->check(CLI::IsMember({"literal", "mu_corrected"}))
      ->capture_default_str();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score detections against ground truth");
  std::string ev_dets, ev_gt, ev_out;
  double ev_iou = 0.5;
  ev->add_option("--dets", ev_dets, "Detection NDJSON")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth annotation NDJSON")->required();
  ev->add_option("--iou", ev_iou, "IoU matching threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ev->add_option("--out", ev_out, "Write the full result as JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Time reconstruct against pixel expansion");
  int b_size = 640, b_instances = 10, b_repeats = 100;
  std::string b_csv;
  bench->add_option("--size", b_size, "Grid side length")->check(CLI::Range(64, 1 << 14))
      ->capture_default_str();
  bench->add_option("--instances", b_instances, "Instance count")->check(CLI::Range(1, 4096))
      ->capture_default_str();
  bench->add_option("--repeats", b_repeats, "Timing repeats (>= 3)")->check(CLI::Range(3, 1 << 20))
      ->capture_default_str();
  bench->add_option("--seed", flags.seed, "Scene seed")->capture_default_str();
  bench->add_option("--csv", b_csv, "Write timings as CSV");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic annotation scenes");
  std::string sy_out = "scenes.ndjson";
  int sy_w = 640, sy_h = 640, sy_count = 1, sy_rects = 4, sy_rot = 3, sy_arcs = 2;
  synth->add_option("--out", sy_out, "Output annotation NDJSON")->capture_default_str();
  synth->add_option("--width", sy_w, "Scene width")->check(CLI::Range(64, 1 << 14))
      ->capture_default_str();
  synth->add_option("--height", sy_h, "Scene height")->check(CLI::Range(64, 1 << 14))
      ->capture_default_str();
  synth->add_option("--count", sy_count, "Number of scenes")->check(CLI::Range(1, 100000))
      ->capture_default_str();
  synth->add_option("--rects", sy_rects, "Axis-aligned rectangles per scene")
      ->check(CLI::Range(0, 1024))->capture_default_str();
  synth->add_option("--rotated", sy_rot, "Rotated rectangles per scene")
      ->check(CLI::Range(0, 1024))->capture_default_str();
  synth->add_option("--arcs", sy_arcs, "Annular sectors per scene")
      ->check(CLI::Range(0, 1024))->capture_default_str();
  synth->add_option("--seed", flags.seed, "Base seed")->capture_default_str();

  // train-desk
  auto* train = app.add_subcommand("train-desk", "Optimize free predictions against the loss");
  std::string tr_input, tr_image, tr_trace, tr_dump_cm, tr_dump_gap;
  int tr_steps = 500;
  double tr_lr = 0.5;
  train->add_option("--input", tr_input, "Annotation NDJSON file")->required();
  train->add_option("--image", tr_image, "Image id (defaults to the first record)");
  train->add_option("--steps", tr_steps, "Gradient steps")->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();
  train->add_option("--lr", tr_lr, "Learning rate")->check(CLI::Range(1e-9, 1e12))
      ->capture_default_str();
  train->add_option("--mu", flags.mu, "Shrink factor")->capture_default_str();
  train->add_option("--centers", flags.centers, "Center samples (1/3/5/7)")
      ->check(CLI::IsMember({1, 3, 5, 7}))->capture_default_str();
  train->add_option("--scale", flags.scale, "Label downsample factor (1 or 4)")
      ->check(CLI::IsMember({1, 4}))->capture_default_str();
  train->add_option("--lambda1", flags.l1, "CM loss weight")->capture_default_str();
  train->add_option("--lambda2", flags.l2, "GAP loss weight")->capture_default_str();
  train->add_option("--lambda3", flags.l3, "PMD loss weight")->capture_default_str();
  train->add_option("--lambda4", flags.l4, "RD loss weight")->capture_default_str();
  train->add_option("--seed", flags.seed, "Init seed")->capture_default_str();
  train->add_option("--trace", tr_trace, "Write per-step loss CSV");
  train->add_option("--dump-cm", tr_dump_cm, "Write final CM prediction as soft mask");
  train->add_option("--dump-gap", tr_dump_gap, "Write final GAP prediction as soft mask");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
  int gc_scenes = 20, gc_size = 16;
  double gc_h = 1e-4, gc_tol = 1e-4;
  gc->add_option("--scenes", gc_scenes, "Random scenes")->check(CLI::Range(1, 10000))
      ->capture_default_str();
  gc->add_option("--size", gc_size, "Scene side length")->check(CLI::Range(8, 256))
      ->capture_default_str();
  gc->add_option("--step", gc_h, "Finite-difference step")->check(CLI::Range(1e-6, 1e-3))
      ->capture_default_str();
  gc->add_option("--tol", gc_tol, "Pass threshold on the max relative error")
      ->capture_default_str();
  gc->add_option("--seed", flags.seed, "Scene seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  // Shared flag validation beyond what CLI11 ranges cover.
  if (flags.mu <= 0.0 || flags.mu >= 1.0) {
    std::cerr << "error: --mu must be in (0,1)\n";
    return kExitUsage;
  }
  if (flags.l1 < 0 || flags.l2 < 0 || flags.l3 < 0 || flags.l4 < 0) {
    std::cerr << "error: loss weights must be non-negative\n";
    return kExitUsage;
  }

  try {
    if (labelgen->parsed()) return cmd_labelgen(lg_input, lg_out, flags, lg_overlay);
    if (rec->parsed()) return cmd_reconstruct(rc_masks, rc_out, flags, rc_mode);
    if (ev->parsed()) return cmd_evaluate(ev_dets, ev_gt, ev_iou, ev_out);
    if (bench->parsed()) return cmd_bench(b_size, b_instances, b_repeats, flags.seed, b_csv);
    if (synth->parsed()) {
      return cmd_synth(sy_out, sy_w, sy_h, sy_count, sy_rects, sy_rot, sy_arcs, flags.seed);
    }
    if (train->parsed()) {
      return cmd_train_desk(tr_input, tr_image, tr_steps, tr_lr, flags, tr_trace, tr_dump_cm,
                            tr_dump_gap);
    }
    if (gc->parsed()) return cmd_gradcheck(gc_scenes, gc_size, gc_h, flags.seed, gc_tol);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
