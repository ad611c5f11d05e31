#pragma once

#include <cstdint>
#include <vector>

#include "cmtext/geometry.hpp"
#include "cmtext/reconstruct.hpp"

namespace cmtext {

/// Intersection-over-union of two simple polygons via polygon clipping
/// (both triangulated, triangle pairs clipped exactly).
double polygon_iou(const TextPolygon& a, const TextPolygon& b);

struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  struct Match {
    int det = 0;
    int gt = 0;
    double iou = 0.0;
  };
  std::vector<Match> matches;
  int tp = 0, fp = 0, fn = 0;
  int ignored = 0;  // ignore-flagged ground truths
};

/// One-to-one greedy matching by descending IoU among pairs with
/// IoU >= iou_thresh. Detections matching an ignore-flagged ground
/// truth are discarded (neither tp nor fp).
EvalResult match_detections(const std::vector<Detection>& dets,
                            const std::vector<TextPolygon>& gts, double iou_thresh = 0.5);

struct BenchReport {
  int grid_size = 0;
  int instance_count = 0;
  int repeats = 0;
  double cm_min_ms = 0.0, cm_median_ms = 0.0, cm_mean_ms = 0.0;
  double baseline_min_ms = 0.0, baseline_median_ms = 0.0, baseline_mean_ms = 0.0;
  double speed_ratio = 0.0;  // baseline median / cm median
  int cm_detections = 0;
  int baseline_detections = 0;
};

/// Times reconstruct against pixel_expand_baseline on a seeded
/// synthetic scene. Single threaded; timings cover algorithm execution
/// only. Requires repeats >= 3.
BenchReport bench_reconstruct(int size, int n_instances, int repeats, std::uint64_t seed);

}  // namespace cmtext
