#pragma once

#include <cstdint>
#include <vector>

#include "cmtext/geometry.hpp"

namespace cmtext {

/// Shape builders for synthetic scenes.
TextPolygon make_rect(double x0, double y0, double x1, double y1, bool ignore = false);
TextPolygon make_rotated_rect(Point center, double width, double height, double angle_rad);

/// An annular sector (circular-arc band): outer arc, radial edge, inner
/// arc, radial edge. Curved-text stand-in; non-convex.
TextPolygon make_annular_sector(Point center, double r_inner, double r_outer,
                                double angle_begin, double angle_end, int arc_samples = 16);

struct SynthConfig {
  int width = 640;
  int height = 640;
  int n_rects = 4;
  int n_rotated = 3;
  int n_arcs = 2;
  std::uint64_t seed = 0;
  double margin = 8.0;     // min distance to the image border
  double min_gap = 8.0;    // min bbox gap between instances
};

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<TextPolygon> instances;
};

/// Seeded, deterministic scene of non-overlapping instances. Rectangles
/// get integer corners with the short side a multiple of 4, which keeps
/// the half-PMD inset on cell boundaries.
Scene synth_scene(const SynthConfig& cfg);

/// Large text-like rectangles on a jittered block grid; the input for
/// the reconstruction speed benchmark.
Scene bench_scene(int size, int n_instances, std::uint64_t seed);

}  // namespace cmtext
