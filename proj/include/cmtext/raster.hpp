#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmtext/errors.hpp"
#include "cmtext/geometry.hpp"

namespace cmtext {

/// H x W raster of {0,1} labels. Cell (x, y) covers the unit square
/// [x, x+1) x [y, y+1); its center is (x+0.5, y+0.5).
struct BinaryGrid {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  BinaryGrid() = default;
  BinaryGrid(int h, int w) : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { cells[static_cast<std::size_t>(y) * width + x] = v; }
  std::size_t count_ones() const;
  bool same_shape(const BinaryGrid& o) const { return height == o.height && width == o.width; }
};

/// H x W raster of [0,1] probabilities.
struct SoftGrid {
  int height = 0;
  int width = 0;
  std::vector<double> cells;

  SoftGrid() = default;
  SoftGrid(int h, int w, double fill = 0.0)
      : height(h), width(w), cells(static_cast<std::size_t>(h) * w, fill) {}

  double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, double v) { cells[static_cast<std::size_t>(y) * width + x] = v; }
  bool same_shape(const SoftGrid& o) const { return height == o.height && width == o.width; }
};

SoftGrid to_soft(const BinaryGrid& g);

/// One 8-connected foreground component.
struct Component {
  int label = 0;
  std::vector<std::pair<int, int>> pixels;  // (x, y), row-major order
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

/// Scanline even-odd fill: a cell is 1 iff its center lies inside the
/// polygon. Parts outside the grid are clipped.
BinaryGrid rasterize(const TextPolygon& poly, int h, int w);

/// GAP = 1 - (M_text AND NOT M_CM) with M_text / M_CM the unions of the
/// given masks: the annulus between CM and text contours is 0,
/// everything else 1.
BinaryGrid gap_mask(const std::vector<BinaryGrid>& text_masks,
                    const std::vector<BinaryGrid>& cm_masks);
BinaryGrid gap_mask(const BinaryGrid& text_union, const BinaryGrid& cm_union);

/// 8-connected components, ordered by (min row, min col).
std::vector<Component> connected_components(const BinaryGrid& grid);

/// Outer border of the component traced along pixel edges (so a solid
/// block of cells [a,b) x [c,d) yields exactly the rectangle a..b x
/// c..d), then simplified with max-deviation tolerance 1.0 px.
TextPolygon extract_contour(const Component& c);

namespace detail {

struct ComponentStats {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  int count = 0;
  int seed_x = 0, seed_y = 0;  // first pixel in row-major order
};

/// Run-based 8-connected labeling: foreground row spans with a dense
/// component id each, components ordered by (min row, min col). The
/// hot paths consume runs directly instead of a label raster.
struct RunSet {
  struct Run {
    std::int32_t y = 0;
    std::int32_t x_begin = 0;  // inclusive
    std::int32_t x_end = 0;    // exclusive
    std::int32_t comp = 0;
  };
  int height = 0;
  int width = 0;
  std::vector<Run> runs;              // row-major order
  std::vector<ComponentStats> stats;  // per component
  std::vector<std::int32_t> order;    // run indices grouped by component
  std::vector<std::int32_t> offsets;  // per component into `order`, size n+1
};

RunSet label_runs(const BinaryGrid& grid);
/// Same labeling fused with thresholding: a cell is foreground iff
/// its probability >= threshold.
RunSet label_runs(const SoftGrid& grid, double threshold);

/// Dense per-cell labels (-1 background) materialized from a RunSet.
struct LabeledGrid {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> labels;
  std::vector<ComponentStats> stats;
};

LabeledGrid label_components(const BinaryGrid& grid);

/// Border trace + simplification over an arbitrary membership test.
/// `member(x, y)` must be safe for any coordinates; `seed` is the
/// component's first pixel in row-major order.
std::vector<Point> trace_boundary(int seed_x, int seed_y,
                                  const std::vector<std::uint8_t>& mask, int mask_w, int mask_h);

std::vector<Point> simplify_closed(const std::vector<Point>& ring, double tolerance);

}  // namespace detail

}  // namespace cmtext
