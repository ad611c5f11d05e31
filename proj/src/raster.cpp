#include "cmtext/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cmtext {

std::size_t BinaryGrid::count_ones() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

SoftGrid to_soft(const BinaryGrid& g) {
  SoftGrid s(g.height, g.width);
  for (std::size_t i = 0; i < g.cells.size(); ++i) s.cells[i] = g.cells[i] ? 1.0 : 0.0;
  return s;
}

BinaryGrid rasterize(const TextPolygon& poly, int h, int w) {
  if (h < 1 || w < 1) throw std::invalid_argument("grid dimensions must be >= 1");
  BinaryGrid grid(h, w);
  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();
  const BBox& bb = poly.bbox();

  const int y_begin = std::max(0, static_cast<int>(std::floor(bb.min_y - 0.5)));
  const int y_end = std::min(h - 1, static_cast<int>(std::ceil(bb.max_y)));

  std::vector<double> xs;
  for (int y = y_begin; y <= y_end; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = pts[i];
      const Point& b = pts[(i + 1) % n];
      if ((a.y <= yc) == (b.y <= yc)) continue;
      xs.push_back(a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    std::uint8_t* row = grid.cells.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Cell center x+0.5 in [xs[i], xs[i+1])
      int x0 = static_cast<int>(std::ceil(xs[i] - 0.5));
      int x1 = static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1;
      x0 = std::max(x0, 0);
      x1 = std::min(x1, w - 1);
      for (int x = x0; x <= x1; ++x) row[x] = 1;
    }
  }
  return grid;
}

BinaryGrid gap_mask(const BinaryGrid& text_union, const BinaryGrid& cm_union) {
  if (!text_union.same_shape(cm_union)) throw DimensionMismatch("text/CM mask shapes differ");
  BinaryGrid gap(text_union.height, text_union.width);
  for (std::size_t i = 0; i < gap.cells.size(); ++i) {
    gap.cells[i] = (text_union.cells[i] && !cm_union.cells[i]) ? 0 : 1;
  }
  return gap;
}

BinaryGrid gap_mask(const std::vector<BinaryGrid>& text_masks,
                    const std::vector<BinaryGrid>& cm_masks) {
  if (text_masks.empty() && cm_masks.empty()) {
    throw DimensionMismatch("gap_mask needs at least one mask to infer dimensions");
  }
  const BinaryGrid& ref = text_masks.empty() ? cm_masks.front() : text_masks.front();
  BinaryGrid text_union(ref.height, ref.width);
  BinaryGrid cm_union(ref.height, ref.width);
  for (const auto& m : text_masks) {
    if (!m.same_shape(ref)) throw DimensionMismatch("text mask shapes differ");
    for (std::size_t i = 0; i < m.cells.size(); ++i) text_union.cells[i] |= m.cells[i];
  }
  for (const auto& m : cm_masks) {
    if (!m.same_shape(ref)) throw DimensionMismatch("CM mask shapes differ");
    for (std::size_t i = 0; i < m.cells.size(); ++i) cm_union.cells[i] |= m.cells[i];
  }
  return gap_mask(text_union, cm_union);
}

namespace detail {

namespace {

struct RunFind {
  std::vector<std::int32_t> parent;
  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Core run labeling; NextSpan(row_index, x) returns the next foreground
// span start at or after x, or width when the row is done.
template <typename SpanScanner>
RunSet label_runs_impl(int height, int width, SpanScanner&& scan_row) {
  RunSet out;
  out.height = height;
  out.width = width;

  RunFind uf;
  auto& runs = out.runs;
  std::size_t prev_begin = 0, prev_end = 0;

  for (int y = 0; y < height; ++y) {
    const std::size_t row_begin = runs.size();
    scan_row(y, [&](int xs, int xe) {
      runs.push_back({y, xs, xe, uf.make()});
    });
    // 8-connectivity: link to previous-row runs overlapping
    // [x_begin - 1, x_end].
    std::size_t p = prev_begin;
    for (std::size_t r = row_begin; r < runs.size(); ++r) {
      while (p < prev_end && runs[p].x_end < runs[r].x_begin) ++p;
      for (std::size_t q = p; q < prev_end && runs[q].x_begin <= runs[r].x_end; ++q) {
        uf.unite(runs[r].comp, runs[q].comp);
      }
    }
    prev_begin = row_begin;
    prev_end = runs.size();
  }

  // Per-root stats; runs are row-major, so the first run of a root is
  // its row-major seed.
  std::vector<std::int32_t> root_to_comp(uf.parent.size(), -1);
  std::vector<ComponentStats> stats;
  for (auto& run : runs) {
    const std::int32_t root = uf.find(run.comp);
    std::int32_t comp = root_to_comp[root];
    if (comp < 0) {
      comp = static_cast<std::int32_t>(stats.size());
      root_to_comp[root] = comp;
      stats.push_back({run.x_begin, run.y, run.x_end - 1, run.y, 0, run.x_begin, run.y});
    }
    run.comp = comp;
    auto& s = stats[static_cast<std::size_t>(comp)];
    s.min_x = std::min(s.min_x, run.x_begin);
    s.max_x = std::max(s.max_x, run.x_end - 1);
    s.min_y = std::min(s.min_y, run.y);
    s.max_y = std::max(s.max_y, run.y);
    s.count += run.x_end - run.x_begin;
  }

  // Components ordered by (min row, min col).
  std::vector<std::int32_t> by_position(stats.size());
  std::iota(by_position.begin(), by_position.end(), 0);
  std::sort(by_position.begin(), by_position.end(), [&](std::int32_t a, std::int32_t b) {
    const auto& sa = stats[static_cast<std::size_t>(a)];
    const auto& sb = stats[static_cast<std::size_t>(b)];
    if (sa.min_y != sb.min_y) return sa.min_y < sb.min_y;
    return sa.min_x < sb.min_x;
  });
  std::vector<std::int32_t> rank(stats.size());
  for (std::size_t i = 0; i < by_position.size(); ++i) {
    rank[static_cast<std::size_t>(by_position[i])] = static_cast<std::int32_t>(i);
  }
  out.stats.resize(stats.size());
  for (std::size_t i = 0; i < by_position.size(); ++i) {
    out.stats[i] = stats[static_cast<std::size_t>(by_position[i])];
  }
  for (auto& run : runs) run.comp = rank[static_cast<std::size_t>(run.comp)];

  // Counting sort of run indices by component (stable, keeps row-major
  // order inside each component).
  out.offsets.assign(stats.size() + 1, 0);
  for (const auto& run : runs) out.offsets[static_cast<std::size_t>(run.comp) + 1]++;
  for (std::size_t i = 1; i < out.offsets.size(); ++i) out.offsets[i] += out.offsets[i - 1];
  out.order.resize(runs.size());
  std::vector<std::int32_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.order[static_cast<std::size_t>(
        cursor[static_cast<std::size_t>(runs[r].comp)]++)] = static_cast<std::int32_t>(r);
  }
  return out;
}

}  // namespace

RunSet label_runs(const BinaryGrid& grid) {
  return label_runs_impl(grid.height, grid.width, [&](int y, auto&& emit) {
    const std::uint8_t* row = grid.cells.data() + static_cast<std::size_t>(y) * grid.width;
    int x = 0;
    while (x < grid.width) {
      if (!row[x]) {
        ++x;
        continue;
      }
      int xe = x + 1;
      while (xe < grid.width && row[xe]) ++xe;
      emit(x, xe);
      x = xe;
    }
  });
}

RunSet label_runs(const SoftGrid& grid, double threshold) {
  return label_runs_impl(grid.height, grid.width, [&](int y, auto&& emit) {
    const double* row = grid.cells.data() + static_cast<std::size_t>(y) * grid.width;
    int x = 0;
    while (x < grid.width) {
      if (row[x] < threshold) {
        ++x;
        continue;
      }
      int xe = x + 1;
      while (xe < grid.width && row[xe] >= threshold) ++xe;
      emit(x, xe);
      x = xe;
    }
  });
}

LabeledGrid label_components(const BinaryGrid& grid) {
  const RunSet rs = label_runs(grid);
  LabeledGrid out;
  out.height = grid.height;
  out.width = grid.width;
  out.labels.assign(grid.cells.size(), -1);
  out.stats = rs.stats;
  for (const auto& run : rs.runs) {
    std::int32_t* dst = out.labels.data() + static_cast<std::size_t>(run.y) * grid.width;
    for (int x = run.x_begin; x < run.x_end; ++x) dst[x] = run.comp;
  }
  return out;
}

std::vector<Point> trace_boundary(int seed_x, int seed_y,
                                  const std::vector<std::uint8_t>& mask, int mask_w, int mask_h) {
  auto fg = [&](int x, int y) -> bool {
    return x >= 0 && y >= 0 && x < mask_w && y < mask_h &&
           mask[static_cast<std::size_t>(y) * mask_w + x];
  };
  // Directions: R, D, L, U. LA/RA are the pixel offsets ahead-left and
  // ahead-right of the current corner; foreground stays on the right.
  static const int kDx[4] = {1, 0, -1, 0};
  static const int kDy[4] = {0, 1, 0, -1};
  static const int kLax[4] = {0, 0, -1, -1};
  static const int kLay[4] = {-1, 0, 0, -1};
  static const int kRax[4] = {0, -1, -1, 0};
  static const int kRay[4] = {0, 0, -1, -1};

  auto rule = [&](int cx, int cy, int dir) -> int {
    if (fg(cx + kLax[dir], cy + kLay[dir])) return (dir + 3) % 4;  // turn left
    if (fg(cx + kRax[dir], cy + kRay[dir])) return dir;            // straight
    return (dir + 1) % 4;                                          // turn right
  };

  int cx = seed_x, cy = seed_y;
  int dir = rule(cx, cy, 0);
  const int start_x = cx, start_y = cy, start_dir = dir;

  std::vector<Point> ring;
  ring.push_back({static_cast<double>(cx), static_cast<double>(cy)});
  const long guard = 4L * (mask_w + 2) * (mask_h + 2) + 8;
  for (long it = 0; it < guard; ++it) {
    cx += kDx[dir];
    cy += kDy[dir];
    const int next = rule(cx, cy, dir);
    if (cx == start_x && cy == start_y && next == start_dir) return ring;
    if (next != dir) ring.push_back({static_cast<double>(cx), static_cast<double>(cy)});
    dir = next;
  }
  throw std::logic_error("boundary trace did not close");
}

namespace {

void dp_chain(const std::vector<Point>& pts, std::size_t lo, std::size_t hi, double tol,
              std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t worst_i = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double dev = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (dev > worst) {
      worst = dev;
      worst_i = i;
    }
  }
  if (worst < tol - 1e-9) return;
  keep[worst_i] = 1;
  dp_chain(pts, lo, worst_i, tol, keep);
  dp_chain(pts, worst_i, hi, tol, keep);
}

}  // namespace

std::vector<Point> simplify_closed(const std::vector<Point>& ring, double tolerance) {
  const std::size_t n = ring.size();
  if (n <= 4) return ring;

  // Anchor at the lexicographically smallest vertex and the vertex
  // farthest from it, then run Douglas-Peucker on the two open chains.
  std::size_t a = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (ring[i].x < ring[a].x || (ring[i].x == ring[a].x && ring[i].y < ring[a].y)) a = i;
  }
  std::size_t b = a;
  double far2 = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = ring[i].x - ring[a].x, dy = ring[i].y - ring[a].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 > far2) {
      far2 = d2;
      b = i;
    }
  }
  if (a == b) return ring;

  std::vector<Point> rot;
  rot.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) rot.push_back(ring[(a + i) % n]);
  rot.push_back(ring[a]);  // close
  const std::size_t mid = (b + n - a) % n;

  std::vector<char> keep(rot.size(), 0);
  keep.front() = keep[mid] = keep.back() = 1;
  dp_chain(rot, 0, mid, tolerance, keep);
  dp_chain(rot, mid, rot.size() - 1, tolerance, keep);

  std::vector<Point> out;
  for (std::size_t i = 0; i + 1 < rot.size(); ++i) {
    if (keep[i]) out.push_back(rot[i]);
  }
  return out;
}

}  // namespace detail

std::vector<Component> connected_components(const BinaryGrid& grid) {
  const auto rs = detail::label_runs(grid);
  std::vector<Component> comps(rs.stats.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& s = rs.stats[i];
    comps[i].label = static_cast<int>(i);
    comps[i].min_x = s.min_x;
    comps[i].min_y = s.min_y;
    comps[i].max_x = s.max_x;
    comps[i].max_y = s.max_y;
    comps[i].pixels.reserve(static_cast<std::size_t>(s.count));
    for (std::int32_t ri = rs.offsets[i]; ri < rs.offsets[i + 1]; ++ri) {
      const auto& run = rs.runs[static_cast<std::size_t>(rs.order[static_cast<std::size_t>(ri)])];
      for (int x = run.x_begin; x < run.x_end; ++x) comps[i].pixels.emplace_back(x, run.y);
    }
  }
  return comps;
}

TextPolygon extract_contour(const Component& c) {
  if (c.pixels.size() < 4) throw TooSmall("component has fewer than 4 pixels");

  const int bw = c.max_x - c.min_x + 1;
  const int bh = c.max_y - c.min_y + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  for (const auto& [px, py] : c.pixels) {
    mask[static_cast<std::size_t>(py - c.min_y) * bw + (px - c.min_x)] = 1;
  }
  const int seed_x = c.pixels.front().first - c.min_x;
  const int seed_y = c.pixels.front().second - c.min_y;

  std::vector<Point> ring = detail::trace_boundary(seed_x, seed_y, mask, bw, bh);

  // A diagonal pinch makes the outline touch itself at a lattice
  // corner; keep the dominant loop.
  auto loops = detail::split_into_simple_loops(ring);
  if (!loops.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < loops.size(); ++i) {
      if (std::abs(signed_area(loops[i])) > std::abs(signed_area(loops[best]))) best = i;
    }
    ring = std::move(loops[best]);
  }

  ring = detail::simplify_closed(ring, 1.0);
  for (Point& p : ring) {
    p.x += c.min_x;
    p.y += c.min_y;
  }
  try {
    return TextPolygon(std::move(ring));
  } catch (const DegeneratePolygon& e) {
    throw TooSmall(std::string("contour degenerate: ") + e.what());
  }
}

}  // namespace cmtext
