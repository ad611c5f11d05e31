#include "cmtext/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace cmtext {

namespace {

// Trace + simplify a region outline given its bbox-local mask.
std::vector<Point> finish_contour(std::vector<std::uint8_t>& mask, int bw, int bh, int seed_x,
                                  int seed_y, int off_x, int off_y) {
  std::vector<Point> ring = detail::trace_boundary(seed_x, seed_y, mask, bw, bh);
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
    p.x += off_x;
    p.y += off_y;
  }
  return ring;
}

// Contour of one component from its runs, in grid coordinates.
std::vector<Point> runs_contour(const detail::RunSet& rs, std::size_t comp) {
  const auto& s = rs.stats[comp];
  const int bw = s.max_x - s.min_x + 1;
  const int bh = s.max_y - s.min_y + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  for (std::int32_t ri = rs.offsets[comp]; ri < rs.offsets[comp + 1]; ++ri) {
    const auto& run = rs.runs[static_cast<std::size_t>(rs.order[static_cast<std::size_t>(ri)])];
    std::uint8_t* dst = mask.data() + static_cast<std::size_t>(run.y - s.min_y) * bw;
    for (int x = run.x_begin; x < run.x_end; ++x) dst[x - s.min_x] = 1;
  }
  return finish_contour(mask, bw, bh, s.seed_x - s.min_x, s.seed_y - s.min_y, s.min_x, s.min_y);
}

// Contour of one claim region from a dense label raster.
std::vector<Point> region_contour(const std::vector<std::int32_t>& labels, int w,
                                  const detail::ComponentStats& s, std::int32_t id) {
  const int bw = s.max_x - s.min_x + 1;
  const int bh = s.max_y - s.min_y + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  for (int y = s.min_y; y <= s.max_y; ++y) {
    const std::int32_t* row = labels.data() + static_cast<std::size_t>(y) * w;
    std::uint8_t* dst = mask.data() + static_cast<std::size_t>(y - s.min_y) * bw;
    for (int x = s.min_x; x <= s.max_x; ++x) {
      if (row[x] == id) dst[x - s.min_x] = 1;
    }
  }
  return finish_contour(mask, bw, bh, s.seed_x - s.min_x, s.seed_y - s.min_y, s.min_x, s.min_y);
}

}  // namespace

std::vector<Detection> reconstruct(const SoftGrid& cm, const ReconstructConfig& cfg) {
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
    throw std::invalid_argument("threshold must be in [0,1]");
  }
  if (cfg.min_area < 1) throw std::invalid_argument("min_area must be >= 1");
  if (cfg.mu <= 0.0 || cfg.mu >= 1.0) throw std::invalid_argument("mu must be in (0,1)");

  const auto rs = detail::label_runs(cm, cfg.threshold);

  std::vector<Detection> detections;
  for (std::size_t comp = 0; comp < rs.stats.size(); ++comp) {
    const auto& s = rs.stats[comp];
    if (s.count < cfg.min_area) continue;
    try {
      TextPolygon contour(runs_contour(rs, comp));
      const Point cp = center_point(contour, 0.5);
      const double pmd = polar_min_distance(contour, cp);
      if (pmd <= 0.0) continue;
      const double d = cfg.mode == ExpansionMode::kLiteral
                           ? pmd
                           : pmd * cfg.mu / (1.0 - cfg.mu);
      auto expanded = offset_polygon(contour, d);
      if (expanded.empty()) continue;
      TextPolygon poly = expanded.front().scaled(static_cast<double>(cfg.scale));
      // An expansion that crosses the image border is clipped to it.
      const double img_w = static_cast<double>(cm.width) * cfg.scale;
      const double img_h = static_cast<double>(cm.height) * cfg.scale;
      const BBox& bb = poly.bbox();
      if (bb.min_x < 0.0 || bb.min_y < 0.0 || bb.max_x > img_w || bb.max_y > img_h) {
        poly = TextPolygon(detail::clip_to_rect(poly.vertices(), img_w, img_h), false);
      }

      double prob_sum = 0.0;
      for (std::int32_t ri = rs.offsets[comp]; ri < rs.offsets[comp + 1]; ++ri) {
        const auto& run =
            rs.runs[static_cast<std::size_t>(rs.order[static_cast<std::size_t>(ri)])];
        const double* row = cm.cells.data() + static_cast<std::size_t>(run.y) * cm.width;
        for (int x = run.x_begin; x < run.x_end; ++x) prob_sum += row[x];
      }
      detections.push_back({std::move(poly), prob_sum / static_cast<double>(s.count)});
    } catch (const std::runtime_error&) {
      // Degenerate component; skip it.
    }
  }
  return detections;
}

std::vector<Detection> pixel_expand_baseline(const BinaryGrid& kernel, const BinaryGrid& text) {
  if (!kernel.same_shape(text)) throw DimensionMismatch("kernel/text shapes differ");
  const int h = kernel.height, w = kernel.width;

  // Kernel cells outside the text mask are clipped to it.
  BinaryGrid seeds(h, w);
  for (std::size_t i = 0; i < seeds.cells.size(); ++i) {
    seeds.cells[i] = kernel.cells[i] & text.cells[i];
  }
  const auto labeled = detail::label_components(seeds);
  const std::size_t n_comp = labeled.stats.size();

  // Multi-source BFS over the text foreground; FIFO order with seeds
  // pushed by ascending component id gives smaller ids the tie wins.
  std::vector<std::int32_t> claim = labeled.labels;
  std::vector<std::int32_t> queue;
  queue.reserve(static_cast<std::size_t>(h) * w);
  for (std::size_t id = 0; id < n_comp; ++id) {
    const auto& s = labeled.stats[id];
    for (int y = s.min_y; y <= s.max_y; ++y) {
      const std::int32_t* row = labeled.labels.data() + static_cast<std::size_t>(y) * w;
      for (int x = s.min_x; x <= s.max_x; ++x) {
        if (row[x] == static_cast<std::int32_t>(id)) {
          queue.push_back(static_cast<std::int32_t>(y) * w + x);
        }
      }
    }
  }
  std::size_t head = 0;
  while (head < queue.size()) {
    const std::int32_t idx = queue[head++];
    const std::int32_t id = claim[idx];
    const int x = idx % w, y = idx / w;
    const std::int32_t nbr[4] = {idx - 1, idx + 1, idx - w, idx + w};
    const bool ok[4] = {x > 0, x + 1 < w, y > 0, y + 1 < h};
    for (int k = 0; k < 4; ++k) {
      if (!ok[k]) continue;
      const std::int32_t j = nbr[k];
      if (claim[j] < 0 && text.cells[static_cast<std::size_t>(j)]) {
        claim[j] = id;
        queue.push_back(j);
      }
    }
  }

  // Per-claim stats for contour extraction.
  std::vector<detail::ComponentStats> stats(n_comp);
  std::vector<bool> seen(n_comp, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t id = claim[static_cast<std::size_t>(y) * w + x];
      if (id < 0) continue;
      auto& s = stats[static_cast<std::size_t>(id)];
      if (!seen[static_cast<std::size_t>(id)]) {
        seen[static_cast<std::size_t>(id)] = true;
        s = {x, y, x, y, 0, x, y};
      }
      s.min_x = std::min(s.min_x, x);
      s.max_x = std::max(s.max_x, x);
      s.min_y = std::min(s.min_y, y);
      s.max_y = std::max(s.max_y, y);
      s.count += 1;
    }
  }

  std::vector<Detection> detections;
  for (std::size_t id = 0; id < n_comp; ++id) {
    if (!seen[id]) continue;
    try {
      std::vector<Point> ring =
          region_contour(claim, w, stats[id], static_cast<std::int32_t>(id));
      detections.push_back({TextPolygon(std::move(ring)), 1.0});
    } catch (const std::runtime_error&) {
      // Region too thin to contour; skip.
    }
  }
  return detections;
}

}  // namespace cmtext
