#include "cmtext/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cmtext {

namespace {

constexpr double kPi = 3.14159265358979323846;

int round_down_mult4(int v) { return v - (v % 4); }

}  // namespace

TextPolygon make_rect(double x0, double y0, double x1, double y1, bool ignore) {
  return TextPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, ignore);
}

TextPolygon make_rotated_rect(Point center, double width, double height, double angle_rad) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  const double hw = 0.5 * width, hh = 0.5 * height;
  std::vector<Point> pts;
  for (const auto& [dx, dy] : {std::pair{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}) {
    pts.push_back({center.x + dx * c - dy * s, center.y + dx * s + dy * c});
  }
  return TextPolygon(std::move(pts));
}

TextPolygon make_annular_sector(Point center, double r_inner, double r_outer,
                                double angle_begin, double angle_end, int arc_samples) {
  if (r_inner <= 0.0 || r_outer <= r_inner) {
    throw std::invalid_argument("annular sector needs 0 < r_inner < r_outer");
  }
  if (arc_samples < 2) throw std::invalid_argument("need at least 2 arc samples");
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(2 * arc_samples));
  for (int i = 0; i < arc_samples; ++i) {
    const double a =
        angle_begin + (angle_end - angle_begin) * i / static_cast<double>(arc_samples - 1);
    pts.push_back({center.x + r_outer * std::cos(a), center.y + r_outer * std::sin(a)});
  }
  for (int i = arc_samples - 1; i >= 0; --i) {
    const double a =
        angle_begin + (angle_end - angle_begin) * i / static_cast<double>(arc_samples - 1);
    pts.push_back({center.x + r_inner * std::cos(a), center.y + r_inner * std::sin(a)});
  }
  return TextPolygon(std::move(pts));
}

Scene synth_scene(const SynthConfig& cfg) {
  if (cfg.width < 64 || cfg.height < 64) {
    throw std::invalid_argument("scene must be at least 64x64");
  }
  std::mt19937_64 rng(cfg.seed);
  Scene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;

  const int total = cfg.n_rects + cfg.n_rotated + cfg.n_arcs;
  if (total == 0) return scene;

  // One shape per block of a jittered grid keeps instances disjoint.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(total))));
  const int rows = (total + cols - 1) / cols;
  const double bw = (cfg.width - 2.0 * cfg.margin) / cols;
  const double bh = (cfg.height - 2.0 * cfg.margin) / rows;

  std::vector<int> kinds;
  kinds.insert(kinds.end(), static_cast<std::size_t>(cfg.n_rects), 0);
  kinds.insert(kinds.end(), static_cast<std::size_t>(cfg.n_rotated), 1);
  kinds.insert(kinds.end(), static_cast<std::size_t>(cfg.n_arcs), 2);
  std::shuffle(kinds.begin(), kinds.end(), rng);

  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  for (int i = 0; i < total; ++i) {
    const int col = i % cols, row = i / cols;
    const double x_lo = cfg.margin + col * bw + cfg.min_gap / 2;
    const double y_lo = cfg.margin + row * bh + cfg.min_gap / 2;
    const double avail_w = bw - cfg.min_gap;
    const double avail_h = bh - cfg.min_gap;
    if (avail_w < 24.0 || avail_h < 16.0) continue;

    switch (kinds[static_cast<std::size_t>(i)]) {
      case 0: {
        // Integer corners, short side a multiple of 4.
        const int max_h = round_down_mult4(std::min(static_cast<int>(avail_h), 120));
        if (max_h < 12) break;
        std::uniform_int_distribution<int> hd(3, max_h / 4);
        const int rh = 4 * hd(rng);
        const int max_w = std::min(static_cast<int>(avail_w), 400);
        if (max_w < rh) break;
        std::uniform_int_distribution<int> wd(rh / 4, round_down_mult4(max_w) / 4);
        const int rw = 4 * wd(rng);
        std::uniform_int_distribution<int> xd(0, std::max(0, static_cast<int>(avail_w) - rw));
        std::uniform_int_distribution<int> yd(0, std::max(0, static_cast<int>(avail_h) - rh));
        const int x0 = static_cast<int>(std::ceil(x_lo)) + xd(rng);
        const int y0 = static_cast<int>(std::ceil(y_lo)) + yd(rng);
        scene.instances.push_back(make_rect(x0, y0, x0 + rw, y0 + rh));
        break;
      }
      case 1: {
        const double radius_cap = 0.5 * std::min(avail_w, avail_h);
        const double rw = uni(0.8 * radius_cap, 1.6 * radius_cap);
        const double rh = uni(0.45 * rw, 0.85 * rw);
        const double half_diag = 0.5 * std::hypot(rw, rh);
        if (half_diag > radius_cap) {
          const double shrink = radius_cap / half_diag;
          scene.instances.push_back(make_rotated_rect(
              {x_lo + avail_w / 2, y_lo + avail_h / 2}, rw * shrink, rh * shrink,
              uni(-kPi / 3, kPi / 3)));
        } else {
          scene.instances.push_back(make_rotated_rect(
              {x_lo + avail_w / 2, y_lo + avail_h / 2}, rw, rh, uni(-kPi / 3, kPi / 3)));
        }
        break;
      }
      case 2: {
        const double r_outer_cap = 0.5 * std::min(avail_w, avail_h);
        if (r_outer_cap < 28.0) break;
        const double r_outer = uni(0.8 * r_outer_cap, r_outer_cap);
        const double thickness = uni(std::min(20.0, r_outer - 8.0), std::min(48.0, r_outer - 6.0));
        const double r_inner = r_outer - thickness;
        if (r_inner < 4.0) break;
        const double start = uni(0.0, 2.0 * kPi);
        const double span = uni(kPi * 0.55, kPi * 1.1);
        scene.instances.push_back(make_annular_sector(
            {x_lo + avail_w / 2, y_lo + avail_h / 2}, r_inner, r_outer, start, start + span));
        break;
      }
      default:
        break;
    }
  }
  return scene;
}

Scene bench_scene(int size, int n_instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scene scene;
  scene.width = size;
  scene.height = size;

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_instances))));
  const int rows = (n_instances + cols - 1) / cols;
  const int bw = size / cols;
  const int bh = size / rows;
  const int margin = 8;

  for (int i = 0; i < n_instances; ++i) {
    const int col = i % cols, row = i / cols;
    std::uniform_int_distribution<int> jitter(-3, 3);
    const int x0 = col * bw + margin + jitter(rng) + 3;
    const int y0 = row * bh + margin + jitter(rng) + 3;
    const int w = round_down_mult4(bw - 2 * margin - 8);
    const int h = round_down_mult4(bh - 2 * margin - 8);
    if (w < 16 || h < 16) throw std::invalid_argument("bench grid too small for instance count");
    scene.instances.push_back(make_rect(x0, y0, x0 + w, y0 + h));
  }
  return scene;
}

}  // namespace cmtext
