#include "cmtext/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace cmtext {

namespace {

constexpr double kEps = 1e-9;
constexpr double kMiterLimit = 2.0;
constexpr double kOffsetTol = 0.5;  // px

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double norm(Point p) { return std::hypot(p.x, p.y); }

// Proper or touching intersection of segments [a,b] and [c,d]. Returns
// the parameter pair (t on ab, u on cd) when they meet at a single
// point; collinear overlaps are ignored.
bool segment_intersection(Point a, Point b, Point c, Point d, double& t, double& u) {
  const double rx = b.x - a.x, ry = b.y - a.y;
  const double sx = d.x - c.x, sy = d.y - c.y;
  const double denom = rx * sy - ry * sx;
  if (std::abs(denom) < 1e-14) return false;
  const double qpx = c.x - a.x, qpy = c.y - a.y;
  t = (qpx * sy - qpy * sx) / denom;
  u = (qpx * ry - qpy * rx) / denom;
  return t >= -kEps && t <= 1.0 + kEps && u >= -kEps && u <= 1.0 + kEps;
}

bool properly_crossing(Point a, Point b, Point c, Point d) {
  double t, u;
  if (!segment_intersection(a, b, c, d, t, u)) return false;
  const double margin = 1e-9;
  return t > margin && t < 1.0 - margin && u > margin && u < 1.0 - margin;
}

BBox compute_bbox(const std::vector<Point>& pts) {
  BBox bb{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const Point& p : pts) {
    bb.min_x = std::min(bb.min_x, p.x);
    bb.min_y = std::min(bb.min_y, p.y);
    bb.max_x = std::max(bb.max_x, p.x);
    bb.max_y = std::max(bb.max_y, p.y);
  }
  return bb;
}

// Interior intervals of the vertical line x = x0, as sorted (y_lo, y_hi)
// pairs. Uses the half-open crossing rule so vertices are not counted
// twice.
std::vector<std::pair<double, double>> vertical_chords(const std::vector<Point>& pts, double x0) {
  std::vector<double> ys;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    if ((a.x <= x0) == (b.x <= x0)) continue;
    const double t = (x0 - a.x) / (b.x - a.x);
    ys.push_back(a.y + t * (b.y - a.y));
  }
  std::sort(ys.begin(), ys.end());
  std::vector<std::pair<double, double>> chords;
  for (std::size_t i = 0; i + 1 < ys.size(); i += 2) {
    chords.emplace_back(ys[i], ys[i + 1]);
  }
  return chords;
}

}  // namespace

TextPolygon::TextPolygon(std::vector<Point> vertices, bool ignore)
    : vertices_(std::move(vertices)), ignore_(ignore) {
  if (vertices_.size() < 3) {
    throw DegeneratePolygon("polygon needs at least 3 vertices");
  }
  const double sa = signed_area(vertices_);
  if (std::abs(sa) < kEps) {
    throw DegeneratePolygon("polygon has (near) zero area");
  }
  if (sa < 0) {
    std::reverse(vertices_.begin(), vertices_.end());
  }
  area_ = std::abs(sa);
  bbox_ = compute_bbox(vertices_);

  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges share a vertex
      if (properly_crossing(vertices_[i], vertices_[(i + 1) % n],
                            vertices_[j], vertices_[(j + 1) % n])) {
        throw DegeneratePolygon("polygon is self-intersecting");
      }
    }
  }
}

TextPolygon TextPolygon::translated(double dx, double dy) const {
  std::vector<Point> pts = vertices_;
  for (Point& p : pts) {
    p.x += dx;
    p.y += dy;
  }
  return TextPolygon(std::move(pts), ignore_);
}

TextPolygon TextPolygon::scaled(double factor) const {
  std::vector<Point> pts = vertices_;
  for (Point& p : pts) {
    p.x *= factor;
    p.y *= factor;
  }
  return TextPolygon(std::move(pts), ignore_);
}

double signed_area(const std::vector<Point>& ring) {
  double acc = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

double polygon_area(const TextPolygon& poly) { return poly.area(); }

bool point_in_polygon(const TextPolygon& poly, Point p) {
  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();
  // Boundary counts as inside.
  for (std::size_t i = 0; i < n; ++i) {
    if (detail::point_segment_distance(p, pts[i], pts[(i + 1) % n]) <= kEps) return true;
  }
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    if ((a.y <= p.y) == (b.y <= p.y)) continue;
    const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
    if (x_cross > p.x) inside = !inside;
  }
  return inside;
}

double distance_to_boundary(const TextPolygon& poly, Point p) {
  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, detail::point_segment_distance(p, pts[i], pts[(i + 1) % n]));
  }
  return best;
}

Point center_point(const TextPolygon& poly, double fraction) {
  const BBox& bb = poly.bbox();
  if (bb.width() <= kEps) throw DegeneratePolygon("zero-width bounding box");

  auto try_fraction = [&](double f, Point& out) -> bool {
    const double x0 = bb.min_x + f * bb.width();
    auto chords = vertical_chords(poly.vertices(), x0);
    if (chords.empty()) return false;
    // Longest interior segment wins when the line crosses more than twice.
    auto best = chords.front();
    for (const auto& c : chords) {
      if (c.second - c.first > best.second - best.first) best = c;
    }
    if (best.second - best.first <= kEps) return false;
    Point mid{x0, 0.5 * (best.first + best.second)};
    if (!point_in_polygon(poly, mid)) return false;
    out = mid;
    return true;
  };

  Point result;
  if (try_fraction(fraction, result)) return result;
  // Scan outward from the requested fraction until a chord midpoint
  // lands inside.
  for (int k = 1; k < 50; ++k) {
    const double step = 0.02 * k;
    for (double f : {fraction + step, fraction - step}) {
      if (f <= 0.0 || f >= 1.0) continue;
      if (try_fraction(f, result)) return result;
    }
  }
  throw ChordMiss("no interior chord found near requested fraction");
}

std::vector<CenterSample> sample_centers(const TextPolygon& poly, int n,
                                         std::vector<std::string>* warnings) {
  if (n < 1 || n % 2 == 0) {
    throw std::invalid_argument("center count must be odd and >= 1");
  }
  std::vector<CenterSample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double fraction = (2.0 * k - 1.0) / (2.0 * n);
    try {
      CenterSample s;
      s.point = center_point(poly, fraction);
      s.fraction = fraction;
      samples.push_back(s);
    } catch (const std::runtime_error& e) {
      if (warnings) {
        warnings->push_back("center sample at fraction " + std::to_string(fraction) +
                            " dropped: " + e.what());
      }
    }
  }
  return samples;
}

double polar_min_distance(const TextPolygon& poly, Point p) {
  if (!point_in_polygon(poly, p)) throw PointOutside("point outside polygon");
  return distance_to_boundary(poly, p);
}

std::array<double, 8> ray_distances(const TextPolygon& poly, Point p) {
  if (!point_in_polygon(poly, p)) throw PointOutside("point outside polygon");
  // up, down, left, right, left-top, right-top, left-down, right-down
  static const double kDiag = std::sqrt(0.5);
  static const std::array<Point, 8> kDirections = {{
      {0.0, -1.0}, {0.0, 1.0}, {-1.0, 0.0}, {1.0, 0.0},
      {-kDiag, -kDiag}, {kDiag, -kDiag}, {-kDiag, kDiag}, {kDiag, kDiag},
  }};

  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();
  auto cast = [&](Point dir) -> double {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = pts[i];
      const Point& b = pts[(i + 1) % n];
      const double sx = b.x - a.x, sy = b.y - a.y;
      const double denom = dir.x * sy - dir.y * sx;
      if (std::abs(denom) < 1e-14) continue;
      const double qpx = a.x - p.x, qpy = a.y - p.y;
      const double t = (qpx * sy - qpy * sx) / denom;        // distance along the ray
      const double u = (qpx * dir.y - qpy * dir.x) / denom;  // position on the edge
      if (t >= -kEps && u >= -kEps && u <= 1.0 + kEps) {
        best = std::min(best, std::max(t, 0.0));
      }
    }
    return best;
  };

  std::array<double, 8> out{};
  for (std::size_t d = 0; d < kDirections.size(); ++d) {
    double dist = cast(kDirections[d]);
    if (!std::isfinite(dist)) {
      // Grazing ray: nudge the angle once and retry.
      const double a = 1e-9;
      const Point dir = kDirections[d];
      const Point nudged{dir.x * std::cos(a) - dir.y * std::sin(a),
                         dir.x * std::sin(a) + dir.y * std::cos(a)};
      dist = cast(nudged);
      if (!std::isfinite(dist)) throw NoIntersection("ray misses the boundary");
    }
    out[d] = dist;
  }
  return out;
}

namespace detail {

double point_segment_distance(Point p, Point a, Point b) {
  const double abx = b.x - a.x, aby = b.y - a.y;
  const double len2 = abx * abx + aby * aby;
  if (len2 <= 0.0) return norm(p - a);
  double t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const Point proj{a.x + t * abx, a.y + t * aby};
  return norm(p - proj);
}

namespace {

// Quantized key so coincident points compare equal.
std::pair<long long, long long> point_key(Point p) {
  const double q = 1e6;
  return {static_cast<long long>(std::llround(p.x * q)),
          static_cast<long long>(std::llround(p.y * q))};
}

}  // namespace

std::vector<std::vector<Point>> split_into_simple_loops(const std::vector<Point>& ring) {
  const std::size_t n = ring.size();
  std::vector<std::vector<Point>> loops;
  if (n < 3) return loops;

  // Insert intersection points between non-adjacent segments. Parallel
  // overlapping segments (common on axis-aligned rings) are split at
  // each other's interior endpoints.
  std::vector<std::vector<std::pair<double, Point>>> splits(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      const Point c = ring[j];
      const Point d = ring[(j + 1) % n];
      double t, u;
      if (segment_intersection(a, b, c, d, t, u)) {
        if (t <= kEps || t >= 1.0 - kEps || u <= kEps || u >= 1.0 - kEps) continue;
        const Point ip{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        splits[i].emplace_back(t, ip);
        splits[j].emplace_back(u, ip);
        continue;
      }
      const double rx = b.x - a.x, ry = b.y - a.y;
      const double len2 = rx * rx + ry * ry;
      if (len2 < 1e-18) continue;
      const double len = std::sqrt(len2);
      if (std::abs((c.x - a.x) * ry - (c.y - a.y) * rx) > 1e-7 * len ||
          std::abs((d.x - a.x) * ry - (d.y - a.y) * rx) > 1e-7 * len) {
        continue;  // parallel but not collinear
      }
      auto split_at = [&](std::size_t seg, double inv_len2, Point p) {
        const Point sb = ring[seg];
        const Point se = ring[(seg + 1) % n];
        const double tt = ((p.x - sb.x) * (se.x - sb.x) + (p.y - sb.y) * (se.y - sb.y)) * inv_len2;
        if (tt > kEps && tt < 1.0 - kEps) splits[seg].emplace_back(tt, p);
      };
      const double sx = d.x - c.x, sy = d.y - c.y;
      const double slen2 = sx * sx + sy * sy;
      if (slen2 < 1e-18) continue;
      split_at(i, 1.0 / len2, c);
      split_at(i, 1.0 / len2, d);
      split_at(j, 1.0 / slen2, a);
      split_at(j, 1.0 / slen2, b);
    }
  }
  std::vector<Point> refined;
  refined.reserve(n + 8);
  for (std::size_t i = 0; i < n; ++i) {
    refined.push_back(ring[i]);
    std::sort(splits[i].begin(), splits[i].end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    for (const auto& [t, p] : splits[i]) refined.push_back(p);
  }

  // Walk the closed refined ring; whenever a point repeats, pop the
  // cycle between the two occurrences as one loop.
  std::vector<Point> path;
  std::map<std::pair<long long, long long>, std::size_t> seen;
  auto emit = [&](std::vector<Point> loop) {
    if (loop.size() < 3) return;
    if (std::abs(signed_area(loop)) < 1e-9) return;
    loops.push_back(std::move(loop));
  };
  for (const Point& p : refined) {
    const auto key = point_key(p);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, path.size());
      path.push_back(p);
      continue;
    }
    const std::size_t j = it->second;
    std::vector<Point> loop(path.begin() + static_cast<std::ptrdiff_t>(j), path.end());
    for (std::size_t k = j + 1; k < path.size(); ++k) seen.erase(point_key(path[k]));
    path.resize(j + 1);
    emit(std::move(loop));
  }
  emit(std::move(path));
  return loops;
}

}  // namespace detail

std::vector<Point> detail::clip_to_rect(const std::vector<Point>& pts, double w, double h) {
  auto clip_halfplane = [](const std::vector<Point>& in, auto inside,
                           auto intersect) -> std::vector<Point> {
    std::vector<Point> out;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = in[i];
      const Point& b = in[(i + 1) % n];
      const bool ia = inside(a), ib = inside(b);
      if (ia) out.push_back(a);
      if (ia != ib) out.push_back(intersect(a, b));
    }
    return out;
  };
  auto lerp_x = [](Point a, Point b, double x) -> Point {
    return {x, a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y)};
  };
  auto lerp_y = [](Point a, Point b, double y) -> Point {
    return {a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x), y};
  };

  std::vector<Point> cur = pts;
  cur = clip_halfplane(cur, [](Point p) { return p.x >= 0.0; },
                       [&](Point a, Point b) { return lerp_x(a, b, 0.0); });
  if (cur.empty()) return cur;
  cur = clip_halfplane(cur, [&](Point p) { return p.x <= w; },
                       [&](Point a, Point b) { return lerp_x(a, b, w); });
  if (cur.empty()) return cur;
  cur = clip_halfplane(cur, [](Point p) { return p.y >= 0.0; },
                       [&](Point a, Point b) { return lerp_y(a, b, 0.0); });
  if (cur.empty()) return cur;
  cur = clip_halfplane(cur, [&](Point p) { return p.y <= h; },
                       [&](Point a, Point b) { return lerp_y(a, b, h); });
  return cur;
}

namespace {

bool is_convex(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) < -1e-9) return false;
  }
  return true;
}

// Shrinking a convex polygon is exactly the intersection of its
// inward-offset half-planes; clipping is robust at any depth (chained
// edge inversions never leave artifacts).
std::vector<TextPolygon> shrink_convex(const TextPolygon& poly, double d) {
  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();
  std::vector<Point> cur = pts;
  std::vector<Point> next;
  for (std::size_t i = 0; i < n && cur.size() >= 3; ++i) {
    const Point e = pts[(i + 1) % n] - pts[i];
    const double len = norm(e);
    if (len < kEps) continue;
    const Point nrm{e.y / len, -e.x / len};  // outward
    const Point base = pts[i] + nrm * d;
    next.clear();
    const std::size_t m = cur.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Point& p = cur[k];
      const Point& q = cur[(k + 1) % m];
      const double dp = (p.x - base.x) * nrm.x + (p.y - base.y) * nrm.y;
      const double dq = (q.x - base.x) * nrm.x + (q.y - base.y) * nrm.y;
      if (dp <= 0.0) next.push_back(p);
      if ((dp < 0.0) != (dq < 0.0)) {
        const double t = dp / (dp - dq);
        next.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    cur = next;
  }
  if (cur.size() < 3 || std::abs(signed_area(cur)) < 1e-9) return {};
  try {
    return {TextPolygon(std::move(cur), poly.ignore())};
  } catch (const DegeneratePolygon&) {
    return {};
  }
}

}  // namespace

std::vector<TextPolygon> offset_polygon(const TextPolygon& poly, double d) {
  if (!std::isfinite(d)) throw std::invalid_argument("offset distance must be finite");
  if (std::abs(d) < 1e-12) return {poly};
  if (d < 0.0 && is_convex(poly.vertices())) return shrink_convex(poly, d);

  const auto& pts = poly.vertices();
  const std::size_t n = pts.size();

  // Outward unit normal of each edge (interior lies to the left of a
  // CCW edge).
  std::vector<Point> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = pts[(i + 1) % n] - pts[i];
    const double len = norm(e);
    if (len < kEps) {
      normals[i] = (i > 0) ? normals[i - 1] : Point{0.0, 0.0};
      continue;
    }
    normals[i] = {e.y / len, -e.x / len};
  }

  std::vector<Point> ring;
  ring.reserve(n + 4);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const Point a0 = pts[prev] + normals[prev] * d;
    const Point a1 = pts[i] + normals[prev] * d;
    const Point b0 = pts[i] + normals[i] * d;
    const Point b1 = pts[(i + 1) % n] + normals[i] * d;

    const double rx = a1.x - a0.x, ry = a1.y - a0.y;
    const double sx = b1.x - b0.x, sy = b1.y - b0.y;
    const double denom = rx * sy - ry * sx;
    if (std::abs(denom) < 1e-12) {
      ring.push_back(b0);
      continue;
    }
    const double t = ((b0.x - a0.x) * sy - (b0.y - a0.y) * sx) / denom;
    const Point miter{a0.x + t * rx, a0.y + t * ry};

    const double turn = cross(pts[prev], pts[i], pts[(i + 1) % n]);
    const bool outward_corner = (turn > 0.0) == (d > 0.0);
    if (!outward_corner) {
      ring.push_back(miter);
      continue;
    }
    if (norm(miter - pts[i]) <= kMiterLimit * std::abs(d)) {
      ring.push_back(miter);
    } else {
      ring.push_back(a1);
      ring.push_back(b0);
    }
  }

  auto loops = detail::split_into_simple_loops(ring);

  // Drop vertices that do not sit at |d| from the source boundary:
  // they are either shadowed joins (a short edge's offset lies inside
  // the dilation of its neighbours, with no crossing to fix it) or
  // remnants of inverted rings. A fully inverted ring (e.g. a collapsed
  // square, which comes back point-reflected and keeps its orientation)
  // loses every vertex and vanishes.
  std::vector<TextPolygon> result;
  for (auto& loop : loops) {
    if (signed_area(loop) <= 0.0) continue;  // input is CCW-normalized
    std::vector<Point> kept;
    kept.reserve(loop.size());
    for (const Point& p : loop) {
      if (distance_to_boundary(poly, p) < std::abs(d) - kOffsetTol) continue;
      if (d < 0.0 && !point_in_polygon(poly, p)) continue;
      if (d > 0.0 && point_in_polygon(poly, p)) continue;
      kept.push_back(p);
    }
    if (kept.size() < 3 || signed_area(kept) <= 1e-9) continue;
    try {
      result.emplace_back(std::move(kept), poly.ignore());
    } catch (const DegeneratePolygon&) {
      // Sliver loop; drop it.
    }
  }

  if (d > 0.0 && result.size() > 1) {
    // Outward offset keeps only the outer loop.
    auto outer = std::max_element(result.begin(), result.end(),
                                  [](const TextPolygon& a, const TextPolygon& b) {
                                    return a.area() < b.area();
                                  });
    TextPolygon keep = *outer;
    result.clear();
    result.push_back(std::move(keep));
  }
  return result;
}

}  // namespace cmtext
