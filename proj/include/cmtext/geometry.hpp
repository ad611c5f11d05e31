#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cmtext/errors.hpp"

namespace cmtext {

// Image coordinate frame throughout: origin top-left, y grows downward,
// "up" means decreasing y. Orientation is algebraic: CCW == positive
// shoelace area of the raw coordinates.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }

struct BBox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

/// An ordered simple polygon in pixel coordinates representing one text
/// instance boundary. Vertices are normalized to CCW on construction;
/// construction rejects <3 vertices, zero area and self-intersections.
class TextPolygon {
 public:
  explicit TextPolygon(std::vector<Point> vertices, bool ignore = false);

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool ignore() const { return ignore_; }
  const BBox& bbox() const { return bbox_; }
  double area() const { return area_; }

  TextPolygon translated(double dx, double dy) const;
  TextPolygon scaled(double factor) const;

 private:
  std::vector<Point> vertices_;
  BBox bbox_;
  double area_ = 0.0;
  bool ignore_ = false;
};

/// One sampled center point with its regression targets. Ray distance
/// order is fixed: up, down, left, right, left-top, right-top,
/// left-down, right-down.
struct CenterSample {
  Point point;
  double fraction = 0.0;       // position along the bbox width, in (0,1)
  double pmd = 0.0;            // pixels, filled by callers
  std::array<double, 8> ray_distances{};  // pixels, filled by callers
};

double signed_area(const std::vector<Point>& ring);
double polygon_area(const TextPolygon& poly);

/// Even-odd containment; points on the boundary count as inside.
bool point_in_polygon(const TextPolygon& poly, Point p);

/// Minimum distance from p to the polygon boundary (point-to-segment
/// over all edges). 0 for boundary points.
double distance_to_boundary(const TextPolygon& poly, Point p);

/// Midpoint of the vertical chord at x = bbox_min_x + fraction * width.
/// When the vertical line crosses the boundary more than twice, the
/// longest interior chord segment wins; if its midpoint is not interior
/// the fraction is scanned outward in 0.02 steps.
Point center_point(const TextPolygon& poly, double fraction);

/// n chord midpoints at fractions (2k-1)/(2n), k = 1..n, left to right.
/// Samples whose chord fails are dropped and reported via `warnings`.
/// Only point/fraction are filled; pmd and ray distances are left to
/// the caller.
std::vector<CenterSample> sample_centers(const TextPolygon& poly, int n,
                                         std::vector<std::string>* warnings = nullptr);

/// Minimum Euclidean distance from an interior point to the boundary.
double polar_min_distance(const TextPolygon& poly, Point p);

/// Distances from an interior point to the boundary along the 8 fixed
/// directions (see CenterSample for the order).
std::array<double, 8> ray_distances(const TextPolygon& poly, Point p);

/// Signed parallel offset: d < 0 shrinks, d > 0 expands. Per-edge
/// translation along outward normals with miter joins (limit 2.0,
/// beveled beyond), self-intersections resolved into simple loops.
/// Shrinking may split or vanish (empty result); expansion returns one
/// polygon.
std::vector<TextPolygon> offset_polygon(const TextPolygon& poly, double d);

namespace detail {

/// Splits a closed ring at self-intersections and repeated vertices
/// into simple loops. Loops smaller than 3 points or with near-zero
/// area are discarded.
std::vector<std::vector<Point>> split_into_simple_loops(const std::vector<Point>& ring);

double point_segment_distance(Point p, Point a, Point b);

/// Sutherland-Hodgman clip against [0,w] x [0,h].
std::vector<Point> clip_to_rect(const std::vector<Point>& pts, double w, double h);

}  // namespace detail

}  // namespace cmtext
