#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "robinlab/error.hpp"

namespace robinlab {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

inline constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

inline double segment_distance(Point p, Point a, Point b) {
  const Point d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * d);
}

inline double signed_area(const std::vector<Point>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

inline double perimeter(const std::vector<Point>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += distance(poly[i], poly[(i + 1) % poly.size()]);
  return s;
}

inline bool point_in_polygon(const std::vector<Point>& poly, Point p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

inline double polygon_boundary_distance(const std::vector<Point>& poly, Point p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) d = std::min(d, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

inline bool segments_cross(Point a, Point b, Point c, Point d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

inline bool polygon_is_simple(const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (poly[i] == poly[(i + 1) % n]) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// Distance from `c` to the boundary of a polygon star-shaped about `c`, along direction `phi`.
inline double ray_polygon_radius(const std::vector<Point>& poly, Point c, double phi) {
  const Point d{std::cos(phi), std::sin(phi)};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point a = poly[i] - c, b = poly[(i + 1) % poly.size()] - c;
    const Point e = b - a;
    const double den = cross(d, e);
    if (std::abs(den) < 1e-300) continue;
    const double t = cross(a, e) / den;
    const double s = cross(a, d) / den;
    if (t >= 0.0 && s >= -1e-14 && s <= 1.0 + 1e-14) best = std::min(best, t);
  }
  return best;
}

enum class OuterKind { Rectangle, Disk, Polygon };

struct OuterDomain {
  OuterKind kind = OuterKind::Polygon;
  std::vector<Point> vertices;  // counterclockwise; empty for Disk
  Point center{};               // Disk only
  double radius = 0.0;          // Disk only

  static OuterDomain rectangle(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0) || !(y1 > y0)) fail(ErrorCode::InvalidGeometry, "rectangle must have positive extent");
    return {OuterKind::Rectangle, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, {}, 0.0};
  }

  static OuterDomain unit_square() { return rectangle(0.0, 0.0, 1.0, 1.0); }

  static OuterDomain disk(Point c, double r) {
    if (!(r > 0.0)) fail(ErrorCode::InvalidGeometry, "disk radius must be positive");
    return {OuterKind::Disk, {}, c, r};
  }

  static OuterDomain polygon(std::vector<Point> v) {
    if (!polygon_is_simple(v)) fail(ErrorCode::InvalidGeometry, "outer polygon is not simple");
    if (signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
    return {OuterKind::Polygon, std::move(v), {}, 0.0};
  }

  double area() const {
    if (kind == OuterKind::Disk) return std::numbers::pi * radius * radius;
    return signed_area(vertices);
  }

  double boundary_length() const {
    if (kind == OuterKind::Disk) return 2.0 * std::numbers::pi * radius;
    return perimeter(vertices);
  }

  bool contains(Point p) const {
    if (kind == OuterKind::Disk) return distance(p, center) < radius;
    return point_in_polygon(vertices, p);
  }

  double boundary_distance(Point p) const {
    if (kind == OuterKind::Disk) return std::abs(radius - distance(p, center));
    return polygon_boundary_distance(vertices, p);
  }

  /// Closest point on the analytic boundary.
  Point project(Point p) const {
    if (kind == OuterKind::Disk) {
      const Point d = p - center;
      const double r = norm(d);
      return r > 0.0 ? center + (radius / r) * d : center + Point{radius, 0.0};
    }
    Point best = vertices.front();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Point a = vertices[i], b = vertices[(i + 1) % vertices.size()];
      const Point e = b - a;
      const double t = std::clamp(dot(p - a, e) / dot(e, e), 0.0, 1.0);
      const Point q = a + t * e;
      if (const double d = distance(p, q); d < bd) bd = d, best = q;
    }
    return best;
  }

  /// Bounding box as {min, max}.
  std::pair<Point, Point> bounds() const {
    if (kind == OuterKind::Disk) return {center - Point{radius, radius}, center + Point{radius, radius}};
    Point lo = vertices.front(), hi = vertices.front();
    for (const Point& v : vertices) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    return {lo, hi};
  }
};

enum class HoleShape { Disk, Square, Polygon };

struct HoleSpec {
  HoleShape shape = HoleShape::Disk;
  Point center{};
  double epsilon = 0.0;
  std::vector<Point> reference;  // Polygon only: convex, counterclockwise, inside the unit ball

  static HoleSpec disk(Point c, double eps) { return {HoleShape::Disk, c, eps, {}}; }
  static HoleSpec square(Point c, double eps) { return {HoleShape::Square, c, eps, {}}; }
  static HoleSpec polygon(Point c, double eps, std::vector<Point> ref) {
    return {HoleShape::Polygon, c, eps, std::move(ref)};
  }

  /// Vertices of the reference shape K at scale 1 (empty for Disk).
  std::vector<Point> reference_vertices() const {
    if (shape == HoleShape::Square) {
      const double a = 0.5 / std::numbers::sqrt2;
      return {{-a, -a}, {a, -a}, {a, a}, {-a, a}};
    }
    if (shape == HoleShape::Polygon) return reference;
    return {};
  }

  /// Vertices of K_eps = eps*K + x0 (empty for Disk).
  std::vector<Point> scaled_vertices() const {
    std::vector<Point> v = reference_vertices();
    for (Point& p : v) p = center + epsilon * p;
    return v;
  }

  double boundary_length() const {
    if (shape == HoleShape::Disk) return 2.0 * std::numbers::pi * epsilon;
    return perimeter(scaled_vertices());
  }

  double area() const {
    if (shape == HoleShape::Disk) return std::numbers::pi * epsilon * epsilon;
    return signed_area(scaled_vertices());
  }

  /// Distance from the center to the boundary of K_eps along direction phi.
  double radial_extent(double phi) const {
    if (shape == HoleShape::Disk) return epsilon;
    return ray_polygon_radius(scaled_vertices(), center, phi);
  }

  bool contains(Point p) const {
    if (shape == HoleShape::Disk) return distance(p, center) < epsilon;
    return point_in_polygon(scaled_vertices(), p);
  }

  /// Closest point on the boundary of K_eps.
  Point project(Point p) const {
    if (shape == HoleShape::Disk) {
      const Point d = p - center;
      const double r = norm(d);
      return r > 0.0 ? center + (epsilon / r) * d : center + Point{epsilon, 0.0};
    }
    OuterDomain tmp{OuterKind::Polygon, scaled_vertices(), {}, 0.0};
    return tmp.project(p);
  }
};

inline void validate(const HoleSpec& hole) {
  if (!(hole.epsilon > 0.0)) fail(ErrorCode::DegenerateHole, "hole radius must be positive");
  if (hole.shape != HoleShape::Polygon) return;
  const auto& r = hole.reference;
  if (r.size() < 3) fail(ErrorCode::InvalidGeometry, "hole polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (norm(r[i]) >= 1.0) fail(ErrorCode::InvalidGeometry, "hole polygon must lie inside the unit ball");
    const Point a = r[i], b = r[(i + 1) % r.size()], c = r[(i + 2) % r.size()];
    if (cross(b - a, c - b) <= 0.0) fail(ErrorCode::InvalidGeometry, "hole polygon must be convex and counterclockwise");
    if (cross(b - a, Point{} - a) <= 0.0) fail(ErrorCode::InvalidGeometry, "hole polygon must contain the origin");
  }
}

struct PuncturedDomain {
  OuterDomain outer;
  HoleSpec hole;
  double clearance = 0.0;  // dist(closure(B_eps), boundary of outer)

  double area() const { return outer.area() - hole.area(); }
};

inline constexpr double kClearanceGuard = 1e-9;

inline PuncturedDomain make_punctured(const OuterDomain& outer, const HoleSpec& hole) {
  validate(hole);
  if (!outer.contains(hole.center)) fail(ErrorCode::HoleTouchesBoundary, "hole center is not inside the outer domain");
  const double clearance = outer.boundary_distance(hole.center) - hole.epsilon;
  if (clearance <= kClearanceGuard) fail(ErrorCode::HoleTouchesBoundary, "closed ball around the hole meets the outer boundary");
  return {outer, hole, clearance};
}

struct BoundarySample {
  Point point;
  Point tangent;  // unit, counterclockwise about the hole center
  double speed;   // |d point / d t| for the natural parameter t
  double s;       // arc length from the first sample
};

struct HoleParameterization {
  std::vector<BoundarySample> samples;
  double length = 0.0;  // exact boundary length

  double chord_length() const {
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
      s += distance(samples[i].point, samples[(i + 1) % samples.size()].point);
    return s;
  }
};

/// Samples of the hole boundary: `n` equal arcs for a disk, `n` points per edge for a polygon.
inline HoleParameterization hole_boundary_parameterization(const HoleSpec& hole, std::size_t n) {
  validate(hole);
  if (n < 1) n = 1;
  HoleParameterization out;
  out.length = hole.boundary_length();
  if (hole.shape == HoleShape::Disk) {
    if (n < 3) n = 3;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      out.samples.push_back({hole.center + hole.epsilon * Point{std::cos(t), std::sin(t)},
                             {-std::sin(t), std::cos(t)}, hole.epsilon, hole.epsilon * t});
    }
    return out;
  }
  const auto v = hole.scaled_vertices();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i], b = v[(i + 1) % v.size()];
    const double len = distance(a, b);
    const Point t = (1.0 / len) * (b - a);
    for (std::size_t k = 0; k < n; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(n);
      out.samples.push_back({a + f * (b - a), t, len, s + f * len});
    }
    s += len;
  }
  return out;
}

struct ProbeCircle {
  Point center;
  double radius = 0.0;
  std::vector<double> angles;
  std::vector<Point> points;
};

/// Uniform angular samples of the circle of radius `radius` about the hole center, for radius in (eps, 2 eps).
inline ProbeCircle annulus_probe_circle(const PuncturedDomain& domain, double epsilon, double radius,
                                        std::size_t n = 256) {
  if (!(radius > epsilon && radius < 2.0 * epsilon))
    fail(ErrorCode::RadiusOutOfRange, "probe radius must lie in (eps, 2 eps)");
  if (domain.outer.boundary_distance(domain.hole.center) <= radius)
    fail(ErrorCode::RadiusOutOfRange, "probe circle leaves the outer domain");
  ProbeCircle c{domain.hole.center, radius, {}, {}};
  c.angles.reserve(n);
  c.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    c.angles.push_back(t);
    c.points.push_back(c.center + radius * Point{std::cos(t), std::sin(t)});
  }
  return c;
}

}  // namespace robinlab
