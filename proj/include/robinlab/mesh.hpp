#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "robinlab/delaunay.hpp"
#include "robinlab/error.hpp"
#include "robinlab/geometry.hpp"

namespace robinlab {

enum class EdgeTag { Outer, Hole };

inline constexpr std::string_view to_string(EdgeTag t) { return t == EdgeTag::Outer ? "OUTER" : "HOLE"; }

struct BoundaryEdge {
  int i = 0;
  int j = 0;  // (i, j) runs counterclockwise with respect to the adjacent triangle
  EdgeTag tag = EdgeTag::Outer;
};

struct Circle {
  Point center;
  double radius = 0.0;
};

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<char> in_hole;                 // per triangle, filled meshes only
  std::vector<BoundaryEdge> interface_edges;  // hole boundary inside a filled mesh
  std::optional<Circle> outer_circle;
  std::optional<Circle> hole_circle;
  double h_max = 0.0;
  double min_angle_deg = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  bool is_filled() const { return !in_hole.empty(); }
};

/// A punctured mesh of the domain minus the hole and a filled mesh of the whole domain that
/// extends it: punctured vertices and triangles come first, in the same order, in the filled mesh.
struct MatchedMesh {
  TriMesh punctured;
  TriMesh filled;
};

inline double triangle_area(const TriMesh& m, std::size_t t) {
  const auto& T = m.triangles[t];
  return 0.5 * cross(m.vertices[T[1]] - m.vertices[T[0]], m.vertices[T[2]] - m.vertices[T[0]]);
}

inline double min_angle_deg(Point a, Point b, Point c) {
  auto ang = [](Point p, Point q, Point r) {
    const Point u = q - p, v = r - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)}) * 180.0 / std::numbers::pi;
}

inline void update_stats(TriMesh& m) {
  m.h_max = 0.0;
  m.min_angle_deg = 180.0;
  for (const auto& T : m.triangles) {
    const Point a = m.vertices[T[0]], b = m.vertices[T[1]], c = m.vertices[T[2]];
    m.h_max = std::max({m.h_max, distance(a, b), distance(b, c), distance(c, a)});
    m.min_angle_deg = std::min(m.min_angle_deg, min_angle_deg(a, b, c));
  }
}

struct EdgeLength {
  int i = 0;
  int j = 0;
  double length = 0.0;
};

inline std::vector<EdgeLength> boundary_edges(const TriMesh& m, EdgeTag tag) {
  std::vector<EdgeLength> out;
  for (const auto& e : m.boundary_edges)
    if (e.tag == tag) out.push_back({e.i, e.j, distance(m.vertices[e.i], m.vertices[e.j])});
  return out;
}

inline double total_length(const std::vector<EdgeLength>& edges) {
  double s = 0.0;
  for (const auto& e : edges) s += e.length;
  return s;
}

/// Edges of the hole boundary: HOLE boundary edges of a punctured mesh or interface edges of a filled one.
inline const std::vector<BoundaryEdge>& hole_edges_of(const TriMesh& m, std::vector<BoundaryEdge>& scratch) {
  if (m.is_filled()) return m.interface_edges;
  scratch.clear();
  for (const auto& e : m.boundary_edges)
    if (e.tag == EdgeTag::Hole) scratch.push_back(e);
  return scratch;
}

inline std::size_t count_edges(const TriMesh& m) {
  std::set<std::pair<int, int>> e;
  for (const auto& T : m.triangles)
    for (int k = 0; k < 3; ++k) e.insert(std::minmax(T[k], T[(k + 1) % 3]));
  return e.size();
}

inline long euler_characteristic(const TriMesh& m) {
  return static_cast<long>(m.vertices.size()) - static_cast<long>(count_edges(m)) +
         static_cast<long>(m.triangles.size());
}

/// Number of closed loops formed by boundary edges with the given tag.
inline std::size_t boundary_components(const TriMesh& m, EdgeTag tag) {
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& e : m.boundary_edges)
    if (e.tag == tag) adj[e.i].push_back(e.j), adj[e.j].push_back(e.i);
  std::set<int> seen;
  std::size_t comps = 0;
  for (const auto& [v, _] : adj) {
    if (seen.count(v)) continue;
    ++comps;
    std::vector<int> stack{v};
    seen.insert(v);
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y : adj[x])
        if (seen.insert(y).second) stack.push_back(y);
    }
  }
  return comps;
}

struct ValidationReport {
  bool positive_areas = true;
  bool edge_incidence = true;  // boundary edges on one triangle, interior edges on two
  bool boundary_matches = true;
  long euler = 0;
  std::size_t outer_loops = 0;
  std::size_t hole_loops = 0;
  double max_outer_offset = 0.0;  // distance of OUTER endpoints from the analytic boundary
  double max_hole_offset = 0.0;

  bool ok() const { return positive_areas && edge_incidence && boundary_matches; }
};

inline ValidationReport validate(const TriMesh& m, const PuncturedDomain* domain = nullptr) {
  ValidationReport r;
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (!(triangle_area(m, t) > 0.0)) r.positive_areas = false;
  std::map<std::pair<int, int>, int> count;
  for (const auto& T : m.triangles)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(T[k], T[(k + 1) % 3])];
  std::set<std::pair<int, int>> tagged;
  for (const auto& e : m.boundary_edges) tagged.insert(std::minmax(e.i, e.j));
  for (const auto& [e, c] : count) {
    if (c > 2) r.edge_incidence = false;
    if ((c == 1) != (tagged.count(e) == 1)) r.boundary_matches = false;
  }
  for (const auto& e : tagged)
    if (!count.count(e)) r.boundary_matches = false;
  r.euler = euler_characteristic(m);
  r.outer_loops = boundary_components(m, EdgeTag::Outer);
  r.hole_loops = boundary_components(m, EdgeTag::Hole);
  if (domain) {
    for (const auto& e : m.boundary_edges)
      for (int v : {e.i, e.j}) {
        const Point p = m.vertices[v];
        if (e.tag == EdgeTag::Outer)
          r.max_outer_offset = std::max(r.max_outer_offset, distance(p, domain->outer.project(p)));
        else
          r.max_hole_offset = std::max(r.max_hole_offset, distance(p, domain->hole.project(p)));
      }
  }
  return r;
}

struct MeshOptions {
  double h_target = 0.05;
  double grading = 1.0;        // far-field size over near-hole size
  double grade_rate = 0.3;     // growth of the size field away from the hole
  double min_angle_deg = 25.0;  // refinement target
  double required_angle_deg = 20.0;
};

inline double default_grading(double h_target, double epsilon) { return std::max(1.0, h_target / (epsilon / 4.0)); }

namespace detail {

inline std::vector<Point> circle_polygon(Point c, double r, std::size_t n) {
  std::vector<Point> out;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    out.push_back(c + r * Point{std::cos(t), std::sin(t)});
  }
  return out;
}

struct Loop {
  std::vector<Point> points;
  SegmentKind kind;
  std::optional<Circle> circle;
};

inline std::vector<Point> subdivide(const std::vector<Point>& poly, double h) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point a = poly[i], b = poly[(i + 1) % poly.size()];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(distance(a, b) / h - 1e-9)));
    for (std::size_t k = 0; k < n; ++k) out.push_back(a + (static_cast<double>(k) / static_cast<double>(n)) * (b - a));
  }
  return out;
}

/// Triangulates the loops and returns the raw refiner result.
inline Refiner run_refiner(const std::vector<Loop>& loops, Point lo, Point hi, const Refiner::SizeField& h,
                           const MeshOptions& opt, double area_estimate, double h_min) {
  Refiner R(lo, hi);
  const auto cap = static_cast<std::size_t>(40.0 * area_estimate / (h_min * h_min)) + 200000;
  for (const Loop& L : loops) {
    const int curve = L.circle ? R.add_curve({true, L.circle->center, L.circle->radius}) : -1;
    std::vector<int> ids;
    for (const Point& p : L.points) ids.push_back(R.insert_point(p));
    for (std::size_t i = 0; i < ids.size(); ++i) R.add_segment(ids[i], ids[(i + 1) % ids.size()], L.kind, curve);
  }
  R.recover_segments(cap);
  R.classify_regions();
  const double ratio = 1.0 / (2.0 * std::sin(opt.min_angle_deg * std::numbers::pi / 180.0));
  R.refine(ratio, h, cap);
  R.classify_regions();
  return R;
}

inline MatchedMesh extract_matched(const Refiner& R, const std::optional<Circle>& outer_circle,
                                   const std::optional<Circle>& hole_circle) {
  const auto& tris = R.triangles();
  const auto& pts = R.points();
  std::vector<int> punct, hole;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!tris[t].alive) continue;
    if (tris[t].region == 1) punct.push_back(static_cast<int>(t));
    else if (tris[t].region == 2) hole.push_back(static_cast<int>(t));
  }
  std::vector<int> map(pts.size(), -1);
  std::vector<Point> verts;
  auto take = [&](const std::vector<int>& list) {
    std::vector<char> used(pts.size(), 0);
    for (int t : list)
      for (int v : tris[t].v) used[v] = 1;
    for (std::size_t v = 0; v < pts.size(); ++v)
      if (used[v] && map[v] < 0) {
        map[v] = static_cast<int>(verts.size());
        verts.push_back(pts[v]);
      }
  };
  take(punct);
  const std::size_t n_punct = verts.size();
  take(hole);

  MatchedMesh mm;
  TriMesh& P = mm.punctured;
  TriMesh& F = mm.filled;
  F.vertices = verts;
  P.vertices.assign(verts.begin(), verts.begin() + static_cast<long>(n_punct));
  for (int t : punct) {
    const auto& v = tris[t].v;
    P.triangles.push_back({map[v[0]], map[v[1]], map[v[2]]});
  }
  F.triangles = P.triangles;
  for (int t : hole) {
    const auto& v = tris[t].v;
    F.triangles.push_back({map[v[0]], map[v[1]], map[v[2]]});
  }
  F.in_hole.assign(F.triangles.size(), 0);
  std::fill(F.in_hole.begin() + static_cast<long>(P.triangles.size()), F.in_hole.end(), 1);

  // Boundary edges oriented as in the adjacent punctured triangle.
  for (int t : punct) {
    const auto& T = tris[t];
    for (int k = 0; k < 3; ++k) {
      const int a = T.v[(k + 1) % 3], b = T.v[(k + 2) % 3];
      const int nb = T.n[k];
      const int nreg = nb < 0 ? 0 : tris[nb].region;
      if (nreg == 1) continue;
      const BoundaryEdge e{map[a], map[b], nreg == 0 ? EdgeTag::Outer : EdgeTag::Hole};
      P.boundary_edges.push_back(e);
      if (e.tag == EdgeTag::Outer) F.boundary_edges.push_back(e);
      else F.interface_edges.push_back(e);
    }
  }
  for (int t : hole) {
    const auto& T = tris[t];
    for (int k = 0; k < 3; ++k) {
      const int nb = T.n[k];
      if (nb < 0 || tris[nb].region == 0)
        F.boundary_edges.push_back({map[T.v[(k + 1) % 3]], map[T.v[(k + 2) % 3]], EdgeTag::Outer});
    }
  }
  P.outer_circle = F.outer_circle = outer_circle;
  P.hole_circle = F.hole_circle = hole_circle;
  update_stats(P);
  update_stats(F);
  return mm;
}

inline std::optional<Circle> outer_circle_of(const OuterDomain& o) {
  if (o.kind == OuterKind::Disk) return Circle{o.center, o.radius};
  return std::nullopt;
}

inline std::vector<Point> outer_loop(const OuterDomain& o, double h_far) {
  if (o.kind == OuterKind::Disk) {
    const auto n = static_cast<std::size_t>(std::max(16.0, std::ceil(2.0 * std::numbers::pi * o.radius / h_far)));
    return circle_polygon(o.center, o.radius, n);
  }
  return subdivide(o.vertices, h_far);
}

inline void check_quality(const TriMesh& m, const MeshOptions& opt) {
  if (m.triangles.empty()) fail(ErrorCode::MeshFailure, "empty triangulation");
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    if (!(triangle_area(m, t) > 0.0)) fail(ErrorCode::MeshFailure, "inverted triangle");
  if (m.min_angle_deg < opt.required_angle_deg)
    fail(ErrorCode::MeshFailure, "minimum angle " + std::to_string(m.min_angle_deg) + " below requirement");
}

}  // namespace detail

/// Size field used for a punctured domain: h_target far away, h_target/grading near the hole.
inline detail::Refiner::SizeField hole_size_field(const PuncturedDomain& d, double h_target, double grading,
                                          double grade_rate) {
  const double h_near = h_target / grading;
  const Point c = d.hole.center;
  const double eps = d.hole.epsilon;
  return [=](Point p) { return std::min(h_target, h_near + grade_rate * std::max(0.0, distance(p, c) - eps)); };
}

/// Matched punctured/filled meshes of a domain with a hole.
inline MatchedMesh triangulate_matched(const PuncturedDomain& d, const MeshOptions& opt) {
  if (!(opt.h_target > 0.0)) fail(ErrorCode::MeshFailure, "mesh size must be positive");
  if (!(opt.grading >= 1.0)) fail(ErrorCode::MeshFailure, "grading must be at least 1");
  const double h_near = opt.h_target / opt.grading;
  const double eps = d.hole.epsilon;
  if (h_near > eps) fail(ErrorCode::MeshFailure, "near-hole mesh size exceeds the hole radius");

  std::vector<detail::Loop> loops;
  loops.push_back({detail::outer_loop(d.outer, opt.h_target), detail::SegmentKind::Outer, detail::outer_circle_of(d.outer)});
  std::optional<Circle> hole_circle;
  if (d.hole.shape == HoleShape::Disk) {
    const auto n = static_cast<std::size_t>(std::max(8.0, std::ceil(2.0 * std::numbers::pi * eps / h_near)));
    hole_circle = Circle{d.hole.center, eps};
    loops.push_back({detail::circle_polygon(d.hole.center, eps, n), detail::SegmentKind::Hole, hole_circle});
  } else {
    loops.push_back({detail::subdivide(d.hole.scaled_vertices(), h_near), detail::SegmentKind::Hole, std::nullopt});
  }
  const auto [lo, hi] = d.outer.bounds();
  const auto R = detail::run_refiner(loops, lo, hi, hole_size_field(d, opt.h_target, opt.grading, opt.grade_rate),
                                     opt, d.outer.area(), h_near);
  MatchedMesh mm = detail::extract_matched(R, loops[0].circle, hole_circle);
  detail::check_quality(mm.filled, opt);
  return mm;
}

/// Punctured mesh with explicit grading.
inline TriMesh triangulate(const PuncturedDomain& d, double h_target, double grading) {
  MeshOptions opt;
  opt.h_target = h_target;
  opt.grading = grading;
  return triangulate_matched(d, opt).punctured;
}

/// Mesh of the outer domain alone, with a uniform size field.
inline TriMesh triangulate_outer(const OuterDomain& o, double h_target, const MeshOptions& base = {}) {
  if (!(h_target > 0.0)) fail(ErrorCode::MeshFailure, "mesh size must be positive");
  MeshOptions opt = base;
  opt.h_target = h_target;
  std::vector<detail::Loop> loops{{detail::outer_loop(o, h_target), detail::SegmentKind::Outer, detail::outer_circle_of(o)}};
  const auto [lo, hi] = o.bounds();
  const auto R = detail::run_refiner(loops, lo, hi, [h_target](Point) { return h_target; }, opt, o.area(), h_target);
  TriMesh m = detail::extract_matched(R, loops[0].circle, std::nullopt).punctured;
  detail::check_quality(m, opt);
  return m;
}

namespace detail {

inline Point project_on(const Circle& c, Point p) {
  const Point d = p - c.center;
  return c.center + (c.radius / norm(d)) * d;
}

/// Uniform 1-to-4 split; new midpoints are appended in edge discovery order.
inline TriMesh split4(const TriMesh& m) {
  TriMesh out;
  out.vertices = m.vertices;
  out.outer_circle = m.outer_circle;
  out.hole_circle = m.hole_circle;
  std::map<std::pair<int, int>, int> mid;
  std::set<std::pair<int, int>> outer_e, hole_e;
  for (const auto& e : m.boundary_edges) (e.tag == EdgeTag::Outer ? outer_e : hole_e).insert(std::minmax(e.i, e.j));
  for (const auto& e : m.interface_edges) hole_e.insert(std::minmax(e.i, e.j));
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = mid.find(key); it != mid.end()) return it->second;
    Point p = 0.5 * (m.vertices[a] + m.vertices[b]);
    if (outer_e.count(key) && m.outer_circle) p = project_on(*m.outer_circle, p);
    if (hole_e.count(key) && m.hole_circle) p = project_on(*m.hole_circle, p);
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    mid[key] = id;
    return id;
  };
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto [a, b, c] = m.triangles[t];
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
    if (m.is_filled())
      for (int k = 0; k < 4; ++k) out.in_hole.push_back(m.in_hole[t]);
  }
  auto split_edges = [&](const std::vector<BoundaryEdge>& src, std::vector<BoundaryEdge>& dst) {
    for (const auto& e : src) {
      const int md = mid.at(std::minmax(e.i, e.j));
      dst.push_back({e.i, md, e.tag});
      dst.push_back({md, e.j, e.tag});
    }
  };
  split_edges(m.boundary_edges, out.boundary_edges);
  split_edges(m.interface_edges, out.interface_edges);
  return out;
}

/// Renumbers vertices so that those used by non-hole triangles come first, then orders triangles likewise.
inline TriMesh reorder_filled(const TriMesh& m) {
  std::vector<int> map(m.vertices.size(), -1);
  TriMesh out;
  out.outer_circle = m.outer_circle;
  out.hole_circle = m.hole_circle;
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
      if (static_cast<bool>(m.in_hole[t]) == (pass == 1))
        for (int v : m.triangles[t])
          if (map[v] < 0) {
            map[v] = static_cast<int>(out.vertices.size());
            out.vertices.push_back(m.vertices[v]);
          }
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
      if (static_cast<bool>(m.in_hole[t]) == (pass == 1)) {
        const auto& T = m.triangles[t];
        out.triangles.push_back({map[T[0]], map[T[1]], map[T[2]]});
        out.in_hole.push_back(static_cast<char>(pass));
      }
  for (const auto& e : m.boundary_edges) out.boundary_edges.push_back({map[e.i], map[e.j], e.tag});
  for (const auto& e : m.interface_edges) out.interface_edges.push_back({map[e.i], map[e.j], e.tag});
  return out;
}

inline TriMesh punctured_part(const TriMesh& filled) {
  TriMesh p;
  p.outer_circle = filled.outer_circle;
  p.hole_circle = filled.hole_circle;
  std::size_t nv = 0;
  for (std::size_t t = 0; t < filled.triangles.size(); ++t)
    if (!filled.in_hole[t]) {
      p.triangles.push_back(filled.triangles[t]);
      for (int v : filled.triangles[t]) nv = std::max(nv, static_cast<std::size_t>(v) + 1);
    }
  p.vertices.assign(filled.vertices.begin(), filled.vertices.begin() + static_cast<long>(nv));
  for (const auto& e : filled.boundary_edges)
    if (e.i < static_cast<int>(nv) && e.j < static_cast<int>(nv)) p.boundary_edges.push_back(e);
  for (const auto& e : filled.interface_edges) p.boundary_edges.push_back(e);
  return p;
}

}  // namespace detail

/// Splits every triangle into four; boundary midpoints are projected onto circular boundaries.
inline TriMesh refine(const TriMesh& m) {
  TriMesh out = detail::split4(m);
  if (out.is_filled()) out = detail::reorder_filled(out);
  update_stats(out);
  return out;
}

inline MatchedMesh refine(const MatchedMesh& mm) {
  MatchedMesh out;
  out.filled = refine(mm.filled);
  out.punctured = detail::punctured_part(out.filled);
  update_stats(out.punctured);
  return out;
}

/// Uniform-grid point location over the triangles of a mesh.
class Locator {
 public:
  explicit Locator(const TriMesh& m) : mesh_(&m) {
    lo_ = hi_ = m.vertices.front();
    for (const Point& p : m.vertices) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
      hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }
    const double n = std::max(1.0, std::sqrt(static_cast<double>(m.triangles.size()) / 2.0));
    nx_ = ny_ = static_cast<int>(n);
    dx_ = (hi_.x - lo_.x) / nx_ * (1 + 1e-12) + 1e-300;
    dy_ = (hi_.y - lo_.y) / ny_ * (1 + 1e-12) + 1e-300;
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      Point a = m.vertices[m.triangles[t][0]], b = a;
      for (int v : m.triangles[t]) {
        const Point p = m.vertices[v];
        a = {std::min(a.x, p.x), std::min(a.y, p.y)};
        b = {std::max(b.x, p.x), std::max(b.y, p.y)};
      }
      const auto [i0, j0] = cell(a);
      const auto [i1, j1] = cell(b);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) cells_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
    }
  }

  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };

  /// Triangle containing p with barycentric coordinates; tolerance admits points on edges.
  Hit locate(Point p, double tol = 1e-12) const {
    const auto [i, j] = cell(p);
    Hit best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int t : cells_[static_cast<std::size_t>(j * nx_ + i)]) {
      const auto b = barycentric(t, p);
      const double mn = std::min({b[0], b[1], b[2]});
      if (mn > best_min) best_min = mn, best = {t, b};
    }
    if (best_min < -tol) return {};
    return best;
  }

  std::array<double, 3> barycentric(int t, Point p) const {
    const auto& T = mesh_->triangles[t];
    const Point a = mesh_->vertices[T[0]], b = mesh_->vertices[T[1]], c = mesh_->vertices[T[2]];
    const double A = cross(b - a, c - a);
    const double l1 = cross(c - b, p - b) / A;
    const double l2 = cross(a - c, p - c) / A;
    return {l1, l2, 1.0 - l1 - l2};
  }

 private:
  const TriMesh* mesh_;
  Point lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<int>> cells_;

  std::pair<int, int> cell(Point p) const {
    const int i = std::clamp(static_cast<int>((p.x - lo_.x) / dx_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - lo_.y) / dy_), 0, ny_ - 1);
    return {i, j};
  }
};

/// Text export: "V T B", V lines "x y", T lines "i j k", B lines "i j TAG".
inline void write_mesh(const TriMesh& m, std::ostream& os) {
  std::vector<BoundaryEdge> edges = m.boundary_edges;
  edges.insert(edges.end(), m.interface_edges.begin(), m.interface_edges.end());
  os << m.vertices.size() << ' ' << m.triangles.size() << ' ' << edges.size() << '\n';
  char buf[64];
  for (const Point& p : m.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& T : m.triangles) os << T[0] << ' ' << T[1] << ' ' << T[2] << '\n';
  for (const auto& e : edges) os << e.i << ' ' << e.j << ' ' << to_string(e.tag) << '\n';
}

inline void write_mesh(const TriMesh& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  write_mesh(m, os);
  if (!os) fail(ErrorCode::IoError, "write failed for " + path);
}

inline TriMesh read_mesh(std::istream& is) {
  std::size_t V = 0, T = 0, B = 0;
  if (!(is >> V >> T >> B)) fail(ErrorCode::IoError, "bad mesh header");
  TriMesh m;
  m.vertices.resize(V);
  for (auto& p : m.vertices)
    if (!(is >> p.x >> p.y)) fail(ErrorCode::IoError, "bad vertex line");
  m.triangles.resize(T);
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) fail(ErrorCode::IoError, "bad triangle line");
  for (std::size_t k = 0; k < B; ++k) {
    BoundaryEdge e;
    std::string tag;
    if (!(is >> e.i >> e.j >> tag)) fail(ErrorCode::IoError, "bad boundary line");
    if (tag == "OUTER") e.tag = EdgeTag::Outer;
    else if (tag == "HOLE") e.tag = EdgeTag::Hole;
    else fail(ErrorCode::IoError, "unknown edge tag " + tag);
    m.boundary_edges.push_back(e);
  }
  update_stats(m);
  return m;
}

}  // namespace robinlab
