#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "robinlab/error.hpp"
#include "robinlab/fem.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/mesh.hpp"
#include "robinlab/quadrature.hpp"
#include "robinlab/test_functions.hpp"

namespace robinlab::lab {

struct LabConfig {
  int trace_nodes = 256;
  int angular_intervals = 256;
  int angular_points = 2;
  int radial_points = 3;
  int ring_panels = 8;
  int core_panels = 4;
  int grid_points = 33;
  int triangle_points = 4;
  double locate_tol = 1e-9;
};

/// Located quadrature node: triangle and barycentric weights in the punctured mesh.
struct Node {
  Point p;
  double r = 0.0;
  double phi = 0.0;
  double w = 0.0;  // includes the polar Jacobian
  int tri = -1;
  std::array<double, 3> bary{};
};

/// Shared, immutable state for one epsilon: meshes, forms, point location and quadrature rules.
struct Setting {
  PuncturedDomain domain;
  const MatchedMesh* mesh = nullptr;
  double gamma = 1.0;
  BcMode mode = BcMode::NeumannOuter;
  bool regime = true;
  LabConfig cfg;

  Locator locator;
  AssembledForms forms;      // punctured mesh, all vertices active
  SparseMatrix mass_filled;  // filled mesh, all vertices active
  std::vector<Point> hole_polygon;
  std::vector<std::array<Point, 2>> hole_segments;
  quadrature::Rule radial, angular, edge, triangle;
  quadrature::AngularNodes ang;

  double epsilon() const { return domain.hole.epsilon; }
  Point center() const { return domain.hole.center; }
  std::size_t punctured_size() const { return mesh->punctured.num_vertices(); }
  std::size_t filled_size() const { return mesh->filled.num_vertices(); }

  /// Distance from the hole center to the meshed hole boundary along phi.
  double hole_radius(double phi) const { return ray_polygon_radius(hole_polygon, center(), phi); }

  Node locate(Point p, double r, double phi, double w) const {
    const auto hit = locator.locate(p, cfg.locate_tol);
    if (hit.triangle < 0) fail(ErrorCode::TraceInterpolationFailure, "point outside the punctured mesh");
    return {p, r, phi, w, hit.triangle, hit.bary};
  }

  double value(const Vector& u, const Node& n) const {
    const auto& T = mesh->punctured.triangles[static_cast<std::size_t>(n.tri)];
    return n.bary[0] * u[T[0]] + n.bary[1] * u[T[1]] + n.bary[2] * u[T[2]];
  }

  Point gradient(const Vector& u, int t) const {
    const auto& T = mesh->punctured.triangles[static_cast<std::size_t>(t)];
    const auto& V = mesh->punctured.vertices;
    const Point a = V[T[0]], b = V[T[1]], c = V[T[2]];
    const double A2 = cross(b - a, c - a);
    const Point e[3] = {c - b, a - c, b - a};
    Point g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) g = g + (u[T[i]] / A2) * Point{-e[i].y, e[i].x};
    return g;
  }
};

namespace detail {

inline std::vector<Point> hole_loop(const TriMesh& m) {
  std::vector<int> next(m.vertices.size(), -1);
  int start = -1;
  for (const auto& e : m.boundary_edges)
    if (e.tag == EdgeTag::Hole) next[static_cast<std::size_t>(e.i)] = e.j, start = e.i;
  std::vector<Point> loop;
  if (start < 0) return loop;
  int v = start;
  do {
    loop.push_back(m.vertices[static_cast<std::size_t>(v)]);
    v = next[static_cast<std::size_t>(v)];
  } while (v >= 0 && v != start && loop.size() <= m.vertices.size());
  return loop;
}

}  // namespace detail

inline Setting make_setting(const PuncturedDomain& d, const MatchedMesh& mm, double gamma, BcMode mode,
                            bool regime = true, LabConfig cfg = {}) {
  if (mm.filled.num_vertices() < mm.punctured.num_vertices() ||
      mm.filled.num_triangles() < mm.punctured.num_triangles())
    fail(ErrorCode::MeshMismatch, "filled mesh does not extend the punctured mesh");
  Setting s{d, &mm, gamma, mode, regime, cfg, Locator(mm.punctured), {}, {}, {}, {}, {}, {}, {}, {}, {}};
  s.forms = assemble(mm.punctured, BcMode::NeumannOuter, gamma);
  s.mass_filled = assemble_mass(mm.filled, DofMap::make(mm.filled, BcMode::NeumannOuter));
  s.hole_polygon = detail::hole_loop(mm.punctured);
  for (const auto& e : mm.punctured.boundary_edges)
    if (e.tag == EdgeTag::Hole)
      s.hole_segments.push_back({mm.punctured.vertices[static_cast<std::size_t>(e.i)],
                                 mm.punctured.vertices[static_cast<std::size_t>(e.j)]});
  s.radial = quadrature::gauss_legendre(cfg.radial_points);
  s.angular = quadrature::gauss_legendre(cfg.angular_points);
  s.edge = quadrature::gauss_legendre(3);
  s.triangle = quadrature::gauss_legendre(cfg.triangle_points);
  s.ang = quadrature::angular_nodes(cfg.angular_intervals, s.angular);
  return s;
}

// ---------------------------------------------------------------------------------------------
// Identification maps

/// Restriction of a filled-mesh field to the punctured mesh.
inline Vector op_J(const Setting& s, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != s.filled_size()) fail(ErrorCode::MeshMismatch, "field is not on the filled mesh");
  return u.head(static_cast<Eigen::Index>(s.punctured_size()));
}

/// Restriction on the form domain; the same map as op_J.
inline Vector op_J1(const Setting& s, const Vector& u) { return op_J(s, u); }

/// Zero extension: vertex values on the filled mesh, with every hole triangle treated as zero.
struct ZeroExtension {
  Vector values;
};

inline ZeroExtension op_Jprime(const Setting& s, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != s.punctured_size())
    fail(ErrorCode::MeshMismatch, "field is not on the punctured mesh");
  ZeroExtension z{Vector::Zero(static_cast<Eigen::Index>(s.filled_size()))};
  z.values.head(u.size()) = u;
  return z;
}

/// Element-by-element (a, b) over the filled mesh with hole triangles contributing zero.
inline double filled_inner(const Setting& s, const Vector& a, const ZeroExtension& b) {
  const TriMesh& F = s.mesh->filled;
  double total = 0.0;
  for (std::size_t t = 0; t < F.triangles.size(); ++t) {
    if (F.in_hole[t]) continue;
    const auto& T = F.triangles[t];
    const Eigen::Matrix3d Me = element_mass(F.vertices[T[0]], F.vertices[T[1]], F.vertices[T[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) total += a[T[i]] * Me(i, j) * b.values[T[j]];
  }
  return total;
}

inline double zero_extension_norm(const Setting& s, const ZeroExtension& z) {
  return std::sqrt(std::max(0.0, filled_inner(s, z.values, z)));
}

/// Angular trace of a punctured-mesh field on the circle of radius `radius` about the hole center.
struct CircleTrace {
  Point center;
  double radius = 0.0;
  std::vector<double> g;

  double step() const { return 2.0 * std::numbers::pi / static_cast<double>(g.size()); }

  std::pair<std::size_t, double> cell(double phi) const {
    const double t = phi / step();
    double k = std::floor(t);
    const double frac = t - k;
    const auto n = static_cast<long>(g.size());
    long i = static_cast<long>(k) % n;
    if (i < 0) i += n;
    return {static_cast<std::size_t>(i), frac};
  }
  double value(double phi) const {
    const auto [i, t] = cell(phi);
    return (1.0 - t) * g[i] + t * g[(i + 1) % g.size()];
  }
  double slope(double phi) const {
    const auto [i, t] = cell(phi);
    (void)t;
    return (g[(i + 1) % g.size()] - g[i]) / step();
  }
};

inline CircleTrace trace_on_circle(const Setting& s, const Vector& u, double radius) {
  const ProbeCircle c = annulus_probe_circle(s.domain, s.epsilon(), radius, static_cast<std::size_t>(s.cfg.trace_nodes));
  CircleTrace tr{c.center, radius, {}};
  tr.g.reserve(c.points.size());
  for (std::size_t k = 0; k < c.points.size(); ++k) tr.g.push_back(s.value(u, s.locate(c.points[k], radius, c.angles[k], 0.0)));
  return tr;
}

/// J1' u: u outside the ball, (r / radius) u(radius, phi) inside.
struct Transplant {
  const Setting* setting = nullptr;
  const Vector* u = nullptr;
  CircleTrace trace;

  double value(Point p) const {
    const Point d = p - trace.center;
    const double r = norm(d);
    if (r >= trace.radius) return setting->value(*u, setting->locate(p, r, 0.0, 0.0));
    return r / trace.radius * trace.value(std::atan2(d.y, d.x));
  }
  Point gradient(Point p) const {
    const Point d = p - trace.center;
    const double r = norm(d);
    if (r >= trace.radius) return setting->gradient(*u, setting->locate(p, r, 0.0, 0.0).tri);
    const double phi = std::atan2(d.y, d.x);
    const Point er{std::cos(phi), std::sin(phi)}, ephi{-std::sin(phi), std::cos(phi)};
    return (1.0 / trace.radius) * (trace.value(phi) * er + trace.slope(phi) * ephi);
  }
};

inline Transplant op_J1prime(const Setting& s, const Vector& u, double radius) {
  if (static_cast<std::size_t>(u.size()) != s.punctured_size())
    fail(ErrorCode::MeshMismatch, "field is not on the punctured mesh");
  return {&s, &u, trace_on_circle(s, u, radius)};
}

// ---------------------------------------------------------------------------------------------
// Polar node sets

/// Quadrature nodes of the ball of radius `radius`: core inside the meshed hole, ring outside it.
struct BallNodes {
  double radius = 0.0;
  std::vector<Node> core;
  std::vector<Node> ring;
};

inline BallNodes ball_nodes(const Setting& s, double radius) {
  BallNodes b{radius, {}, {}};
  const Point c = s.center();
  for (std::size_t k = 0; k < s.ang.phi.size(); ++k) {
    const double phi = s.ang.phi[k], wphi = s.ang.w[k];
    const Point e{std::cos(phi), std::sin(phi)};
    const double rk = std::min(s.hole_radius(phi), radius);
    auto add = [&](std::vector<Node>& out, double a, double bb, int panels, bool locate) {
      const double h = (bb - a) / panels;
      for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < s.radial.x.size(); ++i) {
          const double r = a + p * h + 0.5 * h * (s.radial.x[i] + 1.0);
          const double w = wphi * 0.5 * h * s.radial.w[i] * r;
          const Point q = c + r * e;
          out.push_back(locate ? s.locate(q, r, phi, w) : Node{q, r, phi, w, -1, {}});
        }
    };
    add(b.core, 0.0, rk, s.cfg.core_panels, false);
    if (radius > rk) add(b.ring, rk, radius, s.cfg.ring_panels, true);
  }
  return b;
}

/// Located nodes of the annulus inner < r < outer.
inline std::vector<Node> annulus_nodes(const Setting& s, double inner, double outer) {
  std::vector<Node> out;
  const Point c = s.center();
  for (std::size_t k = 0; k < s.ang.phi.size(); ++k) {
    const double phi = s.ang.phi[k], wphi = s.ang.w[k];
    const Point e{std::cos(phi), std::sin(phi)};
    const double h = (outer - inner) / s.cfg.ring_panels;
    for (int p = 0; p < s.cfg.ring_panels; ++p)
      for (std::size_t i = 0; i < s.radial.x.size(); ++i) {
        const double r = inner + p * h + 0.5 * h * (s.radial.x[i] + 1.0);
        out.push_back(s.locate(c + r * e, r, phi, wphi * 0.5 * h * s.radial.w[i] * r));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Intermediate radius

struct RadiusChoice {
  double radius = 0.0;
  std::vector<double> grid;
  std::vector<double> objective;  // max over fields of A(tau) / B
  bool satisfied = false;
  bool grid_exhausted = false;
  double sup_admissible = 0.0;    // largest admissible grid radius, 0 if none
};

/// Picks the grid radius minimizing max_u A_u(tau) / B_u, ties broken toward the midpoint 1.5 eps.
inline RadiusChoice select_radius(double eps, const std::vector<std::vector<double>>& A, const std::vector<double>& B,
                                  int grid_points) {
  RadiusChoice rc;
  const int n = grid_points;
  for (int i = 1; i <= n; ++i) rc.grid.push_back(eps + i * eps / (n + 1));
  rc.objective.assign(rc.grid.size(), 0.0);
  for (std::size_t u = 0; u < A.size(); ++u) {
    if (!(B[u] > 0.0)) continue;
    for (std::size_t i = 0; i < rc.grid.size(); ++i) rc.objective[i] = std::max(rc.objective[i], A[u][i] / B[u]);
  }
  const double best = *std::min_element(rc.objective.begin(), rc.objective.end());
  const double mid = 1.5 * eps;
  std::size_t pick = 0;
  for (std::size_t i = 0; i < rc.grid.size(); ++i) {
    if (rc.objective[i] > best + 1e-12) continue;
    if (rc.objective[pick] > best + 1e-12 || std::abs(rc.grid[i] - mid) < std::abs(rc.grid[pick] - mid)) pick = i;
  }
  rc.radius = rc.grid[pick];
  rc.satisfied = rc.objective[pick] <= 1.0;
  rc.grid_exhausted = !rc.satisfied;
  for (std::size_t i = 0; i < rc.grid.size(); ++i)
    if (rc.objective[i] <= 1.0) rc.sup_admissible = rc.grid[i];
  return rc;
}

/// Lemma quantities for one analytic field: A(tau) on the grid and the bound 4 * int over eps < r < 2 eps.
template <class Field>
std::pair<std::vector<double>, double> radius_profile(const Field& u, Point center, double eps, int grid_points = 33,
                                                      int nodes = 256) {
  std::vector<double> A;
  const double dphi = 2.0 * std::numbers::pi / nodes;
  for (int i = 1; i <= grid_points; ++i) {
    const double tau = eps + i * eps / (grid_points + 1);
    double a = 0.0;
    for (int k = 0; k < nodes; ++k) {
      const double phi = k * dphi;
      const Point ephi{-std::sin(phi), std::cos(phi)};
      const double d = tau * dot(ephi, u.gradient(center + tau * Point{std::cos(phi), std::sin(phi)}));
      a += d * d * dphi;
    }
    A.push_back(a);
  }
  const auto rad = quadrature::gauss_legendre(4);
  const auto ang = quadrature::angular_nodes(nodes, quadrature::gauss_legendre(2));
  const double B = 4.0 * quadrature::polar(
                             ang, rad, 8, [&](double) { return eps; }, [&](double) { return 2.0 * eps; },
                             [&](double r, double phi) {
                               const Point p = center + r * Point{std::cos(phi), std::sin(phi)};
                               const Point g = u.gradient(p);
                               const double v = u.value(p);
                               return dot(g, g) + v * v;
                             });
  return {A, B};
}

/// Intermediate radius for a set of analytic fields about `center`.
template <class Field>
RadiusChoice choose_intermediate_radius(const std::vector<Field>& fields, Point center, double eps,
                                        int grid_points = 33) {
  std::vector<std::vector<double>> A;
  std::vector<double> B;
  for (const auto& f : fields) {
    auto [a, b] = radius_profile(f, center, eps, grid_points);
    A.push_back(std::move(a));
    B.push_back(b);
  }
  return select_radius(eps, A, B, grid_points);
}

/// Intermediate radius for punctured-mesh fields.
inline RadiusChoice choose_intermediate_radius(const Setting& s, const std::vector<Vector>& us) {
  const double eps = s.epsilon();
  const int n = s.cfg.grid_points, nodes = s.cfg.trace_nodes;
  const double dphi = 2.0 * std::numbers::pi / nodes;
  std::vector<std::vector<Node>> rings;
  for (int i = 1; i <= n; ++i) {
    const double tau = eps + i * eps / (n + 1);
    std::vector<Node> ring;
    for (int k = 0; k < nodes; ++k) {
      const double phi = k * dphi;
      ring.push_back(s.locate(s.center() + tau * Point{std::cos(phi), std::sin(phi)}, tau, phi, dphi));
    }
    rings.push_back(std::move(ring));
  }
  const auto ann = annulus_nodes(s, eps, 2.0 * eps);
  std::vector<std::vector<double>> A;
  std::vector<double> B;
  for (const auto& u : us) {
    std::vector<double> a;
    for (const auto& ring : rings) {
      double sum = 0.0;
      for (const auto& nd : ring) {
        const Point ephi{-std::sin(nd.phi), std::cos(nd.phi)};
        const double d = nd.r * dot(ephi, s.gradient(u, nd.tri));
        sum += d * d * nd.w;
      }
      a.push_back(sum);
    }
    double b = 0.0;
    for (const auto& nd : ann) {
      const Point g = s.gradient(u, nd.tri);
      const double v = s.value(u, nd);
      b += nd.w * (dot(g, g) + v * v);
    }
    A.push_back(std::move(a));
    B.push_back(4.0 * b);
  }
  return select_radius(eps, A, B, n);
}

// ---------------------------------------------------------------------------------------------
// Norms of analytic functions on the whole domain

struct FunctionNorms {
  double l2 = 0.0;       // ||f||_0 over the domain
  double h1 = 0.0;       // ||f||_1
  double h2 = 0.0;       // ||-Lap f + f||_0
  double l2_hole = 0.0;  // ||f|| over the meshed hole
};

inline FunctionNorms function_norms(const Setting& s, const TestFunction& f) {
  const TriMesh& F = s.mesh->filled;
  double m0 = 0, m1 = 0, m2 = 0, mh = 0;
  for (std::size_t t = 0; t < F.triangles.size(); ++t) {
    const auto& T = F.triangles[t];
    for (const auto& q : quadrature::triangle_rule(F.vertices[T[0]], F.vertices[T[1]], F.vertices[T[2]], s.triangle)) {
      const Eval e = f.eval(q.p);
      const double v2 = e.value * e.value;
      m0 += q.w * v2;
      m1 += q.w * (v2 + dot(e.grad, e.grad));
      m2 += q.w * (e.value - e.lap) * (e.value - e.lap);
      if (F.in_hole[t]) mh += q.w * v2;
    }
  }
  return {std::sqrt(m0), std::sqrt(m1), std::sqrt(m2), std::sqrt(mh)};
}

inline Vector interpolate(const TriMesh& m, const TestFunction& f) {
  Vector v(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t i = 0; i < m.num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = f.value(m.vertices[i]);
  return v;
}

// ---------------------------------------------------------------------------------------------
// Conditions

/// ||f - J'Jf||_0 / ||f||_1: the L2 norm of f over the hole.
inline double check_condition5prime(const FunctionNorms& n) { return n.h1 > 0.0 ? n.l2_hole / n.h1 : 0.0; }

inline double check_condition5prime(const Setting& s, const TestFunction& f) {
  return check_condition5prime(function_norms(s, f));
}

/// Per-field data on the ball nodes reused by conditions (6) and (7).
struct BallField {
  CircleTrace trace;
  std::vector<double> ring_value;
  std::vector<Point> ring_grad;
  std::vector<Point> transplant_grad_core, transplant_grad_ring;
  std::vector<double> edge_value;  // at hole-edge Gauss points
  double norm1 = 0.0;
};

inline BallField ball_field(const Setting& s, const BallNodes& b, const Vector& u) {
  BallField bf;
  bf.trace = trace_on_circle(s, u, b.radius);
  auto transplant_grad = [&](const Node& n) {
    const Point er{std::cos(n.phi), std::sin(n.phi)}, ephi{-std::sin(n.phi), std::cos(n.phi)};
    return (1.0 / b.radius) * (bf.trace.value(n.phi) * er + bf.trace.slope(n.phi) * ephi);
  };
  for (const auto& n : b.ring) {
    bf.ring_value.push_back(s.value(u, n));
    bf.ring_grad.push_back(s.gradient(u, n.tri));
    bf.transplant_grad_ring.push_back(transplant_grad(n));
  }
  for (const auto& n : b.core) bf.transplant_grad_core.push_back(transplant_grad(n));
  for (const auto& seg : s.hole_segments)
    for (double x : s.edge.x) {
      const Point p = seg[0] + 0.5 * (x + 1.0) * (seg[1] - seg[0]);
      bf.edge_value.push_back(s.value(u, s.locate(p, 0.0, 0.0, 0.0)));
    }
  bf.norm1 = norm1(s.forms, u);
  return bf;
}

struct Condition6 {
  double ratio = 0.0;
  double numerator = 0.0;
  double norm1 = 0.0;
};

/// ||J'u - J1'u||_0 / ||u||_1.
inline Condition6 check_condition6(const BallNodes& b, const BallField& bf) {
  double sq = 0.0;
  for (std::size_t i = 0; i < b.ring.size(); ++i) {
    const auto& n = b.ring[i];
    const double d = bf.ring_value[i] - n.r / b.radius * bf.trace.value(n.phi);
    sq += n.w * d * d;
  }
  for (const auto& n : b.core) {
    const double v = n.r / b.radius * bf.trace.value(n.phi);
    sq += n.w * v * v;
  }
  const double num = std::sqrt(sq);
  return {bf.norm1 > 0.0 ? num / bf.norm1 : 0.0, num, bf.norm1};
}

inline Condition6 check_condition6(const Setting& s, const Vector& u, double radius) {
  const auto b = ball_nodes(s, radius);
  return check_condition6(b, ball_field(s, b, u));
}

/// Per-function data for condition (7).
struct BallFunction {
  std::vector<Point> grad_core, grad_ring;
  std::vector<double> edge_value;
  FunctionNorms norms;
};

inline BallFunction ball_function(const Setting& s, const BallNodes& b, const TestFunction& f) {
  BallFunction bf;
  for (const auto& n : b.core) bf.grad_core.push_back(f.gradient(n.p));
  for (const auto& n : b.ring) bf.grad_ring.push_back(f.gradient(n.p));
  for (const auto& seg : s.hole_segments)
    for (double x : s.edge.x) bf.edge_value.push_back(f.value(seg[0] + 0.5 * (x + 1.0) * (seg[1] - seg[0])));
  bf.norms = function_norms(s, f);
  return bf;
}

struct Condition7 {
  double ratio = 0.0;
  double t1 = 0.0;  // int over the ball of grad f . grad J1'u
  double t2 = 0.0;  // int over the ball minus the hole of grad f . grad u
  double t3 = 0.0;  // gamma int over the hole boundary of f u
};

/// |a(f, J1'u) - a'(J1 f, u)| / (||f||_2 ||u||_1).
inline Condition7 check_condition7(const Setting& s, const BallNodes& b, const BallFunction& f, const BallField& u) {
  Condition7 c;
  for (std::size_t i = 0; i < b.core.size(); ++i) c.t1 += b.core[i].w * dot(f.grad_core[i], u.transplant_grad_core[i]);
  for (std::size_t i = 0; i < b.ring.size(); ++i) {
    c.t1 += b.ring[i].w * dot(f.grad_ring[i], u.transplant_grad_ring[i]);
    c.t2 += b.ring[i].w * dot(f.grad_ring[i], u.ring_grad[i]);
  }
  std::size_t q = 0;
  for (const auto& seg : s.hole_segments) {
    const double L = distance(seg[0], seg[1]);
    for (double w : s.edge.w) {
      c.t3 += 0.5 * L * w * f.edge_value[q] * u.edge_value[q];
      ++q;
    }
  }
  c.t3 *= s.gamma;
  const double den = f.norms.h2 * u.norm1;
  c.ratio = den > 0.0 ? std::abs(c.t1 - c.t2 - c.t3) / den : 0.0;
  return c;
}

inline Condition7 check_condition7(const Setting& s, const TestFunction& f, const Vector& u, double radius) {
  const auto b = ball_nodes(s, radius);
  return check_condition7(s, b, ball_function(s, b, f), ball_field(s, b, u));
}

/// int over the ball of |J1'u|^2, and radius * int over the circle of |u|^2.
inline std::pair<double, double> transplant_mass_bound(const BallNodes& b, const BallField& bf, const Setting& s) {
  double lhs = 0.0;
  for (const auto& n : b.core) lhs += n.w * std::pow(n.r / b.radius * bf.trace.value(n.phi), 2);
  for (const auto& n : b.ring) lhs += n.w * std::pow(n.r / b.radius * bf.trace.value(n.phi), 2);
  double circle = 0.0;
  for (std::size_t k = 0; k < s.ang.phi.size(); ++k) circle += s.ang.w[k] * std::pow(bf.trace.value(s.ang.phi[k]), 2);
  return {lhs, b.radius * b.radius * circle};
}

/// int over the ball of |grad J1'u|^2 = (1/2) int (g^2 + g'^2) dphi.
inline double transplant_energy(const BallField& bf, const Setting& s) {
  double e = 0.0;
  for (std::size_t k = 0; k < s.ang.phi.size(); ++k) {
    const double g = bf.trace.value(s.ang.phi[k]), dg = bf.trace.slope(s.ang.phi[k]);
    e += s.ang.w[k] * (g * g + dg * dg);
  }
  return 0.5 * e;
}

// ---------------------------------------------------------------------------------------------
// Auxiliary inequalities

inline constexpr double kTraceDelta = 0.5;

/// Boundary mass over every boundary edge of a mesh.
inline SparseMatrix boundary_mass_all(const TriMesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : m.boundary_edges) {
    const double L = distance(m.vertices[static_cast<std::size_t>(e.i)], m.vertices[static_cast<std::size_t>(e.j)]);
    trip.emplace_back(e.i, e.i, L / 3.0);
    trip.emplace_back(e.j, e.j, L / 3.0);
    trip.emplace_back(e.i, e.j, L / 6.0);
    trip.emplace_back(e.j, e.i, L / 6.0);
  }
  const auto n = static_cast<Eigen::Index>(m.num_vertices());
  SparseMatrix B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

/// Ratio int_{boundary} |u|^2 / int (delta |grad u|^2 + |u|^2 / delta) on a meshed region; 0 for u = 0.
inline double check_trace(const TriMesh& omega, const Vector& u, double delta = kTraceDelta) {
  const DofMap d = DofMap::make(omega, BcMode::NeumannOuter);
  const double lhs = quad(boundary_mass_all(omega), u);
  const double rhs = delta * quad(assemble_stiffness(omega, d), u) + quad(assemble_mass(omega, d), u) / delta;
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

/// Same ratio with boundary the circle of radius `radius` and region radius < r < 2 eps.
inline double check_trace(const Setting& s, const std::vector<Node>& outer_ring, const BallField& bf, const Vector& u,
                          double delta = kTraceDelta) {
  double circle = 0.0;
  for (std::size_t k = 0; k < s.ang.phi.size(); ++k) circle += s.ang.w[k] * std::pow(bf.trace.value(s.ang.phi[k]), 2);
  const double lhs = bf.trace.radius * circle;
  double rhs = 0.0;
  for (const auto& n : outer_ring) {
    const Point g = s.gradient(u, n.tri);
    const double v = s.value(u, n);
    rhs += n.w * (delta * dot(g, g) + v * v / delta);
  }
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

/// int over the ball minus the hole of |u|^2 / ((radius / gamma + radius) ||u||_1^2).
inline double check_lemma_auxiliary(const BallNodes& b, const BallField& bf, double gamma) {
  double lhs = 0.0;
  for (std::size_t i = 0; i < b.ring.size(); ++i) lhs += b.ring[i].w * bf.ring_value[i] * bf.ring_value[i];
  const double den = (b.radius / gamma + b.radius) * bf.norm1 * bf.norm1;
  return den > 0.0 ? lhs / den : 0.0;
}

struct Rect {
  Point lo;
  Point hi;
  double area() const { return (hi.x - lo.x) * (hi.y - lo.y); }
  double parameter() const { return 0.5 * std::max(hi.x - lo.x, hi.y - lo.y); }
};

/// Largest square centered at the hole center inside the outer domain.
inline Rect pi_square(const PuncturedDomain& d) {
  const Point c = d.hole.center;
  double half = d.outer.boundary_distance(c);
  if (d.outer.kind != OuterKind::Rectangle) half /= std::sqrt(2.0);
  return {{c.x - half, c.y - half}, {c.x + half, c.y + half}};
}

/// int over the ball of |grad g|^2 / (radius^{4/3} int over Pi of |-Lap g + g|^2).
inline double check_magnetic(const TestFunction& g, Point center, double radius, const Rect& pi) {
  const auto rad = quadrature::gauss_legendre(5);
  const auto ang = quadrature::angular_nodes(256, quadrature::gauss_legendre(2));
  const double num = quadrature::polar(
      ang, rad, 4, [](double) { return 0.0; }, [&](double) { return radius; },
      [&](double r, double phi) {
        const Point q = g.gradient(center + r * Point{std::cos(phi), std::sin(phi)});
        return dot(q, q);
      });
  double den = 0.0;
  for (const auto& q : quadrature::rectangle_rule(pi.lo, pi.hi, quadrature::gauss_legendre(6), 16)) {
    const Eval e = g.eval(q.p);
    den += q.w * (e.value - e.lap) * (e.value - e.lap);
  }
  den *= std::pow(radius, 4.0 / 3.0);
  return den > 0.0 ? num / den : 0.0;
}

struct MarchenkoTerms {
  double lhs = 0.0;         // int_Q |v|^2
  double mass_term = 0.0;   // 2 mu(Q) / mu(G) int_G |v|^2
  double grad_coeff = 0.0;  // d^3 mu(Q)^{1/2} / mu(G) int_Pi |grad v|^2
  double margin = 0.0;      // mass_term + C grad_coeff - lhs
};

inline MarchenkoTerms check_marchenko(const TestFunction& v, const Rect& Q, const Rect& G, const Rect& Pi, double C) {
  const auto rule = quadrature::gauss_legendre(6);
  auto integrate = [&](const Rect& R, auto&& fn) {
    double s = 0.0;
    for (const auto& q : quadrature::rectangle_rule(R.lo, R.hi, rule, 8)) s += q.w * fn(v.eval(q.p));
    return s;
  };
  MarchenkoTerms t;
  t.lhs = integrate(Q, [](const Eval& e) { return e.value * e.value; });
  t.mass_term = 2.0 * Q.area() / G.area() * integrate(G, [](const Eval& e) { return e.value * e.value; });
  const double grad = integrate(Pi, [](const Eval& e) { return dot(e.grad, e.grad); });
  t.grad_coeff = std::pow(Pi.parameter(), 3) * std::sqrt(Q.area()) / G.area() * grad;
  t.margin = t.mass_term + C * t.grad_coeff - t.lhs;
  return t;
}

/// Smallest C making every margin nonnegative over the family.
inline double calibrate_marchenko(const std::vector<TestFunction>& family, const Rect& Q, const Rect& G, const Rect& Pi) {
  double C = 0.0;
  for (const auto& v : family) {
    const auto t = check_marchenko(v, Q, G, Pi, 0.0);
    if (t.grad_coeff > 0.0) C = std::max(C, (t.lhs - t.mass_term) / t.grad_coeff);
  }
  return C;
}

struct DeltaPrime {
  double lhs = 0.0;       // int |-Lap z + z|^2
  double rhs = 0.0;       // int |Lap z|^2 + |z|^2
  double margin = 0.0;    // lhs - rhs
  double two_grad = 0.0;  // 2 int |grad z|^2
};

inline DeltaPrime check_delta_prime(const TestFunction& z, const Rect& R) {
  DeltaPrime d;
  for (const auto& q : quadrature::rectangle_rule(R.lo, R.hi, quadrature::gauss_legendre(8), 8)) {
    const Eval e = z.eval(q.p);
    d.lhs += q.w * (e.value - e.lap) * (e.value - e.lap);
    d.rhs += q.w * (e.lap * e.lap + e.value * e.value);
    d.two_grad += 2.0 * q.w * dot(e.grad, e.grad);
  }
  d.margin = d.lhs - d.rhs;
  return d;
}

// ---------------------------------------------------------------------------------------------
// Test sets on the punctured mesh

struct FieldSet {
  std::vector<Vector> fields;
  std::vector<std::string> descriptors;
};

/// Smoothed random field: (M + s^2 K)^{-1} M r on the punctured mesh.
inline Vector random_field(const Setting& s, std::mt19937_64& rng, double scale = 0.1) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vector r(static_cast<Eigen::Index>(s.punctured_size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = N(rng);
  SparseMatrix A = s.forms.M + scale * scale * s.forms.K;
  Eigen::SimplicialLLT<SparseMatrix> llt(A);
  if (llt.info() != Eigen::Success) fail(ErrorCode::FactorizationFailure, "smoothing operator is not positive definite");
  return llt.solve(s.forms.M * r);
}

/// Rough test set: trig interpolants, Bessel modes about the hole, hole-scale bumps and random smooth fields.
inline FieldSet standard_u_set(const Setting& s, std::uint64_t seed, int random_fields = 8) {
  FieldSet out;
  const TriMesh& P = s.mesh->punctured;
  std::vector<TestFunction> analytic;
  const auto [lo, hi] = s.domain.outer.bounds();
  for (auto& f : trig_family(lo, hi, s.mode)) analytic.push_back(f);
  for (int m = 0; m <= 3; ++m) analytic.push_back(TestFunction::single(bessel_atom(m, 5.0, s.center())));
  analytic.push_back(TestFunction::single(bump_atom(s.center(), 2.0 * s.epsilon())));
  analytic.push_back(TestFunction::single(bump_atom(s.center(), 4.0 * s.epsilon())));
  for (const auto& f : analytic) {
    out.fields.push_back(interpolate(P, f));
    out.descriptors.push_back(f.descriptor());
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < random_fields; ++i) {
    out.fields.push_back(random_field(s, rng));
    out.descriptors.push_back("random(seed=" + std::to_string(seed) + ",index=" + std::to_string(i) + ",scale=0.1)");
  }
  if (s.mode == BcMode::DirichletOuter)
    for (auto& u : out.fields)
      for (const auto& e : P.boundary_edges)
        if (e.tag == EdgeTag::Outer) u[e.i] = 0.0, u[e.j] = 0.0;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Report

struct ClosenessReport {
  double epsilon = 0.0;
  double gamma = 0.0;
  BcMode mode = BcMode::NeumannOuter;
  bool regime = true;
  RadiusChoice radius;
  std::array<double, 7> delta{};  // conditions (1)..(7); index 4 holds (5')
  double boundedness_factor = 0.0;
  double k_trace = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double pi_half_width = 0.0;
  double envelope_56 = 0.0;  // sqrt(eps / gamma + eps)
  double envelope_7 = 0.0;   // eps^{1/6} + gamma^{1/2} eps^{1/4}
  double energy_ratio = 0.0; // max of int |grad J1'u|^2 / ((8K/eps + 16) ||u||_1^2)
  double mass_ratio = 0.0;   // max of int |J1'u|^2 / (radius int_circle |u|^2)
  Condition7 worst7;
  std::size_t num_f = 0;
  std::size_t num_u = 0;
  std::vector<std::string> f_descriptors;
  std::vector<std::string> u_descriptors;

  bool exact_conditions_hold(double tol = 1e-12) const {
    return delta[0] <= tol && delta[1] <= tol && delta[2] <= tol && delta[3] <= tol && boundedness_factor <= 2.0;
  }
};

inline ClosenessReport certify(const Setting& s, const std::vector<TestFunction>& fs, const FieldSet& us) {
  if (fs.empty() || us.fields.empty()) fail(ErrorCode::EmptyTestSet, "certification needs nonempty test sets");
  ClosenessReport r;
  r.epsilon = s.epsilon();
  r.gamma = s.gamma;
  r.mode = s.mode;
  r.regime = s.regime;
  r.num_f = fs.size();
  r.num_u = us.fields.size();
  r.u_descriptors = us.descriptors;
  for (const auto& f : fs) r.f_descriptors.push_back(f.descriptor());

  r.radius = choose_intermediate_radius(s, us.fields);
  const double rad = r.radius.radius;
  const BallNodes ball = ball_nodes(s, rad);
  const auto outer_ring = annulus_nodes(s, rad, 2.0 * s.epsilon());

  std::vector<BallField> ufields;
  std::vector<double> u_l2;
  for (const auto& u : us.fields) {
    ufields.push_back(ball_field(s, ball, u));
    u_l2.push_back(std::sqrt(std::max(0.0, quad(s.forms.M, u))));
  }
  std::vector<BallFunction> ffields;
  std::vector<Vector> finterp;
  for (const auto& f : fs) {
    ffields.push_back(ball_function(s, ball, f));
    finterp.push_back(interpolate(s.mesh->filled, f));
  }

  // (1)-(4): exact identities of restriction and zero extension
  for (std::size_t a = 0; a < fs.size(); ++a) {
    const Vector& fI = finterp[a];
    const double f_l2 = std::sqrt(std::max(0.0, quad(s.mass_filled, fI)));
    const double f_h1 = ffields[a].norms.h1;
    const Vector Jf = op_J(s, fI), J1f = op_J1(s, fI);
    if (f_h1 > 0.0) r.delta[0] = std::max(r.delta[0], std::sqrt(std::max(0.0, quad(s.forms.M, Jf - J1f))) / f_h1);
    if (f_l2 > 0.0) r.boundedness_factor = std::max(r.boundedness_factor, std::sqrt(quad(s.forms.M, Jf)) / f_l2);
    for (std::size_t b = 0; b < us.fields.size(); ++b) {
      const double lhs = Jf.dot(s.forms.M * us.fields[b]);
      const double rhs = filled_inner(s, fI, op_Jprime(s, us.fields[b]));
      const double den = f_l2 * u_l2[b];
      if (den > 0.0) r.delta[1] = std::max(r.delta[1], std::abs(lhs - rhs) / den);
    }
  }
  for (std::size_t b = 0; b < us.fields.size(); ++b) {
    const Vector& u = us.fields[b];
    const ZeroExtension z = op_Jprime(s, u);
    const Vector back = op_J(s, z.values);
    if (ufields[b].norm1 > 0.0)
      r.delta[2] = std::max(r.delta[2], std::sqrt(std::max(0.0, quad(s.forms.M, u - back))) / ufields[b].norm1);
    if (u_l2[b] > 0.0) r.boundedness_factor = std::max(r.boundedness_factor, zero_extension_norm(s, z) / u_l2[b]);
  }
  r.delta[3] = std::max(0.0, r.boundedness_factor - 2.0);

  // (5'), (6), (7)
  for (const auto& f : ffields) r.delta[4] = std::max(r.delta[4], check_condition5prime(f.norms));
  double k_hat = 0.0;
  for (std::size_t b = 0; b < us.fields.size(); ++b) {
    r.delta[5] = std::max(r.delta[5], check_condition6(ball, ufields[b]).ratio);
    r.c1 = std::max(r.c1, check_lemma_auxiliary(ball, ufields[b], s.gamma));
    k_hat = std::max(k_hat, check_trace(s, outer_ring, ufields[b], us.fields[b]));
    const auto [lhs, rhs] = transplant_mass_bound(ball, ufields[b], s);
    if (rhs > 0.0) r.mass_ratio = std::max(r.mass_ratio, lhs / rhs);
  }
  for (const auto& f : ffields)
    for (const auto& u : ufields) {
      const Condition7 c = check_condition7(s, ball, f, u);
      if (c.ratio >= r.worst7.ratio) r.worst7 = c;
    }
  r.delta[6] = r.worst7.ratio;
  r.k_trace = k_hat;
  const double energy_bound = 8.0 * k_hat / s.epsilon() + 16.0;
  for (const auto& u : ufields)
    if (u.norm1 > 0.0) r.energy_ratio = std::max(r.energy_ratio, transplant_energy(u, s) / (energy_bound * u.norm1 * u.norm1));

  const Rect pi = pi_square(s.domain);
  r.pi_half_width = 0.5 * (pi.hi.x - pi.lo.x);
  for (const auto& f : fs) r.c2 = std::max(r.c2, check_magnetic(f, s.center(), rad, pi));

  const double eps = s.epsilon();
  r.envelope_56 = s.gamma > 0.0 ? std::sqrt(eps / s.gamma + eps) : std::numeric_limits<double>::infinity();
  r.envelope_7 = std::pow(eps, 1.0 / 6.0) + std::sqrt(std::max(0.0, s.gamma)) * std::pow(eps, 0.25);
  return r;
}

}  // namespace robinlab::lab
