#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "robinlab/error.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

enum class BcMode { NeumannOuter, DirichletOuter };

inline constexpr std::string_view to_string(BcMode m) {
  return m == BcMode::NeumannOuter ? "NEUMANN_OUTER" : "DIRICHLET_OUTER";
}

/// Maps mesh vertices to active unknowns; Dirichlet mode removes the OUTER boundary vertices.
struct DofMap {
  BcMode mode = BcMode::NeumannOuter;
  std::size_t num_vertices = 0;
  std::vector<int> active;         // dof -> vertex
  std::vector<int> dof_of_vertex;  // vertex -> dof, -1 if eliminated

  std::size_t size() const { return active.size(); }

  static DofMap make(const TriMesh& m, BcMode mode) {
    DofMap d;
    d.mode = mode;
    d.num_vertices = m.vertices.size();
    std::vector<char> fixed(m.vertices.size(), 0);
    if (mode == BcMode::DirichletOuter)
      for (const auto& e : m.boundary_edges)
        if (e.tag == EdgeTag::Outer) fixed[e.i] = fixed[e.j] = 1;
    d.dof_of_vertex.assign(m.vertices.size(), -1);
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
      if (!fixed[v]) {
        d.dof_of_vertex[v] = static_cast<int>(d.active.size());
        d.active.push_back(static_cast<int>(v));
      }
    return d;
  }

  Vector restrict(const Vector& full) const {
    Vector out(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[active[k]];
    return out;
  }

  /// Extension by zero to all vertices.
  Vector extend(const Vector& u) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(num_vertices));
    for (std::size_t k = 0; k < active.size(); ++k) out[active[k]] = u[static_cast<Eigen::Index>(k)];
    return out;
  }
};

inline constexpr double kMinTriangleArea = 1e-14;

/// P1 element stiffness: K_ij = A grad(l_i) . grad(l_j).
inline Eigen::Matrix3d element_stiffness(Point a, Point b, Point c) {
  const double A2 = cross(b - a, c - a);
  if (!(0.5 * std::abs(A2) >= kMinTriangleArea)) fail(ErrorCode::DegenerateTriangle, "triangle area below 1e-14");
  const Point e[3] = {c - b, a - c, b - a};  // edge opposite each vertex
  Eigen::Matrix3d K;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K(i, j) = dot(e[i], e[j]) / (2.0 * std::abs(A2));
  return K;
}

/// P1 element mass: (A/12) (1 + delta_ij).
inline Eigen::Matrix3d element_mass(Point a, Point b, Point c) {
  const double A = 0.5 * cross(b - a, c - a);
  if (!(std::abs(A) >= kMinTriangleArea)) fail(ErrorCode::DegenerateTriangle, "triangle area below 1e-14");
  Eigen::Matrix3d M = Eigen::Matrix3d::Constant(std::abs(A) / 12.0);
  M.diagonal() *= 2.0;
  return M;
}

namespace detail {

template <class Element>
SparseMatrix assemble_elements(const TriMesh& m, const DofMap& d, Element element) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * m.triangles.size());
  for (const auto& T : m.triangles) {
    const Eigen::Matrix3d E = element(m.vertices[T[0]], m.vertices[T[1]], m.vertices[T[2]]);
    for (int i = 0; i < 3; ++i) {
      const int di = d.dof_of_vertex[T[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = d.dof_of_vertex[T[j]];
        if (dj >= 0) trip.emplace_back(di, dj, E(i, j));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(d.size());
  SparseMatrix S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

}  // namespace detail

inline SparseMatrix assemble_stiffness(const TriMesh& m, const DofMap& d) {
  return detail::assemble_elements(m, d, element_stiffness);
}

inline SparseMatrix assemble_mass(const TriMesh& m, const DofMap& d) {
  return detail::assemble_elements(m, d, element_mass);
}

/// Hole-boundary mass: per edge (L/6)[[2,1],[1,2]].
inline SparseMatrix assemble_hole_boundary_mass(const TriMesh& m, const DofMap& d) {
  std::vector<BoundaryEdge> scratch;
  const auto& edges = hole_edges_of(m, scratch);
  if (edges.size() < 3) fail(ErrorCode::NoHoleBoundary, "mesh has fewer than 3 hole edges");
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : edges) {
    const double L = distance(m.vertices[e.i], m.vertices[e.j]);
    const int v[2] = {d.dof_of_vertex[e.i], d.dof_of_vertex[e.j]};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (v[a] >= 0 && v[b] >= 0) trip.emplace_back(v[a], v[b], L / 6.0 * (a == b ? 2.0 : 1.0));
  }
  const auto n = static_cast<Eigen::Index>(d.size());
  SparseMatrix B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

struct AssembledForms {
  SparseMatrix K;
  SparseMatrix M;
  SparseMatrix B;
  double gamma = 0.0;
  DofMap dofmap;
};

inline AssembledForms assemble(const TriMesh& m, BcMode mode, double gamma) {
  AssembledForms f;
  f.dofmap = DofMap::make(m, mode);
  f.K = assemble_stiffness(m, f.dofmap);
  f.M = assemble_mass(m, f.dofmap);
  std::vector<BoundaryEdge> scratch;
  if (hole_edges_of(m, scratch).empty()) {
    f.B = SparseMatrix(f.K.rows(), f.K.cols());
  } else {
    f.B = assemble_hole_boundary_mass(m, f.dofmap);
  }
  f.gamma = gamma;
  return f;
}

/// A = K + gamma B.
inline SparseMatrix robin_form(const AssembledForms& f) {
  SparseMatrix A = f.K + f.gamma * f.B;
  A.makeCompressed();
  return A;
}

inline double quad(const SparseMatrix& S, const Vector& u) { return u.dot(S * u); }

/// sqrt(u'Mu + u'Ku + gamma u'Bu).
inline double norm1(const AssembledForms& f, const Vector& u) {
  if (u.size() != f.M.rows()) fail(ErrorCode::DimensionMismatch, "vector does not match the active dofs");
  const double r = quad(f.M, u) + quad(f.K, u) + f.gamma * quad(f.B, u);
  if (r < 0.0) fail(ErrorCode::NegativeForm, "norm radicand is negative");
  return std::sqrt(r);
}

/// Matrix export: "n nnz" then "i j v" lines.
inline void write_matrix(const SparseMatrix& S, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  os << S.rows() << ' ' << S.nonZeros() << '\n';
  char buf[96];
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      os << buf;
    }
  if (!os) fail(ErrorCode::IoError, "write failed for " + path);
}

inline void write_forms(const AssembledForms& f, const std::string& prefix) {
  write_matrix(f.K, prefix + "_K.txt");
  write_matrix(f.M, prefix + "_M.txt");
  write_matrix(f.B, prefix + "_B.txt");
}

}  // namespace robinlab
