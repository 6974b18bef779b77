#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "robinlab/error.hpp"
#include "robinlab/fem.hpp"

namespace robinlab {

struct SolverConfig {
  int k = 5;
  double sigma = -1.0;
  double tol = 1e-9;
  int max_iter = 300;  // restart bound per Lanczos pass
  std::uint64_t seed = 1;
  double cluster_tol = 1e-6;
  bool keep_vectors = true;
  std::size_t dense_threshold = 200;
  int basis_size = 0;  // 0 selects 4k + 20
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;
  Eigen::MatrixXd eigenvectors;     // columns, M-orthonormal; empty unless kept
  std::vector<std::size_t> multiplicities;
  double sigma_used = 0.0;
  int factorization_retries = 0;
};

/// ||Ax - lambda Mx|| / (||Ax|| + max(1, |lambda|) ||Mx||); the floor keeps null pairs well scaled.
inline double residual_check(const SparseMatrix& A, const SparseMatrix& M, double lambda, const Vector& x) {
  if (x.size() == 0 || x.norm() == 0.0) fail(ErrorCode::ZeroVector, "residual of a zero vector");
  const Vector Ax = A * x, Mx = M * x;
  const double den = Ax.norm() + std::max(1.0, std::abs(lambda)) * Mx.norm();
  if (den == 0.0) return 0.0;
  return (Ax - lambda * Mx).norm() / den;
}

/// Greedy grouping of consecutive values within tol * max(1, |lambda|).
inline std::vector<std::size_t> cluster_multiplicities(const std::vector<double>& values, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && std::abs(values[i] - values[i - 1]) <= tol * std::max(1.0, std::abs(values[i - 1])))
      ++out.back();
    else
      out.push_back(1);
  }
  return out;
}

namespace detail {

struct ShiftInvert {
  Eigen::SimplicialLLT<SparseMatrix> llt;
  SparseMatrix S;
  const SparseMatrix* M = nullptr;
  double sigma = 0.0;
  int retries = 0;

  ShiftInvert(const SparseMatrix& A, const SparseMatrix& Mass, double sigma0) : M(&Mass), sigma(sigma0) {
    for (retries = 0; retries < 12; ++retries) {
      S = A - sigma * Mass;
      llt.compute(S);
      if (llt.info() == Eigen::Success) return;
      sigma = 2.0 * sigma - 1.0;
    }
    fail(ErrorCode::FactorizationFailure, "A - sigma M is not positive definite for any tried shift");
  }

  /// One step of iterative refinement against S.
  Vector apply(const Vector& Mx) const {
    Vector y = llt.solve(Mx);
    y += llt.solve(Mx - S * y);
    return y;
  }
};

struct RitzPairs {
  std::vector<double> theta;  // descending
  Eigen::MatrixXd X;          // M-orthonormal
};

inline void deflate(Vector& w, const Eigen::MatrixXd& L, const Eigen::MatrixXd& ML) {
  if (L.cols() > 0) w -= L * (ML.transpose() * w);
}

/// Thick-restart Lanczos for the largest eigenvalues of (A - sigma M)^{-1} M in the M inner product,
/// restricted to the M-orthogonal complement of the columns of L.
inline RitzPairs lanczos(const ShiftInvert& op, const SparseMatrix& M, int nev, int m, const Eigen::MatrixXd& L,
                         const Eigen::MatrixXd& ML, std::mt19937_64& rng, double ritz_tol, int max_restarts) {
  const Eigen::Index n = M.rows();
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_vector = [&] {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uni(rng);
    return v;
  };
  Eigen::MatrixXd V(n, m + 1), MV(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);

  auto orthonormalize = [&](Vector w, int upto) -> std::pair<Vector, double> {
    for (int pass = 0; pass < 2; ++pass) {
      deflate(w, L, ML);
      if (upto > 0) {
        const Vector c = MV.leftCols(upto).transpose() * w;
        w -= V.leftCols(upto) * c;
      }
    }
    const double b = std::sqrt(std::max(0.0, w.dot(M * w)));
    return {w, b};
  };

  {
    auto [v, b] = orthonormalize(random_vector(), 0);
    if (b == 0.0) fail(ErrorCode::NoConvergence, "start vector lies in the deflated space");
    V.col(0) = v / b;
    MV.col(0) = M * V.col(0);
  }
  int p = 0;
  double beta = 0.0;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    for (int j = p; j < m; ++j) {
      Vector w = op.apply(MV.col(j));
      deflate(w, L, ML);
      Vector c = MV.leftCols(j + 1).transpose() * w;
      w -= V.leftCols(j + 1) * c;
      Vector Mw = M * w;
      deflate(w, L, ML);
      const Vector c2 = MV.leftCols(j + 1).transpose() * w;
      w -= V.leftCols(j + 1) * c2;
      c += c2;
      for (int i = 0; i <= j; ++i) H(i, j) = H(j, i) = c[i];
      Mw = M * w;
      beta = std::sqrt(std::max(0.0, w.dot(Mw)));
      const double scale = std::max(1e-300, std::abs(c[j]));
      if (beta <= 1e-14 * scale) {
        // invariant subspace: continue with a fresh direction, no coupling
        auto [v, b] = orthonormalize(random_vector(), j + 1);
        if (b == 0.0) fail(ErrorCode::NoConvergence, "Krylov space exhausted");
        V.col(j + 1) = v / b;
        beta = 0.0;
      } else {
        V.col(j + 1) = w / beta;
      }
      MV.col(j + 1) = M * V.col(j + 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::VectorXd& th = es.eigenvalues();  // ascending
    const Eigen::MatrixXd& Y = es.eigenvectors();
    bool done = true;
    for (int i = 0; i < nev; ++i) {
      const int col = m - 1 - i;
      if (std::abs(beta * Y(m - 1, col)) > ritz_tol * std::abs(th[col])) done = false;
    }
    const int keep = done ? nev : std::min(m - 2, std::max(nev + 1, nev + (m - nev) / 2));
    Eigen::MatrixXd Yk(m, keep);
    for (int i = 0; i < keep; ++i) Yk.col(i) = Y.col(m - 1 - i);
    if (done || restart == max_restarts) {
      if (!done) fail(ErrorCode::NoConvergence, "Lanczos restarts exhausted");
      RitzPairs out;
      out.X = V.leftCols(m) * Yk;
      for (int i = 0; i < keep; ++i) out.theta.push_back(th[m - 1 - i]);
      return out;
    }
    const Eigen::MatrixXd Vk = V.leftCols(m) * Yk;
    const Vector vnext = V.col(m), Mvnext = MV.col(m);
    V.leftCols(keep) = Vk;
    MV.leftCols(keep) = MV.leftCols(m) * Yk;
    V.col(keep) = vnext;
    MV.col(keep) = Mvnext;
    H.setZero();
    for (int i = 0; i < keep; ++i) H(i, i) = th[m - 1 - i];
    p = keep;
  }
  fail(ErrorCode::NoConvergence, "Lanczos restarts exhausted");
}

inline Spectrum dense_solve(const SparseMatrix& A, const SparseMatrix& M, const SolverConfig& cfg) {
  const Eigen::MatrixXd Ad(A), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Md);
  if (es.info() != Eigen::Success) fail(ErrorCode::FactorizationFailure, "dense generalized eigensolver failed");
  Spectrum s;
  const int k = std::min<int>(cfg.k, static_cast<int>(A.rows()));
  for (int i = 0; i < k; ++i) {
    s.eigenvalues.push_back(es.eigenvalues()[i]);
    s.residuals.push_back(residual_check(A, M, es.eigenvalues()[i], es.eigenvectors().col(i)));
  }
  if (cfg.keep_vectors) s.eigenvectors = es.eigenvectors().leftCols(k);
  s.sigma_used = cfg.sigma;
  return s;
}

}  // namespace detail

/// Lowest k eigenpairs of A x = lambda M x by shift-invert Lanczos with locking.
inline Spectrum solve_lowest(const SparseMatrix& A, const SparseMatrix& M, const SolverConfig& cfg) {
  if (cfg.k < 1) fail(ErrorCode::InsufficientEigenvalues, "k must be at least 1");
  if (A.rows() != M.rows() || A.cols() != M.cols() || A.rows() != A.cols())
    fail(ErrorCode::DimensionMismatch, "A and M must be square with equal size");
  const auto n = static_cast<std::size_t>(A.rows());
  if (n < static_cast<std::size_t>(cfg.k)) fail(ErrorCode::InsufficientEigenvalues, "fewer dofs than requested eigenvalues");
  Spectrum s;
  if (n <= cfg.dense_threshold) {
    s = detail::dense_solve(A, M, cfg);
  } else {
    const detail::ShiftInvert op(A, M, cfg.sigma);
    std::mt19937_64 rng(cfg.seed);
    Eigen::MatrixXd L(static_cast<Eigen::Index>(n), 0), ML(static_cast<Eigen::Index>(n), 0);
    std::vector<double> lam;
    auto absorb = [&](const detail::RitzPairs& r) {
      const auto old = L.cols();
      L.conservativeResize(Eigen::NoChange, old + static_cast<Eigen::Index>(r.theta.size()));
      for (std::size_t i = 0; i < r.theta.size(); ++i) {
        Vector x = r.X.col(static_cast<Eigen::Index>(i));
        detail::deflate(x, L.leftCols(old + static_cast<Eigen::Index>(i)), ML);
        x /= std::sqrt(x.dot(M * x));
        L.col(old + static_cast<Eigen::Index>(i)) = x;
        ML.conservativeResize(Eigen::NoChange, ML.cols() + 1);
        ML.col(ML.cols() - 1) = M * x;
        lam.push_back(x.dot(A * x));
      }
    };
    const int m0 = cfg.basis_size > 0 ? cfg.basis_size : 4 * cfg.k + 20;
    auto basis = [&](int nev) {
      const auto avail = static_cast<int>(n) - static_cast<int>(L.cols()) - 1;
      return std::min(std::max(m0, 2 * nev + 2), avail);
    };
    absorb(detail::lanczos(op, M, cfg.k, basis(cfg.k), L, ML, rng, 1e-12, cfg.max_iter));
    // Further passes on the complement pick up multiplicities missed by a single Krylov space.
    for (int pass = 0; pass < 8; ++pass) {
      std::vector<double> sorted = lam;
      std::sort(sorted.begin(), sorted.end());
      const double lk = sorted[static_cast<std::size_t>(cfg.k) - 1];
      const int nev = std::min(cfg.k, 4);
      const auto r = detail::lanczos(op, M, nev, basis(nev), L, ML, rng, 1e-12, cfg.max_iter);
      const double smallest = op.sigma + 1.0 / r.theta.front();
      if (smallest >= lk * (1.0 + 1e-12) + 1e-14) break;
      absorb(r);
    }
    // Subspace iteration with Rayleigh-Ritz damps stiff components left by the Ritz test.
    for (int sweep = 0; sweep < 2; ++sweep) {
      Eigen::MatrixXd Y(L.rows(), L.cols());
      for (Eigen::Index c = 0; c < L.cols(); ++c) Y.col(c) = op.apply(M * L.col(c));
      const Eigen::MatrixXd AY = A * Y, MY = M * Y;
      const Eigen::MatrixXd Ar = 0.5 * (Y.transpose() * AY + AY.transpose() * Y);
      const Eigen::MatrixXd Mr = 0.5 * (Y.transpose() * MY + MY.transpose() * Y);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(Ar, Mr);
      if (rr.info() != Eigen::Success) break;
      L = Y * rr.eigenvectors();
      for (Eigen::Index c = 0; c < L.cols(); ++c) {
        L.col(c) /= std::sqrt(L.col(c).dot(M * L.col(c)));
        lam[static_cast<std::size_t>(c)] = L.col(c).dot(A * L.col(c));
      }
    }
    std::vector<std::size_t> order(lam.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lam[a] < lam[b]; });
    if (cfg.keep_vectors) s.eigenvectors.resize(static_cast<Eigen::Index>(n), cfg.k);
    for (int i = 0; i < cfg.k; ++i) {
      const auto c = static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]);
      const Vector x = L.col(c);
      s.eigenvalues.push_back(lam[static_cast<std::size_t>(c)]);
      s.residuals.push_back(residual_check(A, M, s.eigenvalues.back(), x));
      if (cfg.keep_vectors) s.eigenvectors.col(i) = x;
    }
    s.sigma_used = op.sigma;
    s.factorization_retries = op.retries;
  }
  for (double r : s.residuals)
    if (!(r <= cfg.tol)) fail(ErrorCode::NoConvergence, "eigenpair residual above tolerance");
  s.multiplicities = cluster_multiplicities(s.eigenvalues, cfg.cluster_tol);
  return s;
}

}  // namespace robinlab
