#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "robinlab/eigensolve.hpp"

using namespace robinlab;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

SparseMatrix diag(std::initializer_list<double> v) {
  SparseMatrix S(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) S.insert(i, i) = x, ++i;
  S.makeCompressed();
  return S;
}

const TriMesh& square_mesh() {
  static const TriMesh m = triangulate_outer(OuterDomain::unit_square(), 0.04);
  return m;
}

const TriMesh& holed_mesh() {
  static const TriMesh m =
      triangulate(make_punctured(OuterDomain::unit_square(), HoleSpec::disk({0.5, 0.5}, 0.1)), 0.05, 2.0);
  return m;
}

}  // namespace

TEST(SolveLowest, DenseDiagonal) {
  SolverConfig cfg;
  cfg.k = 3;
  const auto s = solve_lowest(diag({3, 1, 2}), diag({1, 1, 1}), cfg);
  ASSERT_EQ(s.eigenvalues.size(), 3u);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1], 2.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-14);
}

TEST(SolveLowest, NeumannSquareConstantMode) {
  const auto f = assemble(square_mesh(), BcMode::NeumannOuter, 0.0);
  SolverConfig cfg;
  cfg.k = 4;
  const auto s = solve_lowest(robin_form(f), f.M, cfg);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-10);
  const Vector x = s.eigenvectors.col(0);
  EXPECT_LT((x.array() - x.mean()).abs().maxCoeff(), 1e-8 * x.cwiseAbs().maxCoeff());
  EXPECT_NEAR(s.eigenvalues[1], kPi2, 0.02 * kPi2);
  EXPECT_NEAR(s.eigenvalues[2], kPi2, 0.02 * kPi2);
  EXPECT_NEAR(s.eigenvalues[3], 2 * kPi2, 0.02 * 2 * kPi2);
}

TEST(SolveLowest, DirichletSquareFirstEigenvalue) {
  const auto f = assemble(square_mesh(), BcMode::DirichletOuter, 0.0);
  SolverConfig cfg;
  cfg.k = 1;
  EXPECT_NEAR(solve_lowest(robin_form(f), f.M, cfg).eigenvalues[0], 2 * kPi2, 0.01 * 2 * kPi2);
}

TEST(SolveLowest, AscendingWithSmallResidualsAndOrthonormalVectors) {
  const auto f = assemble(holed_mesh(), BcMode::NeumannOuter, 1.0);
  SolverConfig cfg;
  cfg.k = 6;
  const auto s = solve_lowest(robin_form(f), f.M, cfg);
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) EXPECT_LE(s.eigenvalues[i - 1], s.eigenvalues[i]);
  for (double r : s.residuals) EXPECT_LE(r, cfg.tol);
  const Eigen::MatrixXd G = s.eigenvectors.transpose() * (f.M * s.eigenvectors);
  EXPECT_LT((G - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveLowest, DeterministicGivenSeed) {
  const auto f = assemble(holed_mesh(), BcMode::NeumannOuter, 1.0);
  SolverConfig cfg;
  const auto a = solve_lowest(robin_form(f), f.M, cfg);
  const auto b = solve_lowest(robin_form(f), f.M, cfg);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}

TEST(SolveLowest, RobinTermDoesNotDecreaseEigenvalues) {
  auto f = assemble(holed_mesh(), BcMode::NeumannOuter, 0.0);
  SolverConfig cfg;
  const auto s0 = solve_lowest(robin_form(f), f.M, cfg);
  f.gamma = 5.0;
  const auto s1 = solve_lowest(robin_form(f), f.M, cfg);
  for (int i = 0; i < cfg.k; ++i) EXPECT_GE(s1.eigenvalues[i], s0.eigenvalues[i] - 1e-9);
}

TEST(SolveLowest, DirichletDominatesNeumann) {
  const auto fn = assemble(holed_mesh(), BcMode::NeumannOuter, 1.0);
  const auto fd = assemble(holed_mesh(), BcMode::DirichletOuter, 1.0);
  SolverConfig cfg;
  const auto sn = solve_lowest(robin_form(fn), fn.M, cfg);
  const auto sd = solve_lowest(robin_form(fd), fd.M, cfg);
  for (int i = 0; i < cfg.k; ++i) EXPECT_GE(sd.eigenvalues[i], sn.eigenvalues[i]);
}

TEST(SolveLowest, RefinementConvergesAtSecondOrder) {
  TriMesh m = triangulate_outer(OuterDomain::unit_square(), 0.1);
  std::vector<double> h, err;
  SolverConfig cfg;
  cfg.k = 1;
  for (int level = 0; level < 3; ++level) {
    const auto f = assemble(m, BcMode::DirichletOuter, 0.0);
    h.push_back(m.h_max);
    err.push_back(solve_lowest(robin_form(f), f.M, cfg).eigenvalues[0] - 2 * kPi2);
    m = refine(m);
  }
  EXPECT_GT(err[0], err[1]);
  EXPECT_GT(err[1], err[2]);
  const double slope = std::log(err[0] / err[2]) / std::log(h[0] / h[2]);
  EXPECT_NEAR(slope, 2.0, 0.3);
}

TEST(ResidualCheck, ExactPair) {
  const SparseMatrix A = diag({1, 2, 3}), M = diag({1, 1, 1});
  Vector x = Vector::Zero(3);
  x[1] = 1.0;
  EXPECT_LT(residual_check(A, M, 2.0, x), 1e-14);
}

TEST(ResidualCheck, GrowsWithPerturbation) {
  const SparseMatrix A = diag({1, 2, 3}), M = diag({1, 1, 1});
  double prev = -1.0;
  for (double d : {0.0, 1e-6, 1e-5, 1e-4, 1e-3}) {
    Vector x = Vector::Zero(3);
    x[1] = 1.0;
    x[2] = d;
    const double r = residual_check(A, M, 2.0, x);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(ResidualCheck, ZeroVector) {
  const SparseMatrix A = diag({1, 2}), M = diag({1, 1});
  try {
    residual_check(A, M, 1.0, Vector::Zero(2));
    FAIL() << "expected ZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(ClusterMultiplicities, NearlyDoubleValue) {
  EXPECT_EQ(cluster_multiplicities({kPi2, kPi2 + 1e-10, 2 * kPi2}, 1e-6), (std::vector<std::size_t>{2, 1}));
}

TEST(ClusterMultiplicities, WellSeparated) {
  EXPECT_EQ(cluster_multiplicities({1.0, 2.0, 3.0, 4.0}, 1e-6), (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(ClusterMultiplicities, NeumannSquare) {
  EXPECT_EQ(cluster_multiplicities({0.0, kPi2, kPi2, 2 * kPi2}, 1e-6), (std::vector<std::size_t>{1, 2, 1}));
}
