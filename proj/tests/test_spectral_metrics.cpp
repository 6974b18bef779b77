#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "robinlab/spectral_metrics.hpp"

using namespace robinlab;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

FiniteSpectrumWindow window(std::vector<double> v, double cap) { return {std::move(v), cap, SpectrumSource::Fem}; }

double brute_hausdorff(const std::vector<double>& A, const std::vector<double>& B) {
  auto directed = [](const std::vector<double>& X, const std::vector<double>& Y) {
    double w = 0.0;
    for (double x : X) {
      double d = INFINITY;
      for (double y : Y) d = std::min(d, std::abs(x - y));
      w = std::max(w, d);
    }
    return w;
  };
  return std::max(directed(A, B), directed(B, A));
}

}  // namespace

TEST(Hausdorff, IdenticalSets) { EXPECT_EQ(hausdorff({1, 2}, {1, 2}), 0.0); }

TEST(Hausdorff, Singletons) { EXPECT_EQ(hausdorff({0}, {3}), 3.0); }

TEST(Hausdorff, ShiftedPair) { EXPECT_NEAR(hausdorff({1, 2}, {1.1, 2.2}), 0.2, 1e-15); }

TEST(Hausdorff, EmptySet) {
  try {
    hausdorff({}, {1});
    FAIL() << "expected EmptySet";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySet);
  }
}

TEST(Hausdorff, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  std::uniform_int_distribution<int> N(1, 12);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> A(static_cast<std::size_t>(N(rng))), B(static_cast<std::size_t>(N(rng)));
    for (double& a : A) a = U(rng);
    for (double& b : B) b = U(rng);
    EXPECT_DOUBLE_EQ(hausdorff(A, B), brute_hausdorff(A, B));
    EXPECT_EQ(hausdorff(A, B), hausdorff(B, A));
  }
}

TEST(Dbar, ZeroAgainstOne) { EXPECT_DOUBLE_EQ(dbar(window({0}, 5), window({1}, 5)).value, 0.5); }

TEST(Dbar, IdenticalWindows) { EXPECT_EQ(dbar(window({0, 1, 4}, 5), window({0, 1, 4}, 5)).value, 0.0); }

TEST(Dbar, BruteForceCrossCheck) {
  const std::vector<double> A{0, 1, 4}, B{0.1, 1.2, 4.5};
  auto image = [](std::vector<double> v) {
    for (double& x : v) x = 1.0 / (x + 1.0);
    return v;
  };
  const auto r = dbar(window(A, 5), window(B, 5));
  EXPECT_DOUBLE_EQ(r.value, brute_hausdorff(image(A), image(B)));
  EXPECT_DOUBLE_EQ(r.truncation_bias, 1.0 / 6.0);
}

TEST(Dbar, WindowMismatch) {
  try {
    dbar(window({0}, 5), window({0}, 6));
    FAIL() << "expected WindowMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowMismatch);
  }
}

TEST(Dbar, BoundedByHausdorff) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> A(5), B(7);
    for (double& a : A) a = U(rng);
    for (double& b : B) b = U(rng);
    EXPECT_LE(dbar(window(A, 50), window(B, 50)).value, hausdorff(A, B));
  }
}

TEST(Dbar, UnchangedByIdenticalExtension) {
  const double a = dbar(window({0, 1, 4}, 5), window({0.1, 1.2, 4.5}, 5)).value;
  const double b = dbar(window({0, 1, 4, 7}, 8), window({0.1, 1.2, 4.5, 7}, 8)).value;
  EXPECT_DOUBLE_EQ(a, b);
}

TEST(Truncate, KeepsValuesWithinCap) {
  const auto w = FiniteSpectrumWindow::truncate({0, 1, 4, 9, 16}, 5.0, SpectrumSource::Oracle);
  EXPECT_EQ(w.values, (std::vector<double>{0, 1, 4}));
  EXPECT_EQ(w.source, SpectrumSource::Oracle);
}

TEST(MatchWithMultiplicity, IdenticalSpectra) {
  for (const auto& p : match_with_multiplicity({1, 2, 3}, {1, 2, 3}, 3)) EXPECT_EQ(p.gap, 0.0);
}

TEST(MatchWithMultiplicity, IndexPairing) {
  const auto p = match_with_multiplicity({0, kPi2, kPi2}, {0.01, kPi2 + 0.1, kPi2 + 0.2}, 3);
  EXPECT_NEAR(p[0].gap, 0.01, 1e-15);
  EXPECT_NEAR(p[1].gap, 0.1, 1e-14);
  EXPECT_NEAR(p[2].gap, 0.2, 1e-14);
}

TEST(MatchWithMultiplicity, SplitDoubleEigenvalue) {
  // diag(1, 2, 2) perturbed by a symmetric coupling in the double block
  Eigen::Matrix3d A;
  A << 1, 0, 0, 0, 2, 0.05, 0, 0.05, 2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A);
  const std::vector<double> pert{es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
  const auto p = match_with_multiplicity({1, 2, 2}, pert, 3);
  EXPECT_NEAR(p[0].gap, 0.0, 1e-14);
  EXPECT_NEAR(p[1].gap, 0.05, 1e-14);
  EXPECT_NEAR(p[2].gap, 0.05, 1e-14);
}

TEST(MatchWithMultiplicity, InsufficientEigenvalues) {
  try {
    match_with_multiplicity({1, 2}, {1, 2, 3}, 3);
    FAIL() << "expected InsufficientEigenvalues";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientEigenvalues);
  }
}

TEST(FitRate, LinearData) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  EXPECT_NEAR(fit_rate(eps, eps).slope, 1.0, 1e-12);
}

TEST(FitRate, SquareRootData) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  std::vector<double> e;
  for (double x : eps) e.push_back(std::sqrt(x));
  EXPECT_NEAR(fit_rate(eps, e).slope, 0.5, 1e-12);
}

TEST(FitRate, SixthRootWithIntercept) {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  std::vector<double> e;
  for (double x : eps) e.push_back(3.0 * std::pow(x, 1.0 / 6.0));
  const auto f = fit_rate(eps, e);
  EXPECT_NEAR(f.slope, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FitRate, NonpositiveData) {
  try {
    fit_rate({0.2, 0.1, 0.05}, {1.0, 0.0, 0.5});
    FAIL() << "expected NonpositiveData";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveData);
  }
}

TEST(WindowCap, MidpointAfterCluster) {
  EXPECT_DOUBLE_EQ(window_cap({1, 2, 3, 4}, 2), 2.5);
  EXPECT_DOUBLE_EQ(window_cap({0, kPi2, kPi2, 2 * kPi2}, 2), 1.5 * kPi2);
}
