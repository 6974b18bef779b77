#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "robinlab/oracle.hpp"

using namespace robinlab;
using namespace robinlab::oracle;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr double kJ01 = 2.404825557695773;

}  // namespace

TEST(RectEigs, UnitSquareDirichlet) {
  const auto s = rect_eigs(1, 1, Bc::Dirichlet, 4);
  const std::vector<double> want{2 * kPi2, 5 * kPi2, 5 * kPi2, 8 * kPi2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], want[i], 1e-12);
}

TEST(RectEigs, UnitSquareNeumann) {
  const auto s = rect_eigs(1, 1, Bc::Neumann, 4);
  const std::vector<double> want{0, kPi2, kPi2, 2 * kPi2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], want[i], 1e-12);
}

TEST(RectEigs, TwoByOneDirichlet) {
  EXPECT_NEAR(rect_eigs(2, 1, Bc::Dirichlet, 1).eigenvalues[0], 1.25 * kPi2, 1e-12);
}

TEST(DiskEigs, FirstBesselZero) {
  const auto s = disk_eigs(1.0, Bc::Dirichlet, 3);
  EXPECT_NEAR(std::sqrt(s.eigenvalues[0]), kJ01, 1e-10);
  EXPECT_LT(s.max_residual, 1e-10);
  EXPECT_NEAR(s.eigenvalues[1], s.eigenvalues[2], 1e-12);
}

TEST(DiskEigs, RadiusScaling) {
  EXPECT_NEAR(disk_eigs(2.0, Bc::Dirichlet, 1).eigenvalues[0], kJ01 * kJ01 / 4.0, 1e-10);
}

TEST(DiskEigs, NeumannConstantMode) {
  const auto s = disk_eigs(1.0, Bc::Neumann, 3);
  EXPECT_EQ(s.eigenvalues[0], 0.0);
  EXPECT_NEAR(std::sqrt(s.eigenvalues[1]), 1.841183781340659, 1e-10);
}

TEST(AnnulusRobinEigs, LargeGammaApproachesDirichletInner) {
  const auto r = annulus_robin_eigs(0.1, 1.0, 1e8, Bc::Neumann, 5);
  const auto d = annulus_dirichlet_eigs(0.1, 1.0, Bc::Neumann, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.eigenvalues[i], d.eigenvalues[i], 1e-4 * std::max(1.0, d.eigenvalues[i]));
}

TEST(AnnulusRobinEigs, ZeroGammaHasConstantMode) {
  const auto s = annulus_robin_eigs(0.1, 1.0, 0.0, Bc::Neumann, 3);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-10);
}

TEST(AnnulusRobinEigs, ResidualsSmall) {
  const auto s = annulus_robin_eigs(0.1, 1.0, 1.0, Bc::Neumann, 8);
  EXPECT_LT(s.max_residual, 1e-10);
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) EXPECT_LE(s.eigenvalues[i - 1], s.eigenvalues[i]);
}

TEST(AnnulusRobinEigs, NondecreasingInGamma) {
  std::vector<double> prev(5, -INFINITY);
  for (double g : {0.0, 0.5, 1.0, 5.0, 50.0}) {
    const auto s = annulus_robin_eigs(0.1, 1.0, g, Bc::Dirichlet, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_GE(s.eigenvalues[i], prev[i] - 1e-10);
      prev[i] = s.eigenvalues[i];
    }
  }
}

TEST(AnnulusRobinEigs, ShrinkingHoleApproachesDisk) {
  const auto disk = disk_eigs(1.0, Bc::Dirichlet, 3);
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const auto s = annulus_robin_eigs(eps, 1.0, 1.0, Bc::Dirichlet, 3);
    const double gap = std::abs(s.eigenvalues[0] - disk.eigenvalues[0]);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Bessel, WronskianIdentity) {
  for (int m = 0; m <= 5; ++m)
    for (double x = 0.1; x <= 50.0; x += 0.37) {
      const double w = bessel_j(m, x) * bessel_yp(m, x) - bessel_jp(m, x) * bessel_y(m, x);
      EXPECT_NEAR(w * std::numbers::pi * x / 2.0, 1.0, 1e-10);
    }
}
