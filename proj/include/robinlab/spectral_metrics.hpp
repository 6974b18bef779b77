#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "robinlab/error.hpp"

namespace robinlab {

enum class SpectrumSource { Fem, Oracle };

struct FiniteSpectrumWindow {
  std::vector<double> values;  // ascending, within [0, cap]
  double cap = 0.0;
  SpectrumSource source = SpectrumSource::Fem;

  /// Values of an ascending list that do not exceed cap.
  static FiniteSpectrumWindow truncate(const std::vector<double>& ascending, double cap, SpectrumSource src) {
    FiniteSpectrumWindow w{{}, cap, src};
    for (double v : ascending)
      if (v <= cap) w.values.push_back(std::max(0.0, v));
    return w;
  }
};

namespace detail {

/// sup_{a in A} dist(a, B) for ascending A and B, by a single forward sweep.
inline double directed_hausdorff(const std::vector<double>& A, const std::vector<double>& B) {
  double worst = 0.0;
  std::size_t j = 0;
  for (double a : A) {
    while (j + 1 < B.size() && B[j + 1] <= a) ++j;
    double d = std::abs(a - B[j]);
    if (j + 1 < B.size()) d = std::min(d, std::abs(B[j + 1] - a));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace detail

/// Hausdorff distance between two finite sets of reals.
inline double hausdorff(std::vector<double> A, std::vector<double> B) {
  if (A.empty() || B.empty()) fail(ErrorCode::EmptySet, "hausdorff needs nonempty sets");
  std::sort(A.begin(), A.end());
  std::sort(B.begin(), B.end());
  return std::max(detail::directed_hausdorff(A, B), detail::directed_hausdorff(B, A));
}

struct DbarResult {
  double value = 0.0;
  double truncation_bias = 0.0;  // 1 / (1 + cap)
};

/// Hausdorff distance of the images under lambda -> 1/(lambda + 1).
inline DbarResult dbar(const FiniteSpectrumWindow& A, const FiniteSpectrumWindow& B) {
  if (A.values.empty() || B.values.empty()) fail(ErrorCode::EmptySet, "dbar needs nonempty windows");
  if (A.cap != B.cap) fail(ErrorCode::WindowMismatch, "windows have different caps");
  auto image = [](const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(1.0 / (x + 1.0));
    return out;
  };
  return {hausdorff(image(A.values), image(B.values)), 1.0 / (1.0 + A.cap)};
}

struct MatchedPair {
  double reference = 0.0;
  double perturbed = 0.0;
  double gap = 0.0;
};

/// Index-wise pairing of two ascending lists.
inline std::vector<MatchedPair> match_with_multiplicity(const std::vector<double>& reference,
                                                        const std::vector<double>& perturbed, std::size_t k) {
  if (reference.size() < k || perturbed.size() < k)
    fail(ErrorCode::InsufficientEigenvalues, "spectra shorter than the requested count");
  std::vector<MatchedPair> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back({reference[i], perturbed[i], std::abs(reference[i] - perturbed[i])});
  return out;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;

  bool operator==(const RateFit&) const = default;
};

/// Least squares of log(error) against log(epsilon).
inline RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 3) fail(ErrorCode::NonpositiveData, "need at least 3 paired points");
  const auto n = static_cast<double>(eps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(err[i] > 0.0)) fail(ErrorCode::NonpositiveData, "log-log fit needs positive data");
    const double x = std::log(eps[i]), y = std::log(err[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  RateFit f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return f;
}

/// Window cap: midpoint between the cluster containing the k-th value and the next distinct cluster.
inline double window_cap(const std::vector<double>& ascending, std::size_t k, double cluster_tol = 1e-6) {
  if (ascending.size() <= k) fail(ErrorCode::InsufficientEigenvalues, "window needs k+1 values");
  auto same = [&](double a, double b) { return std::abs(b - a) <= cluster_tol * std::max(1.0, std::abs(a)); };
  std::size_t i = k;  // 0-based index of the (k+1)-th value
  while (i < ascending.size() && same(ascending[i - 1], ascending[i])) ++i;
  if (i >= ascending.size()) fail(ErrorCode::InsufficientEigenvalues, "no distinct value above the k-th cluster");
  return 0.5 * (ascending[i - 1] + ascending[i]);
}

}  // namespace robinlab
