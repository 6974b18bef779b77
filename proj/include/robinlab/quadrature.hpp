#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "robinlab/geometry.hpp"

namespace robinlab::quadrature {

/// Nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
inline Rule gauss_legendre(int n) {
  Rule r;
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative roots, ascending
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x.push_back(z), r.w.push_back(w);
    if (z != 0.0) r.x.push_back(-z), r.w.push_back(w);
  }
  std::vector<std::size_t> idx(r.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.x[a] < r.x[b]; });
  Rule s;
  for (std::size_t i : idx) s.x.push_back(r.x[i]), s.w.push_back(r.w[i]);
  return s;
}

/// sum w f(x) over [a, b] split into `panels` equal pieces.
template <class F>
double integrate(const Rule& rule, double a, double b, int panels, F&& f) {
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, half = 0.5 * h, mid = lo + half;
    for (std::size_t i = 0; i < rule.x.size(); ++i) total += half * rule.w[i] * f(mid + half * rule.x[i]);
  }
  return total;
}

struct WeightedPoint {
  Point p;
  double w = 0.0;
};

/// Collapsed-square rule on triangle (a, b, c): n x n Gauss points, exact to degree 2n - 2.
inline std::vector<WeightedPoint> triangle_rule(Point a, Point b, Point c, const Rule& rule) {
  std::vector<WeightedPoint> out;
  const double area = 0.5 * std::abs(cross(b - a, c - a));
  out.reserve(rule.x.size() * rule.x.size());
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double s = 0.5 * (rule.x[i] + 1.0), ws = 0.5 * rule.w[i];
    for (std::size_t j = 0; j < rule.x.size(); ++j) {
      const double t = 0.5 * (rule.x[j] + 1.0), wt = 0.5 * rule.w[j];
      const double l1 = s, l2 = t * (1.0 - s);
      out.push_back({a + l1 * (b - a) + l2 * (c - a), 2.0 * area * ws * wt * (1.0 - s)});
    }
  }
  return out;
}

/// Tensor rule on the axis-aligned rectangle [x0, x1] x [y0, y1] with `panels` per side.
inline std::vector<WeightedPoint> rectangle_rule(Point lo, Point hi, const Rule& rule, int panels) {
  std::vector<double> xs, wx, ys, wy;
  auto axis = [&](double a, double b, std::vector<double>& x, std::vector<double>& w) {
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        x.push_back(a + p * h + 0.5 * h * (rule.x[i] + 1.0));
        w.push_back(0.5 * h * rule.w[i]);
      }
  };
  axis(lo.x, hi.x, xs, wx);
  axis(lo.y, hi.y, ys, wy);
  std::vector<WeightedPoint> out;
  out.reserve(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) out.push_back({{xs[i], ys[j]}, wx[i] * wy[j]});
  return out;
}

/// Angular nodes: `intervals` equal pieces of [0, 2 pi) with the rule on each.
struct AngularNodes {
  std::vector<double> phi;
  std::vector<double> w;
};

inline AngularNodes angular_nodes(int intervals, const Rule& rule) {
  AngularNodes a;
  const double h = 2.0 * std::numbers::pi / intervals;
  for (int k = 0; k < intervals; ++k)
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      a.phi.push_back(k * h + 0.5 * h * (rule.x[i] + 1.0));
      a.w.push_back(0.5 * h * rule.w[i]);
    }
  return a;
}

/// Polar integral of f(r, phi) r dr dphi over r in [inner(phi), outer(phi)].
template <class Inner, class Outer, class F>
double polar(const AngularNodes& ang, const Rule& radial, int panels, Inner&& inner, Outer&& outer, F&& f) {
  double total = 0.0;
  for (std::size_t k = 0; k < ang.phi.size(); ++k) {
    const double phi = ang.phi[k];
    const double a = inner(phi), b = outer(phi);
    if (!(b > a)) continue;
    total += ang.w[k] * integrate(radial, a, b, panels, [&](double r) { return f(r, phi) * r; });
  }
  return total;
}

}  // namespace robinlab::quadrature
