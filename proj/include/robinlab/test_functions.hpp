#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "robinlab/fem.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/oracle.hpp"

namespace robinlab {

enum class Family { TrigOnSquare, BesselRadial, Polynomial, Bump };

inline constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::TrigOnSquare: return "trig-on-square";
    case Family::BesselRadial: return "bessel-radial";
    case Family::Polynomial: return "polynomial";
    case Family::Bump: return "bump";
  }
  return "?";
}

/// One closed-form term.
///   TrigOnSquare: c cos(m pi X / a) cos(n pi Y / b), or sin sin when `sine`; X = x - origin.
///   BesselRadial: c J_m(k r) cos(m phi), or sin(m phi) when `sine`; polar about origin.
///   Polynomial:   c X^m Y^n.
///   Bump:         c (1 - r^2 / a^2)^3 inside r < a, else 0.
struct Atom {
  Family family = Family::TrigOnSquare;
  double coeff = 1.0;
  Point origin;
  double a = 1.0;
  double b = 1.0;
  int m = 0;
  int n = 0;
  bool sine = false;
  double k = 0.0;
};

struct Eval {
  double value = 0.0;
  Point grad;
  double lap = 0.0;
};

namespace detail {

inline Eval eval_trig(const Atom& t, Point p) {
  const double kx = t.m * std::numbers::pi / t.a, ky = t.n * std::numbers::pi / t.b;
  const double X = p.x - t.origin.x, Y = p.y - t.origin.y;
  double fx, fy, dfx, dfy;
  if (t.sine) {
    fx = std::sin(kx * X), dfx = kx * std::cos(kx * X);
    fy = std::sin(ky * Y), dfy = ky * std::cos(ky * Y);
  } else {
    fx = std::cos(kx * X), dfx = -kx * std::sin(kx * X);
    fy = std::cos(ky * Y), dfy = -ky * std::sin(ky * Y);
  }
  const double v = t.coeff * fx * fy;
  return {v, {t.coeff * dfx * fy, t.coeff * fx * dfy}, -(kx * kx + ky * ky) * v};
}

inline Eval eval_bessel(const Atom& t, Point p) {
  const Point d = p - t.origin;
  const double r = norm(d);
  const double phi = std::atan2(d.y, d.x);
  const double ang = t.sine ? std::sin(t.m * phi) : std::cos(t.m * phi);
  const double dang = t.sine ? t.m * std::cos(t.m * phi) : -t.m * std::sin(t.m * phi);
  const double J = oracle::bessel_j(t.m, t.k * r);
  const double v = t.coeff * J * ang;
  Point g{0.0, 0.0};
  if (r < 1e-14) {
    if (t.m == 1) g = t.sine ? Point{0.0, 0.5 * t.coeff * t.k} : Point{0.5 * t.coeff * t.k, 0.0};
  } else {
    const double dr = t.coeff * t.k * oracle::bessel_jp(t.m, t.k * r) * ang;
    const double dphi = t.coeff * J * dang / r;
    const Point er{d.x / r, d.y / r}, ephi{-d.y / r, d.x / r};
    g = dr * er + dphi * ephi;
  }
  return {v, g, -t.k * t.k * v};
}

inline double ipow(double x, int p) { return p < 0 ? 0.0 : std::pow(x, p); }

inline Eval eval_poly(const Atom& t, Point p) {
  const double X = p.x - t.origin.x, Y = p.y - t.origin.y;
  const int a = t.m, b = t.n;
  const double c = t.coeff;
  const double v = c * ipow(X, a) * ipow(Y, b);
  const Point g{c * a * ipow(X, a - 1) * ipow(Y, b), c * b * ipow(X, a) * ipow(Y, b - 1)};
  const double lap = c * (a * (a - 1) * ipow(X, a - 2) * ipow(Y, b) + b * (b - 1) * ipow(X, a) * ipow(Y, b - 2));
  return {v, g, lap};
}

inline Eval eval_bump(const Atom& t, Point p) {
  const Point d = p - t.origin;
  const double rho2 = t.a * t.a;
  const double s = dot(d, d) / rho2;
  if (s >= 1.0) return {};
  const double g0 = (1 - s) * (1 - s) * (1 - s), g1 = -3 * (1 - s) * (1 - s), g2 = 6 * (1 - s);
  const double c = t.coeff;
  return {c * g0, (2.0 * c * g1 / rho2) * d, c * (g2 * 4.0 * dot(d, d) / (rho2 * rho2) + g1 * 4.0 / rho2)};
}

}  // namespace detail

inline Eval evaluate(const Atom& t, Point p) {
  switch (t.family) {
    case Family::TrigOnSquare: return detail::eval_trig(t, p);
    case Family::BesselRadial: return detail::eval_bessel(t, p);
    case Family::Polynomial: return detail::eval_poly(t, p);
    case Family::Bump: return detail::eval_bump(t, p);
  }
  return {};
}

/// Finite sum of atoms with value, gradient and Laplacian in closed form.
struct TestFunction {
  std::vector<Atom> atoms;

  Eval eval(Point p) const {
    Eval e;
    for (const auto& a : atoms) {
      const Eval t = evaluate(a, p);
      e.value += t.value, e.grad = e.grad + t.grad, e.lap += t.lap;
    }
    return e;
  }
  double value(Point p) const { return eval(p).value; }
  Point gradient(Point p) const { return eval(p).grad; }
  double laplacian(Point p) const { return eval(p).lap; }

  std::string_view tag() const {
    if (atoms.empty()) return "polynomial";
    for (const auto& a : atoms)
      if (a.family != atoms.front().family) return "mixed";
    return to_string(atoms.front().family);
  }

  std::string descriptor() const {
    std::string s;
    char buf[160];
    for (const auto& a : atoms) {
      std::snprintf(buf, sizeof buf, "%s%s(c=%.6g,m=%d,n=%d,a=%.6g,b=%.6g,k=%.6g,o=(%.6g,%.6g)%s)", s.empty() ? "" : "+",
                    std::string(to_string(a.family)).c_str(), a.coeff, a.m, a.n, a.a, a.b, a.k, a.origin.x, a.origin.y,
                    a.sine ? ",sin" : "");
      s += buf;
    }
    return s;
  }

  static TestFunction single(Atom a) { return {{a}}; }
  static TestFunction constant(double c) { return single({Family::Polynomial, c, {}, 1, 1, 0, 0}); }
};

inline Atom trig_atom(int m, int n, Point lo, Point hi, bool sine, double c = 1.0) {
  return {Family::TrigOnSquare, c, lo, hi.x - lo.x, hi.y - lo.y, m, n, sine, 0.0};
}

inline Atom bessel_atom(int m, double k, Point center, bool sine = false, double c = 1.0) {
  return {Family::BesselRadial, c, center, 1.0, 1.0, m, 0, sine, k};
}

inline Atom poly_atom(int px, int py, Point origin = {}, double c = 1.0) {
  return {Family::Polynomial, c, origin, 1.0, 1.0, px, py, false, 0.0};
}

inline Atom bump_atom(Point center, double radius, double c = 1.0) {
  return {Family::Bump, c, center, radius, 1.0, 0, 0, false, 0.0};
}

/// Separable family on the bounding box: cos cos with orders 0..n-1 (Neumann) or sin sin with 1..n (Dirichlet).
inline std::vector<TestFunction> trig_family(Point lo, Point hi, BcMode mode, int n = 5) {
  std::vector<TestFunction> out;
  const bool sine = mode == BcMode::DirichletOuter;
  const int first = sine ? 1 : 0;
  for (int i = first; i < first + n; ++i)
    for (int j = first; j < first + n; ++j) out.push_back(TestFunction::single(trig_atom(i, j, lo, hi, sine)));
  return out;
}

/// Smooth test set for the operator-domain side: trig family plus bumps about the hole center.
inline std::vector<TestFunction> standard_f_set(const PuncturedDomain& d, BcMode mode) {
  const auto [lo, hi] = d.outer.bounds();
  auto out = trig_family(lo, hi, mode);
  const double rho = std::min(0.3, 0.9 * d.outer.boundary_distance(d.hole.center));
  out.push_back(TestFunction::single(bump_atom(d.hole.center, rho)));
  out.push_back(TestFunction::single(bump_atom(d.hole.center, 0.5 * rho)));
  return out;
}

}  // namespace robinlab
