#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "robinlab/error.hpp"

namespace robinlab::oracle {

enum class Bc { Dirichlet, Neumann };

inline constexpr std::string_view to_string(Bc b) { return b == Bc::Dirichlet ? "dirichlet" : "neumann"; }

struct Eigenvalue {
  double value = 0.0;
  int mode = 0;            // angular order (disk, annulus) or first index (rectangle)
  int index = 0;           // root number or second index
  double residual = 0.0;   // normalized dispersion-relation residual
};

struct AnalyticSpectrum {
  std::vector<double> eigenvalues;  // ascending, repeated by multiplicity
  std::vector<Eigenvalue> detail;   // one entry per listed eigenvalue
  std::string descriptor;
  double max_residual = 0.0;
  std::vector<std::string> warnings;
};

// Bessel functions of integer order (C++17 special math) and their derivatives by recurrence.
inline double bessel_j(int m, double x) { return std::cyl_bessel_j(static_cast<double>(m), x); }
inline double bessel_y(int m, double x) { return std::cyl_neumann(static_cast<double>(m), x); }
inline double bessel_i(int m, double x) { return std::cyl_bessel_i(static_cast<double>(m), x); }
inline double bessel_k(int m, double x) { return std::cyl_bessel_k(static_cast<double>(m), x); }

inline double bessel_jp(int m, double x) {
  return m == 0 ? -bessel_j(1, x) : 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}
inline double bessel_yp(int m, double x) {
  return m == 0 ? -bessel_y(1, x) : 0.5 * (bessel_y(m - 1, x) - bessel_y(m + 1, x));
}
inline double bessel_ip(int m, double x) {
  return m == 0 ? bessel_i(1, x) : 0.5 * (bessel_i(m - 1, x) + bessel_i(m + 1, x));
}
inline double bessel_kp(int m, double x) {
  return m == 0 ? -bessel_k(1, x) : -0.5 * (bessel_k(m - 1, x) + bessel_k(m + 1, x));
}

/// Roots of f on (lo, hi) by sign scan with the given step and bisection to `xtol`.
inline std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi, double step,
                                      double xtol = 1e-12) {
  std::vector<double> roots;
  double a = lo, fa = f(a);
  const auto n = static_cast<long>(std::ceil((hi - lo) / step));
  for (long i = 1; i <= n; ++i) {
    const double b = std::min(hi, lo + static_cast<double>(i) * step);
    const double fb = f(b);
    if (std::isfinite(fa) && std::isfinite(fb)) {
      if (fb == 0.0) {
        roots.push_back(b);
      } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
        double x0 = a, x1 = b, f0 = fa;
        for (int it = 0; it < 200 && x1 - x0 > xtol; ++it) {
          const double xm = 0.5 * (x0 + x1);
          const double fm = f(xm);
          if (fm == 0.0) {
            x0 = x1 = xm;
            break;
          }
          if ((fm < 0.0) == (f0 < 0.0)) x0 = xm, f0 = fm;
          else x1 = xm;
        }
        roots.push_back(0.5 * (x0 + x1));
      }
    }
    a = b, fa = fb;
  }
  return roots;
}

namespace detail {

inline void finish(AnalyticSpectrum& s, std::vector<Eigenvalue> all, std::size_t count) {
  std::stable_sort(all.begin(), all.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.value < b.value; });
  if (all.size() > count) all.resize(count);
  for (const auto& e : all) {
    s.eigenvalues.push_back(e.value);
    s.max_residual = std::max(s.max_residual, e.residual);
  }
  s.detail = std::move(all);
}

inline void check_residual(double r, const std::string& what) {
  if (!(r < 1e-10)) fail(ErrorCode::RootBracketFailure, what + ": root residual " + std::to_string(r));
}

/// Adds 'mult' copies of an eigenvalue.
inline void push(std::vector<Eigenvalue>& v, Eigenvalue e, int mult) {
  for (int k = 0; k < mult; ++k) v.push_back(e);
}

/// Two-dimensional Weyl estimate of the eigenvalue count below lambda.
inline double weyl_count(double area, double perimeter, double lambda, Bc bc) {
  const double s = bc == Bc::Dirichlet ? -1.0 : 1.0;
  return area * lambda / (4.0 * std::numbers::pi) + s * perimeter * std::sqrt(lambda) / (4.0 * std::numbers::pi);
}

inline void weyl_warning(AnalyticSpectrum& s, double area, double perimeter, Bc bc) {
  if (s.eigenvalues.size() < 8) return;
  const double lam = s.eigenvalues.back();
  const double expected = weyl_count(area, perimeter, lam, bc);
  const auto found = static_cast<double>(s.eigenvalues.size());
  if (found < 0.6 * expected)
    s.warnings.push_back("MissedRootWarning: " + std::to_string(found) + " roots below " + std::to_string(lam) +
                         ", Weyl estimate " + std::to_string(expected));
}

}  // namespace detail

/// Separable spectrum of the rectangle (0,a) x (0,b).
inline AnalyticSpectrum rect_eigs(double a, double b, Bc bc, std::size_t count) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::InvalidGeometry, "rectangle sides must be positive");
  AnalyticSpectrum s;
  s.descriptor = "rectangle a=" + std::to_string(a) + " b=" + std::to_string(b) + " bc=" + std::string(to_string(bc));
  const int start = bc == Bc::Dirichlet ? 1 : 0;
  const int stop = static_cast<int>(count) + 2;
  std::vector<Eigenvalue> all;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int m = start; m <= stop; ++m)
    for (int n = start; n <= stop; ++n)
      all.push_back({pi2 * (m * m / (a * a) + n * n / (b * b)), m, n, 0.0});
  detail::finish(s, std::move(all), count);
  return s;
}

/// Disk of radius R: squared Bessel zeros (Dirichlet) or squared zeros of J_m' plus 0 (Neumann).
inline AnalyticSpectrum disk_eigs(double R, Bc bc, std::size_t count) {
  if (!(R > 0.0)) fail(ErrorCode::InvalidGeometry, "radius must be positive");
  AnalyticSpectrum s;
  s.descriptor = "disk R=" + std::to_string(R) + " bc=" + std::string(to_string(bc));
  for (double xmax = 12.0;; xmax *= 1.5) {
    std::vector<Eigenvalue> all;
    if (bc == Bc::Neumann) all.push_back({0.0, 0, 0, 0.0});
    for (int m = 0; m <= static_cast<int>(xmax) + 1; ++m) {
      std::function<double(double)> f;
      if (bc == Bc::Dirichlet) f = [m](double x) { return bessel_j(m, x); };
      else f = [m](double x) { return bessel_jp(m, x); };
      const auto roots = scan_roots(f, 1e-3, xmax, 1.0 / 2000.0);
      int idx = 0;
      for (double x : roots) {
        const double scale = std::max(std::abs(bc == Bc::Dirichlet ? bessel_jp(m, x) : bessel_j(m, x)), 1e-300);
        const double res = std::abs(f(x)) / std::max(1.0, scale);
        detail::check_residual(res, "disk root");
        detail::push(all, {x * x / (R * R), m, ++idx, res}, m == 0 ? 1 : 2);
      }
    }
    if (all.size() >= count) {
      detail::finish(s, std::move(all), count);
      break;
    }
  }
  detail::weyl_warning(s, std::numbers::pi * R * R, 2.0 * std::numbers::pi * R, bc);
  return s;
}

enum class Inner { Robin, Dirichlet };

namespace detail {

/// Normalized 2x2 determinant of the inner and outer boundary rows for angular order m.
inline double annulus_det(int m, double kappa, double eps, double R, double gamma, Inner inner, Bc outer,
                          bool modified, double* residual_scale = nullptr) {
  double a1, a2, b1, b2;
  const double xe = kappa * eps, xR = kappa * R;
  if (!modified) {
    if (inner == Inner::Robin) {
      a1 = -kappa * bessel_jp(m, xe) + gamma * bessel_j(m, xe);
      a2 = -kappa * bessel_yp(m, xe) + gamma * bessel_y(m, xe);
    } else {
      a1 = bessel_j(m, xe);
      a2 = bessel_y(m, xe);
    }
    if (outer == Bc::Dirichlet) b1 = bessel_j(m, xR), b2 = bessel_y(m, xR);
    else b1 = bessel_jp(m, xR), b2 = bessel_yp(m, xR);
  } else {
    a1 = -kappa * bessel_ip(m, xe) + gamma * bessel_i(m, xe);
    a2 = -kappa * bessel_kp(m, xe) + gamma * bessel_k(m, xe);
    if (outer == Bc::Dirichlet) b1 = bessel_i(m, xR), b2 = bessel_k(m, xR);
    else b1 = bessel_ip(m, xR), b2 = bessel_kp(m, xR);
  }
  const double na = std::max(std::abs(a1), std::abs(a2)), nb = std::max(std::abs(b1), std::abs(b2));
  if (!(na > 0.0) || !(nb > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) return std::nan("");
  a1 /= na, a2 /= na, b1 /= nb, b2 /= nb;
  if (residual_scale) *residual_scale = std::hypot(a1, a2) * std::hypot(b1, b2);
  return a1 * b2 - a2 * b1;
}

inline AnalyticSpectrum annulus(double eps, double R, double gamma, Inner inner, Bc outer, std::size_t count) {
  if (!(eps > 0.0) || !(R > eps)) fail(ErrorCode::InvalidGeometry, "annulus needs 0 < eps < R");
  AnalyticSpectrum s;
  s.descriptor = "annulus eps=" + std::to_string(eps) + " R=" + std::to_string(R) +
                 (inner == Inner::Robin ? " inner=robin gamma=" + std::to_string(gamma) : std::string(" inner=dirichlet")) +
                 " outer=" + std::string(to_string(outer));
  const double step = 1.0 / 2000.0;
  for (double kmax = 12.0 / R;; kmax *= 1.5) {
    std::vector<Eigenvalue> all;
    if (inner == Inner::Robin && gamma == 0.0 && outer == Bc::Neumann) all.push_back({0.0, 0, 0, 0.0});
    for (int m = 0; m <= static_cast<int>(kmax * R) + 2; ++m) {
      for (int modified = 0; modified < 2; ++modified) {
        if (modified && !(inner == Inner::Robin && gamma < 0.0)) continue;
        const double hi = modified ? 2.0 * std::abs(gamma) + 10.0 : kmax;
        const auto f = [&](double k) { return annulus_det(m, k, eps, R, gamma, inner, outer, modified != 0); };
        const auto roots = scan_roots(f, 1e-6, hi, step);
        int idx = 0;
        for (double k : roots) {
          double sc = 1.0;
          const double d = annulus_det(m, k, eps, R, gamma, inner, outer, modified != 0, &sc);
          const double res = std::abs(d) / std::max(sc, 1e-300);
          // a sign change across a non-finite sample is not a root
          if (!(res < 1e-6)) continue;
          const double lam = modified ? -k * k : k * k;
          detail::push(all, {lam, m, ++idx, std::min(res, std::abs(d))}, m == 0 ? 1 : 2);
        }
      }
    }
    std::stable_sort(all.begin(), all.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.value < b.value; });
    if (all.size() >= count && all[count - 1].value < kmax * kmax * 0.99) {
      detail::finish(s, std::move(all), count);
      break;
    }
    if (kmax > 1e4) fail(ErrorCode::RootBracketFailure, "annulus root search did not collect enough roots");
  }
  for (const auto& e : s.detail) detail::check_residual(e.residual, "annulus root");
  const double area = std::numbers::pi * (R * R - eps * eps);
  detail::weyl_warning(s, area, 2.0 * std::numbers::pi * (R + eps), outer);
  return s;
}

}  // namespace detail

/// Annulus eps < r < R with the Robin condition -w'(eps) + gamma w(eps) = 0 on the inner circle.
inline AnalyticSpectrum annulus_robin_eigs(double eps, double R, double gamma, Bc outer, std::size_t count) {
  return detail::annulus(eps, R, gamma, Inner::Robin, outer, count);
}

/// Annulus with a Dirichlet inner circle.
inline AnalyticSpectrum annulus_dirichlet_eigs(double eps, double R, Bc outer, std::size_t count) {
  return detail::annulus(eps, R, 0.0, Inner::Dirichlet, outer, count);
}

/// FEM values without an oracle value within rel_tol.
inline std::vector<std::string> missing_partners(const AnalyticSpectrum& s, const std::vector<double>& fem,
                                                 double rel_tol) {
  std::vector<std::string> out;
  if (s.eigenvalues.empty()) return out;
  const double cap = s.eigenvalues.back();
  for (double v : fem) {
    if (v > cap) continue;
    bool ok = false;
    for (double o : s.eigenvalues)
      if (std::abs(o - v) <= rel_tol * std::max(1.0, std::abs(o))) ok = true;
    if (!ok) out.push_back("MissedRootWarning: FEM value " + std::to_string(v) + " has no oracle partner");
  }
  return out;
}

}  // namespace robinlab::oracle
