// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "robinlab/robinlab.hpp"

using namespace robinlab;

namespace {

constexpr double kPi = std::numbers::pi;
const Point kCenter{0.5, 0.5};
const std::vector<double> kSweep{0.2, 0.1, 0.05, 0.025};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
}

bool check(bool ok, const std::string& what) {
  std::printf("  [%s] %s\n", ok ? "ok" : "violated", what.c_str());
  return ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> lowest(const TriMesh& m, BcMode mode, double gamma, int k) {
  const auto f = assemble(m, mode, gamma);
  SolverConfig cfg;
  cfg.k = k;
  cfg.keep_vectors = false;
  return solve_lowest(robin_form(f), f.M, cfg).eigenvalues;
}

double max_relative(const std::vector<double>& a, const std::vector<double>& b, std::size_t k) {
  double m = 0.0;
  for (std::size_t i = 0; i < k; ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return m;
}

// 1. Separable oracle agreement on the unit square.
bool criterion1() {
  Clock clock;
  bool ok = true;
  const auto oracle = oracle::rect_eigs(1.0, 1.0, oracle::Bc::Dirichlet, 5);
  const TriMesh fine = triangulate_outer(OuterDomain::unit_square(), 0.02);
  const auto fem = lowest(fine, BcMode::DirichletOuter, 0.0, 5);
  for (std::size_t i = 0; i < 5; ++i) note("lambda_%zu fem %.8f oracle %.8f", i + 1, fem[i], oracle.eigenvalues[i]);
  const double rel = max_relative(fem, oracle.eigenvalues, 5);
  ok &= check(rel < 0.01, fmt("max relative error of first 5 at h=0.02: %.3e < 1e-2", rel));

  TriMesh m = triangulate_outer(OuterDomain::unit_square(), 0.08);
  std::vector<double> h, err;
  for (int level = 0; level < 4; ++level) {
    if (level > 0) m = refine(m);
    const double l1 = lowest(m, BcMode::DirichletOuter, 0.0, 1)[0];
    h.push_back(m.h_max);
    err.push_back(std::abs(l1 - oracle.eigenvalues[0]));
    note("h_max %.5f lambda_1 error %.4e", m.h_max, err.back());
  }
  const double slope = fit_rate(h, err).slope;
  ok &= check(std::abs(slope - 2.0) <= 0.3, fmt("h-convergence slope of lambda_1 over three refinements: %.3f in 2.0 +- 0.3", slope));
  ok &= check(clock.seconds() < 60.0, fmt("runtime %.1f s < 60 s", clock.seconds()));
  return ok;
}

// 2. Bessel oracle agreement on the unit disk.
bool criterion2() {
  Clock clock;
  bool ok = true;
  const auto oracle = oracle::disk_eigs(1.0, oracle::Bc::Dirichlet, 1);
  const double fem = lowest(triangulate_outer(OuterDomain::disk({0, 0}, 1.0), 0.02), BcMode::DirichletOuter, 0.0, 1)[0];
  note("lambda_1 fem %.8f oracle %.12f (j01 = %.15f)", fem, oracle.eigenvalues[0], std::sqrt(oracle.eigenvalues[0]));
  const double rel = std::abs(fem - oracle.eigenvalues[0]) / oracle.eigenvalues[0];
  ok &= check(rel < 0.01, fmt("relative error %.3e < 1e-2", rel));
  ok &= check(oracle.max_residual < 1e-10, fmt("oracle residual %.3e < 1e-10", oracle.max_residual));
  ok &= check(clock.seconds() < 60.0, fmt("runtime %.1f s < 60 s", clock.seconds()));
  return ok;
}

// 3. Robin annulus cross-validation and the large-gamma Dirichlet limit.
bool criterion3() {
  Clock clock;
  bool ok = true;
  const double eps = 0.1, h = 0.02;
  const auto d = make_punctured(OuterDomain::disk({0, 0}, 1.0), HoleSpec::disk({0, 0}, eps));
  const TriMesh m = triangulate_matched(d, {h, default_grading(h, eps)}).punctured;
  note("annulus mesh: %zu vertices, h_max %.4f", m.num_vertices(), m.h_max);

  const auto robin = oracle::annulus_robin_eigs(eps, 1.0, 1.0, oracle::Bc::Neumann, 5);
  const auto fem = lowest(m, BcMode::NeumannOuter, 1.0, 5);
  for (std::size_t i = 0; i < 5; ++i) note("gamma=1 lambda_%zu fem %.6f oracle %.6f", i + 1, fem[i], robin.eigenvalues[i]);
  const double rel = max_relative(fem, robin.eigenvalues, 5);
  ok &= check(rel < 0.02, fmt("gamma=1 max relative error %.3e < 2e-2", rel));

  const auto dir = oracle::annulus_dirichlet_eigs(eps, 1.0, oracle::Bc::Neumann, 5);
  const auto stiff = lowest(m, BcMode::NeumannOuter, 1e8, 5);
  for (std::size_t i = 0; i < 5; ++i)
    note("gamma=1e8 lambda_%zu fem %.6f dirichlet-inner oracle %.6f", i + 1, stiff[i], dir.eigenvalues[i]);
  const double rel_d = max_relative(stiff, dir.eigenvalues, 5);
  ok &= check(rel_d < 0.02, fmt("gamma=1e8 max relative error vs Dirichlet inner %.3e < 2e-2", rel_d));
  ok &= check(clock.seconds() < 120.0, fmt("runtime %.1f s < 120 s", clock.seconds()));
  return ok;
}

ExperimentConfig sweep_config(BcMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.epsilons = kSweep;
  c.alpha = 1.0;
  c.k = 5;
  return c;
}

// 4. Spectral convergence along the sweep, both outer conditions.
bool criterion4() {
  Clock clock;
  bool ok = true;
  for (BcMode mode : {BcMode::NeumannOuter, BcMode::DirichletOuter}) {
    const auto r = run_sweep(sweep_config(mode));
    note("mode %s, reference %s, window %.4f", std::string(to_string(mode)).c_str(), r.reference_source.c_str(), r.window);
    bool solved = true;
    for (const auto& row : r.rows) {
      solved &= row.ok();
      std::string errs;
      for (double e : row.errors) errs += fmt(" %.4e", e);
      note("eps %.4f gamma %.4f dbar %.4e errors%s", row.epsilon, row.gamma, row.dbar, errs.c_str());
    }
    const std::string m(to_string(mode));
    ok &= check(solved, m + ": every epsilon solved");
    for (std::size_t k = 0; k < r.monotone_errors.size(); ++k)
      ok &= check(r.monotone_errors[k], fmt("%s: error of lambda_%zu decreases monotonically in epsilon", m.c_str(), k + 1));
    ok &= check(r.monotone_dbar, m + ": dbar decreases monotonically in epsilon");
    ok &= check(r.dbar_rate.slope > 0.3, fmt("%s: dbar log-log slope %.3f > 0.3", m.c_str(), r.dbar_rate.slope));
  }
  ok &= check(clock.seconds() < 600.0, fmt("runtime %.1f s < 600 s", clock.seconds()));
  return ok;
}

CertificationResult certification(BcMode mode) { return run_certification(sweep_config(mode)); }

// 5. Exact closeness conditions at every swept epsilon.
bool criterion5() {
  Clock clock;
  bool ok = true;
  for (BcMode mode : {BcMode::NeumannOuter, BcMode::DirichletOuter}) {
    const auto c = certification(mode);
    const std::string m(to_string(mode));
    ok &= check(c.failures.empty(), m + ": certification ran at every epsilon");
    for (const auto& f : c.failures) note("%s", f.c_str());
    for (const auto& r : c.reports) {
      note("%s eps %.4f: d1 %.2e d2 %.2e d3 %.2e boundedness factor %.6f", m.c_str(), r.epsilon, r.delta[0], r.delta[1],
           r.delta[2], r.boundedness_factor);
      ok &= check(r.delta[0] <= 1e-12 && r.delta[1] <= 1e-12 && r.delta[2] <= 1e-12,
                  fmt("%s eps %.4f: d1, d2, d3 <= 1e-12", m.c_str(), r.epsilon));
      ok &= check(r.boundedness_factor <= 2.0, fmt("%s eps %.4f: boundedness factor %.6f <= 2", m.c_str(), r.epsilon,
                                                   r.boundedness_factor));
    }
  }
  ok &= check(clock.seconds() < 600.0, fmt("runtime %.1f s < 600 s", clock.seconds()));
  return ok;
}

// 6. Scaling of the measured closeness ratios.
bool criterion6() {
  Clock clock;
  bool ok = true;
  for (BcMode mode : {BcMode::NeumannOuter, BcMode::DirichletOuter}) {
    const auto c = certification(mode);
    const std::string m(to_string(mode));
    if (!check(c.failures.empty() && c.reports.size() == kSweep.size(), m + ": certification ran at every epsilon")) {
      ok = false;
      continue;
    }
    std::vector<double> eps, d5, d6, d7;
    for (const auto& r : c.reports) {
      eps.push_back(r.epsilon), d5.push_back(r.delta[4]), d6.push_back(r.delta[5]), d7.push_back(r.delta[6]);
      note("%s eps %.4f: d5' %.4e d6 %.4e d7 %.4e envelope %.4e / %.4e", m.c_str(), r.epsilon, r.delta[4], r.delta[5],
           r.delta[6], r.envelope_56, r.envelope_7);
    }
    const double s5 = fit_rate(eps, d5).slope, s6 = fit_rate(eps, d6).slope, s7 = fit_rate(eps, d7).slope;
    ok &= check(std::abs(s5 - 0.5) <= 0.2, fmt("%s: d5' slope %.3f in 0.5 +- 0.2", m.c_str(), s5));
    ok &= check(std::abs(s6 - 0.5) <= 0.2, fmt("%s: d6 slope %.3f in 0.5 +- 0.2", m.c_str(), s6));
    ok &= check(s7 >= 1.0 / 6.0 - 0.05, fmt("%s: d7 slope %.3f >= 1/6 - 0.05", m.c_str(), s7));
  }
  ok &= check(clock.seconds() < 600.0, fmt("runtime %.1f s < 600 s", clock.seconds()));
  return ok;
}

// 7. Auxiliary inequality suite.
bool criterion7() {
  Clock clock;
  bool ok = true;
  const lab::Rect square{{0, 0}, {1, 1}};

  const std::vector<std::pair<int, int>> modes{{1, 0}, {0, 1}, {1, 1}, {2, 0}, {2, 1}, {1, 2}, {2, 2}, {3, 1}, {0, 3}};
  std::vector<TestFunction> zs;
  for (auto [m, n] : modes) zs.push_back(TestFunction::single(trig_atom(m, n, {0, 0}, {1, 1}, false)));
  zs.push_back(TestFunction{{trig_atom(1, 0, {0, 0}, {1, 1}, false, 0.7), trig_atom(2, 3, {0, 0}, {1, 1}, false, -0.4),
                             trig_atom(0, 0, {0, 0}, {1, 1}, false, 1.5)}});
  double worst = 0.0;
  for (const auto& z : zs) {
    const auto d = lab::check_delta_prime(z, square);
    worst = std::max(worst, std::abs(d.margin - d.two_grad) / d.two_grad);
  }
  ok &= check(worst <= 1e-8, fmt("delta-prime margin equals 2|grad z|^2 on %zu functions: worst relative gap %.3e <= 1e-8",
                                 zs.size(), worst));

  const auto d = make_punctured(OuterDomain::unit_square(), HoleSpec::disk(kCenter, 0.025));
  const lab::Rect pi = lab::pi_square(d);
  const auto family = standard_f_set(d, BcMode::NeumannOuter);
  std::vector<double> c2;
  for (double radius : {0.2, 0.1, 0.05}) {
    double c = 0.0;
    for (const auto& f : family) c = std::max(c, lab::check_magnetic(f, kCenter, radius, pi));
    c2.push_back(c);
    note("magnetic ratio sup at radius %.3f: %.6f", radius, c);
  }
  const double hi = *std::max_element(c2.begin(), c2.end()), lo = *std::min_element(c2.begin(), c2.end());
  ok &= check(std::isfinite(hi), "magnetic constant finite");
  ok &= check((hi - lo) / hi < 0.5, fmt("magnetic constant variation %.1f%% < 50%%", 100.0 * (hi - lo) / hi));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> M(0, 4);
  const double eps = 0.1;
  int satisfied = 0;
  for (int t = 0; t < 20; ++t) {
    TestFunction u;
    for (int j = 0; j < 4; ++j) u.atoms.push_back(bessel_atom(M(rng), 2.0 + 8.0 * std::abs(U(rng)), kCenter, U(rng) > 0, U(rng)));
    u.atoms.push_back(trig_atom(M(rng), M(rng), {0, 0}, {1, 1}, false, U(rng)));
    u.atoms.push_back(poly_atom(M(rng), M(rng), kCenter, 10.0 * U(rng)));
    const auto rc = lab::choose_intermediate_radius(std::vector<TestFunction>{u}, kCenter, eps);
    const auto [A, B] = lab::radius_profile(u, kCenter, eps);
    const std::size_t i = static_cast<std::size_t>(std::find(rc.grid.begin(), rc.grid.end(), rc.radius) - rc.grid.begin());
    const bool good = rc.radius > eps && rc.radius < 2 * eps && i < A.size() && A[i] <= B;
    satisfied += good;
  }
  ok &= check(satisfied == 20, fmt("intermediate radius satisfies the circle-slice bound on %d of 20 random fields", satisfied));
  ok &= check(clock.seconds() < 120.0, fmt("runtime %.1f s < 120 s", clock.seconds()));
  return ok;
}

// 8. Metric properties of hausdorff and dbar.
bool criterion8() {
  bool ok = true;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  std::uniform_int_distribution<int> N(1, 10);
  auto sample = [&] {
    std::vector<double> v(static_cast<std::size_t>(N(rng)));
    for (double& x : v) x = U(rng);
    return v;
  };
  int tri = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto A = sample(), B = sample(), C = sample();
    const double ab = hausdorff(A, B), bc = hausdorff(B, C), ac = hausdorff(A, C);
    tri += ac <= (ab + bc) * (1.0 + 1e-15);
  }
  ok &= check(tri == 1000, fmt("triangle inequality on %d of 1000 random triples", tri));
  int dom = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto A = sample(), B = sample();
    dom += dbar({A, 50.0, SpectrumSource::Fem}, {B, 50.0, SpectrumSource::Fem}).value <= hausdorff(A, B);
  }
  ok &= check(dom == 1000, fmt("dbar <= hausdorff on %d of 1000 random pairs in [0, 50]", dom));

  ok &= check(hausdorff({1, 2}, {1, 2}) == 0.0, "hausdorff({1,2},{1,2}) = 0");
  ok &= check(hausdorff({0}, {3}) == 3.0, "hausdorff({0},{3}) = 3");
  ok &= check(hausdorff({1, 2}, {1.1, 2.2}) == std::max(1.1 - 1.0, 2.2 - 2.0), "hausdorff({1,2},{1.1,2.2}) = 0.2");
  ok &= check(dbar({{0}, 5, SpectrumSource::Fem}, {{1}, 5, SpectrumSource::Fem}).value == 0.5, "dbar({0},{1}) = 1/2");
  ok &= check(dbar({{0, 1, 4}, 5, SpectrumSource::Fem}, {{0, 1, 4}, 5, SpectrumSource::Fem}).value == 0.0,
              "dbar(A, A) = 0");
  const std::vector<double> A{0, 1, 4}, B{0.1, 1.2, 4.5};
  double brute = 0.0;
  for (const auto* X : {&A, &B}) {
    const auto* Y = X == &A ? &B : &A;
    for (double x : *X) {
      double best = INFINITY;
      for (double y : *Y) best = std::min(best, std::abs(1.0 / (x + 1.0) - 1.0 / (y + 1.0)));
      brute = std::max(brute, best);
    }
  }
  ok &= check(dbar({A, 5, SpectrumSource::Fem}, {B, 5, SpectrumSource::Fem}).value == brute,
              "dbar({0,1,4},{0.1,1.2,4.5}) equals the brute-force double loop");
  return ok;
}

struct Criterion {
  const char* title;
  std::function<bool()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"separable oracle agreement", criterion1},
      {"Bessel oracle agreement", criterion2},
      {"Robin annulus cross-validation", criterion3},
      {"spectral convergence sweep", criterion4},
      {"exact closeness conditions", criterion5},
      {"closeness ratio scaling", criterion6},
      {"auxiliary inequality suite", criterion7},
      {"metric properties", criterion8},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  if (only < 0 || only > static_cast<int>(criteria().size())) {
    std::fprintf(stderr, "usage: acceptance [--criterion 1..%zu]\n", criteria().size());
    return 3;
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria().size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    std::printf("criterion %zu: %s\n", i + 1, criteria()[i].title);
    std::fflush(stdout);
    bool ok = false;
    try {
      ok = criteria()[i].run();
    } catch (const std::exception& e) {
      std::printf("  error: %s\n", e.what());
    }
    std::printf("%s criterion %zu %s\n", ok ? "PASS" : "FAIL", i + 1, criteria()[i].title);
    std::fflush(stdout);
    all &= ok;
  }
  return all ? 0 : 1;
}
