#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robinlab/robinlab.hpp"

namespace {

using namespace robinlab;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitConfig = 3;

struct Overrides {
  std::string config;
  std::string epsilon_list;
  double alpha = 0.0;
  std::string bc;
  int k = 0;
  std::string out;
  std::string cache;
  long long seed = -1;
  bool allow_nonregime = false;
  bool dump_mesh = false;
  bool dump_forms = false;
  bool certify = false;
  int threads = 0;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "INI configuration file");
  app->add_option("--epsilon-list", o.epsilon_list, "strictly decreasing hole sizes, comma separated");
  app->add_option("--alpha", o.alpha, "gamma law exponent: gamma = eps^(1 - alpha)");
  app->add_option("--bc", o.bc, "outer boundary condition: neumann | dirichlet");
  app->add_option("--k", o.k, "number of tracked eigenvalues");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--cache", o.cache, "cache directory");
  app->add_option("--seed", o.seed, "seed for random test fields");
  app->add_option("--threads", o.threads, "worker threads, 0 for all cores");
  app->add_flag("--allow-nonregime", o.allow_nonregime, "run gamma laws outside 0 < alpha < 3/2");
  app->add_flag("--dump-mesh", o.dump_mesh, "write the meshes of every epsilon");
  app->add_flag("--dump-forms", o.dump_forms, "write K, M, B of every epsilon");
  app->add_flag("--certify", o.certify, "emit closeness certificates");
}

ExperimentConfig resolve(const Overrides& o, const CLI::App* app) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.epsilon_list.empty()) c.epsilons = robinlab::detail::parse_list(o.epsilon_list);
  if (app->count("--alpha")) c.alpha = o.alpha, c.gamma_list.clear();
  if (!o.bc.empty()) c.mode = robinlab::detail::parse_bc(o.bc);
  if (app->count("--k")) c.k = o.k;
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.cache.empty()) c.cache_dir = o.cache;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (app->count("--threads")) c.threads = o.threads;
  c.allow_nonregime = c.allow_nonregime || o.allow_nonregime;
  c.dump_mesh = c.dump_mesh || o.dump_mesh;
  c.dump_forms = c.dump_forms || o.dump_forms;
  c.certify = c.certify || o.certify;
  return c;
}

void dump_artifacts(const ExperimentConfig& c) {
  if (!c.dump_mesh && !c.dump_forms) return;
  const std::filesystem::path dir = std::filesystem::path(c.out_dir) / "artifacts";
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    const double eps = c.epsilons[i];
    const PuncturedDomain d = make_punctured(c.outer, c.hole(eps));
    const MatchedMesh mm = triangulate_matched(d, c.mesh_options(eps));
    char stem[64];
    std::snprintf(stem, sizeof stem, "eps_%02zu", i);
    const auto base = (dir / stem).string();
    if (c.dump_mesh) {
      write_mesh(mm.punctured, base + "_punctured.mesh");
      write_mesh(mm.filled, base + "_filled.mesh");
    }
    if (c.dump_forms) write_forms(assemble(mm.punctured, c.mode, c.gamma(i)), base);
  }
}

void print_sweep(const SweepResult& r) {
  std::printf("mode %s  regime %s  reference %s  window %.6g\n", r.mode.c_str(), r.regime ? "on" : "off",
              r.reference_source.c_str(), r.window);
  for (const auto& row : r.rows) {
    if (!row.ok()) {
      std::printf("eps %-8.4g FAILED %s\n", row.epsilon, row.failure.c_str());
      continue;
    }
    std::printf("eps %-8.4g gamma %-8.4g V %-6zu dbar %.4e  errors", row.epsilon, row.gamma, row.vertices, row.dbar);
    for (double e : row.errors) std::printf(" %.3e", e);
    std::printf("\n");
  }
  for (std::size_t k = 0; k < r.rates.size(); ++k)
    std::printf("k=%zu slope %.3f monotone %s\n", k + 1, r.rates[k].slope, r.monotone_errors[k] ? "yes" : "no");
  std::printf("dbar slope %.3f monotone %s\n", r.dbar_rate.slope, r.monotone_dbar ? "yes" : "no");
  if (r.control.done) std::printf("half-h control: max relative change %.3e\n", r.control.max_relative_change);
  for (const auto& n : r.notes) std::printf("note: %s\n", n.c_str());
}

void print_certification(const CertificationResult& c) {
  for (const auto& r : c.reports) {
    std::printf("eps %-8.4g radius %.5g delta", r.epsilon, r.radius.radius);
    for (double d : r.delta) std::printf(" %.3e", d);
    std::printf("  K %.4g C1 %.4g C2 %.4g\n", r.k_trace, r.c1, r.c2);
  }
  for (const auto& f : c.failures) std::printf("failed: %s\n", f.c_str());
  std::printf("exact conditions %s  decrease %s  regime %s\n", c.exact_conditions ? "yes" : "no",
              c.monotone ? "yes" : "no", c.regime ? "on" : "off");
}

int cmd_sweep(const ExperimentConfig& c) {
  const SweepResult r = run_sweep(c);
  CertificationResult cert;
  if (c.certify) cert = run_certification(c);
  emit_outputs(r, c.out_dir, c.certify ? &cert : nullptr);
  dump_artifacts(c);
  print_sweep(r);
  if (c.certify) print_certification(cert);
  bool ok = sweep_passes(r) || !r.regime;
  if (c.certify) ok = ok && certification_passes(cert);
  return ok ? kExitOk : kExitAssertion;
}

int cmd_certify(const ExperimentConfig& c) {
  const CertificationResult cert = run_certification(c);
  emit_certificates(cert, c.out_dir);
  print_certification(cert);
  return certification_passes(cert) ? kExitOk : kExitAssertion;
}

int cmd_solve(const ExperimentConfig& c, double eps, double gamma_override, bool has_gamma) {
  ExperimentConfig one = c;
  one.epsilons = {eps > 0.0 ? eps : c.epsilons.front()};
  if (has_gamma) one.gamma_list = {gamma_override}, one.allow_nonregime = true;
  validate(one);
  const PuncturedDomain d = make_punctured(one.outer, one.hole(one.epsilons[0]));
  const MatchedMesh mm = triangulate_matched(d, one.mesh_options(one.epsilons[0]));
  const AssembledForms f = assemble(mm.punctured, one.mode, one.gamma(0));
  SolverConfig s = one.solver;
  s.k = one.k;
  const Spectrum sp = solve_lowest(robin_form(f), f.M, s);
  std::printf("eps %.6g gamma %.6g bc %s vertices %zu triangles %zu min_angle %.2f\n", one.epsilons[0], one.gamma(0),
              std::string(to_string(one.mode)).c_str(), mm.punctured.num_vertices(), mm.punctured.num_triangles(),
              mm.punctured.min_angle_deg);
  for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
    std::printf("%zu %.12g residual %.2e\n", i + 1, sp.eigenvalues[i], sp.residuals[i]);
  dump_artifacts(one);
  return kExitOk;
}

struct OracleArgs {
  std::string shape = "rect";
  std::string bc = "dirichlet";
  double gamma = 1.0;
  double inner = 0.1;
  double outer = 1.0;
  double a = 1.0;
  double b = 1.0;
  int count = 10;
  std::string inner_bc = "robin";
  std::string format = "json";
};

int cmd_oracle(const OracleArgs& o) {
  const oracle::Bc bc = robinlab::detail::parse_bc(o.bc) == BcMode::DirichletOuter ? oracle::Bc::Dirichlet : oracle::Bc::Neumann;
  const auto n = static_cast<std::size_t>(o.count);
  oracle::AnalyticSpectrum s;
  if (o.shape == "rect") s = oracle::rect_eigs(o.a, o.b, bc, n);
  else if (o.shape == "disk") s = oracle::disk_eigs(o.outer, bc, n);
  else if (o.shape == "annulus" && o.inner_bc == "dirichlet") s = oracle::annulus_dirichlet_eigs(o.inner, o.outer, bc, n);
  else if (o.shape == "annulus") s = oracle::annulus_robin_eigs(o.inner, o.outer, o.gamma, bc, n);
  else fail(ErrorCode::ConfigError, "unknown shape: " + o.shape);
  if (o.format == "csv") {
    std::printf("index,eigenvalue,mode,root,residual\n");
    for (std::size_t i = 0; i < s.detail.size(); ++i)
      std::printf("%zu,%.17g,%d,%d,%.3e\n", i + 1, s.detail[i].value, s.detail[i].mode, s.detail[i].index,
                  s.detail[i].residual);
  } else {
    Json j{{"descriptor", s.descriptor}, {"eigenvalues", s.eigenvalues}, {"max_residual", s.max_residual},
           {"warnings", s.warnings}};
    std::cout << j.dump(1) << "\n";
  }
  for (const auto& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

int cmd_report(const std::string& dir) {
  const SweepResult r = read_result((std::filesystem::path(dir) / "results.json").string());
  emit_outputs(r, dir);
  print_sweep(r);
  return sweep_passes(r) || !r.regime ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral experiments for small Robin holes"};
  app.require_subcommand(1);

  Overrides sweep_o, cert_o, solve_o;
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep with eigenvalue errors and dbar");
  add_common(sweep, sweep_o);
  auto* cert = app.add_subcommand("certify", "closeness certificates for every epsilon");
  add_common(cert, cert_o);
  auto* solve = app.add_subcommand("solve", "single mesh, assemble and eigen-solve");
  add_common(solve, solve_o);
  double solve_eps = 0.0, solve_gamma = 0.0;
  solve->add_option("--epsilon", solve_eps, "hole size (default: first of the list)");
  solve->add_option("--gamma", solve_gamma, "explicit Robin coefficient");

  OracleArgs oa;
  auto* orc = app.add_subcommand("oracle", "analytic reference spectra");
  orc->add_option("--shape", oa.shape, "rect | disk | annulus");
  orc->add_option("--bc", oa.bc, "outer boundary condition: dirichlet | neumann");
  orc->add_option("--gamma", oa.gamma, "inner Robin coefficient (annulus)");
  orc->add_option("--inner", oa.inner, "inner radius (annulus)");
  orc->add_option("--outer", oa.outer, "outer radius (disk, annulus)");
  orc->add_option("--a", oa.a, "rectangle width");
  orc->add_option("--b", oa.b, "rectangle height");
  orc->add_option("--count", oa.count, "number of eigenvalues");
  orc->add_option("--inner-bc", oa.inner_bc, "robin | dirichlet (annulus)");
  orc->add_option("--format", oa.format, "json | csv");

  std::string report_dir = "out";
  auto* rep = app.add_subcommand("report", "rebuild CSV and plots from results.json");
  rep->add_option("--out", report_dir, "directory holding results.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sweep) return cmd_sweep(resolve(sweep_o, sweep));
    if (*cert) return cmd_certify(resolve(cert_o, cert));
    if (*solve) return cmd_solve(resolve(solve_o, solve), solve_eps, solve_gamma, solve->count("--gamma") > 0);
    if (*orc) return cmd_oracle(oa);
    if (*rep) return cmd_report(report_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::FatalConfig ? kExitConfig : kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
