#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <nlohmann/json.hpp>
#include "robinlab/closeness_lab.hpp"
#include "robinlab/eigensolve.hpp"
#include "robinlab/error.hpp"
#include "robinlab/fem.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/mesh.hpp"
#include "robinlab/oracle.hpp"
#include "robinlab/spectral_metrics.hpp"
#include "robinlab/svg.hpp"

namespace robinlab {

using Json = nlohmann::json;

struct ExperimentConfig {
  OuterDomain outer = OuterDomain::unit_square();
  HoleShape hole_shape = HoleShape::Disk;
  Point hole_center{0.5, 0.5};
  std::vector<Point> hole_reference;  // polygon holes only
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  double alpha = 1.0;
  std::vector<double> gamma_list;  // overrides the alpha law when nonempty
  bool allow_nonregime = false;
  BcMode mode = BcMode::NeumannOuter;
  int k = 5;
  double h_target = 0.02;
  double hole_factor = 0.25;  // near-hole size min(hole_factor * eps, h_target)
  bool control = true;
  SolverConfig solver;
  double window = 0.0;  // 0 selects the midpoint after the k-th reference cluster
  std::string out_dir = "out";
  std::string cache_dir;
  std::uint64_t seed = 1;
  bool certify = false;
  bool dump_mesh = false;
  bool dump_forms = false;
  int threads = 0;

  /// Inside the convergence regime: gamma = eps^{1 - alpha} with 0 < alpha < 3/2.
  bool regime() const { return gamma_list.empty() && alpha > 0.0 && alpha < 1.5; }

  double gamma(std::size_t i) const {
    return gamma_list.empty() ? std::pow(epsilons[i], 1.0 - alpha) : gamma_list[i];
  }

  HoleSpec hole(double eps) const {
    switch (hole_shape) {
      case HoleShape::Disk: return HoleSpec::disk(hole_center, eps);
      case HoleShape::Square: return HoleSpec::square(hole_center, eps);
      case HoleShape::Polygon: return HoleSpec::polygon(hole_center, eps, hole_reference);
    }
    return HoleSpec::disk(hole_center, eps);
  }

  MeshOptions mesh_options(double eps, double scale = 1.0) const {
    MeshOptions o;
    o.h_target = h_target * scale;
    o.grading = o.h_target / (std::min(hole_factor * eps, h_target) * scale);
    return o;
  }
};

inline void validate(const ExperimentConfig& c) {
  if (c.epsilons.empty()) fail(ErrorCode::ConfigError, "epsilon list is empty");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] > 0.0)) fail(ErrorCode::ConfigError, "hole size must be positive");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) fail(ErrorCode::ConfigError, "epsilon list must strictly decrease");
  }
  if (!c.gamma_list.empty() && c.gamma_list.size() != c.epsilons.size())
    fail(ErrorCode::ConfigError, "gamma list length differs from the epsilon list");
  if (c.k < 1) fail(ErrorCode::ConfigError, "k must be at least 1");
  if (!(c.h_target > 0.0) || !(c.hole_factor > 0.0)) fail(ErrorCode::ConfigError, "mesh sizes must be positive");
  if (!c.regime() && !c.allow_nonregime)
    fail(ErrorCode::FatalConfig, "gamma law outside 0 < alpha < 3/2; pass --allow-nonregime to run it");
  for (double e : c.epsilons) validate(c.hole(e));
}

// ---------------------------------------------------------------------------------------------
// Configuration file

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "not a number: " + tok);
    }
  }
  return out;
}

inline std::vector<Point> parse_points(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() % 2 != 0) fail(ErrorCode::ConfigError, "point list needs an even count of coordinates");
  std::vector<Point> out;
  for (std::size_t i = 0; i < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
  return out;
}

inline BcMode parse_bc(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "neumann" || s == "neumann_outer") return BcMode::NeumannOuter;
  if (s == "dirichlet" || s == "dirichlet_outer") return BcMode::DirichletOuter;
  fail(ErrorCode::ConfigError, "unknown boundary condition: " + s);
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorCode::ConfigError, "not a boolean: " + s);
}

}  // namespace detail

/// Reads the INI configuration: sections domain, hole, sweep, gamma, mesh, solver, output.
inline ExperimentConfig load_config(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  ExperimentConfig c;
  auto get = [&](const char* key) { return pt.get_optional<std::string>(key); };
  auto num = [&](const char* key, double& out) {
    if (auto v = get(key)) {
      const auto l = detail::parse_list(*v);
      if (l.size() != 1) fail(ErrorCode::ConfigError, std::string("expected one number for ") + key);
      out = l[0];
    }
  };

  const std::string outer = get("domain.outer").value_or("rectangle");
  if (outer == "rectangle") {
    const auto b = detail::parse_list(get("domain.bounds").value_or("0 0 1 1"));
    if (b.size() != 4 || !(b[2] > b[0]) || !(b[3] > b[1])) fail(ErrorCode::ConfigError, "bounds needs x0 y0 x1 y1");
    c.outer = OuterDomain::rectangle(b[0], b[1], b[2], b[3]);
  } else if (outer == "disk") {
    const auto p = detail::parse_points(get("domain.center").value_or("0 0"));
    double r = 1.0;
    num("domain.radius", r);
    if (p.size() != 1 || !(r > 0.0)) fail(ErrorCode::ConfigError, "disk needs a center and a positive radius");
    c.outer = OuterDomain::disk(p[0], r);
  } else if (outer == "polygon") {
    c.outer = OuterDomain::polygon(detail::parse_points(get("domain.vertices").value_or("")));
  } else {
    fail(ErrorCode::ConfigError, "unknown outer domain: " + outer);
  }

  const std::string shape = get("hole.shape").value_or("disk");
  if (shape == "disk") c.hole_shape = HoleShape::Disk;
  else if (shape == "square") c.hole_shape = HoleShape::Square;
  else if (shape == "polygon") c.hole_shape = HoleShape::Polygon, c.hole_reference = detail::parse_points(get("hole.reference").value_or(""));
  else fail(ErrorCode::ConfigError, "unknown hole shape: " + shape);
  if (auto v = get("hole.center")) {
    const auto p = detail::parse_points(*v);
    if (p.size() != 1) fail(ErrorCode::ConfigError, "hole center needs two coordinates");
    c.hole_center = p[0];
  }

  if (auto v = get("sweep.epsilon")) c.epsilons = detail::parse_list(*v);
  if (auto v = get("sweep.bc")) c.mode = detail::parse_bc(*v);
  if (auto v = get("sweep.k")) c.k = static_cast<int>(detail::parse_list(*v).at(0));
  if (auto v = get("sweep.seed")) c.seed = static_cast<std::uint64_t>(detail::parse_list(*v).at(0));
  if (auto v = get("sweep.certify")) c.certify = detail::parse_bool(*v);
  if (auto v = get("sweep.threads")) c.threads = static_cast<int>(detail::parse_list(*v).at(0));
  num("sweep.window", c.window);

  num("gamma.alpha", c.alpha);
  if (auto v = get("gamma.list")) c.gamma_list = detail::parse_list(*v);
  if (auto v = get("gamma.allow_nonregime")) c.allow_nonregime = detail::parse_bool(*v);

  num("mesh.h_target", c.h_target);
  num("mesh.hole_factor", c.hole_factor);
  if (auto v = get("mesh.control")) c.control = detail::parse_bool(*v);

  num("solver.tol", c.solver.tol);
  num("solver.sigma", c.solver.sigma);
  if (auto v = get("solver.max_iter")) c.solver.max_iter = static_cast<int>(detail::parse_list(*v).at(0));

  if (auto v = get("output.dir")) c.out_dir = *v;
  if (auto v = get("output.cache")) c.cache_dir = *v;
  if (auto v = get("output.dump_mesh")) c.dump_mesh = detail::parse_bool(*v);
  if (auto v = get("output.dump_forms")) c.dump_forms = detail::parse_bool(*v);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::ConfigError, "cannot open config " + path);
  return load_config(is);
}

// ---------------------------------------------------------------------------------------------
// Cache

/// 64-bit FNV-1a of a canonical fragment, as 16 hex digits.
inline std::string cache_key(const std::string& fragment) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : fragment) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Canonical text of everything that determines a mesh and its spectra.
inline std::string describe(const ExperimentConfig& c) {
  std::string s = "outer=";
  s += std::to_string(static_cast<int>(c.outer.kind));
  for (const auto& p : c.outer.vertices) s += "," + fmt17(p.x) + "," + fmt17(p.y);
  s += "," + fmt17(c.outer.center.x) + "," + fmt17(c.outer.center.y) + "," + fmt17(c.outer.radius);
  s += "|hole=" + std::to_string(static_cast<int>(c.hole_shape)) + "," + fmt17(c.hole_center.x) + "," + fmt17(c.hole_center.y);
  for (const auto& p : c.hole_reference) s += "," + fmt17(p.x) + "," + fmt17(p.y);
  s += "|bc=" + std::string(to_string(c.mode)) + "|k=" + std::to_string(c.k);
  s += "|h=" + fmt17(c.h_target) + "," + fmt17(c.hole_factor);
  s += "|solver=" + fmt17(c.solver.tol) + "," + fmt17(c.solver.sigma) + "," + std::to_string(c.solver.max_iter) + "," +
       std::to_string(c.solver.seed);
  s += "|window=" + fmt17(c.window);
  return s;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const auto tmp = path.string() + ".tmp." + tid.str();
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(ErrorCode::IoError, "cannot write " + tmp);
    os << text;
    if (!os) fail(ErrorCode::IoError, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot move " + tmp + " to " + path.string());
}

// ---------------------------------------------------------------------------------------------
// Results

struct SweepRow {
  double epsilon = 0.0;
  double gamma = 0.0;
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  double h_max = 0.0;
  double min_angle = 0.0;
  std::vector<double> eigenvalues;  // punctured, first k
  std::vector<double> reference;    // unperturbed matched mesh, first k
  std::vector<double> errors;
  std::vector<double> window_values;
  std::vector<double> window_reference;
  double max_residual = 0.0;
  double dbar = 0.0;
  double runtime = 0.0;  // seconds; excluded from the CSV
  std::string failure;   // empty on success

  bool ok() const { return failure.empty(); }
  bool operator==(const SweepRow&) const = default;
};

struct ControlRun {
  bool done = false;
  double epsilon = 0.0;
  double h_target = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> errors;
  double max_relative_change = 0.0;  // vs the production mesh, first k eigenvalues

  bool operator==(const ControlRun&) const = default;
};

struct SweepResult {
  std::string config;
  std::string mode;
  bool regime = true;
  std::vector<SweepRow> rows;
  std::vector<RateFit> rates;  // per k
  RateFit dbar_rate;
  std::vector<bool> monotone_errors;
  bool monotone_dbar = false;
  std::string reference_source;  // oracle or fine-mesh
  std::string reference_descriptor;
  std::vector<double> reference;  // absolute reference of the unperturbed domain
  double reference_accuracy = 0.0;  // Richardson estimate (fine-mesh) or 0 (oracle)
  double reference_consistency = -1.0;  // oracle vs fine mesh, max relative, -1 when not computed
  double fem_vs_reference = 0.0;  // matched unperturbed mesh vs absolute reference, max relative
  double window = 0.0;
  ControlRun control;
  std::vector<std::string> notes;

  bool operator==(const SweepResult&) const = default;
};

inline void to_json(Json& j, const RateFit& r) { j = Json{{"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}}; }
inline void from_json(const Json& j, RateFit& r) {
  j.at("slope").get_to(r.slope), j.at("intercept").get_to(r.intercept), j.at("r2").get_to(r.r2);
}

inline void to_json(Json& j, const SweepRow& r) {
  j = Json{{"epsilon", r.epsilon},         {"gamma", r.gamma},
           {"vertices", r.vertices},       {"triangles", r.triangles},
           {"h_max", r.h_max},             {"min_angle", r.min_angle},
           {"eigenvalues", r.eigenvalues}, {"reference", r.reference},
           {"errors", r.errors},           {"window_values", r.window_values},
           {"window_reference", r.window_reference}, {"max_residual", r.max_residual},
           {"dbar", r.dbar},               {"runtime", r.runtime},
           {"failure", r.failure}};
}
inline void from_json(const Json& j, SweepRow& r) {
  j.at("epsilon").get_to(r.epsilon), j.at("gamma").get_to(r.gamma);
  j.at("vertices").get_to(r.vertices), j.at("triangles").get_to(r.triangles);
  j.at("h_max").get_to(r.h_max), j.at("min_angle").get_to(r.min_angle);
  j.at("eigenvalues").get_to(r.eigenvalues), j.at("reference").get_to(r.reference);
  j.at("errors").get_to(r.errors), j.at("window_values").get_to(r.window_values);
  j.at("window_reference").get_to(r.window_reference), j.at("max_residual").get_to(r.max_residual);
  j.at("dbar").get_to(r.dbar), j.at("runtime").get_to(r.runtime), j.at("failure").get_to(r.failure);
}

inline void to_json(Json& j, const ControlRun& c) {
  j = Json{{"done", c.done},           {"epsilon", c.epsilon}, {"h_target", c.h_target}, {"eigenvalues", c.eigenvalues},
           {"errors", c.errors}, {"max_relative_change", c.max_relative_change}};
}
inline void from_json(const Json& j, ControlRun& c) {
  j.at("done").get_to(c.done), j.at("epsilon").get_to(c.epsilon), j.at("h_target").get_to(c.h_target);
  j.at("eigenvalues").get_to(c.eigenvalues), j.at("errors").get_to(c.errors);
  j.at("max_relative_change").get_to(c.max_relative_change);
}

inline void to_json(Json& j, const SweepResult& r) {
  j = Json{{"config", r.config},
           {"mode", r.mode},
           {"regime", r.regime},
           {"rows", r.rows},
           {"rates", r.rates},
           {"dbar_rate", r.dbar_rate},
           {"monotone_errors", r.monotone_errors},
           {"monotone_dbar", r.monotone_dbar},
           {"reference_source", r.reference_source},
           {"reference_descriptor", r.reference_descriptor},
           {"reference", r.reference},
           {"reference_accuracy", r.reference_accuracy},
           {"reference_consistency", r.reference_consistency},
           {"fem_vs_reference", r.fem_vs_reference},
           {"window", r.window},
           {"control", r.control},
           {"notes", r.notes}};
}
inline void from_json(const Json& j, SweepResult& r) {
  j.at("config").get_to(r.config), j.at("mode").get_to(r.mode), j.at("regime").get_to(r.regime);
  j.at("rows").get_to(r.rows), j.at("rates").get_to(r.rates), j.at("dbar_rate").get_to(r.dbar_rate);
  j.at("monotone_errors").get_to(r.monotone_errors), j.at("monotone_dbar").get_to(r.monotone_dbar);
  j.at("reference_source").get_to(r.reference_source), j.at("reference_descriptor").get_to(r.reference_descriptor);
  j.at("reference").get_to(r.reference), j.at("reference_accuracy").get_to(r.reference_accuracy);
  j.at("reference_consistency").get_to(r.reference_consistency), j.at("fem_vs_reference").get_to(r.fem_vs_reference);
  j.at("window").get_to(r.window), j.at("control").get_to(r.control), j.at("notes").get_to(r.notes);
}

namespace lab {

inline void to_json(Json& j, const RadiusChoice& r) {
  j = Json{{"radius", r.radius},       {"grid", r.grid},
           {"objective", r.objective}, {"satisfied", r.satisfied},
           {"grid_exhausted", r.grid_exhausted}, {"sup_admissible", r.sup_admissible}};
}

inline void to_json(Json& j, const ClosenessReport& r) {
  j = Json{{"epsilon", r.epsilon},
           {"gamma", r.gamma},
           {"mode", std::string(to_string(r.mode))},
           {"regime", r.regime},
           {"intermediate_radius", r.radius},
           {"delta", r.delta},
           {"boundedness_factor", r.boundedness_factor},
           {"k_trace", r.k_trace},
           {"c1", r.c1},
           {"c2", r.c2},
           {"pi_half_width", r.pi_half_width},
           {"envelope_5_6", r.envelope_56},
           {"envelope_7", r.envelope_7},
           {"energy_ratio", r.energy_ratio},
           {"mass_ratio", r.mass_ratio},
           {"worst_condition7", {{"ratio", r.worst7.ratio}, {"t1", r.worst7.t1}, {"t2", r.worst7.t2}, {"t3", r.worst7.t3}}},
           {"num_f", r.num_f},
           {"num_u", r.num_u},
           {"f_set", r.f_descriptors},
           {"u_set", r.u_descriptors}};
}

}  // namespace lab

// ---------------------------------------------------------------------------------------------
// Sweep

namespace detail {

inline oracle::Bc oracle_bc(BcMode m) { return m == BcMode::DirichletOuter ? oracle::Bc::Dirichlet : oracle::Bc::Neumann; }

/// Lowest eigenvalues until the computed list passes `cap`.
inline Spectrum lowest_past(const SparseMatrix& A, const SparseMatrix& M, SolverConfig cfg, int k, double cap) {
  cfg.k = std::max(k, 1);
  cfg.keep_vectors = false;
  for (int attempt = 0;; ++attempt) {
    cfg.k = std::min<int>(cfg.k, static_cast<int>(A.rows()));
    Spectrum s = solve_lowest(A, M, cfg);
    if (s.eigenvalues.back() > cap || cfg.k >= A.rows() || attempt >= 10) return s;
    cfg.k += 4;
  }
}

inline std::vector<double> first(const std::vector<double>& v, std::size_t k) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(k, v.size()))};
}

inline std::vector<double> fem_outer_spectrum(const ExperimentConfig& c, double h, std::size_t count) {
  const TriMesh m = triangulate_outer(c.outer, h);
  const AssembledForms f = assemble(m, c.mode, 0.0);
  SolverConfig s = c.solver;
  s.k = static_cast<int>(count);
  s.keep_vectors = false;
  return solve_lowest(robin_form(f), f.M, s).eigenvalues;
}

struct Reference {
  std::string source;
  std::string descriptor;
  std::vector<double> values;
  double accuracy = 0.0;
  double consistency = -1.0;
};

inline Reference absolute_reference(const ExperimentConfig& c) {
  const std::size_t count = static_cast<std::size_t>(c.k) + 12;
  Reference r;
  if (c.outer.kind == OuterKind::Rectangle) {
    const auto [lo, hi] = c.outer.bounds();
    const auto s = oracle::rect_eigs(hi.x - lo.x, hi.y - lo.y, oracle_bc(c.mode), count);
    r.source = "oracle", r.descriptor = s.descriptor, r.values = s.eigenvalues;
    return r;
  }
  const auto fine = fem_outer_spectrum(c, 0.5 * c.h_target, count);
  if (c.outer.kind == OuterKind::Disk) {
    const auto s = oracle::disk_eigs(c.outer.radius, oracle_bc(c.mode), count);
    r.source = "oracle", r.descriptor = s.descriptor, r.values = s.eigenvalues;
    for (int i = 0; i < c.k; ++i) {
      const double d = std::abs(fine[static_cast<std::size_t>(i)] - r.values[static_cast<std::size_t>(i)]) /
                       std::max(1.0, std::abs(r.values[static_cast<std::size_t>(i)]));
      r.consistency = std::max(r.consistency, d);
    }
    return r;
  }
  const auto coarse = fem_outer_spectrum(c, c.h_target, count);
  r.source = "fine-mesh";
  r.descriptor = "unperturbed FEM h=" + fmt17(0.5 * c.h_target) + " with Richardson from h=" + fmt17(c.h_target);
  r.values = fine;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double extrap = fine[i] + (fine[i] - coarse[i]) / 3.0;
    r.values[i] = extrap;
    r.accuracy = std::max(r.accuracy, std::abs(extrap - fine[i]) / std::max(1.0, std::abs(extrap)));
  }
  return r;
}

/// Mesh, assemble and solve one epsilon; the matched filled mesh gives the unperturbed spectrum.
inline SweepRow solve_epsilon(const ExperimentConfig& c, std::size_t i, double cap, double scale = 1.0,
                              MatchedMesh* keep = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.epsilon = c.epsilons[i];
  row.gamma = c.gamma(i);
  const PuncturedDomain d = make_punctured(c.outer, c.hole(row.epsilon));
  MatchedMesh mm = triangulate_matched(d, c.mesh_options(row.epsilon, scale));
  row.vertices = mm.punctured.num_vertices();
  row.triangles = mm.punctured.num_triangles();
  row.h_max = mm.punctured.h_max;
  row.min_angle = mm.filled.min_angle_deg;

  const AssembledForms fp = assemble(mm.punctured, c.mode, row.gamma);
  const AssembledForms ff = assemble(mm.filled, c.mode, 0.0);
  const Spectrum sp = lowest_past(robin_form(fp), fp.M, c.solver, c.k, cap);
  const Spectrum sf = lowest_past(robin_form(ff), ff.M, c.solver, c.k, cap);
  const auto k = static_cast<std::size_t>(c.k);
  row.eigenvalues = first(sp.eigenvalues, k);
  row.reference = first(sf.eigenvalues, k);
  for (const auto& p : match_with_multiplicity(row.reference, row.eigenvalues, k)) row.errors.push_back(p.gap);
  for (double r : sp.residuals) row.max_residual = std::max(row.max_residual, r);
  for (double r : sf.residuals) row.max_residual = std::max(row.max_residual, r);
  const auto wp = FiniteSpectrumWindow::truncate(sp.eigenvalues, cap, SpectrumSource::Fem);
  const auto wf = FiniteSpectrumWindow::truncate(sf.eigenvalues, cap, SpectrumSource::Fem);
  row.window_values = wp.values;
  row.window_reference = wf.values;
  row.dbar = dbar(wp, wf).value;
  if (keep) *keep = std::move(mm);
  row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

template <class Job>
auto run_pool(std::size_t n, int threads, Job job) {
  using R = decltype(job(std::size_t{0}));
  std::vector<R> out(n);
  const std::size_t width =
      threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<R>> futures;
    for (std::size_t i = start; i < std::min(n, start + width); ++i)
      futures.push_back(std::async(std::launch::async, job, i));
    for (std::size_t i = 0; i < futures.size(); ++i) out[start + i] = futures[i].get();
  }
  return out;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline std::pair<RateFit, bool> try_fit(const std::vector<double>& eps, const std::vector<double>& err) {
  try {
    return {fit_rate(eps, err), true};
  } catch (const Error&) {
    return {RateFit{}, false};
  }
}

}  // namespace detail

inline SweepResult run_sweep(const ExperimentConfig& c) {
  validate(c);
  SweepResult res;
  res.config = describe(c);
  res.mode = std::string(to_string(c.mode));
  res.regime = c.regime();

  const auto ref = detail::absolute_reference(c);
  res.reference_source = ref.source;
  res.reference_descriptor = ref.descriptor;
  res.reference = ref.values;
  res.reference_accuracy = ref.accuracy;
  res.reference_consistency = ref.consistency;
  res.window = c.window > 0.0 ? c.window : window_cap(ref.values, static_cast<std::size_t>(c.k));

  res.rows = detail::run_pool(c.epsilons.size(), c.threads, [&](std::size_t i) {
    const std::string key = cache_key(describe(c) + "|eps=" + fmt17(c.epsilons[i]) + "|gamma=" + fmt17(c.gamma(i)) +
                                      "|cap=" + fmt17(res.window));
    const std::filesystem::path cached = c.cache_dir.empty() ? std::filesystem::path{}
                                                             : std::filesystem::path(c.cache_dir) / (key + ".json");
    if (!c.cache_dir.empty() && std::filesystem::exists(cached)) {
      std::ifstream is(cached);
      try {
        return Json::parse(is).get<SweepRow>();
      } catch (const std::exception&) {
      }
    }
    SweepRow row;
    try {
      row = detail::solve_epsilon(c, i, res.window);
    } catch (const Error& e) {
      row.epsilon = c.epsilons[i];
      row.gamma = c.gamma(i);
      row.failure = std::string(e.what());
      return row;
    }
    if (!c.cache_dir.empty()) write_atomic(cached, Json(row).dump(1));
    return row;
  });

  std::vector<double> eps;
  for (const auto& r : res.rows)
    if (r.ok()) eps.push_back(r.epsilon);
  for (const auto& r : res.rows)
    if (!r.ok()) res.notes.push_back("epsilon " + fmt17(r.epsilon) + " failed: " + r.failure);
  for (int k = 0; k < c.k; ++k) {
    std::vector<double> err;
    for (const auto& r : res.rows)
      if (r.ok()) err.push_back(r.errors[static_cast<std::size_t>(k)]);
    auto [fit, ok] = detail::try_fit(eps, err);
    if (!ok) res.notes.push_back("rate fit skipped for k=" + std::to_string(k + 1));
    res.rates.push_back(fit);
    res.monotone_errors.push_back(err.size() == c.epsilons.size() && detail::strictly_decreasing(err));
  }
  std::vector<double> db;
  for (const auto& r : res.rows)
    if (r.ok()) db.push_back(r.dbar);
  auto [fit, ok] = detail::try_fit(eps, db);
  if (!ok) res.notes.push_back("rate fit skipped for dbar");
  res.dbar_rate = fit;
  res.monotone_dbar = db.size() == c.epsilons.size() && detail::strictly_decreasing(db);

  if (!res.rows.empty() && res.rows.front().ok())
    for (std::size_t i = 0; i < res.rows.front().reference.size(); ++i)
      res.fem_vs_reference = std::max(res.fem_vs_reference, std::abs(res.rows.front().reference[i] - ref.values[i]) /
                                                                std::max(1.0, std::abs(ref.values[i])));

  if (c.control && res.rows.back().ok()) {
    const std::size_t last = c.epsilons.size() - 1;
    try {
      const SweepRow half = detail::solve_epsilon(c, last, res.window, 0.5);
      res.control.done = true;
      res.control.epsilon = half.epsilon;
      res.control.h_target = 0.5 * c.h_target;
      res.control.eigenvalues = half.eigenvalues;
      res.control.errors = half.errors;
      for (std::size_t i = 0; i < half.eigenvalues.size(); ++i)
        res.control.max_relative_change =
            std::max(res.control.max_relative_change, std::abs(half.eigenvalues[i] - res.rows.back().eigenvalues[i]) /
                                                          std::max(1.0, std::abs(res.rows.back().eigenvalues[i])));
    } catch (const Error& e) {
      res.notes.push_back(std::string("control run failed: ") + e.what());
    }
  }
  return res;
}

/// Sweep assertions: every epsilon solved, per-k errors and dbar strictly decreasing.
inline bool sweep_passes(const SweepResult& r) {
  for (const auto& row : r.rows)
    if (!row.ok()) return false;
  for (bool m : r.monotone_errors)
    if (!m) return false;
  return r.monotone_dbar;
}

// ---------------------------------------------------------------------------------------------
// Certification

struct CertificationResult {
  std::vector<lab::ClosenessReport> reports;
  std::vector<std::string> failures;
  bool regime = true;
  bool exact_conditions = true;
  bool monotone = true;  // max of the (5'), (6), (7) ratios decreases along the sweep
};

inline CertificationResult run_certification(const ExperimentConfig& c) {
  validate(c);
  CertificationResult out;
  out.regime = c.regime();
  auto reports = detail::run_pool(c.epsilons.size(), c.threads, [&](std::size_t i) -> std::pair<lab::ClosenessReport, std::string> {
    try {
      const double eps = c.epsilons[i];
      const PuncturedDomain d = make_punctured(c.outer, c.hole(eps));
      const MatchedMesh mm = triangulate_matched(d, c.mesh_options(eps));
      const lab::Setting s = lab::make_setting(d, mm, c.gamma(i), c.mode, c.regime());
      return {lab::certify(s, standard_f_set(d, c.mode), lab::standard_u_set(s, c.seed)), {}};
    } catch (const Error& e) {
      return {{}, "epsilon " + fmt17(c.epsilons[i]) + ": " + std::string(e.what())};
    }
  });
  double prev = std::numeric_limits<double>::infinity();
  for (auto& [r, err] : reports) {
    if (!err.empty()) {
      out.failures.push_back(err);
      out.exact_conditions = out.monotone = false;
      continue;
    }
    out.exact_conditions = out.exact_conditions && r.exact_conditions_hold();
    const double m = std::max({r.delta[4], r.delta[5], r.delta[6]});
    if (!(m < prev)) out.monotone = false;
    prev = m;
    out.reports.push_back(std::move(r));
  }
  return out;
}

/// Certification assertions; the decrease is only asserted inside the regime.
inline bool certification_passes(const CertificationResult& r) {
  if (!r.failures.empty() || !r.exact_conditions) return false;
  return !r.regime || r.monotone;
}

// ---------------------------------------------------------------------------------------------
// Outputs

inline std::string results_csv(const SweepResult& r) {
  std::string s = "epsilon,gamma,k,eigenvalue,reference,error,dbar,vertices,triangles\n";
  char buf[320];
  for (const auto& row : r.rows) {
    if (!row.ok()) continue;
    for (std::size_t k = 0; k < row.eigenvalues.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%zu,%zu\n", row.epsilon, row.gamma, k + 1,
                    row.eigenvalues[k], row.reference[k], row.errors[k], row.dbar, row.vertices, row.triangles);
      s += buf;
    }
  }
  return s;
}

inline std::string errors_svg(const SweepResult& r) {
  std::vector<svg::Series> series;
  for (std::size_t k = 0; k < r.rates.size(); ++k) {
    svg::Series s{"lambda_" + std::to_string(k + 1), {}, {}, r.rates[k].slope, true};
    for (const auto& row : r.rows)
      if (row.ok()) s.x.push_back(row.epsilon), s.y.push_back(row.errors[k]);
    series.push_back(std::move(s));
  }
  return svg::loglog("eigenvalue error vs epsilon (" + r.mode + ")", "epsilon", "|lambda_k(eps) - lambda_k|", series);
}

inline std::string dbar_svg(const SweepResult& r) {
  svg::Series s{"dbar", {}, {}, r.dbar_rate.slope, true};
  for (const auto& row : r.rows)
    if (row.ok()) s.x.push_back(row.epsilon), s.y.push_back(row.dbar);
  return svg::loglog("resolvent-scale spectral distance vs epsilon (" + r.mode + ")", "epsilon", "dbar", {s});
}

inline std::string delta_svg(const CertificationResult& c) {
  static const char* names[] = {"delta5'", "delta6", "delta7"};
  std::vector<svg::Series> series;
  for (int j = 0; j < 3; ++j) {
    svg::Series s{names[j], {}, {}, 0.0, false};
    for (const auto& r : c.reports) s.x.push_back(r.epsilon), s.y.push_back(r.delta[static_cast<std::size_t>(4 + j)]);
    if (s.x.size() >= 3) {
      auto [fit, ok] = detail::try_fit(s.x, s.y);
      s.slope = fit.slope, s.has_slope = ok;
    }
    series.push_back(std::move(s));
  }
  return svg::loglog("closeness ratios vs epsilon", "epsilon", "sup ratio", series);
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream os(p, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot write " + p.string());
  os << text;
  if (!os) fail(ErrorCode::IoError, "write failed for " + p.string());
}

inline void emit_certificates(const CertificationResult& c, const std::string& dir) {
  const std::filesystem::path out(dir);
  for (std::size_t i = 0; i < c.reports.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "eps_%02zu.json", i);
    write_text(out / "certificates" / name, Json(c.reports[i]).dump(1) + "\n");
  }
  write_text(out / "plots" / "delta.svg", delta_svg(c));
}

inline void emit_outputs(const SweepResult& r, const std::string& dir, const CertificationResult* cert = nullptr) {
  const std::filesystem::path out(dir);
  write_text(out / "results.csv", results_csv(r));
  write_text(out / "results.json", Json(r).dump(1) + "\n");
  write_text(out / "plots" / "errors.svg", errors_svg(r));
  write_text(out / "plots" / "dbar.svg", dbar_svg(r));
  if (cert) emit_certificates(*cert, dir);
}

inline SweepResult read_result(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(is).get<SweepResult>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::IoError, std::string("malformed results file: ") + e.what());
  }
}

}  // namespace robinlab
