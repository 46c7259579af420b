#pragma once

// Config-driven experiments behind the command-line tool.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "blaschke/indestructible.hpp"
#include "blaschke/io.hpp"
#include "blaschke/maximal.hpp"
#include "blaschke/random.hpp"

namespace blaschke::cli {

using io::json;
using io::SchemaError;

inline constexpr const char* kToolName = "blaschke";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigVersion = 1;
inline constexpr const char* kProfileEnv = "BLASCHKE_TOLERANCE_PROFILE";

enum ExitCode : int { kExitOk = 0, kExitSchema = 2, kExitNumerical = 3, kExitIo = 4 };

struct Tolerances {
  double taylor_tol = 1e-8;
  double convergence_tol = 1e-9;
  double series_tol = 1e-3;
  double newton_tol = 1e-11;
  double residual_tol = 1e-9;
};

inline Tolerances tolerance_profile(const std::string& name) {
  if (name == "default") return {};
  if (name == "strict") return {1e-10, 1e-11, 1e-4, 1e-12, 1e-10};
  if (name == "loose") return {1e-6, 1e-7, 1e-2, 1e-10, 1e-7};
  throw SchemaError("unknown tolerance profile '" + name + "'");
}

enum class PlotKind { orbit, field, residual_trajectory };

inline PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "orbit") return PlotKind::orbit;
  if (s == "field") return PlotKind::field;
  if (s == "residual-trajectory") return PlotKind::residual_trajectory;
  throw SchemaError("plot.kind: unknown kind '" + s + "'");
}

struct PlotRequest {
  PlotKind kind = PlotKind::orbit;
  std::string path;
};

struct ExperimentConfig {
  std::string command;
  json inputs = json::object();
  std::uint64_t seed = 0;
  std::string output_path;
  Tolerances tolerances;
  std::optional<PlotRequest> plot;
  json document;  // the validated document, seed and output path applied
};

// ---------------------------------------------------------------------------
// Schema.

namespace detail {

enum class Kind {
  number,
  integer,
  string,
  point,
  point_list,
  multiset,
  product,
  product_list,
  integer_list,
  number_list,
  object
};

struct Field {
  Kind kind;
  bool required = false;
};

using Schema = std::map<std::string, Field>;

inline void check_field(const json& v, Kind kind, const std::string& where) {
  auto fail = [&](const char* what) { throw SchemaError(where + ": expected " + what); };
  switch (kind) {
    case Kind::number:
      if (!v.is_number()) fail("a number");
      break;
    case Kind::integer:
      if (!v.is_number_integer()) fail("an integer");
      break;
    case Kind::string:
      if (!v.is_string()) fail("a string");
      break;
    case Kind::point:
      io::complex_from_json(v, where);
      break;
    case Kind::point_list:
      if (!v.is_array()) fail("a list of [re, im]");
      for (const auto& p : v) io::complex_from_json(p, where);
      break;
    case Kind::multiset:
      io::multiset_from_json(v, where);
      break;
    case Kind::product:
      io::blaschke_from_json(v, where);
      break;
    case Kind::product_list:
      if (!v.is_array() || v.empty()) fail("a nonempty list of products");
      for (const auto& p : v) io::blaschke_from_json(p, where);
      break;
    case Kind::integer_list:
      if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); }))
        fail("a list of integers");
      break;
    case Kind::number_list:
      if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
        fail("a list of numbers");
      break;
    case Kind::object:
      if (!v.is_object()) fail("an object");
      break;
  }
}

inline void validate(const json& obj, const Schema& schema, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw SchemaError(where + ": unknown key '" + key + "'");
    check_field(value, it->second.kind, where + "." + key);
  }
  for (const auto& [key, field] : schema)
    if (field.required && !obj.contains(key)) throw SchemaError(where + ": missing required key '" + key + "'");
}

inline const std::map<std::string, Schema>& input_schemas() {
  static const std::map<std::string, Schema> schemas{
      {"iterate",
       {{"family", {Kind::string, true}},
        {"rate", {Kind::number}},
        {"angle", {Kind::number}},
        {"max_degree", {Kind::integer}},
        {"maps", {Kind::product_list}},
        {"n_max", {Kind::integer}},
        {"a", {Kind::point}},
        {"orbit_point", {Kind::point}}}},
      {"solve-maximal", {{"critical_points", {Kind::multiset}}, {"random_size", {Kind::integer}}}},
      {"verify-ibp",
       {{"family", {Kind::string, true}},
        {"rate", {Kind::number}},
        {"max_degree", {Kind::integer}},
        {"maps", {Kind::product_list}},
        {"n_list", {Kind::integer_list}},
        {"a_samples", {Kind::integer}},
        {"degree_cap", {Kind::integer}}}},
      {"verify-mbp", {{"cases", {Kind::integer}}, {"max_degree", {Kind::integer}}}},
      {"curvature",
       {{"product", {Kind::product}}, {"max_degree", {Kind::integer}}, {"h", {Kind::number}}, {"r_max", {Kind::number}}}},
      {"covering", {{"cases", {Kind::integer}}, {"eps", {Kind::number_list}}, {"max_extra_degree", {Kind::integer}}}},
      {"decompose",
       {{"a1", {Kind::product}}, {"a2", {Kind::product}}, {"pairs", {Kind::integer}}, {"max_degree", {Kind::integer}}}},
  };
  return schemas;
}

inline const std::map<std::string, std::set<PlotKind>>& allowed_plots() {
  static const std::map<std::string, std::set<PlotKind>> allowed{
      {"iterate", {PlotKind::orbit}},
      {"solve-maximal", {}},
      {"verify-ibp", {PlotKind::residual_trajectory}},
      {"verify-mbp", {}},
      {"curvature", {PlotKind::field}},
      {"covering", {}},
      {"decompose", {}},
  };
  return allowed;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj[key].get<T>() : fallback;
}

inline int positive_int(const json& obj, const char* key, int fallback, int max = 1 << 20) {
  const int v = get_or<int>(obj, key, fallback);
  if (v < 1 || v > max) throw SchemaError(std::string("inputs.") + key + ": out of range");
  return v;
}

}  // namespace detail

/// Validates a parsed config document. `env_profile` is the tolerance
/// profile from the environment, used when the config names none.
inline ExperimentConfig parse_config(const json& doc, std::optional<std::string> env_profile = std::nullopt) {
  using detail::Kind;
  detail::validate(doc,
                   {{"version", {Kind::integer, true}},
                    {"command", {Kind::string, true}},
                    {"inputs", {Kind::object}},
                    {"seed", {Kind::integer}},
                    {"output_path", {Kind::string}},
                    {"tolerances", {Kind::object}},
                    {"plot", {Kind::object}}},
                   "config");
  if (doc["version"].get<int>() != kConfigVersion) throw SchemaError("config.version: unsupported version");

  ExperimentConfig cfg;
  cfg.command = doc["command"].get<std::string>();
  const auto& schemas = detail::input_schemas();
  const auto schema = schemas.find(cfg.command);
  if (schema == schemas.end()) throw SchemaError("config.command: unknown command '" + cfg.command + "'");
  if (doc.contains("inputs")) cfg.inputs = doc["inputs"];
  detail::validate(cfg.inputs, schema->second, "inputs");

  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
      throw SchemaError("config.seed: expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.output_path = detail::get_or<std::string>(doc, "output_path", "");

  std::string profile = env_profile.value_or("default");
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    detail::validate(t,
                     {{"profile", {Kind::string}},
                      {"taylor_tol", {Kind::number}},
                      {"convergence_tol", {Kind::number}},
                      {"series_tol", {Kind::number}},
                      {"newton_tol", {Kind::number}},
                      {"residual_tol", {Kind::number}}},
                     "tolerances");
    profile = detail::get_or<std::string>(t, "profile", profile);
    cfg.tolerances = tolerance_profile(profile);
    auto& tol = cfg.tolerances;
    tol.taylor_tol = detail::get_or<double>(t, "taylor_tol", tol.taylor_tol);
    tol.convergence_tol = detail::get_or<double>(t, "convergence_tol", tol.convergence_tol);
    tol.series_tol = detail::get_or<double>(t, "series_tol", tol.series_tol);
    tol.newton_tol = detail::get_or<double>(t, "newton_tol", tol.newton_tol);
    tol.residual_tol = detail::get_or<double>(t, "residual_tol", tol.residual_tol);
    for (double v : {tol.taylor_tol, tol.convergence_tol, tol.series_tol, tol.newton_tol, tol.residual_tol})
      if (!(v > 0.0)) throw SchemaError("tolerances: values must be positive");
  } else {
    cfg.tolerances = tolerance_profile(profile);
  }

  if (doc.contains("plot")) {
    const json& p = doc["plot"];
    detail::validate(p, {{"kind", {Kind::string, true}}, {"path", {Kind::string, true}}}, "plot");
    cfg.plot = PlotRequest{plot_kind_from_string(p["kind"].get<std::string>()), p["path"].get<std::string>()};
  }
  cfg.document = doc;
  return cfg;
}

/// FNV-1a of the canonical dump (sorted keys) without the output location,
/// so identical experiments hash identically wherever they are written.
inline std::string config_hash(const ExperimentConfig& cfg) {
  json d = cfg.document;
  d.erase("output_path");
  d["seed"] = cfg.seed;
  return io::hex64(io::fnv1a64(d.dump()));
}

inline io::Header make_header(const ExperimentConfig& cfg) {
  return {kToolName, kToolVersion, config_hash(cfg), cfg.seed};
}

// ---------------------------------------------------------------------------
// Plot data.

struct OrbitReport {
  std::vector<complex> orbit;  // F_n(z0), n = 1, 2, ...
};

struct FieldReport {
  PseudometricField field;
  CurvatureGrid kappa;
};

struct ResidualTrajectory {
  std::vector<std::pair<std::size_t, double>> rows;  // (n, max residual)
};

using PlotReport = std::variant<OrbitReport, FieldReport, ResidualTrajectory>;

/// Columnar plot data; throws SchemaError when the report is not of `kind`.
inline io::CsvTable emit_plot_data(const PlotReport& report, PlotKind kind) {
  using io::cell;
  switch (kind) {
    case PlotKind::orbit: {
      const auto* r = std::get_if<OrbitReport>(&report);
      if (!r) throw SchemaError("plot: report is not an orbit");
      io::CsvTable t{"re", "im"};
      for (complex z : r->orbit) t.add_row({cell(z.real()), cell(z.imag())});
      return t;
    }
    case PlotKind::field: {
      const auto* r = std::get_if<FieldReport>(&report);
      if (!r) throw SchemaError("plot: report is not a field");
      io::CsvTable t{"z_re", "z_im", "lambda", "kappa"};
      const GridSpec& g = r->field.grid;
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          if (!g.admits(i, j)) continue;
          const complex z = g.point(i, j);
          t.add_row({cell(z.real()), cell(z.imag()), cell(r->field.at(i, j)), cell(r->kappa.at(i, j))});
        }
      return t;
    }
    case PlotKind::residual_trajectory: {
      const auto* r = std::get_if<ResidualTrajectory>(&report);
      if (!r) throw SchemaError("plot: report is not a residual trajectory");
      io::CsvTable t{"n", "residual"};
      for (const auto& [n, res] : r->rows) t.add_row({cell(n), cell(res)});
      return t;
    }
  }
  throw SchemaError("plot: unknown kind");
}

// ---------------------------------------------------------------------------
// Commands.

/// Rendered output of one command.
struct CommandOutput {
  std::string content;
  std::optional<PlotReport> plot;
  std::string summary;
  bool hard_error = false;  // numerical failure recorded in the output
};

namespace detail {

inline MapSequence family_sequence(const json& in, Rng& rng, std::size_t length) {
  const auto family = in["family"].get<std::string>();
  if (family == "squaring") return MapSequence::squaring();
  if (family == "tangential") return MapSequence::tangential(get_or<double>(in, "rate", 0.5));
  if (family == "rotation") return MapSequence::rotation(get_or<double>(in, "angle", 1.0));
  if (family == "random") return random_sequence(rng, length, positive_int(in, "max_degree", 3, kDefaultDegreeCap));
  if (family == "explicit") {
    if (!in.contains("maps")) throw SchemaError("inputs: family 'explicit' needs 'maps'");
    std::vector<FiniteBlaschke> maps;
    for (const auto& m : in["maps"]) maps.push_back(io::blaschke_from_json(m, "inputs.maps"));
    if (maps.size() < length) throw SchemaError("inputs.maps: fewer maps than the requested length");
    return MapSequence::from_list(std::move(maps));
  }
  throw SchemaError("inputs.family: unknown family '" + family + "'");
}

inline complex point_or(const json& in, const char* key, complex fallback) {
  return in.contains(key) ? io::complex_from_json(in[key], key) : fallback;
}

inline CommandOutput run_iterate(const ExperimentConfig& cfg, Rng& rng) {
  const json& in = cfg.inputs;
  const auto n_max = static_cast<std::size_t>(positive_int(in, "n_max", 40, 100000));
  const MapSequence seq = family_sequence(in, rng, n_max);
  ConvergenceOptions opts;
  opts.n_max = n_max;
  opts.tol = cfg.tolerances.convergence_tol;
  opts.series_tol = cfg.tolerances.series_tol;
  opts.a = DiskPoint(point_or(in, "a", 0.0));
  const auto grid = default_grid();
  const ConvergenceReport rep = detect_convergence(seq, grid, opts);

  const DiskPoint z0(point_or(in, "orbit_point", {0.3, 0.0}));
  OrbitReport orbit;
  for (std::size_t n = 1; n <= n_max; ++n) orbit.orbit.push_back(forward_eval(seq, n, z0));

  json out{{"header", io::header_json(make_header(cfg))},
           {"command", cfg.command},
           {"status", to_string(rep.status)},
           {"n_used", rep.n_used},
           {"grid_cauchy_gap", rep.grid_cauchy_gap},
           {"series_tail", rep.series_tail},
           {"limit_variation", rep.limit_variation},
           {"criterion_partial_sums", rep.criterion_partial_sums},
           {"diagnostics", rep.diagnostics}};
  return {out.dump(2) + "\n", PlotReport(std::move(orbit)), std::string("status ") + to_string(rep.status), false};
}

inline CommandOutput run_solve(const ExperimentConfig& cfg, Rng& rng) {
  const json& in = cfg.inputs;
  if (in.contains("critical_points") == in.contains("random_size"))
    throw SchemaError("inputs: give exactly one of 'critical_points' or 'random_size'");
  PointMultiset c;
  if (in.contains("critical_points")) {
    // Re-cluster so that nearby written points act as one multiple target.
    const PointMultiset written = io::multiset_from_json(in["critical_points"], "inputs.critical_points");
    for (const auto& e : written.entries()) {
      if (!(std::abs(e.point) < 1.0)) throw DomainError("inputs.critical_points: points must lie in the disk");
      c.insert(e.point, e.multiplicity);
    }
  } else {
    c = random_critical_set(rng, positive_int(in, "random_size", 1, kDefaultDegreeCap - 1));
  }
  SolverOptions opts;
  opts.newton_tol = cfg.tolerances.newton_tol;
  opts.residual_tol = cfg.tolerances.residual_tol;
  const SolverResult r = solve_maximal(c, opts);
  json out{{"header", io::header_json(make_header(cfg))},
           {"command", cfg.command},
           {"critical_points", io::multiset_to_json(c)},
           {"product", io::to_json(r.product)},
           {"degree", r.product.degree()},
           {"residual", r.residual},
           {"critical_mismatch", r.critical_mismatch},
           {"homotopy_steps", r.homotopy_steps},
           {"newton_iters", r.newton_iters}};
  return {out.dump(2) + "\n", std::nullopt, "degree " + std::to_string(r.product.degree()), false};
}

inline CommandOutput run_verify_ibp(const ExperimentConfig& cfg, Rng& rng) {
  using io::cell;
  const json& in = cfg.inputs;
  std::vector<std::size_t> n_list;
  if (in.contains("n_list")) {
    for (const auto& v : in["n_list"]) {
      if (v.get<long long>() < 1) throw SchemaError("inputs.n_list: entries must be >= 1");
      n_list.push_back(v.get<std::size_t>());
    }
  } else {
    n_list = {1, 2, 3, 4, 5, 6};
  }
  const std::size_t longest = n_list.empty() ? 1 : *std::max_element(n_list.begin(), n_list.end());
  const MapSequence seq = family_sequence(in, rng, longest);
  const int count = positive_int(in, "a_samples", 5, 10000);
  std::vector<DiskPoint> a_samples;
  for (int k = 0; k < count; ++k) a_samples.emplace_back(rng.in_disk(0.95));
  const IbpTable table =
      verify_stability_ibp(seq, a_samples, n_list, positive_int(in, "degree_cap", kDefaultDegreeCap, 4096));

  io::CsvTable csv{"n", "condition", "a_re", "a_im", "lhs", "rhs", "residual"};
  if (table.note) csv.add_note(*table.note);
  ResidualTrajectory traj;
  double worst = 0.0;
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    const complex a = r.a ? r.a->value() : complex(std::nan(""), std::nan(""));
    csv.add_row({cell(row.n), to_string(r.condition), cell(a.real()), cell(a.imag()), cell(r.lhs), cell(r.rhs),
                 cell(r.residual)});
    if (traj.rows.empty() || traj.rows.back().first != row.n) traj.rows.emplace_back(row.n, 0.0);
    traj.rows.back().second = std::max(traj.rows.back().second, r.residual);
    worst = std::max(worst, r.residual);
  }
  return {csv.render(make_header(cfg)), PlotReport(std::move(traj)), "max residual " + io::format_double(worst),
          false};
}

inline CommandOutput run_verify_mbp(const ExperimentConfig& cfg, Rng& rng) {
  using io::cell;
  const json& in = cfg.inputs;
  const int cases = positive_int(in, "cases", 50, 100000);
  const int max_degree = positive_int(in, "max_degree", 6, kDefaultDegreeCap);
  SolverOptions opts;
  opts.newton_tol = cfg.tolerances.newton_tol;
  opts.residual_tol = cfg.tolerances.residual_tol;
  const auto probes = default_grid();

  io::CsvTable csv{"case", "degree", "map_distance", "residual", "critical_mismatch", "homotopy_steps", "newton_iters"};
  double worst = 0.0;
  bool failed = false;
  for (int k = 0; k < cases; ++k) {
    const FiniteBlaschke b = random_blaschke(rng, max_degree);
    try {
      const SolverResult r = solve_maximal(critical_set(b), opts);
      const double d = map_distance(r.product, canonicalize(b), probes);
      worst = std::max(worst, d);
      csv.add_row({cell(k), cell(b.degree()), cell(d), cell(r.residual), cell(r.critical_mismatch),
                   cell(r.homotopy_steps), cell(r.newton_iters)});
    } catch (const NumericalError& e) {
      failed = true;
      csv.add_note("case " + std::to_string(k) + ": " + e.what());
      const double nan = std::nan("");
      csv.add_row({cell(k), cell(b.degree()), cell(nan), cell(nan), cell(nan), cell(-1), cell(-1)});
    }
  }
  return {csv.render(make_header(cfg)), std::nullopt, "max map distance " + io::format_double(worst), failed};
}

inline CommandOutput run_curvature(const ExperimentConfig& cfg, Rng& rng) {
  using io::cell;
  const json& in = cfg.inputs;
  const FiniteBlaschke f = in.contains("product")
                               ? io::blaschke_from_json(in["product"], "inputs.product")
                               : random_blaschke(rng, positive_int(in, "max_degree", 3, kDefaultDegreeCap));
  const double h = get_or<double>(in, "h", 0.02);
  const double r_max = get_or<double>(in, "r_max", 0.8);
  if (!(h > 0.0 && h < 0.5)) throw SchemaError("inputs.h: out of range");
  if (!(r_max > 0.0 && r_max < 1.0)) throw SchemaError("inputs.r_max: out of range");
  FieldReport rep{lambda_field(f, GridSpec::disk(h, r_max)), {}};
  rep.kappa = curvature(rep.field);

  io::CsvTable csv{"z_re", "z_im", "lambda", "kappa", "excluded_flag"};
  const GridSpec& g = rep.field.grid;
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!g.admits(i, j)) continue;
      const complex z = g.point(i, j);
      const bool excluded = rep.kappa.excluded[g.index(i, j)] != 0;
      csv.add_row({cell(z.real()), cell(z.imag()), cell(rep.field.at(i, j)), cell(rep.kappa.at(i, j)), cell(excluded)});
      if (!excluded) worst = std::max(worst, std::abs(rep.kappa.at(i, j) + 4.0));
    }
  return {csv.render(make_header(cfg)), PlotReport(std::move(rep)), "max |kappa + 4| " + io::format_double(worst),
          false};
}

inline CommandOutput run_covering(const ExperimentConfig& cfg, Rng& rng) {
  using io::cell;
  const json& in = cfg.inputs;
  const int cases = positive_int(in, "cases", 20, 100000);
  const int extra = positive_int(in, "max_extra_degree", 3, kDefaultDegreeCap - 1);
  std::vector<double> eps_list{0.01, 0.04};
  if (in.contains("eps")) eps_list = in["eps"].get<std::vector<double>>();
  io::CsvTable csv{"case", "eps", "degree", "min_modulus", "bound", "covered", "samples"};
  int covered = 0;
  int total = 0;
  for (double eps : eps_list) {
    for (int k = 0; k < cases; ++k) {
      const FiniteBlaschke h = random_near_identity(rng, eps, extra);
      const CoveringCertificate c = covering_certificate(h, eps);
      csv.add_row({cell(k), cell(eps), cell(h.degree()), cell(c.min_modulus), cell(c.target_radius), cell(c.covered),
                   cell(c.samples)});
      covered += c.covered ? 1 : 0;
      ++total;
    }
  }
  return {csv.render(make_header(cfg)), std::nullopt,
          "covered " + std::to_string(covered) + "/" + std::to_string(total), false};
}

inline CommandOutput run_decompose(const ExperimentConfig& cfg, Rng& rng) {
  using io::cell;
  const json& in = cfg.inputs;
  std::vector<std::pair<FiniteBlaschke, FiniteBlaschke>> pairs;
  if (in.contains("a1") || in.contains("a2")) {
    if (!(in.contains("a1") && in.contains("a2"))) throw SchemaError("inputs: 'a1' and 'a2' go together");
    pairs.emplace_back(io::blaschke_from_json(in["a1"], "inputs.a1"), io::blaschke_from_json(in["a2"], "inputs.a2"));
  } else {
    const int count = positive_int(in, "pairs", 20, 100000);
    const int max_degree = positive_int(in, "max_degree", 3, 8);
    for (int k = 0; k < count; ++k) {
      FiniteBlaschke a1 = random_blaschke(rng, max_degree);
      FiniteBlaschke a2 = random_blaschke(rng, max_degree);
      pairs.emplace_back(std::move(a1), std::move(a2));
    }
  }
  SolverOptions opts;
  opts.newton_tol = cfg.tolerances.newton_tol;
  opts.residual_tol = cfg.tolerances.residual_tol;
  const auto probes = default_grid();
  io::CsvTable csv{"case", "degree_a1", "degree_a2", "gap_a1", "gap_a2", "gap_a"};
  double worst = 0.0;
  bool failed = false;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [a1, a2] = pairs[k];
    try {
      const DecompositionReport r = decomposition_check(a1, a2, probes, opts);
      csv.add_row({cell(k), cell(a1.degree()), cell(a2.degree()), cell(r.gap_a1), cell(r.gap_a2), cell(r.gap_a)});
      worst = std::max({worst, r.gap_a1, r.gap_a2, r.gap_a});
    } catch (const DecompositionError& e) {
      failed = true;
      csv.add_note("case " + std::to_string(k) + ": " + e.what());
      const auto& p = e.partial();
      csv.add_row({cell(k), cell(a1.degree()), cell(a2.degree()), cell(p.gap_a1), cell(p.gap_a2), cell(p.gap_a)});
    }
  }
  return {csv.render(make_header(cfg)), std::nullopt, "max gap " + io::format_double(worst), failed};
}

}  // namespace detail

/// Runs the configured command and renders its output without touching disk.
inline CommandOutput execute(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed);
  if (cfg.plot && !detail::allowed_plots().at(cfg.command).contains(cfg.plot->kind))
    throw SchemaError("plot: kind does not match command '" + cfg.command + "'");
  if (cfg.command == "iterate") return detail::run_iterate(cfg, rng);
  if (cfg.command == "solve-maximal") return detail::run_solve(cfg, rng);
  if (cfg.command == "verify-ibp") return detail::run_verify_ibp(cfg, rng);
  if (cfg.command == "verify-mbp") return detail::run_verify_mbp(cfg, rng);
  if (cfg.command == "curvature") return detail::run_curvature(cfg, rng);
  if (cfg.command == "covering") return detail::run_covering(cfg, rng);
  if (cfg.command == "decompose") return detail::run_decompose(cfg, rng);
  throw SchemaError("unknown command '" + cfg.command + "'");
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

inline std::optional<std::string> env_profile() {
  const char* v = std::getenv(kProfileEnv);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

/// Loads, validates and runs a config file; returns the exit status.
inline int run(const std::string& config_path, const RunOverrides& ov, std::ostream& log) {
  try {
    json doc;
    try {
      doc = json::parse(io::read_file(config_path));
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("config: not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg = parse_config(doc, env_profile());
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.output_path = *ov.out;
    if (cfg.output_path.empty()) throw SchemaError("config: no output_path and no --out given");

    const CommandOutput out = execute(cfg);
    io::write_file(cfg.output_path, out.content);
    if (cfg.plot) io::write_file(cfg.plot->path, emit_plot_data(*out.plot, cfg.plot->kind).render(make_header(cfg)));
    if (!ov.quiet) log << cfg.command << ": " << out.summary << " -> " << cfg.output_path << "\n";
    return out.hard_error ? kExitNumerical : kExitOk;
  } catch (const io::IoError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SchemaError& e) {
    log << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const NumericalError& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitSchema;
  }
}

}  // namespace blaschke::cli
