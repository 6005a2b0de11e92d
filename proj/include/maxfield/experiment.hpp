#pragma once

// Config-driven experiment runner behind the CLI: strict JSON parsing (unknown
// keys are errors), deterministic seeding, CSV outputs with full double
// precision, and a JSON manifest describing every run.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "maxfield/accuracy.hpp"
#include "maxfield/copula.hpp"
#include "maxfield/dnorm.hpp"
#include "maxfield/errors.hpp"
#include "maxfield/fields.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/interp.hpp"

namespace maxfield {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

// 17 significant digits round-trip any double exactly; '.' decimal point
// regardless of locale is ensured by the CLI pinning LC_NUMERIC to "C".
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  CsvTable& cell(double v) {
    row_.push_back(format_g17(v));
    return *this;
  }
  CsvTable& cell(std::uint64_t v) {
    row_.push_back(std::to_string(v));
    return *this;
  }
  CsvTable& cell(const std::string& v) {
    row_.push_back(v);
    return *this;
  }
  void end_row() {
    if (row_.size() != columns_.size())
      throw ExecutionError("csv row width mismatch");
    rows_.push_back(std::move(row_));
    row_.clear();
  }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
    return os.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> row_;
};

// ---------------------------------------------------------------------------
// Strict config access.

namespace cfg {

inline void expect_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be an object");
}

inline void check_keys(const json& j, const std::string& ctx,
                       std::initializer_list<const char*> allowed) {
  expect_object(j, ctx);
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + ctx);
}

inline const json& require(const json& j, const std::string& ctx,
                           const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError(ctx + " is missing required key \"" + key + "\"");
  return *it;
}

inline double num(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + " must be a number");
  return j.get<double>();
}

inline std::uint64_t uint(const json& j, const std::string& ctx) {
  // Parsed documents store nonnegative literals as unsigned, but configs
  // assembled in code arrive as signed integers; accept both.
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError(ctx + " must be a nonnegative integer");
}

inline std::string str(const json& j, const std::string& ctx) {
  if (!j.is_string()) throw ConfigError(ctx + " must be a string");
  return j.get<std::string>();
}

inline double num_or(const json& parent, const char* key, double fallback) {
  auto it = parent.find(key);
  return it == parent.end() ? fallback : num(*it, key);
}

inline std::uint64_t uint_or(const json& parent, const char* key,
                             std::uint64_t fallback) {
  auto it = parent.find(key);
  return it == parent.end() ? fallback : uint(*it, key);
}

inline std::string str_or(const json& parent, const char* key,
                          const std::string& fallback) {
  auto it = parent.find(key);
  return it == parent.end() ? fallback : str(*it, key);
}

inline Point point(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty())
    throw ConfigError(ctx + " must be a nonempty coordinate array");
  std::vector<double> c;
  for (const auto& v : j) c.push_back(num(v, ctx));
  try {
    return Point(std::move(c));
  } catch (const Error& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

inline std::vector<Point> points(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty())
    throw ConfigError(ctx + " must be a nonempty array of points");
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(point(p, ctx));
  return out;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Builders.

inline SpatialNorm parse_spatial_norm(const std::string& s) {
  if (s == "l1") return SpatialNorm::L1;
  if (s == "l2") return SpatialNorm::L2;
  if (s == "linf") return SpatialNorm::Linf;
  throw ConfigError("unknown spatial norm \"" + s + "\" (use l1, l2, linf)");
}

inline Grid build_grid(const json& g) {
  cfg::check_keys(g, "grid", {"kind", "d", "k", "per_axis", "points", "norm",
                              "probe_resolution"});
  std::string kind = cfg::str(cfg::require(g, "grid", "kind"), "grid.kind");
  SpatialNorm norm = parse_spatial_norm(cfg::str_or(g, "norm", "l2"));
  std::size_t probe = cfg::uint_or(g, "probe_resolution", 0);
  try {
    if (kind == "uniform1d") {
      std::size_t d = cfg::uint(cfg::require(g, "grid", "d"), "grid.d");
      return make_grid(uniform_points_1d(d), norm, probe);
    }
    if (kind == "lattice") {
      std::size_t k = cfg::uint(cfg::require(g, "grid", "k"), "grid.k");
      std::size_t per_axis =
          cfg::uint(cfg::require(g, "grid", "per_axis"), "grid.per_axis");
      if (per_axis < 2) throw BadGrid("lattice needs per_axis >= 2");
      return make_grid(lattice_points(k, per_axis - 1), norm, probe);
    }
    if (kind == "explicit") {
      auto pts = cfg::points(cfg::require(g, "grid", "points"), "grid.points");
      return make_grid(std::move(pts), norm, probe);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  throw ConfigError("unknown grid.kind \"" + kind + "\"");
}

inline KernelFn build_kernel(const json& k) {
  if (k.is_string()) {
    std::string name = k.get<std::string>();
    if (name == "exponential") return KernelFn::exponential();
    if (name == "gaussian") return KernelFn::gaussian();
    throw ConfigError("unknown kernel \"" + name + "\"");
  }
  cfg::check_keys(k, "kernel", {"kind", "p", "knots"});
  std::string kind = cfg::str(cfg::require(k, "kernel", "kind"), "kernel.kind");
  try {
    if (kind == "exponential") return KernelFn::exponential();
    if (kind == "gaussian") return KernelFn::gaussian();
    if (kind == "power_law")
      return KernelFn::power_law(cfg::num(cfg::require(k, "kernel", "p"), "kernel.p"));
    if (kind == "table") {
      const json& knots = cfg::require(k, "kernel", "knots");
      if (!knots.is_array()) throw ConfigError("kernel.knots must be an array");
      std::vector<std::pair<double, double>> pts;
      for (const auto& kn : knots) {
        if (!kn.is_array() || kn.size() != 2)
          throw ConfigError("kernel.knots entries must be [x, K(x)] pairs");
        pts.emplace_back(cfg::num(kn[0], "kernel.knots"),
                         cfg::num(kn[1], "kernel.knots"));
      }
      return KernelFn::from_table(std::move(pts));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  throw ConfigError("unknown kernel.kind \"" + kind + "\"");
}

struct ModelBundle {
  FieldSampler field;
  DNormModel joint;
  std::optional<DNormModel> pairwise;  // exact bivariate norm when available
  std::string description;
};

inline ModelBundle build_model(const json& m, std::uint64_t seed) {
  cfg::check_keys(m, "model", {"kind", "alpha", "sigma", "nodes", "kappa",
                               "max_terms", "mc_samples"});
  std::string kind = cfg::str(cfg::require(m, "model", "kind"), "model.kind");
  std::size_t mc_samples = cfg::uint_or(m, "mc_samples", 100000);
  TruncationPolicy policy;
  policy.kappa = cfg::num_or(m, "kappa", policy.kappa);
  policy.max_terms = cfg::uint_or(m, "max_terms", policy.max_terms);
  std::uint64_t model_seed = derive_stream(seed, {stream::kDNormBlock});
  try {
    if (kind == "brown_resnick") {
      double alpha = cfg::num_or(m, "alpha", 1.0);
      auto field = FieldSampler::brown_resnick(alpha, policy);
      return {field, field.joint_model(mc_samples, model_seed),
              hr_from_variogram(alpha), field.describe()};
    }
    if (kind == "max_linear") {
      const json& nodes = cfg::require(m, "model", "nodes");
      if (!nodes.is_array()) throw ConfigError("model.nodes must be an array");
      std::vector<double> xs;
      for (const auto& v : nodes) xs.push_back(cfg::num(v, "model.nodes"));
      auto fs = hat_spectral_functions(std::move(xs));
      auto field = FieldSampler::max_linear(std::move(fs));
      auto joint = field.joint_model(mc_samples, model_seed);
      return {field, joint, joint, field.describe()};
    }
    if (kind == "independence") {
      auto field = FieldSampler::from_generator(
          std::make_shared<DiscreteIndependenceGenerator>(), policy);
      return {field, DNormModel::independence(), DNormModel::independence(),
              "independence"};
    }
    if (kind == "complete_dependence") {
      auto field =
          FieldSampler::from_generator(std::make_shared<ConstantGenerator>(), policy);
      return {field, DNormModel::complete_dependence(),
              DNormModel::complete_dependence(), "complete_dependence"};
    }
    if (kind == "husler_reiss") {
      double sigma = cfg::num(cfg::require(m, "model", "sigma"), "model.sigma");
      auto field = FieldSampler::from_generator(
          std::make_shared<HrPairGenerator>(sigma), policy);
      return {field, DNormModel::husler_reiss(sigma),
              DNormModel::husler_reiss(sigma),
              "husler_reiss(sigma=" + format_g(sigma) + ")"};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown model.kind \"" + kind + "\"");
}

inline WeightSystem build_weights(const json& w, const Grid& grid,
                                  const ModelBundle& mb) {
  cfg::check_keys(w, "weights", {"family", "kernel", "bandwidth"});
  std::string family =
      cfg::str(cfg::require(w, "weights", "family"), "weights.family");
  try {
    if (family == "piecewise1d") {
      // Adjacent-pair construction only needs bivariate norms, so an exact
      // pairwise model is preferred over the joint Monte Carlo one.
      return WeightSystem::piecewise_1d(grid,
                                        mb.pairwise ? *mb.pairwise : mb.joint);
    }
    if (family == "min_distance")
      return WeightSystem::min_distance(grid, mb.joint);
    if (family == "kernel") {
      KernelFn k = build_kernel(cfg::require(w, "weights", "kernel"));
      double h = cfg::num(cfg::require(w, "weights", "bandwidth"),
                          "weights.bandwidth");
      return WeightSystem::kernel(grid, std::move(k), h, mb.joint);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }
  throw ConfigError("unknown weights.family \"" + family + "\"");
}

// ---------------------------------------------------------------------------
// Runner.

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool dry_run = false;
};

struct RunResult {
  std::vector<std::string> outputs;
  json manifest;
};

namespace detail {

struct RunContext {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path out_dir;
  json manifest;
  std::vector<std::string> outputs;
  bool dry_run = false;

  void write(const std::string& name, const std::string& body) {
    if (dry_run) return;
    std::filesystem::path p = out_dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ExecutionError("cannot open output file " + p.string());
    os << body;
    if (!os) throw ExecutionError("failed writing " + p.string());
    outputs.push_back(name);
  }
};

inline std::vector<std::string> coord_columns(const char* prefix,
                                              std::size_t k) {
  std::vector<std::string> cols;
  if (k == 1) {
    cols.push_back(prefix);
  } else {
    for (std::size_t i = 0; i < k; ++i)
      cols.push_back(std::string(prefix) + "_" + std::to_string(i));
  }
  return cols;
}

inline void run_simulate(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model",
                   "locations", "reps", "margins"});
  Grid grid = build_grid(cfg::require(c, "config", "grid"));
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
  std::vector<Point> locs =
      c.contains("locations")
          ? cfg::points(c["locations"], "locations")
          : grid.points();
  std::size_t reps = cfg::uint_or(c, "reps", 1000);
  std::string margins = cfg::str_or(c, "margins", "standard");
  MarginKind to = MarginKind::StandardNegExp;
  if (margins == "frechet") to = MarginKind::Frechet;
  else if (margins == "gumbel") to = MarginKind::Gumbel;
  else if (margins != "standard")
    throw ConfigError("unknown margins \"" + margins + "\"");
  if (ctx.dry_run) return;

  auto res = mb.field.sample(locs, reps, ctx.seed, ctx.threads);
  if (to != MarginKind::StandardNegExp)
    transform_margins(res.eta, MarginKind::StandardNegExp, to);
  bool series = !res.truncated.empty();

  std::vector<std::string> cols = {"rep"};
  for (std::size_t i = 0; i < locs.size(); ++i)
    cols.push_back("value_" + std::to_string(i + 1));
  if (series) cols.push_back("truncated");
  CsvTable csv(cols);
  for (std::size_t r = 0; r < reps; ++r) {
    csv.cell(r);
    for (std::size_t i = 0; i < locs.size(); ++i) csv.cell(res.eta(r, i));
    if (series) csv.cell(static_cast<std::uint64_t>(res.truncated[r]));
    csv.end_row();
  }
  ctx.write("simulate.csv", csv.to_string());
  ctx.manifest["margins"] = margins;
  ctx.manifest["truncated_replicates"] = res.truncated_count;
  ctx.manifest["mean_series_terms"] = res.mean_terms;
}

inline void run_mse(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model", "weights",
                   "points", "reps", "mc_samples", "quad_tol"});
  Grid grid = build_grid(cfg::require(c, "config", "grid"));
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
  WeightSystem ws =
      build_weights(cfg::require(c, "config", "weights"), grid, mb);
  auto pts = cfg::points(cfg::require(c, "config", "points"), "points");
  std::size_t reps = cfg::uint_or(c, "reps", 10000);
  std::size_t bound_samples = cfg::uint_or(c, "mc_samples", 100000);
  double quad_tol = cfg::num_or(c, "quad_tol", 1e-8);
  if (ctx.dry_run) return;

  auto cols = coord_columns("t", grid.dim());
  cols.insert(cols.end(), {"analytic", "empirical", "empirical_stderr",
                           "bound6", "bound6_stderr", "quad_evals"});
  CsvTable csv(cols);
  auto gen = mb.field.generator();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& t = pts[i];
    auto analytic = mse_analytic_detailed(ws, mb.joint, t, quad_tol);
    auto emp = mse_empirical(mb.field, ws, t, reps,
                             derive_stream(ctx.seed, {stream::kFieldSample, i}),
                             ctx.threads);
    auto b6 = mse_bound(*gen, ws, t, bound_samples,
                        derive_stream(ctx.seed, {stream::kBound, i}),
                        ctx.threads);
    for (std::size_t d = 0; d < t.dim(); ++d) csv.cell(t[d]);
    csv.cell(analytic.value)
        .cell(emp.estimate)
        .cell(emp.stderr_)
        .cell(b6.estimate)
        .cell(b6.stderr_)
        .cell(analytic.quad_evaluations);
    csv.end_row();
  }
  ctx.write("mse.csv", csv.to_string());
}

inline void run_imse(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model", "weights",
                   "resolution", "mc_samples", "quad_tol"});
  Grid grid = build_grid(cfg::require(c, "config", "grid"));
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
  WeightSystem ws =
      build_weights(cfg::require(c, "config", "weights"), grid, mb);
  std::size_t resolution = cfg::uint_or(c, "resolution", 0);
  std::size_t mc_samples = cfg::uint_or(c, "mc_samples", 20000);
  double quad_tol = cfg::num_or(c, "quad_tol", 1e-8);
  if (ctx.dry_run) return;

  auto factory = joint_factory_for(mb.field, mc_samples, ctx.seed);
  auto report = imse(ws, factory, resolution, quad_tol);

  CsvTable summary({"imse", "rule", "resolution", "nodes"});
  summary.cell(report.value)
      .cell(std::string(report.rule == ImseRule::MidpointLattice
                            ? "midpoint"
                            : "mc_probes"))
      .cell(report.resolution)
      .cell(report.node_mse.size());
  summary.end_row();
  ctx.write("imse.csv", summary.to_string());

  auto cols = coord_columns("t", grid.dim());
  cols.push_back("mse");
  CsvTable nodes(cols);
  for (const auto& [t, v] : report.node_mse) {
    for (std::size_t d = 0; d < t.dim(); ++d) nodes.cell(t[d]);
    nodes.cell(v);
    nodes.end_row();
  }
  ctx.write("imse_nodes.csv", nodes.to_string());
}

inline void run_converge(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "model", "family", "kernel",
                   "d_values", "probes", "resolution", "mc_samples",
                   "quad_tol"});
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);

  ConvergenceSettings settings;
  settings.seed = ctx.seed;
  settings.threads = ctx.threads;
  settings.imse_resolution = cfg::uint_or(c, "resolution", 64);
  settings.mc_samples = cfg::uint_or(c, "mc_samples", 20000);
  settings.quad_tol = cfg::num_or(c, "quad_tol", 1e-8);
  std::string family = cfg::str_or(c, "family", "kernel");
  if (family == "kernel") {
    settings.family = WeightFamily::Kernel;
    if (c.contains("kernel")) settings.kernel = build_kernel(c["kernel"]);
  } else if (family == "piecewise1d") {
    settings.family = WeightFamily::Piecewise1D;
  } else if (family == "min_distance") {
    settings.family = WeightFamily::MinDistance;
  } else {
    throw ConfigError("unknown family \"" + family + "\"");
  }

  const json& dv = cfg::require(c, "config", "d_values");
  if (!dv.is_array() || dv.empty())
    throw ConfigError("d_values must be a nonempty array");
  std::vector<Grid> grids;
  for (const auto& d : dv)
    grids.push_back(make_grid(uniform_points_1d(cfg::uint(d, "d_values")),
                              SpatialNorm::L2));

  std::vector<Point> probes;
  if (c.contains("probes")) {
    for (const auto& p : c["probes"]) probes.push_back(Point{cfg::num(p, "probes")});
  } else {
    probes = {Point{0.25}, Point{0.5}, Point{0.75}};
  }
  if (ctx.dry_run) return;

  auto table = convergence_experiment(mb.field, grids, probes, settings);

  bool with_h = settings.family == WeightFamily::Kernel;
  std::vector<std::string> cols = {"n", "d", "eps"};
  if (with_h) cols.push_back("h");
  cols.push_back("imse");
  for (const auto& p : probes) cols.push_back("mse_t" + format_g(p[0]));
  CsvTable csv(cols);
  for (const auto& row : table.rows) {
    csv.cell(row.index).cell(row.d).cell(row.eps);
    if (with_h) csv.cell(row.h);
    csv.cell(row.imse);
    for (double v : row.probe_mse) csv.cell(v);
    csv.end_row();
  }
  ctx.write("converge.csv", csv.to_string());
}

inline void run_copula(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model", "weights",
                   "t", "n_values", "reps", "method", "quad_tol"});
  Grid grid = build_grid(cfg::require(c, "config", "grid"));
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
  WeightSystem ws =
      build_weights(cfg::require(c, "config", "weights"), grid, mb);
  Point t = cfg::point(cfg::require(c, "config", "t"), "t");
  const json& nv = cfg::require(c, "config", "n_values");
  if (!nv.is_array() || nv.empty())
    throw ConfigError("n_values must be a nonempty array");
  std::vector<std::size_t> ns;
  for (const auto& n : nv) ns.push_back(cfg::uint(n, "n_values"));
  std::size_t reps = cfg::uint_or(c, "reps", 100000);
  double quad_tol = cfg::num_or(c, "quad_tol", 1e-8);
  std::string method_s = cfg::str_or(c, "method", "exact");
  BlockMaxMethod method;
  if (method_s == "exact") method = BlockMaxMethod::ExactIdentity;
  else if (method_s == "brute") method = BlockMaxMethod::BruteForce;
  else throw ConfigError("unknown method \"" + method_s + "\"");
  if (ctx.dry_run) return;

  double target = mse_analytic(ws, mb.joint, t, quad_tol);
  auto rows = mse_Yn(mb.field, ws, t, ns, reps,
                     derive_stream(ctx.seed, {stream::kCopula}), method,
                     ctx.threads);
  CsvTable csv({"n", "mse", "stderr", "target", "abs_gap"});
  for (const auto& row : rows) {
    csv.cell(row.n)
        .cell(row.mse.estimate)
        .cell(row.mse.stderr_)
        .cell(target)
        .cell(std::abs(row.mse.estimate - target));
    csv.end_row();
  }
  ctx.write("copula.csv", csv.to_string());
}

inline void run_validate(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model", "weights",
                   "trials", "probe_resolution", "d_values",
                   "bandwidth_power"});
  std::size_t trials = cfg::uint_or(c, "trials", 200);
  std::size_t probe_res = cfg::uint_or(c, "probe_resolution", 0);
  if (ctx.dry_run) return;

  CsvTable csv({"check", "status", "detail"});
  auto row = [&](const std::string& check, bool ok, const std::string& detail) {
    csv.cell(check).cell(std::string(ok ? "pass" : "fail")).cell(detail);
    csv.end_row();
  };
  auto skip = [&](const std::string& check) {
    csv.cell(check).cell(std::string("skipped")).cell(std::string());
    csv.end_row();
  };

  std::optional<Grid> grid;
  try {
    grid = build_grid(cfg::require(c, "config", "grid"));
    row("grid", true,
        "d=" + std::to_string(grid->size()) +
            " mesh=" + format_g(grid->mesh()));
  } catch (const std::exception& e) {
    row("grid", false, e.what());
  }

  std::optional<ModelBundle> mb;
  try {
    mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
    row("model", true, mb->description);
  } catch (const std::exception& e) {
    row("model", false, e.what());
  }

  if (c.contains("weights") && grid && mb) {
    const json& w = c["weights"];
    std::string family = w.contains("family") && w["family"].is_string()
                             ? w["family"].get<std::string>()
                             : "";
    if (family == "kernel" && w.contains("kernel")) {
      try {
        auto check = validate_kernel(build_kernel(w["kernel"]));
        std::string detail = "K(0)=" + format_g(check.k0);
        for (const auto& r : check.ratios)
          detail += " r(" + format_g(r.a) + "/" + format_g(r.b) +
                    ")=" + format_g(r.ratio);
        row("kernel_admissible", check.pass(), detail);
      } catch (const std::exception& e) {
        row("kernel_admissible", false, e.what());
      }
    }
    try {
      WeightSystem ws = build_weights(w, *grid, *mb);
      auto v = validate_weights(ws, probe_res);
      row("weights_standardized", v.standardization_ok,
          "max_dev=" + format_g(v.max_standardization_dev) + " over " +
              std::to_string(v.probes) + " probes");
      if (ws.interpolating())
        row("weights_interpolate", v.interpolation_ok,
            "max_delta_dev=" + format_g(v.max_delta_dev));
      else
        row("weights_bounded", v.max_weight <= 1.0 + 1e-9,
            "max_weight=" + format_g(v.max_weight));
    } catch (const std::exception& e) {
      row("weights_standardized", false, e.what());
    }
  } else if (c.contains("weights")) {
    skip("weights_standardized");
  }

  if (mb) {
    try {
      std::vector<Point> locs;
      if (grid) {
        locs = grid->points();
        if (mb->joint.backend() == DNormModel::Backend::HuslerReiss &&
            locs.size() != 2)
          locs = {Point{0.0}, Point{1.0}};
      } else {
        locs = {Point{0.0}, Point{1.0}};
      }
      auto report = check_norm_axioms(mb->joint, locs, trials,
                                      derive_stream(ctx.seed, {stream::kAxiomCheck}));
      row("dnorm_axioms", report.pass(),
          std::to_string(report.violation_count) + " violations in " +
              std::to_string(report.trials) + " trials");
    } catch (const std::exception& e) {
      row("dnorm_axioms", false, e.what());
    }
  } else {
    skip("dnorm_axioms");
  }

  // Grid-ladder checks: mesh must shrink and mesh/h must grow (h = mesh^p).
  if (c.contains("d_values")) {
    const json& dv = c["d_values"];
    if (!dv.is_array() || dv.empty())
      throw ConfigError("d_values must be a nonempty array");
    double power = cfg::num_or(c, "bandwidth_power", 2.0);
    try {
      std::vector<double> meshes;
      for (const auto& d : dv)
        meshes.push_back(make_grid(uniform_points_1d(cfg::uint(d, "d_values")),
                                   SpatialNorm::L2)
                             .mesh());
      bool mesh_ok = true;
      for (std::size_t i = 1; i < meshes.size(); ++i)
        if (!(meshes[i] < meshes[i - 1])) mesh_ok = false;
      row("mesh_decreasing", mesh_ok,
          "first=" + format_g(meshes.front()) +
              " last=" + format_g(meshes.back()));
      bool growth_ok = true;
      double prev_ratio = 0.0;
      for (double eps : meshes) {
        double ratio = eps / std::pow(eps, power);
        if (!(ratio > prev_ratio)) growth_ok = false;
        prev_ratio = ratio;
      }
      row("bandwidth_growth", growth_ok,
          "h=eps^" + format_g(power) +
          (growth_ok ? "" : "; mesh/h must be strictly increasing"));
    } catch (const std::exception& e) {
      row("bandwidth_growth", false, e.what());
    }
  }

  ctx.write("validate.csv", csv.to_string());
}

inline void run_interpolate(const json& c, RunContext& ctx) {
  cfg::check_keys(c, "config",
                  {"experiment", "seed", "threads", "grid", "model", "weights",
                   "observations", "points"});
  Grid grid = build_grid(cfg::require(c, "config", "grid"));
  ModelBundle mb = build_model(cfg::require(c, "config", "model"), ctx.seed);
  WeightSystem ws =
      build_weights(cfg::require(c, "config", "weights"), grid, mb);
  const json& obs_j = cfg::require(c, "config", "observations");
  if (!obs_j.is_array()) throw ConfigError("observations must be an array");
  std::vector<double> obs;
  for (const auto& v : obs_j) obs.push_back(cfg::num(v, "observations"));
  auto pts = cfg::points(cfg::require(c, "config", "points"), "points");
  if (ctx.dry_run) return;

  DiscretizedField field = [&] {
    try {
      return discretize(ws, std::move(obs));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("observations: ") + e.what());
    }
  }();

  auto cols = coord_columns("t", grid.dim());
  cols.push_back("eta_hat");
  for (std::size_t i = 0; i < grid.size(); ++i)
    cols.push_back("g_" + std::to_string(i + 1));
  CsvTable csv(cols);
  for (const auto& t : pts) {
    for (std::size_t d = 0; d < t.dim(); ++d) csv.cell(t[d]);
    csv.cell(field(t));
    for (double g : ws.weights(t)) csv.cell(g);
    csv.end_row();
  }
  ctx.write("interpolate.csv", csv.to_string());
}

}  // namespace detail

inline json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  json c;
  try {
    is >> c;
  } catch (const std::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  cfg::expect_object(c, "config");
  return c;
}

inline RunResult run_experiment(const json& config, const std::string& out_dir,
                                RunOverrides ov = {}) {
  cfg::expect_object(config, "config");
  std::string experiment =
      cfg::str(cfg::require(config, "config", "experiment"), "experiment");

  detail::RunContext ctx;
  ctx.seed = ov.seed ? *ov.seed : cfg::uint_or(config, "seed", 0);
  unsigned requested =
      ov.threads ? *ov.threads
                 : static_cast<unsigned>(cfg::uint_or(config, "threads", 0));
  ctx.threads = resolve_threads(requested);
  ctx.out_dir = out_dir;
  ctx.dry_run = ov.dry_run;
  if (!ctx.dry_run) std::filesystem::create_directories(ctx.out_dir);

  auto start = std::chrono::steady_clock::now();
  if (experiment == "simulate") detail::run_simulate(config, ctx);
  else if (experiment == "mse") detail::run_mse(config, ctx);
  else if (experiment == "imse") detail::run_imse(config, ctx);
  else if (experiment == "converge") detail::run_converge(config, ctx);
  else if (experiment == "copula") detail::run_copula(config, ctx);
  else if (experiment == "validate") detail::run_validate(config, ctx);
  else if (experiment == "interpolate") detail::run_interpolate(config, ctx);
  else throw ConfigError("unknown experiment \"" + experiment + "\"");
  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();

  RunResult res;
  res.manifest = ctx.manifest;
  res.manifest["tool"] = "maxfield";
  res.manifest["version"] = kVersion;
  res.manifest["experiment"] = experiment;
  res.manifest["seed"] = ctx.seed;
  res.manifest["threads"] = ctx.threads;
  res.manifest["dry_run"] = ctx.dry_run;
  res.manifest["wall_ms"] = wall;
  res.manifest["outputs"] = ctx.outputs;
  res.manifest["config"] = config;
  res.outputs = ctx.outputs;
  if (!ctx.dry_run) {
    std::filesystem::path mp = ctx.out_dir / "manifest.json";
    std::ofstream os(mp, std::ios::binary);
    if (!os) throw ExecutionError("cannot open " + mp.string());
    os << res.manifest.dump(2) << "\n";
  }
  return res;
}

}  // namespace maxfield
