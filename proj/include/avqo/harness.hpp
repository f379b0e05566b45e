#pragma once

// Run configuration, benchmarking, and serialization behind the CLI.
//
// Every command reads a JSON config, resolves a seed and an output
// directory, runs, and writes CSV (grids, traces, raw benchmark rows) and
// JSON (structured results).  Outputs are deterministic: all randomness
// flows from the run seed through counted derive_seed paths, parallel work
// is split into slots whose seeds depend only on the slot index, and
// aggregation happens in slot order after the workers join.  The
// parallelism degree is therefore absent from every output file, as is any
// timestamp.
//
// Config schemas are documented in the README next to annotated examples.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "avqo/algorithms.hpp"
#include "avqo/dimacs.hpp"
#include "avqo/errors.hpp"
#include "avqo/hamiltonian.hpp"
#include "avqo/instances.hpp"
#include "avqo/optimize.hpp"
#include "avqo/rng.hpp"
#include "avqo/schedule.hpp"
#include "avqo/spectra.hpp"

namespace avqo::harness {

using json = nlohmann::ordered_json;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnvVar = "ANNEAL_VQO_OUT";

// Seed-derivation stream tags; fixed constants so outputs are stable across
// versions.
inline constexpr std::uint64_t kStreamBench = 0xB1;
inline constexpr std::uint64_t kStreamScalingGen = 0x5C1;
inline constexpr std::uint64_t kStreamScalingRun = 0x5C2;

// ---------------------------------------------------------------------------
// Small numeric utilities
// ---------------------------------------------------------------------------

/// Shortest text form that round-trips a binary64 value.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Quartiles {
  double min = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

/// Quartiles by linear interpolation between order statistics: the f-quantile
/// of m sorted values sits at fractional rank h = f (m - 1).
inline Quartiles quartiles(std::vector<double> values) {
  Quartiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  const auto at = [&](double f) {
    const double h = f * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = h - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
  };
  q.min = values.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = values.back();
  return q;
}

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

/// Ordinary least squares y = a + b x; the slope standard error is
/// sqrt(SSR / (m - 2) / Sxx) and needs at least three points.
inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("least_squares: need at least 2 points");
  LinearFit fit;
  fit.points = x.size();
  const auto m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / (m - 2.0) / sxx);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Deterministic fan-out
// ---------------------------------------------------------------------------

/// Runs fn(slot) for slot = 0..count-1 on up to `jobs` threads.  Each slot
/// owns its own state; the returned exception slots (null when the slot
/// succeeded) make failure handling independent of scheduling order.
template <class Fn>
std::vector<std::exception_ptr> parallel_for_collect(int jobs, std::size_t count, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto body = [&](std::size_t slot) {
    try {
      fn(slot);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  const int workers = static_cast<int>(
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1))));
  if (workers <= 1) {
    for (std::size_t slot = 0; slot < count; ++slot) body(slot);
    return errors;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t slot = next.fetch_add(1); slot < count; slot = next.fetch_add(1))
        body(slot);
    });
  for (auto& t : pool) t.join();
  return errors;
}

/// As above but failures abort: the lowest-index exception is rethrown.
template <class Fn>
void parallel_for(int jobs, std::size_t count, Fn&& fn) {
  const auto errors = parallel_for_collect(jobs, count, std::forward<Fn>(fn));
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Config access
// ---------------------------------------------------------------------------

inline const json& jreq(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw std::runtime_error(ctx + ": expected an object");
  if (!j.contains(key)) throw std::runtime_error(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T jget(const json& j, const char* key, const std::string& ctx) {
  try {
    return jreq(j, key, ctx).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(ctx + ": bad field '" + std::string(key) + "': " + e.what());
  }
}

template <class T>
T jget_or(const json& j, const char* key, T fallback, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(ctx + ": bad field '" + std::string(key) + "': " + e.what());
  }
}

inline AnnealingSchedule schedule_from_config(const json& j, const std::string& ctx) {
  return AnnealingSchedule::from_name(jget_or<std::string>(j, "schedule", "linear", ctx));
}

inline OptimizerKind optimizer_from_config(const json& j, const std::string& ctx) {
  return optimizer_from_name(jget_or<std::string>(j, "optimizer", "bfgs", ctx));
}

inline InitStrategy init_from_config(const json& j, const char* key, InitStrategy fallback,
                                     const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  const json& spec = j.at(key);
  const std::string ictx = ctx + "." + key;
  const auto kind = jget<std::string>(spec, "kind", ictx);
  if (kind == "aqa")
    return InitStrategy::aqa_seed(jget_or<double>(spec, "tau", 0.5, ictx),
                                  jget_or<int>(spec, "p", 25, ictx));
  if (kind == "random") return InitStrategy::random();
  if (kind == "epsilon")
    return InitStrategy::epsilon_fill(jget_or<double>(spec, "epsilon", 1e-2, ictx));
  if (kind == "zero") return InitStrategy::zero_fill();
  throw std::runtime_error(ictx + ": unknown init kind '" + kind +
                           "' (valid: aqa, random, epsilon, zero)");
}

inline json init_to_json(const InitStrategy& init) {
  json j;
  j["kind"] = to_string(init.kind);
  if (init.kind == InitStrategy::Kind::aqa) {
    j["tau"] = init.tau;
    j["p"] = init.p;
  }
  if (init.kind == InitStrategy::Kind::epsilon) j["epsilon"] = init.epsilon;
  return j;
}

// ---------------------------------------------------------------------------
// Instance resolution
// ---------------------------------------------------------------------------

struct ResolvedInstance {
  TwoSatInstance instance;
  json provenance;
};

/// The "instance" config entry: {"path": file.cnf} loads a DIMACS file,
/// {"generate": {...}} rejection-samples a fresh unique-solution instance
/// (seed defaults to the run seed).
inline ResolvedInstance resolve_instance(const json& spec, std::uint64_t run_seed,
                                         const std::string& ctx) {
  ResolvedInstance r;
  if (spec.contains("path")) {
    const auto path = jget<std::string>(spec, "path", ctx);
    r.instance = read_dimacs_file(path);
    r.provenance["path"] = path;
    r.provenance["num_vars"] = r.instance.num_vars;
    r.provenance["num_clauses"] = r.instance.clauses.size();
    return r;
  }
  if (spec.contains("generate")) {
    const json& g = spec.at("generate");
    const std::string gctx = ctx + ".generate";
    const int n = jget<int>(g, "num_vars", gctx);
    const int m = jget_or<int>(g, "num_clauses", 3 * n, gctx);
    const auto seed = jget_or<std::uint64_t>(g, "seed", run_seed, gctx);
    HardInstanceOptions opts;
    opts.max_attempts = jget_or<std::uint64_t>(g, "max_attempts", opts.max_attempts, gctx);
    if (g.contains("gap_threshold")) opts.gap_threshold = jget<double>(g, "gap_threshold", gctx);
    const GeneratedInstance gen = generate_hard_instance(n, m, seed, opts);
    r.instance = gen.instance;
    r.provenance["generated"] = json{{"num_vars", n},
                                     {"num_clauses", m},
                                     {"seed", seed}};
    if (std::isfinite(opts.gap_threshold))
      r.provenance["generated"]["gap_threshold"] = opts.gap_threshold;
    r.provenance["solution"] = gen.solution;
    r.provenance["attempts"] = gen.attempts;
    return r;
  }
  throw std::runtime_error(ctx + ": instance spec needs either 'path' or 'generate'");
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

struct CommandContext {
  json config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  int jobs = 1;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline json params_to_json(const VariationalParams& p) {
  return json{{"beta", p.beta}, {"gamma", p.gamma}};
}

inline json run_to_json(const OptimizationRun& run, bool include_trace = false) {
  json j;
  j["initial_cost"] = run.initial_cost;
  j["best_cost"] = run.best_cost;
  j["evaluations"] = run.evaluations;
  j["termination"] = to_string(run.termination);
  if (include_trace) j["cost_trace"] = run.trace;
  return j;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

inline json cmd_generate(const CommandContext& ctx) {
  const std::string c = "generate config";
  const json& e = jreq(ctx.config, "ensemble", c);
  const std::string ec = c + ".ensemble";
  const int n = jget<int>(e, "num_vars", ec);
  const int m = jget_or<int>(e, "num_clauses", 3 * n, ec);
  const int count = jget<int>(e, "count", ec);
  const int pool_factor = jget_or<int>(e, "pool_factor", 10, ec);
  const auto grid = jget_or<std::vector<double>>(e, "gap_grid", {}, ec);
  const auto name = jget_or<std::string>(ctx.config, "name", "ensemble_n" + std::to_string(n), c);

  const InstanceEnsemble ens = generate_ensemble(n, m, count, ctx.seed, pool_factor, grid);
  const std::filesystem::path dir = ctx.out_dir / name;
  save_ensemble(ens, dir);

  json result;
  result["command"] = "generate";
  result["seed"] = ctx.seed;
  result["ensemble_dir"] = dir.string();
  result["num_vars"] = n;
  result["num_clauses"] = m;
  result["count"] = ens.entries.size();
  result["pool_factor"] = pool_factor;
  json gaps = json::array();
  for (const auto& entry : ens.entries) gaps.push_back(entry.min_gap);
  result["min_gaps"] = std::move(gaps);
  write_json_file(ctx.out_dir / "generate.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// aqa
// ---------------------------------------------------------------------------

/// Reads either "p" directly or "t_a" (layer count rounded to nearest); the
/// realized annealing time tau * p is always reported.
inline int resolve_layer_count(const json& j, double tau, const std::string& ctx) {
  const bool has_p = j.contains("p");
  const bool has_ta = j.contains("t_a");
  if (has_p == has_ta)
    throw std::runtime_error(ctx + ": exactly one of 'p' and 't_a' is required");
  if (has_p) return jget<int>(j, "p", ctx);
  return layers_for_time(jget<double>(j, "t_a", ctx), tau);
}

inline json cmd_aqa(const CommandContext& ctx) {
  const std::string c = "aqa config";
  const ResolvedInstance inst = resolve_instance(jreq(ctx.config, "instance", c), ctx.seed, c);
  const double tau = jget<double>(ctx.config, "tau", c);
  const int p = resolve_layer_count(ctx.config, tau, c);
  const AnnealingSchedule schedule = schedule_from_config(ctx.config, c);

  const IsingModel model = two_sat_to_ising(inst.instance);
  const AqaResult r = run_aqa(model, {tau, p, schedule});

  json result;
  result["command"] = "aqa";
  result["seed"] = ctx.seed;
  result["instance"] = inst.provenance;
  result["tau"] = tau;
  result["p"] = p;
  result["t_a"] = r.t_a;
  result["schedule"] = schedule.name;
  result["success"] = r.success;
  result["final_cost"] = r.final_cost;
  result["degenerate"] = r.degenerate;
  result["ground_energy"] = r.ground.energy;
  result["ground_index"] = r.ground.index;
  result["ground_degeneracy"] = r.ground.degeneracy;
  write_json_file(ctx.out_dir / "aqa.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

inline json cmd_scan(const CommandContext& ctx) {
  const std::string c = "scan config";
  const ResolvedInstance inst = resolve_instance(jreq(ctx.config, "instance", c), ctx.seed, c);
  const auto taus = jget<std::vector<double>>(ctx.config, "taus", c);
  const auto ps = jget<std::vector<int>>(ctx.config, "ps", c);
  const AnnealingSchedule schedule = schedule_from_config(ctx.config, c);

  const CompiledProblem prob = compile_problem(two_sat_to_ising(inst.instance));
  ScanResult scan;
  scan.taus = taus;
  scan.ps = ps;
  if (taus.empty() || ps.empty()) throw std::runtime_error(c + ": 'taus' and 'ps' must be nonempty");
  scan.success.assign(taus.size(), std::vector<double>(ps.size(), 0.0));
  std::vector<std::vector<std::string>> cell_errors(taus.size(),
                                                    std::vector<std::string>(ps.size()));
  parallel_for_collect(ctx.jobs, taus.size() * ps.size(), [&](std::size_t slot) {
    const std::size_t ti = slot / ps.size();
    const std::size_t pi = slot % ps.size();
    try {
      scan.success[ti][pi] = run_aqa(prob, {taus[ti], ps[pi], schedule}).success;
    } catch (const std::exception& e) {
      scan.success[ti][pi] = std::numeric_limits<double>::quiet_NaN();
      cell_errors[ti][pi] = e.what();
    }
  });
  for (std::size_t ti = 0; ti < taus.size(); ++ti)
    for (std::size_t pi = 0; pi < ps.size(); ++pi)
      if (!cell_errors[ti][pi].empty()) scan.errors.push_back({ti, pi, cell_errors[ti][pi]});

  // Rows are tau, columns are p.
  std::string csv = "tau";
  for (int p : ps) csv += "," + std::to_string(p);
  csv += "\n";
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    csv += fmt17(taus[ti]);
    for (std::size_t pi = 0; pi < ps.size(); ++pi) csv += "," + fmt17(scan.success[ti][pi]);
    csv += "\n";
  }
  write_text_file(ctx.out_dir / "scan.csv", csv);

  json result;
  result["command"] = "scan";
  result["seed"] = ctx.seed;
  result["instance"] = inst.provenance;
  result["schedule"] = schedule.name;
  result["taus"] = taus;
  result["ps"] = ps;
  result["success"] = scan.success;
  json errs = json::array();
  for (const auto& e : scan.errors)
    errs.push_back(json{{"tau_index", e.tau_index}, {"p_index", e.p_index}, {"message", e.message}});
  result["errors"] = std::move(errs);
  result["csv"] = "scan.csv";
  write_json_file(ctx.out_dir / "scan.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

inline json cmd_trace(const CommandContext& ctx) {
  const std::string c = "trace config";
  const ResolvedInstance inst = resolve_instance(jreq(ctx.config, "instance", c), ctx.seed, c);
  const double tau = jget<double>(ctx.config, "tau", c);
  const int p = resolve_layer_count(ctx.config, tau, c);
  const int k = jget_or<int>(ctx.config, "k", 3, c);
  const AnnealingSchedule schedule = schedule_from_config(ctx.config, c);

  const IsingModel model = two_sat_to_ising(inst.instance);
  const OverlapTraceResult trace = overlap_trace(model, {tau, p, schedule}, k);

  std::string csv = "layer,s,cost";
  for (int m = 0; m < k; ++m) csv += ",e" + std::to_string(m);
  for (int m = 0; m < k; ++m) csv += ",overlap" + std::to_string(m);
  csv += ",low_sum\n";
  for (const OverlapStep& step : trace.steps) {
    csv += std::to_string(step.layer) + "," + fmt17(step.s) + "," + fmt17(step.cost);
    for (int m = 0; m < k; ++m) csv += "," + fmt17(step.eigenvalues[m]);
    for (int m = 0; m < k; ++m) csv += "," + fmt17(step.overlaps[m]);
    csv += "," + fmt17(step.low_sum) + "\n";
  }
  write_text_file(ctx.out_dir / "trace.csv", csv);

  json result;
  result["command"] = "trace";
  result["seed"] = ctx.seed;
  result["instance"] = inst.provenance;
  result["tau"] = tau;
  result["p"] = p;
  result["t_a"] = trace.t_a;
  result["k"] = k;
  result["schedule"] = schedule.name;
  result["csv"] = "trace.csv";
  json min_low = json();
  double lowest = std::numeric_limits<double>::infinity();
  int lowest_layer = 0;
  for (const OverlapStep& step : trace.steps)
    if (step.low_sum < lowest) {
      lowest = step.low_sum;
      lowest_layer = step.layer;
    }
  result["min_low_sum"] = lowest;
  result["min_low_sum_layer"] = lowest_layer;
  write_json_file(ctx.out_dir / "trace.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// qaoa
// ---------------------------------------------------------------------------

inline json cmd_qaoa(const CommandContext& ctx) {
  const std::string c = "qaoa config";
  const ResolvedInstance inst = resolve_instance(jreq(ctx.config, "instance", c), ctx.seed, c);
  QaoaConfig config;
  config.p = jget<int>(ctx.config, "p", c);
  config.init = init_from_config(ctx.config, "init", InitStrategy::aqa_seed(0.5, 25), c);
  config.optimizer = optimizer_from_config(ctx.config, c);
  config.budget = jget<std::uint64_t>(ctx.config, "budget", c);
  if (config.budget < 1) throw std::runtime_error(c + ": 'budget' must be positive");
  const bool record_trace = jget_or<bool>(ctx.config, "record_trace", false, c);

  const CompiledProblem prob = compile_problem(two_sat_to_ising(inst.instance));
  const QaoaResult r = run_qaoa(prob, config, ctx.seed);

  json result;
  result["command"] = "qaoa";
  result["seed"] = ctx.seed;
  result["instance"] = inst.provenance;
  result["p"] = config.p;
  result["init"] = init_to_json(config.init);
  result["optimizer"] = to_string(config.optimizer);
  result["budget"] = config.budget;
  result["run"] = run_to_json(r.run, record_trace);
  result["initial_success"] = r.initial_success;
  result["success"] = r.success;
  result["initial_params"] = params_to_json(r.initial_params);
  result["best_params"] = params_to_json(r.best_params);
  write_json_file(ctx.out_dir / "qaoa.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// ehqo
// ---------------------------------------------------------------------------

inline json cmd_ehqo(const CommandContext& ctx) {
  const std::string c = "ehqo config";
  const ResolvedInstance inst = resolve_instance(jreq(ctx.config, "instance", c), ctx.seed, c);
  EhqoConfig config;
  config.steps = jget<int>(ctx.config, "steps", c);
  if (ctx.config.contains("depth_schedule"))
    config.depth_schedule = jget<std::vector<int>>(ctx.config, "depth_schedule", c);
  else
    config.depth = jget<int>(ctx.config, "depth", c);
  config.init = init_from_config(ctx.config, "init", InitStrategy::epsilon_fill(1e-2), c);
  config.optimizer = optimizer_from_config(ctx.config, c);
  config.intermediate_budget =
      jget_or<std::uint64_t>(ctx.config, "intermediate_budget", 10000, c);
  config.final_budget = jget_or<std::uint64_t>(ctx.config, "final_budget", 50000, c);
  if (config.intermediate_budget < 1 || config.final_budget < 1)
    throw std::runtime_error(c + ": budgets must be positive");
  config.record_overlaps = jget_or<bool>(ctx.config, "diagnostics", true, c);
  const bool record_trace = jget_or<bool>(ctx.config, "record_trace", false, c);

  const CompiledProblem prob = compile_problem(two_sat_to_ising(inst.instance));
  const EhqoResult r = run_ehqo(prob, config, ctx.seed);

  json result;
  result["command"] = "ehqo";
  result["seed"] = ctx.seed;
  result["instance"] = inst.provenance;
  result["steps"] = config.steps;
  if (!config.depth_schedule.empty())
    result["depth_schedule"] = config.depth_schedule;
  else
    result["depth"] = config.depth;
  result["init"] = init_to_json(config.init);
  result["optimizer"] = to_string(config.optimizer);
  result["intermediate_budget"] = config.intermediate_budget;
  result["final_budget"] = config.final_budget;
  json stages = json::array();
  for (const EhqoStage& st : r.stages) {
    json js;
    js["index"] = st.index;
    js["s"] = st.s;
    js["depth"] = st.depth;
    js["run"] = run_to_json(st.run, record_trace);
    js["e0"] = st.e0;
    js["e1"] = st.e1;
    js["initial_overlap_e0"] = st.initial_overlap_e0;
    js["initial_overlap_e1"] = st.initial_overlap_e1;
    js["success"] = st.success;
    if (!st.error.empty()) js["error"] = st.error;
    stages.push_back(std::move(js));
  }
  result["stages"] = std::move(stages);
  result["success"] = r.success;
  result["best_params"] = params_to_json(r.best_params);
  write_json_file(ctx.out_dir / "ehqo.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct VariantSpec {
  std::string name;
  std::string kind;
  double tau = 0.5;
  int p = 25;
  int steps = 10;
  std::vector<int> depths;
  std::uint64_t budget = 8000;
  std::uint64_t intermediate_budget = 10000;
  std::uint64_t final_budget = 50000;
  InitStrategy init = InitStrategy::epsilon_fill(1e-2);
  OptimizerKind optimizer = OptimizerKind::bfgs;
  AnnealingSchedule schedule = AnnealingSchedule::linear();
};

inline std::string default_variant_name(const VariantSpec& v) {
  const auto fmt_tau = [](double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", tau);
    return std::string(buf);
  };
  if (v.kind == "aqa") return "aqa_tau" + fmt_tau(v.tau) + "_p" + std::to_string(v.p);
  if (v.kind == "qaoa_random") return "qaoa_random_p" + std::to_string(v.p);
  if (v.kind == "qaoa_aqa_init")
    return "qaoa_aqa_tau" + fmt_tau(v.tau) + "_p" + std::to_string(v.p);
  if (v.kind == "ehqo_fixed") return "ehqo" + std::to_string(v.steps) + "_p" + std::to_string(v.p);
  if (v.kind == "ehqo_adaptive") return "adehqo" + std::to_string(v.steps);
  return v.kind;
}

/// Parses one benchmark variant.  ehqo_default_init seeds EHQO variants that
/// do not name an init themselves; bench uses the epsilon fill, the scaling
/// study the annealing-derived warm start.
inline VariantSpec variant_from_config(const json& j, const InitStrategy& ehqo_default_init,
                                       const std::string& ctx) {
  VariantSpec v;
  v.kind = jget<std::string>(j, "kind", ctx);
  v.optimizer = optimizer_from_config(j, ctx);
  v.schedule = schedule_from_config(j, ctx);
  if (v.kind == "aqa") {
    v.tau = jget<double>(j, "tau", ctx);
    v.p = jget<int>(j, "p", ctx);
  } else if (v.kind == "qaoa_random") {
    v.p = jget<int>(j, "p", ctx);
    v.budget = jget_or<std::uint64_t>(j, "budget", 8000, ctx);
    v.init = InitStrategy::random();
  } else if (v.kind == "qaoa_aqa_init") {
    v.tau = jget<double>(j, "tau", ctx);
    v.p = jget<int>(j, "p", ctx);
    v.budget = jget_or<std::uint64_t>(j, "budget", 8000, ctx);
    v.init = InitStrategy::aqa_seed(v.tau, v.p);
  } else if (v.kind == "ehqo_fixed") {
    v.steps = jget<int>(j, "steps", ctx);
    v.p = jget<int>(j, "p", ctx);
    v.intermediate_budget = jget_or<std::uint64_t>(j, "intermediate_budget", 10000, ctx);
    v.final_budget = jget_or<std::uint64_t>(j, "final_budget", 50000, ctx);
    v.init = init_from_config(j, "init", ehqo_default_init, ctx);
  } else if (v.kind == "ehqo_adaptive") {
    v.depths = jget<std::vector<int>>(j, "depths", ctx);
    if (v.depths.empty()) throw std::runtime_error(ctx + ": 'depths' must be nonempty");
    v.steps = jget_or<int>(j, "steps", static_cast<int>(v.depths.size()), ctx);
    if (v.steps != static_cast<int>(v.depths.size()))
      throw std::runtime_error(ctx + ": 'steps' must match the length of 'depths'");
    v.intermediate_budget = jget_or<std::uint64_t>(j, "intermediate_budget", 10000, ctx);
    v.final_budget = jget_or<std::uint64_t>(j, "final_budget", 50000, ctx);
    v.init = init_from_config(j, "init", ehqo_default_init, ctx);
  } else {
    throw std::runtime_error(ctx + ": unknown variant kind '" + v.kind +
                             "' (valid: aqa, qaoa_random, qaoa_aqa_init, ehqo_fixed, "
                             "ehqo_adaptive)");
  }
  if (v.budget < 1 || v.intermediate_budget < 1 || v.final_budget < 1)
    throw std::runtime_error(ctx + ": budgets must be positive");
  v.name = jget_or<std::string>(j, "name", default_variant_name(v), ctx);
  return v;
}

inline json variant_to_json(const VariantSpec& v) {
  json j;
  j["name"] = v.name;
  j["kind"] = v.kind;
  if (v.kind == "aqa" || v.kind == "qaoa_aqa_init") j["tau"] = v.tau;
  if (v.kind != "ehqo_adaptive") j["p"] = v.p;
  if (v.kind == "qaoa_random" || v.kind == "qaoa_aqa_init") j["budget"] = v.budget;
  if (v.kind == "ehqo_fixed" || v.kind == "ehqo_adaptive") {
    j["steps"] = v.steps;
    if (v.kind == "ehqo_adaptive") j["depths"] = v.depths;
    j["intermediate_budget"] = v.intermediate_budget;
    j["final_budget"] = v.final_budget;
    j["init"] = init_to_json(v.init);
  }
  if (v.kind != "aqa") j["optimizer"] = to_string(v.optimizer);
  return j;
}

struct VariantOutcome {
  double success = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t evaluations = 0;
  std::string error;
};

/// One (variant, instance) benchmark job.
inline VariantOutcome run_variant(const CompiledProblem& prob, const VariantSpec& v,
                                  std::uint64_t seed) {
  VariantOutcome out;
  if (v.kind == "aqa") {
    out.success = run_aqa(prob, {v.tau, v.p, v.schedule}).success;
  } else if (v.kind == "qaoa_random" || v.kind == "qaoa_aqa_init") {
    QaoaConfig config;
    config.p = v.p;
    config.init = v.init;
    config.optimizer = v.optimizer;
    config.budget = v.budget;
    const QaoaResult r = run_qaoa(prob, config, seed);
    out.success = r.success;
    out.evaluations = r.run.evaluations;
  } else {
    EhqoConfig config;
    config.steps = v.steps;
    if (v.kind == "ehqo_adaptive")
      config.depth_schedule = v.depths;
    else
      config.depth = v.p;
    config.init = v.init;
    config.optimizer = v.optimizer;
    config.intermediate_budget = v.intermediate_budget;
    config.final_budget = v.final_budget;
    config.record_overlaps = false;  // benchmark jobs skip spectral diagnostics
    const EhqoResult r = run_ehqo(prob, config, seed);
    out.success = r.success;
    for (const EhqoStage& st : r.stages) out.evaluations += st.run.evaluations;
  }
  return out;
}

struct BenchVariantSummary {
  VariantSpec spec;
  Quartiles quartiles;               // over instances that succeeded
  std::vector<double> success;       // per instance, NaN where failed
  std::vector<std::uint64_t> evaluations;
  std::vector<std::string> errors;   // per instance, empty where fine
  int failures = 0;
};

struct BenchmarkSummary {
  std::size_t ensemble_size = 0;
  std::vector<BenchVariantSummary> variants;
};

/// Runs every variant on every instance; job (vi, ii) draws its seed from
/// derive_seed(seed, {kStreamBench, vi, ii}) so results do not depend on the
/// parallelism degree.
inline BenchmarkSummary run_bench(const InstanceEnsemble& ensemble,
                                  const std::vector<VariantSpec>& variants, std::uint64_t seed,
                                  int jobs) {
  BenchmarkSummary summary;
  summary.ensemble_size = ensemble.entries.size();
  if (ensemble.entries.empty()) throw std::invalid_argument("run_bench: empty ensemble");
  if (variants.empty()) throw std::invalid_argument("run_bench: no variants");

  std::vector<CompiledProblem> problems;
  problems.reserve(ensemble.entries.size());
  for (const EnsembleEntry& e : ensemble.entries)
    problems.push_back(compile_problem(two_sat_to_ising(e.instance)));

  const std::size_t count = ensemble.entries.size();
  summary.variants.resize(variants.size());
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    auto& vs = summary.variants[vi];
    vs.spec = variants[vi];
    vs.success.assign(count, std::numeric_limits<double>::quiet_NaN());
    vs.evaluations.assign(count, 0);
    vs.errors.assign(count, "");
  }

  parallel_for_collect(jobs, variants.size() * count, [&](std::size_t slot) {
    const std::size_t vi = slot / count;
    const std::size_t ii = slot % count;
    auto& vs = summary.variants[vi];
    try {
      const VariantOutcome out =
          run_variant(problems[ii], variants[vi], derive_seed(seed, {kStreamBench, vi, ii}));
      vs.success[ii] = out.success;
      vs.evaluations[ii] = out.evaluations;
      if (!out.error.empty()) vs.errors[ii] = out.error;
    } catch (const std::exception& e) {
      vs.errors[ii] = e.what();
    }
  });

  for (auto& vs : summary.variants) {
    std::vector<double> ok;
    for (std::size_t ii = 0; ii < count; ++ii) {
      if (vs.errors[ii].empty())
        ok.push_back(vs.success[ii]);
      else
        ++vs.failures;
    }
    vs.quartiles = quartiles(std::move(ok));
  }
  return summary;
}

inline json quartiles_to_json(const Quartiles& q) {
  return json{{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

/// Resolves the bench/scaling ensemble source: a directory path string, or
/// {"generate": {...}} which generates and saves under out_dir.
inline InstanceEnsemble resolve_ensemble(const json& spec, const CommandContext& ctx,
                                         const std::string& name_hint, const std::string& c) {
  if (spec.is_string()) return load_ensemble(spec.get<std::string>());
  if (spec.is_object() && spec.contains("generate")) {
    const json& g = spec.at("generate");
    const std::string gctx = c + ".generate";
    const int n = jget<int>(g, "num_vars", gctx);
    const int m = jget_or<int>(g, "num_clauses", 3 * n, gctx);
    const int count = jget<int>(g, "count", gctx);
    const int pool_factor = jget_or<int>(g, "pool_factor", 10, gctx);
    const auto seed = jget_or<std::uint64_t>(g, "seed", ctx.seed, gctx);
    const InstanceEnsemble ens = generate_ensemble(n, m, count, seed, pool_factor);
    save_ensemble(ens, ctx.out_dir / name_hint);
    return ens;
  }
  throw std::runtime_error(c + ": ensemble spec must be a directory path or {\"generate\": ...}");
}

inline json cmd_bench(const CommandContext& ctx) {
  const std::string c = "bench config";
  const InstanceEnsemble ensemble =
      resolve_ensemble(jreq(ctx.config, "ensemble", c), ctx, "ensemble", c);
  const json& vlist = jreq(ctx.config, "variants", c);
  if (!vlist.is_array() || vlist.empty())
    throw std::runtime_error(c + ": 'variants' must be a nonempty array");
  std::vector<VariantSpec> variants;
  for (std::size_t i = 0; i < vlist.size(); ++i)
    variants.push_back(variant_from_config(vlist[i], InitStrategy::epsilon_fill(1e-2),
                                           c + ".variants[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < variants.size(); ++i)
    for (std::size_t k = i + 1; k < variants.size(); ++k)
      if (variants[i].name == variants[k].name)
        throw std::runtime_error(c + ": duplicate variant name '" + variants[i].name + "'");

  const BenchmarkSummary summary = run_bench(ensemble, variants, ctx.seed, ctx.jobs);

  std::string csv = "variant,instance,success,evaluations,error\n";
  for (const auto& vs : summary.variants)
    for (std::size_t ii = 0; ii < summary.ensemble_size; ++ii)
      csv += csv_escape(vs.spec.name) + "," + std::to_string(ii) + "," + fmt17(vs.success[ii]) +
             "," + std::to_string(vs.evaluations[ii]) + "," + csv_escape(vs.errors[ii]) + "\n";
  write_text_file(ctx.out_dir / "bench_raw.csv", csv);

  json result;
  result["command"] = "bench";
  result["seed"] = ctx.seed;
  result["ensemble"] = json{{"num_vars", ensemble.num_vars},
                            {"num_clauses", ensemble.num_clauses},
                            {"count", ensemble.entries.size()},
                            {"seed", ensemble.seed}};
  json jvariants = json::array();
  for (const auto& vs : summary.variants) {
    json jv = variant_to_json(vs.spec);
    jv["quartiles"] = quartiles_to_json(vs.quartiles);
    jv["failures"] = vs.failures;
    jv["success"] = vs.success;
    jv["evaluations"] = vs.evaluations;
    json errs = json::array();
    for (const auto& e : vs.errors) errs.push_back(e);
    jv["errors"] = std::move(errs);
    jvariants.push_back(std::move(jv));
  }
  result["variants"] = std::move(jvariants);
  result["csv"] = "bench_raw.csv";
  write_json_file(ctx.out_dir / "bench.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

inline json cmd_scaling(const CommandContext& ctx) {
  const std::string c = "scaling config";
  const auto ns = jget<std::vector<int>>(ctx.config, "ns", c);
  if (ns.empty()) throw std::runtime_error(c + ": 'ns' must be nonempty");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw std::runtime_error(c + ": 'ns' must be strictly increasing");
  const int per_n = jget<int>(ctx.config, "instances_per_n", c);
  if (per_n < 1) throw std::runtime_error(c + ": 'instances_per_n' must be positive");
  const int clause_factor = jget_or<int>(ctx.config, "clause_factor", 3, c);
  const int pool_factor = jget_or<int>(ctx.config, "pool_factor", 10, c);
  const json& vlist = jreq(ctx.config, "variants", c);
  if (!vlist.is_array() || vlist.empty())
    throw std::runtime_error(c + ": 'variants' must be a nonempty array");
  // The scaling study warm-starts EHQO from the annealing schedule.
  std::vector<VariantSpec> variants;
  for (std::size_t i = 0; i < vlist.size(); ++i)
    variants.push_back(variant_from_config(vlist[i], InitStrategy::aqa_seed(0.5, 25),
                                           c + ".variants[" + std::to_string(i) + "]"));

  // Ensembles per n: either provided directories or generated and saved.
  std::vector<InstanceEnsemble> ensembles;
  if (ctx.config.contains("ensembles")) {
    const auto dirs = jget<std::vector<std::string>>(ctx.config, "ensembles", c);
    if (dirs.size() != ns.size())
      throw std::runtime_error(c + ": 'ensembles' must list one directory per n");
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      ensembles.push_back(load_ensemble(dirs[i]));
      if (ensembles.back().num_vars != ns[i])
        throw std::runtime_error(c + ": ensemble " + dirs[i] + " has " +
                                 std::to_string(ensembles.back().num_vars) +
                                 " variables, expected " + std::to_string(ns[i]));
      if (static_cast<int>(ensembles.back().entries.size()) < per_n)
        throw std::runtime_error(c + ": ensemble " + dirs[i] + " has fewer than " +
                                 std::to_string(per_n) + " instances");
      ensembles.back().entries.resize(per_n);
    }
  } else {
    for (int n : ns) {
      const std::uint64_t gen_seed =
          derive_seed(ctx.seed, {kStreamScalingGen, static_cast<std::uint64_t>(n)});
      ensembles.push_back(
          generate_ensemble(n, clause_factor * n, per_n, gen_seed, pool_factor));
      save_ensemble(ensembles.back(), ctx.out_dir / ("ensemble_n" + std::to_string(n)));
    }
  }

  std::vector<std::vector<CompiledProblem>> problems(ns.size());
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    problems[ni].reserve(ensembles[ni].entries.size());
    for (const EnsembleEntry& e : ensembles[ni].entries)
      problems[ni].push_back(compile_problem(two_sat_to_ising(e.instance)));
  }

  // success[vi][ni][ii]; error strings alongside.
  const std::size_t slots = variants.size() * ns.size() * static_cast<std::size_t>(per_n);
  std::vector<std::vector<std::vector<double>>> success(variants.size());
  std::vector<std::vector<std::vector<std::string>>> errors(variants.size());
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    success[vi].assign(ns.size(),
                       std::vector<double>(per_n, std::numeric_limits<double>::quiet_NaN()));
    errors[vi].assign(ns.size(), std::vector<std::string>(per_n));
  }
  parallel_for_collect(ctx.jobs, slots, [&](std::size_t slot) {
    const std::size_t vi = slot / (ns.size() * per_n);
    const std::size_t rest = slot % (ns.size() * per_n);
    const std::size_t ni = rest / per_n;
    const std::size_t ii = rest % per_n;
    const std::uint64_t run_seed = derive_seed(
        ctx.seed, {kStreamScalingRun, static_cast<std::uint64_t>(ns[ni]), vi, ii});
    try {
      success[vi][ni][ii] = run_variant(problems[ni][ii], variants[vi], run_seed).success;
    } catch (const std::exception& e) {
      errors[vi][ni][ii] = e.what();
    }
  });

  std::string csv = "variant,n,mean_success,log10_mean,instances,failures\n";
  json jvariants = json::array();
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    json jv = variant_to_json(variants[vi]);
    json jmeans = json::array();
    std::vector<double> fit_x;
    std::vector<double> fit_y;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      double sum = 0.0;
      int used = 0;
      int failures = 0;
      for (int ii = 0; ii < per_n; ++ii) {
        if (errors[vi][ni][ii].empty()) {
          sum += success[vi][ni][ii];
          ++used;
        } else {
          ++failures;
        }
      }
      const double mean = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
      const double log_mean = mean > 0.0 ? std::log10(mean)
                                         : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(log_mean)) {
        fit_x.push_back(static_cast<double>(ns[ni]));
        fit_y.push_back(log_mean);
      }
      csv += csv_escape(variants[vi].name) + "," + std::to_string(ns[ni]) + "," + fmt17(mean) +
             "," + fmt17(log_mean) + "," + std::to_string(used) + "," +
             std::to_string(failures) + "\n";
      jmeans.push_back(json{{"n", ns[ni]},
                            {"mean_success", mean},
                            {"log10_mean", log_mean},
                            {"instances", used},
                            {"failures", failures}});
    }
    jv["means"] = std::move(jmeans);
    if (fit_x.size() >= 3) {
      const LinearFit fit = least_squares(fit_x, fit_y);
      jv["fit"] = json{{"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"slope_stderr", fit.slope_stderr},
                       {"points", fit.points}};
    } else {
      jv["fit"] = nullptr;
    }
    jvariants.push_back(std::move(jv));
  }
  write_text_file(ctx.out_dir / "scaling.csv", csv);

  json result;
  result["command"] = "scaling";
  result["seed"] = ctx.seed;
  result["ns"] = ns;
  result["instances_per_n"] = per_n;
  result["clause_factor"] = clause_factor;
  result["variants"] = std::move(jvariants);
  result["csv"] = "scaling.csv";
  write_json_file(ctx.out_dir / "scaling.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline json run_command(const std::string& command, const CommandContext& ctx) {
  if (command == "generate") return cmd_generate(ctx);
  if (command == "aqa") return cmd_aqa(ctx);
  if (command == "scan") return cmd_scan(ctx);
  if (command == "trace") return cmd_trace(ctx);
  if (command == "qaoa") return cmd_qaoa(ctx);
  if (command == "ehqo") return cmd_ehqo(ctx);
  if (command == "bench") return cmd_bench(ctx);
  if (command == "scaling") return cmd_scaling(ctx);
  throw std::runtime_error("unknown command '" + command + "'");
}

}  // namespace avqo::harness
