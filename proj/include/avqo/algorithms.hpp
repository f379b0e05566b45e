#pragma once

// Trotterized annealing and its variational relatives.
//
// All drivers share one layer primitive acting on |+>^n: layer j applies the
// problem phase exp(-i gamma_j H_P) first and the mixer exp(+i beta_j H_I)
// second (the rightmost factor of the product formula acts first).  With
// angles beta_j = tau A(j/p), gamma_j = tau B(j/p) this layer loop IS the
// Trotterized anneal, so the annealing run and the variational circuit at
// those angles agree bit for bit by construction.
//
//   run_aqa                    Trotterized anneal at (tau, p); success is the
//                              ground-manifold probability of the final state.
//   exact_evolution_reference  The same product at a fine time step with
//                              midpoint schedule sampling; serves as the
//                              near-exact evolution oracle.
//   aqa_scan                   Success over a (tau, p) grid.
//   overlap_trace              Per-layer overlaps with the low instantaneous
//                              eigenstates of H(s).
//   run_qaoa                   Variational optimization of the layer angles
//                              against <H_P>.
//   run_ehqo                   Stagewise optimization against interpolated
//                              costs (1 - s_j) <H_I> + s_j <H_P>, s_j = j/N_s,
//                              warm-starting each stage from the previous one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avqo/errors.hpp"
#include "avqo/hamiltonian.hpp"
#include "avqo/optimize.hpp"
#include "avqo/rng.hpp"
#include "avqo/schedule.hpp"
#include "avqo/spectra.hpp"
#include "avqo/statevector.hpp"

namespace avqo {

/// Algorithm runs are capped below the raw statevector limit.
inline constexpr int kMaxAlgorithmQubits = 18;
/// The fine-step reference is denser by orders of magnitude; keep it small.
inline constexpr int kMaxReferenceQubits = 12;
/// Optimized circuits cap their depth; plain anneals may go deeper.
inline constexpr int kMaxOptimizedDepth = 250;

enum class OptimizerKind { bfgs, nelder_mead };

inline OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "bfgs") return OptimizerKind::bfgs;
  if (name == "nelder-mead") return OptimizerKind::nelder_mead;
  throw std::invalid_argument("unknown optimizer '" + name + "' (valid: bfgs, nelder-mead)");
}

inline const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::bfgs ? "bfgs" : "nelder-mead";
}

inline OptimizationRun minimize(OptimizerKind kind, CostFunction& f, const std::vector<double>& x0,
                                std::uint64_t max_evaluations, const OptimizerSettings& settings) {
  return kind == OptimizerKind::bfgs ? minimize_bfgs(f, x0, max_evaluations, settings)
                                     : minimize_nelder_mead(f, x0, max_evaluations, settings);
}

/// Problem data shared by every driver: the energy table, the classical
/// ground manifold, and a compressed phase table.  The diagonal energies of a
/// SAT encoding take few distinct values, so exp(-i gamma E) is evaluated
/// once per distinct energy and applied by lookup; the lookup is bit-identical
/// to the per-amplitude evaluation because equal table entries are equal
/// doubles.
struct CompiledProblem {
  IsingModel model;
  int num_qubits = 0;
  std::vector<double> energies;
  GroundState ground;
  std::vector<std::uint64_t> ground_indices;
  std::vector<double> distinct;       // sorted unique energy values
  std::vector<std::uint16_t> level;   // per-assignment index into distinct
  bool compressed = false;
};

inline CompiledProblem compile_problem(const IsingModel& model) {
  validate_model(model);
  if (model.num_vars > kMaxAlgorithmQubits)
    throw capacity_error("compile_problem: " + std::to_string(model.num_vars) +
                         " variables exceeds algorithm cap " + std::to_string(kMaxAlgorithmQubits));
  CompiledProblem p;
  p.model = model;
  p.num_qubits = model.num_vars;
  p.energies = diagonal_energies(model);
  p.ground = classical_ground_state(model);
  for (std::uint64_t z = 0; z < p.energies.size(); ++z)
    if (std::abs(p.energies[z] - p.ground.energy) <= 1e-12) p.ground_indices.push_back(z);

  p.distinct = p.energies;
  std::sort(p.distinct.begin(), p.distinct.end());
  p.distinct.erase(std::unique(p.distinct.begin(), p.distinct.end()), p.distinct.end());
  if (p.distinct.size() <= 4096) {
    p.level.resize(p.energies.size());
    for (std::uint64_t z = 0; z < p.energies.size(); ++z) {
      const auto it = std::lower_bound(p.distinct.begin(), p.distinct.end(), p.energies[z]);
      p.level[z] = static_cast<std::uint16_t>(it - p.distinct.begin());
    }
    p.compressed = true;
  } else {
    p.distinct.clear();
  }
  return p;
}

/// exp(-i gamma H_P) through the compiled table.
inline void apply_problem_phase(const CompiledProblem& prob, StateVector& psi, double gamma) {
  if (!prob.compressed) {
    apply_diagonal_phase(psi, prob.energies, gamma);
    return;
  }
  if (psi.dimension() != prob.energies.size())
    throw std::invalid_argument("apply_problem_phase: dimension mismatch");
  std::vector<Complex> phases(prob.distinct.size());
  for (std::size_t t = 0; t < prob.distinct.size(); ++t) {
    const double phi = -gamma * prob.distinct[t];
    phases[t] = Complex(std::cos(phi), std::sin(phi));
  }
  auto& a = psi.amplitudes();
  for (std::uint64_t z = 0; z < a.size(); ++z) a[z] *= phases[prob.level[z]];
}

/// One circuit layer: problem phase, then uniform mixer rotation.
inline void apply_layer(const CompiledProblem& prob, StateVector& psi, double beta, double gamma) {
  apply_problem_phase(prob, psi, gamma);
  apply_uniform_x_rotation(psi, beta);
}

/// The variational circuit state at the given angles.
inline StateVector qaoa_state(const CompiledProblem& prob, const VariationalParams& params) {
  params.validate();
  StateVector psi = StateVector::uniform_superposition(prob.num_qubits);
  for (std::size_t j = 0; j < params.depth(); ++j)
    apply_layer(prob, psi, params.beta[j], params.gamma[j]);
  return psi;
}

inline StateVector qaoa_state(const IsingModel& model, const VariationalParams& params) {
  return qaoa_state(compile_problem(model), params);
}

/// Probability of measuring any assignment in the classical ground manifold.
inline double success_probability(const CompiledProblem& prob, const StateVector& psi) {
  if (psi.dimension() != prob.energies.size())
    throw std::invalid_argument("success_probability: dimension mismatch");
  double s = 0.0;
  for (std::uint64_t z : prob.ground_indices) s += psi.basis_probability(z);
  return s;
}

/// Layer count realizing annealing time t_a at step tau, rounded to nearest.
inline int layers_for_time(double t_a, double tau) {
  if (!(t_a > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("layers_for_time: t_a and tau must be positive");
  return static_cast<int>(std::max<long long>(1, std::llround(t_a / tau)));
}

struct AqaConfig {
  double tau = 0.5;
  int p = 25;
  AnnealingSchedule schedule = AnnealingSchedule::linear();
};

struct AqaResult {
  double success = 0.0;        // summed over the ground manifold
  bool degenerate = false;     // more than one classical ground state
  double t_a = 0.0;            // realized annealing time tau * p
  double final_cost = 0.0;     // <H_P> of the final state
  GroundState ground;
  StateVector state;
};

inline AqaResult run_aqa(const CompiledProblem& prob, const AqaConfig& config) {
  VariationalParams params = aqa_parameters(config.tau, config.p, config.schedule);
  AqaResult r{.success = 0.0,
              .degenerate = prob.ground.degeneracy > 1,
              .t_a = config.tau * config.p,
              .final_cost = 0.0,
              .ground = prob.ground,
              .state = qaoa_state(prob, params)};
  r.success = success_probability(prob, r.state);
  r.final_cost = diagonal_expectation(r.state, prob.energies);
  return r;
}

inline AqaResult run_aqa(const IsingModel& model, const AqaConfig& config) {
  return run_aqa(compile_problem(model), config);
}

/// Near-exact evolution: the same product formula at a fine step
/// reference_tau <= 0.005 with the schedule sampled at midpoints
/// s_j = (j - 1/2)/p.  The step count is ceil(t_a / reference_tau) so the
/// realized time is exactly t_a.
inline StateVector exact_evolution_reference(const IsingModel& model, double t_a,
                                             double reference_tau = 0.005,
                                             const AnnealingSchedule& schedule =
                                                 AnnealingSchedule::linear()) {
  if (model.num_vars > kMaxReferenceQubits)
    throw capacity_error("exact_evolution_reference: " + std::to_string(model.num_vars) +
                         " variables exceeds reference cap " +
                         std::to_string(kMaxReferenceQubits));
  if (!(t_a >= 0.0) || !std::isfinite(t_a))
    throw std::invalid_argument("exact_evolution_reference: t_a must be nonnegative");
  if (!(reference_tau > 0.0 && reference_tau <= 0.005))
    throw std::invalid_argument("exact_evolution_reference: reference_tau must be in (0, 0.005]");
  schedule.validate();
  CompiledProblem prob = compile_problem(model);
  StateVector psi = StateVector::uniform_superposition(model.num_vars);
  if (t_a == 0.0) return psi;
  const auto p = static_cast<std::uint64_t>(std::ceil(t_a / reference_tau - 1e-12));
  const double tau = t_a / static_cast<double>(p);
  for (std::uint64_t j = 1; j <= p; ++j) {
    const double s = (static_cast<double>(j) - 0.5) / static_cast<double>(p);
    apply_layer(prob, psi, tau * schedule.eval_a(s), tau * schedule.eval_b(s));
  }
  return psi;
}

struct ScanCellError {
  std::size_t tau_index = 0;
  std::size_t p_index = 0;
  std::string message;
};

struct ScanResult {
  std::vector<double> taus;
  std::vector<int> ps;
  std::vector<std::vector<double>> success;  // success[tau_index][p_index], NaN on error
  std::vector<ScanCellError> errors;
};

/// Success probability over a (tau, p) grid; per-cell failures are recorded
/// and the scan continues.
inline ScanResult aqa_scan(const CompiledProblem& prob, const std::vector<double>& taus,
                           const std::vector<int>& ps,
                           const AnnealingSchedule& schedule = AnnealingSchedule::linear()) {
  if (taus.empty() || ps.empty()) throw std::invalid_argument("aqa_scan: empty grid");
  ScanResult r;
  r.taus = taus;
  r.ps = ps;
  r.success.assign(taus.size(), std::vector<double>(ps.size(), 0.0));
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      try {
        r.success[ti][pi] = run_aqa(prob, {taus[ti], ps[pi], schedule}).success;
      } catch (const std::exception& e) {
        r.success[ti][pi] = std::numeric_limits<double>::quiet_NaN();
        r.errors.push_back({ti, pi, e.what()});
      }
    }
  }
  return r;
}

struct OverlapStep {
  int layer = 0;      // 0 is the initial |+> state
  double s = 0.0;
  std::vector<double> eigenvalues;  // lowest k of H(s)
  std::vector<double> overlaps;     // |<E_m|psi>|^2; under a degeneracy the
                                    // split between degenerate slots is basis
                                    // arbitrary, their sum is not
  double low_sum = 0.0;             // sum of the overlaps
  double cost = 0.0;                // instantaneous <H(s)>
};

struct OverlapTraceResult {
  double tau = 0.0;
  int p = 0;
  double t_a = 0.0;
  std::vector<OverlapStep> steps;  // p + 1 entries, layer 0 .. p
};

/// Tracks the anneal layer by layer against the instantaneous spectrum.
inline OverlapTraceResult overlap_trace(const IsingModel& model, const AqaConfig& config,
                                        int k = 3) {
  if (model.num_vars > kMaxSpectraQubits)
    throw capacity_error("overlap_trace: " + std::to_string(model.num_vars) +
                         " variables exceeds spectra cap " + std::to_string(kMaxSpectraQubits));
  CompiledProblem prob = compile_problem(model);
  const int p = config.p;
  VariationalParams params = aqa_parameters(config.tau, p, config.schedule);
  OverlapTraceResult trace;
  trace.tau = config.tau;
  trace.p = p;
  trace.t_a = config.tau * p;
  StateVector psi = StateVector::uniform_superposition(model.num_vars);
  for (int j = 0; j <= p; ++j) {
    if (j > 0) apply_layer(prob, psi, params.beta[j - 1], params.gamma[j - 1]);
    OverlapStep step;
    step.layer = j;
    step.s = static_cast<double>(j) / p;
    Spectrum spec = lowest_eigenstates(model, step.s, k);
    step.eigenvalues = spec.eigenvalues;
    step.overlaps.resize(spec.eigenvectors.size());
    for (std::size_t m = 0; m < spec.eigenvectors.size(); ++m) {
      step.overlaps[m] = spec.overlap_squared(m, psi);
      step.low_sum += step.overlaps[m];
    }
    const double u = 1.0 - step.s;
    step.cost = u * transverse_field_expectation(psi) +
                step.s * diagonal_expectation(psi, prob.energies);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

/// Initial parameters for a variational run.
struct InitStrategy {
  enum class Kind { aqa, random, epsilon, zero };
  Kind kind = Kind::epsilon;
  double tau = 0.5;        // aqa: annealing step of the seeding anneal
  int p = 25;              // aqa: layer count of the seeding anneal
  double epsilon = 1e-2;   // epsilon: constant fill value

  static InitStrategy aqa_seed(double tau, int p) {
    return {Kind::aqa, tau, p, 0.0};
  }
  static InitStrategy random() { return {Kind::random, 0.0, 0, 0.0}; }
  static InitStrategy epsilon_fill(double eps) { return {Kind::epsilon, 0.0, 0, eps}; }
  static InitStrategy zero_fill() { return {Kind::zero, 0.0, 0, 0.0}; }
};

inline const char* to_string(InitStrategy::Kind k) {
  switch (k) {
    case InitStrategy::Kind::aqa: return "aqa";
    case InitStrategy::Kind::random: return "random";
    case InitStrategy::Kind::epsilon: return "epsilon";
    case InitStrategy::Kind::zero: return "zero";
  }
  return "unknown";
}

/// Piecewise-linear resampling of the angle sequences onto a new depth.
/// Endpoints map to endpoints; a depth-1 sequence extends as a constant.
inline VariationalParams interpolate_parameters(const VariationalParams& params, int new_depth) {
  params.validate();
  if (new_depth < 1) throw std::invalid_argument("interpolate_parameters: depth must be positive");
  const std::size_t q = params.depth();
  if (static_cast<std::size_t>(new_depth) == q) return params;
  VariationalParams out;
  out.beta.resize(new_depth);
  out.gamma.resize(new_depth);
  for (int m = 0; m < new_depth; ++m) {
    if (q == 1) {
      out.beta[m] = params.beta[0];
      out.gamma[m] = params.gamma[0];
      continue;
    }
    const double u = new_depth == 1 ? 0.5
                                    : static_cast<double>(m) / (new_depth - 1) *
                                          static_cast<double>(q - 1);
    const auto lo = static_cast<std::size_t>(std::min<double>(u, static_cast<double>(q - 2)));
    const double w = u - static_cast<double>(lo);
    out.beta[m] = params.beta[lo] + w * (params.beta[lo + 1] - params.beta[lo]);
    out.gamma[m] = params.gamma[lo] + w * (params.gamma[lo + 1] - params.gamma[lo]);
  }
  return out;
}

/// Builds starting angles at the requested depth.  Random draws are beta
/// first then gamma, each uniform in [0, pi).
inline VariationalParams initial_parameters(const InitStrategy& init, int depth,
                                            std::uint64_t seed = 0) {
  if (depth < 1) throw std::invalid_argument("initial_parameters: depth must be positive");
  VariationalParams params;
  switch (init.kind) {
    case InitStrategy::Kind::aqa: {
      params = aqa_parameters(init.tau, init.p, AnnealingSchedule::linear());
      params = interpolate_parameters(params, depth);
      break;
    }
    case InitStrategy::Kind::random: {
      SplitMix rng(seed);
      constexpr double pi = 3.14159265358979323846;
      params.beta.resize(depth);
      params.gamma.resize(depth);
      for (int j = 0; j < depth; ++j) params.beta[j] = rng.uniform() * pi;
      for (int j = 0; j < depth; ++j) params.gamma[j] = rng.uniform() * pi;
      break;
    }
    case InitStrategy::Kind::epsilon: {
      params.beta.assign(depth, init.epsilon);
      params.gamma.assign(depth, init.epsilon);
      break;
    }
    case InitStrategy::Kind::zero: {
      params.beta.assign(depth, 0.0);
      params.gamma.assign(depth, 0.0);
      break;
    }
  }
  return params;
}

inline std::vector<double> flatten(const VariationalParams& params) {
  std::vector<double> x(params.beta);
  x.insert(x.end(), params.gamma.begin(), params.gamma.end());
  return x;
}

inline VariationalParams unflatten(const std::vector<double>& x, int depth) {
  if (x.size() != 2 * static_cast<std::size_t>(depth))
    throw std::invalid_argument("unflatten: length mismatch");
  VariationalParams p;
  p.beta.assign(x.begin(), x.begin() + depth);
  p.gamma.assign(x.begin() + depth, x.end());
  return p;
}

/// Variational cost (1 - s) <H_I> + s <H_P> of the circuit state at angles
/// x = [beta_1..beta_p, gamma_1..gamma_p]; s = 1 is the plain problem cost.
///
/// Coordinate probes reuse the cached per-layer prefix states of the last
/// fully evaluated point, replaying only the layers a changed angle can
/// affect; the replay performs the identical operations in the identical
/// order, so probe results are bit-identical to full evaluations.
class QaoaCostFunction : public CostFunction {
 public:
  QaoaCostFunction(const CompiledProblem& prob, int depth, double s = 1.0)
      : prob_(prob), depth_(depth), s_(s) {
    if (depth < 1) throw std::invalid_argument("QaoaCostFunction: depth must be positive");
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("QaoaCostFunction: s outside [0,1]");
    const std::uint64_t bytes =
        static_cast<std::uint64_t>(depth) * (std::uint64_t{1} << prob.num_qubits) * 16;
    cache_enabled_ = bytes <= (std::uint64_t{128} << 20);
  }

  double value(const std::vector<double>& x) override {
    check(x);
    StateVector psi = StateVector::uniform_superposition(prob_.num_qubits);
    if (cache_enabled_) {
      prefix_.clear();
      prefix_.reserve(depth_);
      for (int j = 0; j < depth_; ++j) {
        prefix_.push_back(psi);  // state before layer j
        apply_layer(prob_, psi, x[j], x[depth_ + j]);
      }
      cached_x_ = x;
    } else {
      for (int j = 0; j < depth_; ++j) apply_layer(prob_, psi, x[j], x[depth_ + j]);
    }
    return cost_of(psi);
  }

  double value_with(const std::vector<double>& x, std::size_t i, double xi) override {
    check(x);
    if (i >= x.size()) throw std::invalid_argument("QaoaCostFunction: probe index out of range");
    if (!cache_enabled_ || cached_x_ != x) return CostFunction::value_with(x, i, xi);
    const int layer = static_cast<int>(i < static_cast<std::size_t>(depth_) ? i : i - depth_);
    StateVector psi = prefix_[layer];
    const double beta = i < static_cast<std::size_t>(depth_) ? xi : x[layer];
    const double gamma = i < static_cast<std::size_t>(depth_) ? x[depth_ + layer] : xi;
    apply_layer(prob_, psi, beta, gamma);
    for (int j = layer + 1; j < depth_; ++j) apply_layer(prob_, psi, x[j], x[depth_ + j]);
    return cost_of(psi);
  }

  /// The state at x, via the same code path as the cost.
  StateVector state(const std::vector<double>& x) {
    return qaoa_state(prob_, unflatten(x, depth_));
  }

 private:
  void check(const std::vector<double>& x) const {
    if (x.size() != 2 * static_cast<std::size_t>(depth_))
      throw std::invalid_argument("QaoaCostFunction: parameter length mismatch");
  }

  double cost_of(const StateVector& psi) const {
    if (s_ == 1.0) return diagonal_expectation(psi, prob_.energies);
    const double u = 1.0 - s_;
    return u * transverse_field_expectation(psi) + s_ * diagonal_expectation(psi, prob_.energies);
  }

  const CompiledProblem& prob_;
  int depth_;
  double s_;
  bool cache_enabled_;
  std::vector<double> cached_x_;
  std::vector<StateVector> prefix_;
};

struct QaoaConfig {
  int p = 25;
  InitStrategy init = InitStrategy::aqa_seed(0.5, 25);
  OptimizerKind optimizer = OptimizerKind::bfgs;
  std::uint64_t budget = 8000;
  OptimizerSettings settings;
};

struct QaoaResult {
  OptimizationRun run;
  VariationalParams initial_params;
  VariationalParams best_params;
  double initial_success = 0.0;  // ground probability at the starting angles
  double success = 0.0;          // ground probability at the best angles
};

inline QaoaResult run_qaoa(const CompiledProblem& prob, const VariationalParams& init,
                           OptimizerKind optimizer, std::uint64_t budget,
                           const OptimizerSettings& settings = {}) {
  init.validate();
  const int p = static_cast<int>(init.depth());
  if (p > kMaxOptimizedDepth)
    throw capacity_error("run_qaoa: depth " + std::to_string(p) + " exceeds optimized cap " +
                         std::to_string(kMaxOptimizedDepth));
  QaoaResult r;
  r.initial_params = init;
  QaoaCostFunction cost(prob, p, 1.0);
  r.run = minimize(optimizer, cost, flatten(init), budget, settings);
  r.best_params = unflatten(r.run.best_point, p);
  r.initial_success = success_probability(prob, qaoa_state(prob, r.initial_params));
  r.success = success_probability(prob, qaoa_state(prob, r.best_params));
  return r;
}

inline QaoaResult run_qaoa(const CompiledProblem& prob, const QaoaConfig& config,
                           std::uint64_t seed = 0) {
  if (config.p < 1) throw std::invalid_argument("run_qaoa: p must be positive");
  return run_qaoa(prob, initial_parameters(config.init, config.p, seed), config.optimizer,
                  config.budget, config.settings);
}

inline QaoaResult run_qaoa(const IsingModel& model, const QaoaConfig& config,
                           std::uint64_t seed = 0) {
  return run_qaoa(compile_problem(model), config, seed);
}

struct EhqoConfig {
  int steps = 10;                      // number of stages N_s; stage j targets s_j = j/N_s
  int depth = 25;                      // fixed circuit depth when depth_schedule is empty
  std::vector<int> depth_schedule;     // optional per-stage depths, nondecreasing
  InitStrategy init = InitStrategy::epsilon_fill(1e-2);
  OptimizerKind optimizer = OptimizerKind::bfgs;
  std::uint64_t intermediate_budget = 10000;
  std::uint64_t final_budget = 50000;
  OptimizerSettings settings;
  bool record_overlaps = true;         // spectral diagnostics, needs n <= 14
};

struct EhqoStage {
  int index = 0;     // 1-based stage number
  double s = 0.0;
  int depth = 0;
  OptimizationRun run;
  VariationalParams initial_params;
  VariationalParams best_params;
  double e0 = std::numeric_limits<double>::quiet_NaN();
  double e1 = std::numeric_limits<double>::quiet_NaN();
  double initial_overlap_e0 = std::numeric_limits<double>::quiet_NaN();
  double initial_overlap_e1 = std::numeric_limits<double>::quiet_NaN();
  double success = 0.0;  // ground probability of the optimized stage state
  std::string error;     // nonempty when the stage optimizer aborted
};

struct EhqoResult {
  std::vector<EhqoStage> stages;
  VariationalParams best_params;
  double success = 0.0;
};

/// Stagewise optimization: stage j minimizes (1 - s_j) <H_I> + s_j <H_P>
/// starting from the previous stage's best angles (interpolated when the
/// depth grows).  The last stage is plain problem-cost optimization, so
/// steps = 1 reduces exactly to run_qaoa with the same init.  A failed stage
/// is recorded and its input angles carry forward unchanged.
inline EhqoResult run_ehqo(const CompiledProblem& prob, const EhqoConfig& config,
                           std::uint64_t seed = 0) {
  if (config.steps < 1) throw std::invalid_argument("run_ehqo: steps must be positive");
  std::vector<int> depths = config.depth_schedule;
  if (depths.empty()) {
    if (config.depth < 1) throw std::invalid_argument("run_ehqo: depth must be positive");
    depths.assign(config.steps, config.depth);
  }
  if (depths.size() != static_cast<std::size_t>(config.steps))
    throw std::invalid_argument("run_ehqo: depth_schedule length must equal steps");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 1) throw std::invalid_argument("run_ehqo: depths must be positive");
    if (depths[i] > kMaxOptimizedDepth)
      throw capacity_error("run_ehqo: depth " + std::to_string(depths[i]) +
                           " exceeds optimized cap " + std::to_string(kMaxOptimizedDepth));
    if (i > 0 && depths[i] < depths[i - 1])
      throw std::invalid_argument("run_ehqo: depth_schedule must be nondecreasing");
  }

  EhqoResult result;
  VariationalParams params = initial_parameters(config.init, depths[0], seed);
  const bool diagnostics = config.record_overlaps && prob.num_qubits <= kMaxSpectraQubits;
  for (int j = 1; j <= config.steps; ++j) {
    EhqoStage stage;
    stage.index = j;
    stage.s = static_cast<double>(j) / config.steps;
    stage.depth = depths[j - 1];
    if (static_cast<int>(params.depth()) != stage.depth)
      params = interpolate_parameters(params, stage.depth);
    stage.initial_params = params;
    if (diagnostics) {
      const Spectrum spec = lowest_eigenstates(prob.model, stage.s, 2);
      const StateVector psi0 = qaoa_state(prob, params);
      stage.e0 = spec.eigenvalues[0];
      stage.e1 = spec.eigenvalues[1];
      stage.initial_overlap_e0 = spec.overlap_squared(0, psi0);
      stage.initial_overlap_e1 = spec.overlap_squared(1, psi0);
    }
    QaoaCostFunction cost(prob, stage.depth, stage.s);
    const std::uint64_t budget =
        j < config.steps ? config.intermediate_budget : config.final_budget;
    try {
      stage.run = minimize(config.optimizer, cost, flatten(params), budget, config.settings);
      params = unflatten(stage.run.best_point, stage.depth);
    } catch (const numeric_error& e) {
      stage.error = e.what();
    }
    stage.best_params = params;
    stage.success = success_probability(prob, qaoa_state(prob, params));
    result.stages.push_back(std::move(stage));
  }
  result.best_params = params;
  result.success = result.stages.back().success;
  return result;
}

inline EhqoResult run_ehqo(const IsingModel& model, const EhqoConfig& config,
                           std::uint64_t seed = 0) {
  return run_ehqo(compile_problem(model), config, seed);
}

}  // namespace avqo
