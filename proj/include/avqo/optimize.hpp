#pragma once

// Derivative-free optimization drivers with exact evaluation budgets.
//
// Both optimizers are deterministic: identical inputs produce identical
// traces.  Every single cost evaluation is counted against the budget,
// including finite-difference gradient probes and line-search trials, and the
// reported best cost/point pair is the minimum over every evaluation made.
// A NaN cost aborts the run with numeric_error.
//
//   minimize_bfgs         BFGS with an inverse-Hessian approximation,
//                         central finite differences (step 1e-6) and a
//                         backtracking Armijo line search.  Converged means
//                         the gradient infinity norm fell below tolerance;
//                         a failed line search reports stalled.
//   minimize_nelder_mead  Nelder-Mead with reflection 1, expansion 2,
//                         contraction 0.5, shrink 0.5; the initial simplex
//                         displaces each coordinate by 5% (0.00025 when the
//                         coordinate is zero).  Termination on simplex
//                         collapse reports converged when the best cost
//                         improved on the initial cost and stalled otherwise
//                         (a constant cost therefore stalls).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avqo/errors.hpp"

namespace avqo {

enum class Termination { converged, budget_exhausted, stalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

struct OptimizerSettings {
  double gradient_tolerance = 1e-8;  // BFGS stop: ||grad||_inf below this
  double simplex_tolerance = 1e-8;   // NM stop: vertex spread and f spread below this
  double fd_step = 1e-6;             // central-difference step
};

struct OptimizationRun {
  std::vector<double> initial_point;
  std::vector<double> best_point;
  double initial_cost = 0.0;
  double best_cost = 0.0;
  std::uint64_t evaluations = 0;
  Termination termination = Termination::stalled;
  std::vector<double> trace;  // trace[i] is the cost of evaluation i+1
};

/// Cost interface.  value_with evaluates at x with one coordinate replaced;
/// the default just copies, but implementations may provide a faster path as
/// long as the result is bit-identical to the copying one (finite-difference
/// gradients are routed through it).
class CostFunction {
 public:
  virtual ~CostFunction() = default;
  virtual double value(const std::vector<double>& x) = 0;
  virtual double value_with(const std::vector<double>& x, std::size_t i, double xi) {
    std::vector<double> y(x);
    y[i] = xi;
    return value(y);
  }
};

/// Adapts a plain callable.
class FunctionCost : public CostFunction {
 public:
  explicit FunctionCost(std::function<double(const std::vector<double>&)> f) : f_(std::move(f)) {}
  double value(const std::vector<double>& x) override { return f_(x); }

 private:
  std::function<double(const std::vector<double>&)> f_;
};

namespace detail {

struct BudgetExhausted {};

/// Counts evaluations, records the trace and tracks the best-seen pair.
class Evaluator {
 public:
  Evaluator(CostFunction& f, std::uint64_t max_evaluations, OptimizationRun& run)
      : f_(f), max_(max_evaluations), run_(run) {}

  double full(const std::vector<double>& x) {
    reserve();
    return record(f_.value(x), x, nullptr, 0, 0.0);
  }

  double probe(const std::vector<double>& x, std::size_t i, double xi) {
    reserve();
    return record(f_.value_with(x, i, xi), x, &i, i, xi);
  }

 private:
  void reserve() {
    if (run_.evaluations >= max_) throw BudgetExhausted{};
  }

  double record(double c, const std::vector<double>& x, const std::size_t* replaced,
                std::size_t i, double xi) {
    ++run_.evaluations;
    run_.trace.push_back(c);
    if (std::isnan(c))
      throw numeric_error("cost returned NaN at evaluation " + std::to_string(run_.evaluations));
    if (run_.trace.size() == 1 || c < run_.best_cost) {
      run_.best_cost = c;
      run_.best_point = x;
      if (replaced) run_.best_point[i] = xi;
    }
    return c;
  }

  CostFunction& f_;
  std::uint64_t max_;
  OptimizationRun& run_;
};

inline void check_start(const std::vector<double>& x0, std::uint64_t max_evaluations) {
  if (x0.empty()) throw std::invalid_argument("optimize: empty start point");
  if (max_evaluations == 0) throw std::invalid_argument("optimize: budget must be positive");
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("optimize: non-finite start point");
}

}  // namespace detail

inline OptimizationRun minimize_bfgs(CostFunction& f, const std::vector<double>& x0,
                                     std::uint64_t max_evaluations,
                                     const OptimizerSettings& settings = {}) {
  detail::check_start(x0, max_evaluations);
  const std::size_t dim = x0.size();
  const double h = settings.fd_step;

  OptimizationRun run;
  run.initial_point = x0;
  run.termination = Termination::budget_exhausted;
  detail::Evaluator ev(f, max_evaluations, run);

  auto gradient = [&](const std::vector<double>& x, std::vector<double>& g) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double fp = ev.probe(x, i, x[i] + h);
      const double fm = ev.probe(x, i, x[i] - h);
      g[i] = (fp - fm) / (2.0 * h);
    }
  };

  // Inverse Hessian approximation, dense row-major.
  std::vector<double> B(dim * dim, 0.0);
  auto reset_b = [&] {
    std::fill(B.begin(), B.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) B[i * dim + i] = 1.0;
  };
  reset_b();

  try {
    std::vector<double> x = x0;
    double fx = ev.full(x);
    run.initial_cost = fx;
    std::vector<double> g(dim), g_new(dim), d(dim), x_new(dim), sv(dim), yv(dim), by(dim);
    gradient(x, g);

    while (true) {
      double gnorm = 0.0;
      for (double v : g) gnorm = std::max(gnorm, std::abs(v));
      if (gnorm < settings.gradient_tolerance) {
        run.termination = Termination::converged;
        break;
      }

      // d = -B g, with a steepest-descent reset if d is not a descent direction.
      double dg = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) s += B[i * dim + j] * g[j];
        d[i] = -s;
        dg += d[i] * g[i];
      }
      if (!(dg < 0.0)) {
        reset_b();
        dg = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          d[i] = -g[i];
          dg -= g[i] * g[i];
        }
      }

      // Backtracking Armijo line search.
      const double c1 = 1e-4;
      double alpha = 1.0;
      double f_trial = 0.0;
      bool accepted = false;
      for (int t = 0; t < 40; ++t) {
        for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + alpha * d[i];
        f_trial = ev.full(x_new);
        if (f_trial <= fx + c1 * alpha * dg) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        run.termination = Termination::stalled;
        break;
      }

      gradient(x_new, g_new);

      double sy = 0.0, ss = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        sv[i] = x_new[i] - x[i];
        yv[i] = g_new[i] - g[i];
        sy += sv[i] * yv[i];
        ss += sv[i] * sv[i];
        yy += yv[i] * yv[i];
      }
      if (sy > 1e-12 * std::sqrt(ss * yy)) {
        // B <- (I - r s y^T) B (I - r y s^T) + r s s^T with r = 1/sy.
        const double r = 1.0 / sy;
        double yby = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < dim; ++j) s += B[i * dim + j] * yv[j];
          by[i] = s;
        }
        for (std::size_t i = 0; i < dim; ++i) yby += yv[i] * by[i];
        const double c = (1.0 + r * yby) * r;
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j)
            B[i * dim + j] += c * sv[i] * sv[j] - r * (by[i] * sv[j] + sv[i] * by[j]);
      }

      x.swap(x_new);
      fx = f_trial;
      g.swap(g_new);
    }
  } catch (const detail::BudgetExhausted&) {
    run.termination = Termination::budget_exhausted;
  }
  if (!run.trace.empty()) run.initial_cost = run.trace[0];
  return run;
}

inline OptimizationRun minimize_nelder_mead(CostFunction& f, const std::vector<double>& x0,
                                            std::uint64_t max_evaluations,
                                            const OptimizerSettings& settings = {}) {
  detail::check_start(x0, max_evaluations);
  const std::size_t dim = x0.size();

  OptimizationRun run;
  run.initial_point = x0;
  run.termination = Termination::budget_exhausted;
  detail::Evaluator ev(f, max_evaluations, run);

  try {
    std::vector<std::vector<double>> simplex;
    std::vector<double> fvals;
    simplex.push_back(x0);
    fvals.push_back(ev.full(x0));
    run.initial_cost = fvals[0];
    for (std::size_t k = 0; k < dim; ++k) {
      std::vector<double> y = x0;
      y[k] = (x0[k] != 0.0) ? 1.05 * x0[k] : 0.00025;
      simplex.push_back(y);
      fvals.push_back(ev.full(y));
    }

    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
      std::vector<std::vector<double>> s2(dim + 1);
      std::vector<double> f2(dim + 1);
      for (std::size_t i = 0; i <= dim; ++i) {
        s2[i] = std::move(simplex[order[i]]);
        f2[i] = fvals[order[i]];
      }
      simplex.swap(s2);
      fvals.swap(f2);
    };

    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
    while (true) {
      sort_simplex();

      double spread = 0.0, fspread = 0.0;
      for (std::size_t i = 1; i <= dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j)
          spread = std::max(spread, std::abs(simplex[i][j] - simplex[0][j]));
        fspread = std::max(fspread, std::abs(fvals[i] - fvals[0]));
      }
      if (spread <= settings.simplex_tolerance && fspread <= settings.simplex_tolerance) {
        run.termination = run.best_cost < run.initial_cost ? Termination::converged
                                                           : Termination::stalled;
        break;
      }

      for (std::size_t j = 0; j < dim; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += simplex[i][j];
        centroid[j] = s / static_cast<double>(dim);
      }
      const std::vector<double>& worst = simplex[dim];

      for (std::size_t j = 0; j < dim; ++j) xr[j] = centroid[j] + (centroid[j] - worst[j]);
      const double fr = ev.full(xr);

      bool shrink = false;
      if (fr < fvals[0]) {
        for (std::size_t j = 0; j < dim; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - worst[j]);
        const double fe = ev.full(xe);
        if (fe < fr) {
          simplex[dim] = xe;
          fvals[dim] = fe;
        } else {
          simplex[dim] = xr;
          fvals[dim] = fr;
        }
      } else if (fr < fvals[dim - 1]) {
        simplex[dim] = xr;
        fvals[dim] = fr;
      } else if (fr < fvals[dim]) {
        // outside contraction
        for (std::size_t j = 0; j < dim; ++j) xc[j] = centroid[j] + 0.5 * (centroid[j] - worst[j]);
        const double fc = ev.full(xc);
        if (fc <= fr) {
          simplex[dim] = xc;
          fvals[dim] = fc;
        } else {
          shrink = true;
        }
      } else {
        // inside contraction
        for (std::size_t j = 0; j < dim; ++j) xc[j] = centroid[j] - 0.5 * (centroid[j] - worst[j]);
        const double fc = ev.full(xc);
        if (fc < fvals[dim]) {
          simplex[dim] = xc;
          fvals[dim] = fc;
        } else {
          shrink = true;
        }
      }

      if (shrink) {
        for (std::size_t i = 1; i <= dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fvals[i] = ev.full(simplex[i]);
        }
      }
    }
  } catch (const detail::BudgetExhausted&) {
    run.termination = Termination::budget_exhausted;
  }
  if (!run.trace.empty()) run.initial_cost = run.trace[0];
  return run;
}

}  // namespace avqo
