#pragma once

// Annealing schedules A(s), B(s) on s in [0, 1] and the mapping from an
// annealing run to variational parameters.  A Trotterized anneal with time
// step tau and p layers uses angles
//
//   beta_j = tau * A(j / p)   (mixer)     gamma_j = tau * B(j / p)  (phase)
//
// for j = 1 .. p, so the final layer has beta_p = tau * A(1) = 0 for the
// linear schedule and total annealing time t_a = tau * p.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace avqo {

struct AnnealingSchedule {
  std::string name;
  std::function<double(double)> a;
  std::function<double(double)> b;

  /// A(s) with the domain check.
  double eval_a(double s) const {
    check_domain(s);
    return a(s);
  }

  /// B(s) with the domain check.
  double eval_b(double s) const {
    check_domain(s);
    return b(s);
  }

  /// Linear ramp A(s) = 1 - s, B(s) = s.
  static AnnealingSchedule linear() {
    return {"linear", [](double s) { return 1.0 - s; }, [](double s) { return s; }};
  }

  /// Lookup by config name; unknown names list the valid ones.
  static AnnealingSchedule from_name(const std::string& name) {
    if (name == "linear") return linear();
    throw std::invalid_argument("unknown schedule '" + name + "' (valid: linear)");
  }

  /// Any schedule must ramp the mixer down and the problem term up.
  void validate() const {
    if (!a || !b) throw std::invalid_argument("schedule: missing A or B");
    if (name.empty()) throw std::invalid_argument("schedule: missing name");
    if (a(0.0) < a(1.0) || b(1.0) < b(0.0))
      throw std::invalid_argument("schedule '" + name + "': A must decrease and B increase over [0,1]");
  }

 private:
  static void check_domain(double s) {
    if (!(s >= 0.0 && s <= 1.0))
      throw std::invalid_argument("schedule: s = " + std::to_string(s) + " outside [0,1]");
  }
};

/// Layered variational angles; beta drives the mixer, gamma the phase.
struct VariationalParams {
  std::vector<double> beta;
  std::vector<double> gamma;

  std::size_t depth() const { return beta.size(); }

  void validate() const {
    if (beta.empty() || beta.size() != gamma.size())
      throw std::invalid_argument("VariationalParams: beta and gamma must have equal nonzero length");
    for (double v : beta)
      if (!std::isfinite(v)) throw std::invalid_argument("VariationalParams: non-finite beta");
    for (double v : gamma)
      if (!std::isfinite(v)) throw std::invalid_argument("VariationalParams: non-finite gamma");
  }
};

/// Angles of the Trotterized anneal at (tau, p).  For the linear schedule
/// beta_j + gamma_j == tau must hold exactly in binary64, layer by layer.
/// Rounding tau * (j/p) can break that for the naive pair, so when it does
/// the smaller angle is re-derived from the larger one: the larger angle lies
/// in [tau/2, tau], where Sterbenz's lemma makes tau minus it exact, and the
/// repaired partner moves by at most one ulp of tau.
inline VariationalParams aqa_parameters(double tau, int p,
                                        const AnnealingSchedule& schedule =
                                            AnnealingSchedule::linear()) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("aqa_parameters: tau must be positive and finite");
  if (p < 1) throw std::invalid_argument("aqa_parameters: p must be at least 1");
  schedule.validate();
  const bool linear = schedule.name == "linear";
  VariationalParams params;
  params.beta.resize(p);
  params.gamma.resize(p);
  for (int j = 1; j <= p; ++j) {
    const double s = static_cast<double>(j) / p;
    double gamma = tau * schedule.eval_b(s);
    double beta = linear ? tau - gamma : tau * schedule.eval_a(s);
    if (linear && beta + gamma != tau) {
      if (s < 0.5)
        gamma = tau - beta;
      else
        beta = tau - gamma;
    }
    params.beta[j - 1] = beta;
    params.gamma[j - 1] = gamma;
  }
  return params;
}

}  // namespace avqo
