#pragma once

// Low-lying spectrum of the interpolated annealing Hamiltonian
//
//   H(s) = (1 - s) H_I + s H_P,   H_I = -sum_i sigma_x^i,  H_P diagonal,
//
// extracted matrix-free with a Lanczos iteration (full reorthogonalization,
// deflation of converged eigenpairs, restarts).  H(s) is real symmetric in
// the computational basis, so eigenvectors are kept as real vectors.  One
// eigenpair is converged at a time; deflating it and rerunning finds
// degenerate partners, which therefore come back in an arbitrary orthonormal
// basis.  Overlap diagnostics across a degeneracy must sum |overlap|^2 over
// the degenerate levels instead of comparing individual vectors.
//
// Diagnostics only: capped at 14 qubits (the algorithms themselves go
// higher).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "avqo/errors.hpp"
#include "avqo/hamiltonian.hpp"
#include "avqo/rng.hpp"
#include "avqo/statevector.hpp"

namespace avqo {

inline constexpr int kMaxSpectraQubits = 14;

struct Spectrum {
  double s = 0.0;
  int num_qubits = 0;
  std::vector<double> eigenvalues;                 // ascending
  std::vector<std::vector<double>> eigenvectors;   // orthonormal, real

  /// |<level|psi>|^2 for a complex state.
  double overlap_squared(std::size_t level, const StateVector& psi) const {
    if (level >= eigenvectors.size()) throw std::invalid_argument("Spectrum: level out of range");
    const auto& v = eigenvectors[level];
    if (v.size() != psi.dimension()) throw std::invalid_argument("Spectrum: dimension mismatch");
    double re = 0.0, im = 0.0;
    const auto& a = psi.amplitudes();
    for (std::size_t z = 0; z < v.size(); ++z) {
      re += v[z] * a[z].real();
      im += v[z] * a[z].imag();
    }
    return re * re + im * im;
  }

  /// The eigenvector as a statevector (real amplitudes).
  StateVector eigenstate(std::size_t level) const {
    if (level >= eigenvectors.size()) throw std::invalid_argument("Spectrum: level out of range");
    std::vector<Complex> amps(eigenvectors[level].size());
    for (std::size_t z = 0; z < amps.size(); ++z) amps[z] = Complex(eigenvectors[level][z], 0.0);
    return StateVector::from_amplitudes(std::move(amps));
  }
};

namespace detail {

/// out = H(s) v, matrix-free: diagonal part plus one bit-flip pass per qubit.
inline void apply_interpolated(const std::vector<double>& energies, int num_qubits, double s,
                               const std::vector<double>& v, std::vector<double>& out) {
  const std::uint64_t dim = std::uint64_t{1} << num_qubits;
  out.resize(dim);
  for (std::uint64_t z = 0; z < dim; ++z) out[z] = s * energies[z] * v[z];
  const double c = -(1.0 - s);
  if (c == 0.0) return;
  for (int q = 0; q < num_qubits; ++q) {
    const std::uint64_t mask = std::uint64_t{1} << q;
    for (std::uint64_t hi = 0; hi < dim; hi += mask << 1) {
      for (std::uint64_t lo = 0; lo < mask; ++lo) {
        const std::uint64_t z0 = hi + lo;
        const std::uint64_t z1 = z0 + mask;
        out[z0] += c * v[z1];
        out[z1] += c * v[z0];
      }
    }
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Classical Gram-Schmidt against a set of vectors, applied twice.
inline void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : basis) axpy(-dot(u, v), u, v);
}

/// Deterministic pseudo-random start vector for a given attempt.
inline std::vector<double> start_vector(std::uint64_t dim, std::uint64_t salt) {
  SplitMix rng(derive_seed(0x5bec7a11u, {salt}));
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.uniform() - 0.5;
  return v;
}

}  // namespace detail

/// Lowest k eigenpairs of H(s).  Residuals satisfy ||H v - E v|| <= 1e-8 and
/// the returned vectors are orthonormal to the same tolerance.
inline Spectrum lowest_eigenstates(const IsingModel& model, double s, int k = 3) {
  validate_model(model);
  if (model.num_vars > kMaxSpectraQubits)
    throw capacity_error("lowest_eigenstates: " + std::to_string(model.num_vars) +
                         " variables exceeds spectra cap " + std::to_string(kMaxSpectraQubits));
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("lowest_eigenstates: s outside [0,1]");
  const std::uint64_t dim = std::uint64_t{1} << model.num_vars;
  if (k < 1 || static_cast<std::uint64_t>(k) > dim)
    throw std::invalid_argument("lowest_eigenstates: k outside [1, 2^n]");

  const std::vector<double> energies = diagonal_energies(model);
  Spectrum spec;
  spec.s = s;
  spec.num_qubits = model.num_vars;

  if (s == 1.0) {
    // H is diagonal: eigenstates are basis states sorted by energy, index
    // breaking ties.  This also fixes a canonical basis inside degenerate
    // levels at the classical endpoint.
    std::vector<std::uint64_t> order(dim);
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
      return energies[a] < energies[b];
    });
    for (int m = 0; m < k; ++m) {
      spec.eigenvalues.push_back(energies[order[m]]);
      std::vector<double> v(dim, 0.0);
      v[order[m]] = 1.0;
      spec.eigenvectors.push_back(std::move(v));
    }
    return spec;
  }

  const int max_steps = std::min<std::uint64_t>(250, dim);
  const int max_restarts = 60;
  const double accept_tol = 1e-9;

  for (int level = 0; level < k; ++level) {
    std::vector<double> v = detail::start_vector(dim, static_cast<std::uint64_t>(level));
    bool locked = false;
    for (int attempt = 0; attempt < max_restarts && !locked; ++attempt) {
      if (attempt > 0 && detail::norm2(v) < 1e-8)
        v = detail::start_vector(dim, (static_cast<std::uint64_t>(level) << 16) + attempt);
      detail::orthogonalize(v, spec.eigenvectors);
      double nv = detail::norm2(v);
      if (nv < 1e-10) {
        v = detail::start_vector(dim, (static_cast<std::uint64_t>(level) << 24) + attempt + 1);
        detail::orthogonalize(v, spec.eigenvectors);
        nv = detail::norm2(v);
      }
      for (auto& x : v) x /= nv;

      std::vector<std::vector<double>> basis{v};
      std::vector<double> alpha, beta;
      std::vector<double> w;
      bool exhausted = false;
      Eigen::MatrixXd ritz_vecs;
      Eigen::VectorXd ritz_vals;

      const int steps = std::min<int>(max_steps, static_cast<int>(dim) - level);
      for (int j = 0; j < steps; ++j) {
        detail::apply_interpolated(energies, model.num_vars, s, basis[j], w);
        const double aj = detail::dot(basis[j], w);
        alpha.push_back(aj);
        detail::axpy(-aj, basis[j], w);
        if (j > 0) detail::axpy(-beta[j - 1], basis[j - 1], w);
        detail::orthogonalize(w, spec.eigenvectors);
        detail::orthogonalize(w, basis);
        const double bj = detail::norm2(w);

        // Solve the current tridiagonal section for the lowest Ritz pair.
        const int m = static_cast<int>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub(std::max(0, m - 1));
        for (int t = 0; t + 1 < m; ++t) sub[t] = beta[t];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        ritz_vals = es.eigenvalues();
        ritz_vecs = es.eigenvectors();
        const double resid_est = bj * std::abs(ritz_vecs(m - 1, 0));

        if (bj < 1e-13) { exhausted = true; break; }
        if (resid_est < 0.1 * accept_tol && m >= 2) break;
        if (j + 1 == steps) break;
        beta.push_back(bj);
        for (auto& x : w) x /= bj;
        basis.push_back(w);
      }

      // Assemble the Ritz vector for the lowest Ritz value.
      const int m = static_cast<int>(alpha.size());
      std::vector<double> u(dim, 0.0);
      for (int t = 0; t < m; ++t) detail::axpy(ritz_vecs(t, 0), basis[t], u);
      detail::orthogonalize(u, spec.eigenvectors);
      const double nu = detail::norm2(u);
      if (nu < 1e-10) continue;  // collapsed onto locked space; restart
      for (auto& x : u) x /= nu;

      detail::apply_interpolated(energies, model.num_vars, s, u, w);
      const double theta = detail::dot(u, w);
      detail::axpy(-theta, u, w);
      const double resid = detail::norm2(w);
      if (resid <= accept_tol || (exhausted && resid <= 1e-8)) {
        spec.eigenvalues.push_back(theta);
        spec.eigenvectors.push_back(std::move(u));
        locked = true;
      } else {
        v = std::move(u);  // restart from the best estimate so far
      }
    }
    if (!locked)
      throw numeric_error("lowest_eigenstates: level " + std::to_string(level) +
                          " did not converge at s = " + std::to_string(s));
  }

  // Deflation converges levels in ascending order up to tolerance; enforce it.
  std::vector<std::size_t> order(spec.eigenvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.eigenvalues[a] < spec.eigenvalues[b];
  });
  Spectrum sorted;
  sorted.s = spec.s;
  sorted.num_qubits = spec.num_qubits;
  for (std::size_t idx : order) {
    sorted.eigenvalues.push_back(spec.eigenvalues[idx]);
    sorted.eigenvectors.push_back(std::move(spec.eigenvectors[idx]));
  }
  return sorted;
}

struct GapScan {
  double location = 0.0;  // s value attaining the minimum (ties: smallest s)
  double gap = 0.0;       // E1 - E0 there
};

/// Minimum E1 - E0 over a grid of s values.
inline GapScan minimum_gap(const IsingModel& model, const std::vector<double>& s_grid) {
  if (s_grid.empty()) throw std::invalid_argument("minimum_gap: empty grid");
  GapScan best;
  best.gap = std::numeric_limits<double>::infinity();
  best.location = std::numeric_limits<double>::quiet_NaN();
  for (double s : s_grid) {
    Spectrum spec = lowest_eigenstates(model, s, 2);
    const double gap = spec.eigenvalues[1] - spec.eigenvalues[0];
    if (gap < best.gap || (gap == best.gap && s < best.location)) {
      best.gap = gap;
      best.location = s;
    }
  }
  return best;
}

}  // namespace avqo
