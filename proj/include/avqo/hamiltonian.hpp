#pragma once

// Ising problem Hamiltonians and their 2-SAT encoding.
//
//   H_P = -sum_i h_i sigma_z^i - sum_(i<j) J_ij sigma_z^i sigma_z^j + offset
//
// Diagonal energies follow the statevector bit convention: spin
// s_i(z) = (-1)^bit_i(z), so bit 0 is spin +1 ("variable true") and bit 1
// is spin -1 ("variable false").
//
// A 2-SAT clause contributes the penalty (1 - c_a sigma_z^a)(1 - c_b
// sigma_z^b)/4 with c = +1 for a positive literal and -1 for a negated one,
// which is 1 exactly when both literals are false.  Summed over clauses the
// diagonal energy of an assignment equals its violated-clause count, so the
// encoding maps h_a += c_a/4, h_b += c_b/4, J_ab -= c_a c_b/4 and
// offset += 1/4 per clause.  Repeated clauses accumulate weight.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "avqo/errors.hpp"

namespace avqo {

/// Dense energy tables are capped with the statevector size (64 MiB of
/// amplitudes); brute-force assignment scans go a little further.
inline constexpr int kMaxTableQubits = 22;
inline constexpr int kMaxBruteForceQubits = 24;

struct Coupling {
  int i = 0;
  int j = 0;
  double strength = 0.0;
};

struct IsingModel {
  int num_vars = 0;
  std::vector<double> fields;      // h_i, one per variable
  std::vector<Coupling> couplings; // J_ij, i < j
  double offset = 0.0;
};

inline void validate_model(const IsingModel& m) {
  if (m.num_vars < 1) throw std::invalid_argument("IsingModel: need at least one variable");
  if (m.fields.size() != static_cast<std::size_t>(m.num_vars))
    throw std::invalid_argument("IsingModel: field count does not match num_vars");
  for (double h : m.fields)
    if (!std::isfinite(h)) throw std::invalid_argument("IsingModel: non-finite field");
  for (const Coupling& c : m.couplings) {
    if (c.i < 0 || c.j < 0 || c.i >= m.num_vars || c.j >= m.num_vars || c.i >= c.j)
      throw std::invalid_argument("IsingModel: coupling indices must satisfy 0 <= i < j < n");
    if (!std::isfinite(c.strength)) throw std::invalid_argument("IsingModel: non-finite coupling");
  }
  if (!std::isfinite(m.offset)) throw std::invalid_argument("IsingModel: non-finite offset");
}

/// One 2-SAT clause: literal signs are +1 for x and -1 for NOT x.
struct TwoSatClause {
  int var_a = 0;
  int var_b = 0;
  int sign_a = 1;
  int sign_b = 1;
};

struct TwoSatInstance {
  int num_vars = 0;
  std::vector<TwoSatClause> clauses;
};

inline void validate_instance(const TwoSatInstance& inst) {
  if (inst.num_vars < 2) throw std::invalid_argument("TwoSatInstance: need at least two variables");
  for (const TwoSatClause& c : inst.clauses) {
    if (c.var_a < 0 || c.var_b < 0 || c.var_a >= inst.num_vars || c.var_b >= inst.num_vars)
      throw std::invalid_argument("TwoSatInstance: clause variable out of range");
    if (c.var_a == c.var_b)
      throw std::invalid_argument("TwoSatInstance: clause variables must be distinct");
    if ((c.sign_a != 1 && c.sign_a != -1) || (c.sign_b != 1 && c.sign_b != -1))
      throw std::invalid_argument("TwoSatInstance: literal signs must be +1 or -1");
  }
}

/// Spin of variable i in assignment z under the global bit convention.
inline int spin_of(std::uint64_t z, int i) {
  return ((z >> i) & 1u) ? -1 : 1;
}

/// True when the clause holds for assignment z (a positive literal is
/// satisfied by spin +1, a negated one by spin -1).
inline bool clause_satisfied(const TwoSatClause& c, std::uint64_t z) {
  return spin_of(z, c.var_a) == c.sign_a || spin_of(z, c.var_b) == c.sign_b;
}

/// Number of clauses assignment z violates.
inline int violated_count(const TwoSatInstance& inst, std::uint64_t z) {
  int k = 0;
  for (const TwoSatClause& c : inst.clauses)
    if (!clause_satisfied(c, z)) ++k;
  return k;
}

/// Per-clause penalty encoding; the resulting diagonal energy of any
/// assignment equals its violated-clause count exactly (all coefficients are
/// quarter integers, so binary64 arithmetic is exact).
inline IsingModel two_sat_to_ising(const TwoSatInstance& inst) {
  validate_instance(inst);
  IsingModel m;
  m.num_vars = inst.num_vars;
  m.fields.assign(inst.num_vars, 0.0);
  std::map<std::pair<int, int>, double> j;
  for (const TwoSatClause& c : inst.clauses) {
    m.fields[c.var_a] += 0.25 * c.sign_a;
    m.fields[c.var_b] += 0.25 * c.sign_b;
    const int lo = std::min(c.var_a, c.var_b);
    const int hi = std::max(c.var_a, c.var_b);
    j[{lo, hi}] -= 0.25 * c.sign_a * c.sign_b;
    m.offset += 0.25;
  }
  for (const auto& [key, strength] : j)
    m.couplings.push_back({key.first, key.second, strength});
  return m;
}

/// Dense table E(z) = offset - sum_i h_i s_i(z) - sum_(ij) J_ij s_i(z) s_j(z)
/// for all 2^n assignments.
inline std::vector<double> diagonal_energies(const IsingModel& m) {
  validate_model(m);
  if (m.num_vars > kMaxTableQubits)
    throw capacity_error("diagonal_energies: " + std::to_string(m.num_vars) +
                         " variables exceeds table cap " + std::to_string(kMaxTableQubits));
  const std::uint64_t dim = std::uint64_t{1} << m.num_vars;
  std::vector<double> e(dim, 0.0);
  for (std::uint64_t z = 0; z < dim; ++z) {
    double v = m.offset;
    for (int i = 0; i < m.num_vars; ++i) v -= m.fields[i] * spin_of(z, i);
    for (const Coupling& c : m.couplings) v -= c.strength * spin_of(z, c.i) * spin_of(z, c.j);
    e[z] = v;
  }
  return e;
}

struct GroundState {
  double energy = 0.0;
  std::uint64_t index = 0;      // smallest minimizing assignment
  std::uint64_t degeneracy = 1; // count of assignments within 1e-12 of the minimum
};

/// Brute-force scan over all assignments; ties at the minimum are counted
/// within an absolute 1e-12 window.
inline GroundState classical_ground_state(const IsingModel& m) {
  validate_model(m);
  if (m.num_vars > kMaxBruteForceQubits)
    throw capacity_error("classical_ground_state: " + std::to_string(m.num_vars) +
                         " variables exceeds brute-force cap " +
                         std::to_string(kMaxBruteForceQubits));
  const std::uint64_t dim = std::uint64_t{1} << m.num_vars;
  const auto energy_at = [&m](std::uint64_t z) {
    double v = m.offset;
    for (int i = 0; i < m.num_vars; ++i) v -= m.fields[i] * spin_of(z, i);
    for (const Coupling& c : m.couplings) v -= c.strength * spin_of(z, c.i) * spin_of(z, c.j);
    return v;
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t z = 0; z < dim; ++z) best = std::min(best, energy_at(z));
  GroundState g;
  g.energy = best;
  g.degeneracy = 0;
  g.index = dim;
  for (std::uint64_t z = 0; z < dim; ++z) {
    if (std::abs(energy_at(z) - best) <= 1e-12) {
      if (g.index == dim) g.index = z;
      ++g.degeneracy;
    }
  }
  return g;
}

}  // namespace avqo
