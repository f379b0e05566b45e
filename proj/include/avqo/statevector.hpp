#pragma once

// Dense statevector simulation of n qubits, amplitudes in binary64.
//
// Conventions used throughout the library:
//   * Basis index z runs over 0 .. 2^n - 1; bit i of z is the value of
//     variable i.  Bit value b corresponds to sigma_z eigenvalue (-1)^b,
//     so |0> is the +1 eigenstate.  For SAT encodings bit 0 means the
//     variable is true (spin +1) and bit 1 means false (spin -1).
//   * hbar = 1: evolution phases are exp(-i E t).
//
// The two evolution primitives are the building blocks of every algorithm
// here: a diagonal phase exp(-i gamma E(z)) and a uniform x rotation
// exp(+i theta sigma_x) applied to every qubit.  The rotation is n
// independent single-qubit updates done in place by pairwise amplitude
// mixing, never a 2^n x 2^n matrix.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "avqo/errors.hpp"

namespace avqo {

using Complex = std::complex<double>;

/// Hard cap on simulated qubits: one state of 2^22 amplitudes is 64 MiB.
inline constexpr int kMaxQubits = 22;

class StateVector {
 public:
  /// |+>^n, every amplitude 2^(-n/2).  For odd n the amplitude is the
  /// nearest double to 2^(-n/2); its square is one ulp off 2^-n, which is
  /// as exact as binary64 allows.
  static StateVector uniform_superposition(int num_qubits) {
    StateVector psi(num_qubits);
    const double amp = 1.0 / std::sqrt(static_cast<double>(psi.dimension()));
    for (Complex& a : psi.amps_) a = Complex(amp, 0.0);
    return psi;
  }

  /// Computational basis state |z>.
  static StateVector basis_state(int num_qubits, std::uint64_t z) {
    StateVector psi(num_qubits);
    if (z >= psi.dimension())
      throw std::invalid_argument("basis_state: index " + std::to_string(z) +
                                  " out of range for " + std::to_string(num_qubits) + " qubits");
    psi.amps_[z] = Complex(1.0, 0.0);
    return psi;
  }

  /// Wraps explicit amplitudes; the length must be a power of two within the
  /// qubit cap and the norm must already be 1 to within 1e-8.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes) {
    int n = 0;
    while ((std::size_t{1} << n) < amplitudes.size() && n <= kMaxQubits) ++n;
    if (n == 0 || (std::size_t{1} << n) != amplitudes.size())
      throw std::invalid_argument("from_amplitudes: length must be 2^n with n in [1, " +
                                  std::to_string(kMaxQubits) + "]");
    StateVector psi(n);
    psi.amps_ = std::move(amplitudes);
    double norm2 = 0.0;
    for (const Complex& a : psi.amps_) norm2 += std::norm(a);
    if (std::abs(norm2 - 1.0) > 1e-8)
      throw std::invalid_argument("from_amplitudes: state is not normalized");
    return psi;
  }

  int num_qubits() const { return num_qubits_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << num_qubits_; }

  const std::vector<Complex>& amplitudes() const { return amps_; }
  std::vector<Complex>& amplitudes() { return amps_; }

  const Complex& operator[](std::uint64_t z) const { return amps_[z]; }

  /// |<z|psi>|^2.
  double basis_probability(std::uint64_t z) const {
    if (z >= dimension()) throw std::invalid_argument("basis_probability: index out of range");
    return std::norm(amps_[z]);
  }

  double norm_squared() const {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return s;
  }

 private:
  explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
      throw capacity_error("StateVector: qubit count " + std::to_string(num_qubits) +
                           " outside [1, " + std::to_string(kMaxQubits) + "]");
    amps_.assign(dimension(), Complex(0.0, 0.0));
  }

  int num_qubits_;
  std::vector<Complex> amps_;
};

/// <a|b>.
inline Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits())
    throw std::invalid_argument("overlap: qubit counts differ");
  Complex s(0.0, 0.0);
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  for (std::size_t z = 0; z < va.size(); ++z) s += std::conj(va[z]) * vb[z];
  return s;
}

/// Applies exp(+i theta sigma_x) to every qubit, in place.  Each qubit pass
/// mixes amplitude pairs (z, z | 2^i):
///   a0' = cos(theta) a0 + i sin(theta) a1
///   a1' = i sin(theta) a0 + cos(theta) a1
inline void apply_uniform_x_rotation(StateVector& psi, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("apply_uniform_x_rotation: non-finite angle");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::uint64_t dim = psi.dimension();
  // std::complex<double> is array-compatible with pairs of doubles.
  double* a = reinterpret_cast<double*>(psi.amplitudes().data());
  for (int q = 0; q < psi.num_qubits(); ++q) {
    const std::uint64_t mask = std::uint64_t{1} << q;
    for (std::uint64_t hi = 0; hi < dim; hi += mask << 1) {
      const std::uint64_t base = 2 * hi;
      for (std::uint64_t lo = 0; lo < mask; ++lo) {
        const std::uint64_t i0 = base + 2 * lo;
        const std::uint64_t i1 = i0 + 2 * mask;
        const double re0 = a[i0], im0 = a[i0 + 1];
        const double re1 = a[i1], im1 = a[i1 + 1];
        a[i0] = c * re0 - s * im1;
        a[i0 + 1] = c * im0 + s * re1;
        a[i1] = c * re1 - s * im0;
        a[i1 + 1] = c * im1 + s * re0;
      }
    }
  }
}

/// Multiplies each amplitude by exp(-i gamma E[z]) for a diagonal energy
/// table E of length 2^n.
inline void apply_diagonal_phase(StateVector& psi, const std::vector<double>& energies,
                                 double gamma) {
  if (energies.size() != psi.dimension())
    throw std::invalid_argument("apply_diagonal_phase: energy table length mismatch");
  if (!std::isfinite(gamma)) throw std::invalid_argument("apply_diagonal_phase: non-finite angle");
  auto& a = psi.amplitudes();
  for (std::uint64_t z = 0; z < psi.dimension(); ++z) {
    const double phi = -gamma * energies[z];
    a[z] *= Complex(std::cos(phi), std::sin(phi));
  }
}

/// <psi| diag(E) |psi> = sum_z |a[z]|^2 E[z].
inline double diagonal_expectation(const StateVector& psi, const std::vector<double>& energies) {
  if (energies.size() != psi.dimension())
    throw std::invalid_argument("diagonal_expectation: energy table length mismatch");
  double s = 0.0;
  const auto& a = psi.amplitudes();
  for (std::uint64_t z = 0; z < psi.dimension(); ++z) s += std::norm(a[z]) * energies[z];
  return s;
}

/// <psi| H_I |psi> with H_I = -sum_i sigma_x^i, evaluated pairwise:
/// <sigma_x^i> = sum over pairs of 2 Re(conj(a0) a1).
inline double transverse_field_expectation(const StateVector& psi) {
  const std::uint64_t dim = psi.dimension();
  const double* a = reinterpret_cast<const double*>(psi.amplitudes().data());
  double total = 0.0;
  for (int q = 0; q < psi.num_qubits(); ++q) {
    const std::uint64_t mask = std::uint64_t{1} << q;
    double x = 0.0;
    for (std::uint64_t hi = 0; hi < dim; hi += mask << 1) {
      const std::uint64_t base = 2 * hi;
      for (std::uint64_t lo = 0; lo < mask; ++lo) {
        const std::uint64_t i0 = base + 2 * lo;
        const std::uint64_t i1 = i0 + 2 * mask;
        x += a[i0] * a[i1] + a[i0 + 1] * a[i1 + 1];
      }
    }
    total += 2.0 * x;
  }
  return -total;
}

}  // namespace avqo
