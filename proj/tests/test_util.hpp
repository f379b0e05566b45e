#pragma once

// Shared helpers for the unit tests: independent oracles (naive SAT loops,
// dense Hamiltonians), small fixed instances, and temp-dir plumbing.

#include <Eigen/Dense>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "avqo/hamiltonian.hpp"
#include "avqo/rng.hpp"
#include "avqo/statevector.hpp"

namespace test_util {

/// Brute-force satisfiability count, one assignment at a time.
inline std::uint64_t naive_count(const avqo::TwoSatInstance& inst) {
  const std::uint64_t dim = std::uint64_t{1} << inst.num_vars;
  std::uint64_t count = 0;
  for (std::uint64_t z = 0; z < dim; ++z)
    if (avqo::violated_count(inst, z) == 0) ++count;
  return count;
}

/// Smallest satisfying assignment, dim when none exists.
inline std::uint64_t naive_first(const avqo::TwoSatInstance& inst) {
  const std::uint64_t dim = std::uint64_t{1} << inst.num_vars;
  for (std::uint64_t z = 0; z < dim; ++z)
    if (avqo::violated_count(inst, z) == 0) return z;
  return dim;
}

/// Dense H(s) = (1-s) H_I + s H_P in the computational basis.
inline Eigen::MatrixXd dense_hamiltonian(const avqo::IsingModel& model, double s) {
  const auto energies = avqo::diagonal_energies(model);
  const auto dim = static_cast<Eigen::Index>(energies.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < dim; ++z) h(z, z) = s * energies[static_cast<std::size_t>(z)];
  for (int q = 0; q < model.num_vars; ++q) {
    const auto mask = static_cast<Eigen::Index>(std::uint64_t{1} << q);
    for (Eigen::Index z = 0; z < dim; ++z) h(z, z ^ mask) += -(1.0 - s);
  }
  return h;
}

/// A fixed 4-variable instance whose unique solution is the all-true
/// assignment z = 0: each clause pair forces one variable true in turn.
inline avqo::TwoSatInstance fixed_unique_instance() {
  avqo::TwoSatInstance inst;
  inst.num_vars = 4;
  inst.clauses = {
      {0, 1, 1, 1},  {0, 1, 1, -1}, {1, 2, 1, 1},  {1, 2, 1, -1},
      {2, 3, 1, 1},  {2, 3, 1, -1}, {0, 3, -1, 1},
  };
  return inst;
}

/// Uniformly random 2-SAT instance with distinct-variable clauses (repeats
/// across clauses allowed); independent of the library's generator.
inline avqo::TwoSatInstance random_instance(avqo::SplitMix& rng, int num_vars, int num_clauses) {
  avqo::TwoSatInstance inst;
  inst.num_vars = num_vars;
  for (int c = 0; c < num_clauses; ++c) {
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_vars - 1)));
    if (b >= a) ++b;
    inst.clauses.push_back({std::min(a, b), std::max(a, b), rng.coin() ? 1 : -1,
                            rng.coin() ? 1 : -1});
  }
  return inst;
}

/// Random normalized state from the test's own RNG.
inline avqo::StateVector random_state(avqo::SplitMix& rng, int num_qubits) {
  const std::uint64_t dim = std::uint64_t{1} << num_qubits;
  std::vector<avqo::Complex> amps(dim);
  double norm2 = 0.0;
  for (auto& a : amps) {
    a = avqo::Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    norm2 += std::norm(a);
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= scale;
  return avqo::StateVector::from_amplitudes(std::move(amps));
}

/// Creates a unique directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("avqo_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace test_util
