// Lanczos spectra of the interpolated Hamiltonian against closed forms and a
// dense eigensolver oracle.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <vector>

#include "avqo/spectra.hpp"
#include "avqo/rng.hpp"
#include "test_util.hpp"

using namespace avqo;

namespace {

IsingModel single_spin() {
  IsingModel m;
  m.num_vars = 1;
  m.fields = {1.0};
  return m;
}

}  // namespace

TEST_CASE("single spin closed form") {
  // H(s) = -(1-s) sigma_x - s sigma_z has eigenvalues -+ sqrt((1-s)^2 + s^2).
  const IsingModel m = single_spin();
  for (double s : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const Spectrum spec = lowest_eigenstates(m, s, 2);
    const double r = std::sqrt((1.0 - s) * (1.0 - s) + s * s);
    CHECK(spec.eigenvalues[0] == Catch::Approx(-r).margin(1e-9));
    CHECK(spec.eigenvalues[1] == Catch::Approx(r).margin(1e-9));
  }
}

TEST_CASE("single spin gap scan") {
  const IsingModel m = single_spin();
  const GapScan scan = minimum_gap(m, {0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(scan.location == 0.5);
  CHECK(scan.gap == Catch::Approx(std::sqrt(2.0)).margin(1e-8));
}

TEST_CASE("gap scan tie keeps the smaller grid point") {
  const IsingModel m = single_spin();
  const GapScan scan = minimum_gap(m, {0.75, 0.5, 0.5, 0.75});
  CHECK(scan.location == 0.5);
  CHECK_THROWS_AS(minimum_gap(m, {}), std::invalid_argument);
}

TEST_CASE("lanczos matches a dense eigensolver") {
  SplitMix rng(17);
  for (int n : {6, 8}) {
    const TwoSatInstance inst = test_util::random_instance(rng, n, 3 * n);
    const IsingModel model = two_sat_to_ising(inst);
    for (double s : {0.3, 0.7}) {
      const Spectrum spec = lowest_eigenstates(model, s, 3);
      REQUIRE(spec.eigenvalues.size() == 3);
      REQUIRE(spec.eigenvectors.size() == 3);
      CHECK(spec.s == s);
      CHECK(spec.num_qubits == n);

      const Eigen::MatrixXd h = test_util::dense_hamiltonian(model, s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      REQUIRE(es.info() == Eigen::Success);

      for (int level = 0; level < 3; ++level) {
        INFO("n=" << n << " s=" << s << " level=" << level);
        CHECK(spec.eigenvalues[level] ==
              Catch::Approx(es.eigenvalues()[level]).margin(1e-8));

        // Residual ||H v - E v|| and normalization, independent of any
        // degeneracy structure.
        const auto& v = spec.eigenvectors[level];
        Eigen::VectorXd ev = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
        const double resid = (h * ev - spec.eigenvalues[level] * ev).norm();
        CHECK(resid <= 1e-8);
        CHECK(ev.norm() == Catch::Approx(1.0).margin(1e-9));
      }
      // Pairwise orthogonality.
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          double d = 0.0;
          for (std::size_t z = 0; z < spec.eigenvectors[a].size(); ++z)
            d += spec.eigenvectors[a][z] * spec.eigenvectors[b][z];
          CHECK(std::abs(d) <= 1e-8);
        }
      // For well-separated levels the vectors match the dense ones up to sign.
      for (int level = 0; level < 3; ++level) {
        const double below =
            level == 0 ? 1.0 : spec.eigenvalues[level] - spec.eigenvalues[level - 1];
        const double above = level == 2 ? es.eigenvalues()[3] - es.eigenvalues()[2]
                                        : spec.eigenvalues[level + 1] - spec.eigenvalues[level];
        if (below > 1e-6 && above > 1e-6) {
          const auto& v = spec.eigenvectors[level];
          Eigen::VectorXd ev = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
          CHECK(std::abs(ev.dot(es.eigenvectors().col(level))) ==
                Catch::Approx(1.0).margin(1e-7));
        }
      }
    }
  }
}

TEST_CASE("transverse endpoint has the uniform ground state") {
  SplitMix rng(18);
  const TwoSatInstance inst = test_util::random_instance(rng, 6, 18);
  const IsingModel model = two_sat_to_ising(inst);
  const Spectrum spec = lowest_eigenstates(model, 0.0, 3);
  CHECK(spec.eigenvalues[0] == Catch::Approx(-6.0).margin(1e-8));
  CHECK(spec.eigenvalues[1] == Catch::Approx(-4.0).margin(1e-8));
  CHECK(spec.eigenvalues[2] == Catch::Approx(-4.0).margin(1e-8));
  const StateVector plus = StateVector::uniform_superposition(6);
  CHECK(spec.overlap_squared(0, plus) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("classical endpoint lists basis states in stable energy order") {
  const TwoSatInstance inst = test_util::fixed_unique_instance();
  const IsingModel model = two_sat_to_ising(inst);
  const std::vector<double> energies = diagonal_energies(model);
  const int k = 16;
  const Spectrum spec = lowest_eigenstates(model, 1.0, k);

  std::vector<std::uint64_t> order(energies.size());
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return energies[a] < energies[b]; });

  for (int level = 0; level < k; ++level) {
    CHECK(spec.eigenvalues[level] == energies[order[level]]);  // exact
    const auto& v = spec.eigenvectors[level];
    for (std::uint64_t z = 0; z < v.size(); ++z)
      CHECK(v[z] == (z == order[level] ? 1.0 : 0.0));
  }
  CHECK(spec.eigenvalues[0] == 0.0);
  CHECK(spec.eigenvectors[0][0] == 1.0);  // the unique all-true solution
}

TEST_CASE("eigenstate round trip") {
  const IsingModel m = single_spin();
  const Spectrum spec = lowest_eigenstates(m, 0.5, 2);
  const StateVector ground = spec.eigenstate(0);
  CHECK(ground.num_qubits() == 1);
  CHECK(spec.overlap_squared(0, ground) == Catch::Approx(1.0).margin(1e-9));
  CHECK_THROWS_AS(spec.eigenstate(2), std::invalid_argument);
  CHECK_THROWS_AS(spec.overlap_squared(2, ground), std::invalid_argument);
  const StateVector wrong = StateVector::uniform_superposition(2);
  CHECK_THROWS_AS(spec.overlap_squared(0, wrong), std::invalid_argument);
}

TEST_CASE("full spectrum of a tiny model") {
  TwoSatInstance inst;
  inst.num_vars = 2;
  inst.clauses = {{0, 1, 1, 1}};
  const IsingModel model = two_sat_to_ising(inst);
  const Spectrum spec = lowest_eigenstates(model, 0.5, 4);
  const Eigen::MatrixXd h = test_util::dense_hamiltonian(model, 0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  for (int level = 0; level < 4; ++level)
    CHECK(spec.eigenvalues[level] == Catch::Approx(es.eigenvalues()[level]).margin(1e-8));
}

TEST_CASE("argument errors") {
  const IsingModel m = single_spin();
  CHECK_THROWS_AS(lowest_eigenstates(m, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(lowest_eigenstates(m, 1.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(lowest_eigenstates(m, std::nan(""), 1), std::invalid_argument);
  CHECK_THROWS_AS(lowest_eigenstates(m, 0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(lowest_eigenstates(m, 0.5, 3), std::invalid_argument);  // k > 2^1

  IsingModel big;
  big.num_vars = kMaxSpectraQubits + 1;
  big.fields.assign(big.num_vars, 0.0);
  CHECK_THROWS_AS(lowest_eigenstates(big, 0.5, 1), capacity_error);

  IsingModel bad;
  bad.num_vars = 2;
  bad.fields = {0.0};
  CHECK_THROWS_AS(lowest_eigenstates(bad, 0.5, 1), std::invalid_argument);
}
