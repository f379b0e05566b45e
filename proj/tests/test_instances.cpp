// Unique-solution instance generation: the word-parallel satisfiability scan
// against a naive per-assignment oracle, rejection sampling determinism, gap
// gating, ensemble ranking, and the on-disk round trip with tamper checks.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "avqo/dimacs.hpp"
#include "avqo/instances.hpp"
#include "test_util.hpp"

using namespace avqo;
using test_util::fixed_unique_instance;

namespace {

bool same_instance(const TwoSatInstance& a, const TwoSatInstance& b) {
  if (a.num_vars != b.num_vars || a.clauses.size() != b.clauses.size()) return false;
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    const TwoSatClause& x = a.clauses[i];
    const TwoSatClause& y = b.clauses[i];
    if (x.var_a != y.var_a || x.var_b != y.var_b || x.sign_a != y.sign_a ||
        x.sign_b != y.sign_b)
      return false;
  }
  return true;
}

TwoSatInstance contradiction_instance() {
  TwoSatInstance inst;
  inst.num_vars = 2;
  inst.clauses = {{0, 1, 1, 1}, {0, 1, 1, -1}, {0, 1, -1, 1}, {0, 1, -1, -1}};
  return inst;
}

// Ten clauses over four variables whose unique solution is all-true (z = 0):
// the fixed instance plus padding satisfied there.
TwoSatInstance all_true_instance() {
  TwoSatInstance inst = fixed_unique_instance();
  inst.clauses.push_back({0, 2, 1, 1});
  inst.clauses.push_back({0, 2, 1, -1});
  inst.clauses.push_back({1, 3, 1, 1});
  return inst;
}

// The literal-negated mirror: unique solution all-false (z = 15).
TwoSatInstance all_false_instance() {
  TwoSatInstance inst = all_true_instance();
  for (TwoSatClause& c : inst.clauses) {
    c.sign_a = -c.sign_a;
    c.sign_b = -c.sign_b;
  }
  return inst;
}

std::string replace_first(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("the word-parallel scan agrees with the naive loop") {
  SplitMix rng(77);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(3 * n)));
      const TwoSatInstance inst = test_util::random_instance(rng, n, m);
      const SatScan scan = scan_satisfying(inst);
      REQUIRE(scan.count == test_util::naive_count(inst));
      if (scan.count > 0) REQUIRE(scan.first == test_util::naive_first(inst));
    }
  }
}

TEST_CASE("scan results on known instances") {
  TwoSatInstance clause;
  clause.num_vars = 2;
  clause.clauses = {{0, 1, 1, 1}};
  const SatScan one = scan_satisfying(clause);
  CHECK(one.count == 3);
  CHECK(one.first == 0);

  CHECK(scan_satisfying(contradiction_instance()).count == 0);
  CHECK(count_satisfying(fixed_unique_instance()) == 1);
  CHECK(scan_satisfying(fixed_unique_instance()).first == 0);

  CHECK(scan_satisfying(all_true_instance()).count == 1);
  CHECK(scan_satisfying(all_false_instance()).count == 1);
  CHECK(scan_satisfying(all_false_instance()).first == 15);

  CHECK(unique_solution(fixed_unique_instance()) == 0);
  CHECK(unique_solution(all_false_instance()) == 15);
  CHECK_THROWS_AS(unique_solution(clause), std::runtime_error);
  CHECK_THROWS_AS(unique_solution(contradiction_instance()), std::runtime_error);
}

TEST_CASE("the scan checks its input") {
  TwoSatInstance wide;
  wide.num_vars = kMaxScanQubits + 1;
  wide.clauses = {{0, 1, 1, 1}};
  CHECK_THROWS_AS(scan_satisfying(wide), capacity_error);

  TwoSatInstance bad;
  bad.num_vars = 3;
  bad.clauses = {{1, 1, 1, 1}};
  CHECK_THROWS_AS(scan_satisfying(bad), std::invalid_argument);
}

TEST_CASE("try_unique_instance draws distinct canonical clauses deterministically") {
  SplitMix rng(123);
  TwoSatInstance inst;
  std::uint64_t solution = 0;
  int attempts = 0;
  while (!try_unique_instance(rng, 5, 10, inst, solution)) {
    ++attempts;
    REQUIRE(attempts < 100000);
  }

  REQUIRE(inst.num_vars == 5);
  REQUIRE(inst.clauses.size() == 10);
  for (std::size_t i = 0; i < inst.clauses.size(); ++i) {
    CHECK(inst.clauses[i].var_a < inst.clauses[i].var_b);
    for (std::size_t j = i + 1; j < inst.clauses.size(); ++j) {
      const TwoSatClause& a = inst.clauses[i];
      const TwoSatClause& b = inst.clauses[j];
      CHECK_FALSE((a.var_a == b.var_a && a.var_b == b.var_b && a.sign_a == b.sign_a &&
                   a.sign_b == b.sign_b));
    }
  }
  CHECK(unique_solution(inst) == solution);

  SplitMix rng2(123);
  TwoSatInstance replay;
  std::uint64_t replay_solution = 0;
  while (!try_unique_instance(rng2, 5, 10, replay, replay_solution)) {
  }
  CHECK(same_instance(inst, replay));
  CHECK(solution == replay_solution);
}

TEST_CASE("generation argument bounds") {
  CHECK_THROWS_AS(check_generation_args(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(check_generation_args(kMaxScanQubits + 1, 30), capacity_error);
  CHECK_THROWS_AS(check_generation_args(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(check_generation_args(4, 25), std::invalid_argument);
  CHECK_NOTHROW(check_generation_args(4, 4));
  CHECK_NOTHROW(check_generation_args(4, 24));
  CHECK_NOTHROW(check_generation_args(2, 4));
  CHECK_THROWS_AS(check_generation_args(2, 5), std::invalid_argument);
}

TEST_CASE("generate_hard_instance is deterministic in the seed") {
  const GeneratedInstance a = generate_hard_instance(6, 18, 321);
  const GeneratedInstance b = generate_hard_instance(6, 18, 321);
  CHECK(same_instance(a.instance, b.instance));
  CHECK(a.solution == b.solution);
  CHECK(a.attempts == b.attempts);
  CHECK(a.attempts >= 1);

  SplitMix rng(321);
  const GeneratedInstance c = generate_hard_instance(6, 18, rng);
  CHECK(same_instance(a.instance, c.instance));

  CHECK(a.instance.num_vars == 6);
  CHECK(a.instance.clauses.size() == 18);
  CHECK(count_satisfying(a.instance) == 1);
  CHECK(unique_solution(a.instance) == a.solution);
}

TEST_CASE("ungated generation works beyond the spectra cap") {
  const GeneratedInstance g = generate_hard_instance(16, 48, 7);
  CHECK(g.instance.num_vars == 16);
  CHECK(count_satisfying(g.instance) == 1);
  CHECK(unique_solution(g.instance) == g.solution);
}

TEST_CASE("the gap threshold gates accepted instances") {
  HardInstanceOptions opts;
  opts.gap_threshold = 0.8;
  const GeneratedInstance g = generate_hard_instance(6, 18, 321, opts);
  const double gap = minimum_gap(two_sat_to_ising(g.instance), default_gap_grid()).gap;
  CHECK(gap <= 0.8);
  CHECK(count_satisfying(g.instance) == 1);

  // A custom grid is used for the gate.
  HardInstanceOptions custom;
  custom.gap_threshold = 1.5;
  custom.gap_grid = {0.5};
  const GeneratedInstance gc = generate_hard_instance(6, 18, 5, custom);
  CHECK(minimum_gap(two_sat_to_ising(gc.instance), custom.gap_grid).gap <= 1.5);

  // An unreachable threshold exhausts the attempt budget.
  HardInstanceOptions tiny;
  tiny.gap_threshold = 1e-6;
  tiny.max_attempts = 30;
  CHECK_THROWS_WITH(generate_hard_instance(6, 18, 1, tiny),
                    Catch::Matchers::ContainsSubstring("no acceptable instance"));

  // Finite thresholds need the spectra machinery, capped at 14 variables.
  HardInstanceOptions gated;
  gated.gap_threshold = 0.5;
  CHECK_THROWS_AS(generate_hard_instance(15, 45, 1, gated), capacity_error);
}

TEST_CASE("the default gap grid is 41 uniform points") {
  const std::vector<double> grid = default_gap_grid();
  REQUIRE(grid.size() == 41);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  for (int i = 0; i <= 40; ++i) CHECK(grid[i] == static_cast<double>(i) / 40.0);
}

TEST_CASE("ensembles rank the pool by minimum gap") {
  const InstanceEnsemble ens = generate_ensemble(5, 12, 3, 2024, 4);
  CHECK(ens.num_vars == 5);
  CHECK(ens.num_clauses == 12);
  CHECK(ens.seed == 2024);
  CHECK(ens.pool_factor == 4);
  CHECK(ens.gap_grid == default_gap_grid());
  REQUIRE(ens.entries.size() == 3);
  CHECK(std::is_sorted(ens.entries.begin(), ens.entries.end(),
                       [](const EnsembleEntry& a, const EnsembleEntry& b) {
                         return a.min_gap < b.min_gap;
                       }));

  for (const EnsembleEntry& e : ens.entries) {
    CHECK(e.stream_seed == derive_seed(2024, {static_cast<std::uint64_t>(e.pool_index)}));
    CHECK(e.attempts >= 1);
    CHECK(unique_solution(e.instance) == e.solution);
    const GapScan gap = minimum_gap(two_sat_to_ising(e.instance), ens.gap_grid);
    CHECK(e.min_gap == gap.gap);
    CHECK(e.gap_location == gap.location);

    // The recorded substream regenerates the entry from scratch.
    SplitMix rng(e.stream_seed);
    const GeneratedInstance g = generate_hard_instance(5, 12, rng);
    CHECK(same_instance(g.instance, e.instance));
    CHECK(g.solution == e.solution);
    CHECK(g.attempts == e.attempts);
  }

  // Same pool with pool_factor 1 and full count: the kept slice is a prefix.
  const InstanceEnsemble full = generate_ensemble(5, 12, 12, 2024, 1);
  REQUIRE(full.entries.size() == 12);
  for (int i = 0; i < 3; ++i) {
    CHECK(full.entries[i].stream_seed == ens.entries[i].stream_seed);
    CHECK(full.entries[i].min_gap == ens.entries[i].min_gap);
    CHECK(same_instance(full.entries[i].instance, ens.entries[i].instance));
  }

  const InstanceEnsemble again = generate_ensemble(5, 12, 3, 2024, 4);
  REQUIRE(again.entries.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(same_instance(again.entries[i].instance, ens.entries[i].instance));
    CHECK(again.entries[i].min_gap == ens.entries[i].min_gap);
  }
}

TEST_CASE("ensemble generation validates its arguments") {
  CHECK_THROWS_AS(generate_ensemble(5, 12, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_ensemble(5, 12, 3, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_ensemble(15, 45, 2, 1), capacity_error);
  CHECK_THROWS_AS(generate_ensemble(5, 4, 2, 1), std::invalid_argument);
}

TEST_CASE("ensembles round trip through a directory") {
  const test_util::TempDir dir("ensemble");
  const InstanceEnsemble ens = generate_ensemble(4, 10, 2, 555, 3);
  save_ensemble(ens, dir.path());

  CHECK(std::filesystem::exists(dir.path() / "ensemble.json"));
  CHECK(std::filesystem::exists(dir.path() / "instance_000.cnf"));
  CHECK(std::filesystem::exists(dir.path() / "instance_001.cnf"));
  const std::string cnf = test_util::read_file(dir.path() / "instance_000.cnf");
  CHECK(cnf.find("c unique solution " + std::to_string(ens.entries[0].solution)) !=
        std::string::npos);

  const InstanceEnsemble back = load_ensemble(dir.path());
  CHECK(back.num_vars == ens.num_vars);
  CHECK(back.num_clauses == ens.num_clauses);
  CHECK(back.seed == ens.seed);
  CHECK(back.pool_factor == ens.pool_factor);
  CHECK(back.gap_grid == ens.gap_grid);
  REQUIRE(back.entries.size() == ens.entries.size());
  for (std::size_t i = 0; i < ens.entries.size(); ++i) {
    CHECK(same_instance(back.entries[i].instance, ens.entries[i].instance));
    CHECK(back.entries[i].solution == ens.entries[i].solution);
    CHECK(back.entries[i].stream_seed == ens.entries[i].stream_seed);
    CHECK(back.entries[i].pool_index == ens.entries[i].pool_index);
    CHECK(back.entries[i].attempts == ens.entries[i].attempts);
    CHECK(back.entries[i].min_gap == ens.entries[i].min_gap);
    CHECK(back.entries[i].gap_location == ens.entries[i].gap_location);
  }
}

TEST_CASE("loading rejects tampered ensembles") {
  const test_util::TempDir dir("tamper");
  const InstanceEnsemble ens = generate_ensemble(4, 10, 2, 555, 3);
  save_ensemble(ens, dir.path());
  const std::filesystem::path meta = dir.path() / "ensemble.json";
  const std::string original_meta = test_util::read_file(meta);
  const std::string original_cnf = test_util::read_file(dir.path() / "instance_000.cnf");

  SECTION("instance no longer has a unique solution") {
    std::ostringstream loose;
    loose << "p cnf 4 10\n";
    for (int i = 0; i < 10; ++i) loose << "1 2 0\n";
    test_util::write_file(dir.path() / "instance_000.cnf", loose.str());
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("unique solution"));
  }

  SECTION("instance solves to a different assignment") {
    // A valid unique-solution instance whose solution differs from the
    // recorded one, whichever that is.
    const TwoSatInstance other =
        ens.entries[0].solution == 0 ? all_false_instance() : all_true_instance();
    write_dimacs_file(other, (dir.path() / "instance_000.cnf").string(), "tampered");
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("solution index disagrees"));
  }

  SECTION("clause count disagrees with the metadata") {
    std::ostringstream fewer;
    fewer << "p cnf 4 9\n";
    for (int i = 0; i < 9; ++i) fewer << (i % 2 ? "1 2 0\n" : "-1 3 0\n");
    test_util::write_file(dir.path() / "instance_000.cnf", fewer.str());
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("clause count disagrees"));
  }

  SECTION("variable count disagrees with the metadata") {
    TwoSatInstance wider = ens.entries[0].instance;
    wider.num_vars = 5;
    write_dimacs_file(wider, (dir.path() / "instance_000.cnf").string(), "tampered");
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("variable count disagrees"));
  }

  SECTION("missing metadata field") {
    test_util::write_file(meta, replace_first(original_meta, "\"seed\"", "\"sead\""));
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("missing field 'seed'"));
  }

  SECTION("wrong format tag") {
    test_util::write_file(meta, replace_first(original_meta, "avqo-ensemble", "other-format"));
    CHECK_THROWS_AS(load_ensemble(dir.path()), parse_error);
  }

  SECTION("unsupported version") {
    test_util::write_file(meta, replace_first(original_meta, "\"version\": 1", "\"version\": 2"));
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("unsupported ensemble version"));
  }

  SECTION("invalid JSON") {
    test_util::write_file(meta, "{");
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("invalid JSON"));
  }

  SECTION("corrupt instance entry") {
    test_util::write_file(meta, replace_first(original_meta, "\"solution\"", "\"solved\""));
    CHECK_THROWS_WITH(load_ensemble(dir.path()),
                      Catch::Matchers::ContainsSubstring("bad instance entry"));
  }

  SECTION("missing instance file") {
    std::filesystem::remove(dir.path() / "instance_001.cnf");
    CHECK_THROWS_AS(load_ensemble(dir.path()), std::runtime_error);
  }

  SECTION("missing directory") {
    CHECK_THROWS_WITH(load_ensemble(dir.path() / "nope"),
                      Catch::Matchers::ContainsSubstring("cannot open"));
  }

  SECTION("untouched directory still loads") {
    test_util::write_file(meta, original_meta);
    test_util::write_file(dir.path() / "instance_000.cnf", original_cnf);
    CHECK_NOTHROW(load_ensemble(dir.path()));
  }
}
