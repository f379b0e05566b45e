#pragma once

// Hard unique-solution 2-SAT instances.
//
// Instances are drawn clause by clause (distinct variables, no repeated
// clause) and kept only when exactly one of the 2^n assignments satisfies
// all clauses.  Hardness is graded by the minimum spectral gap of the
// interpolated Hamiltonian: ensembles draw a pool, rank it by gap, and keep
// the smallest-gap slice.  Satisfiability is counted word-parallel, 64
// assignments per machine word.
//
// On disk an ensemble is a directory: ensemble.json holds the metadata
// (seed, gap data, solution indices) and each instance is a DIMACS CNF file.
// Loading re-verifies that every instance still has exactly the recorded
// solution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "avqo/dimacs.hpp"
#include "avqo/errors.hpp"
#include "avqo/hamiltonian.hpp"
#include "avqo/rng.hpp"
#include "avqo/spectra.hpp"

namespace avqo {

/// Word-parallel satisfiability scan cap: 2^24 assignments.
inline constexpr int kMaxScanQubits = 24;

struct SatScan {
  std::uint64_t count = 0;  // satisfying assignments
  std::uint64_t first = 0;  // smallest satisfying index, meaningful when count > 0
};

namespace detail {

// Bit i of assignment z = (w << 6) | t, for t = 0..63: variables 0..5 follow
// fixed periodic patterns inside the word, higher variables are constant.
inline std::uint64_t variable_word(int var, std::uint64_t word_index) {
  static constexpr std::array<std::uint64_t, 6> kPeriodic = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
  };
  if (var < 6) return kPeriodic[static_cast<std::size_t>(var)];
  return (word_index >> (var - 6)) & 1 ? ~std::uint64_t{0} : 0;
}

}  // namespace detail

/// Streams all assignments 64 at a time.  A set bit means the variable is
/// false, so a positive literal is falsified exactly on the variable's word
/// pattern and a negated literal on its complement.
inline SatScan scan_satisfying(const TwoSatInstance& inst) {
  validate_instance(inst);
  if (inst.num_vars > kMaxScanQubits)
    throw capacity_error("scan_satisfying: " + std::to_string(inst.num_vars) +
                         " variables exceeds scan cap " + std::to_string(kMaxScanQubits));
  const std::uint64_t dim = std::uint64_t{1} << inst.num_vars;
  const std::uint64_t words = (dim + 63) >> 6;
  const std::uint64_t base = dim >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << dim) - 1;
  SatScan scan;
  bool found = false;
  for (std::uint64_t w = 0; w < words; ++w) {
    std::uint64_t sat = base;
    for (const auto& c : inst.clauses) {
      const std::uint64_t va = detail::variable_word(c.var_a, w);
      const std::uint64_t vb = detail::variable_word(c.var_b, w);
      const std::uint64_t fa = c.sign_a > 0 ? va : ~va;
      const std::uint64_t fb = c.sign_b > 0 ? vb : ~vb;
      sat &= ~(fa & fb);
      if (!sat) break;
    }
    if (sat && !found) {
      scan.first = (w << 6) + static_cast<std::uint64_t>(std::countr_zero(sat));
      found = true;
    }
    scan.count += static_cast<std::uint64_t>(std::popcount(sat));
  }
  return scan;
}

inline std::uint64_t count_satisfying(const TwoSatInstance& inst) {
  return scan_satisfying(inst).count;
}

/// The unique satisfying assignment; throws when the count is not one.
inline std::uint64_t unique_solution(const TwoSatInstance& inst) {
  const SatScan scan = scan_satisfying(inst);
  if (scan.count != 1)
    throw std::runtime_error("unique_solution: instance has " + std::to_string(scan.count) +
                             " satisfying assignments, expected exactly 1");
  return scan.first;
}

struct GeneratedInstance {
  TwoSatInstance instance;
  std::uint64_t solution = 0;
  std::uint64_t attempts = 0;  // clause-set builds consumed, this one included
};

namespace detail {

// One clause: both variables uniform over distinct pairs, signs fair coins,
// then canonicalized to var_a < var_b.  Draw order is part of the format:
// var_a, var_b, sign_a, sign_b.
inline TwoSatClause random_clause(SplitMix& rng, int num_vars) {
  const auto n = static_cast<std::uint64_t>(num_vars);
  int a = static_cast<int>(rng.below(n));
  int b = static_cast<int>(rng.below(n - 1));
  if (b >= a) ++b;
  int sa = rng.coin() ? 1 : -1;
  int sb = rng.coin() ? 1 : -1;
  if (a > b) {
    std::swap(a, b);
    std::swap(sa, sb);
  }
  return {a, b, sa, sb};
}

inline std::uint32_t clause_key(const TwoSatClause& c, int num_vars) {
  return ((static_cast<std::uint32_t>(c.var_a) * static_cast<std::uint32_t>(num_vars) +
           static_cast<std::uint32_t>(c.var_b)) << 2) |
         (c.sign_a > 0 ? 2u : 0u) | (c.sign_b > 0 ? 1u : 0u);
}

}  // namespace detail

/// One attempt: draw num_clauses distinct clauses, pruning the satisfying
/// set incrementally and bailing as soon as it empties.  Returns true when
/// exactly one assignment survives.
inline bool try_unique_instance(SplitMix& rng, int num_vars, int num_clauses,
                                TwoSatInstance& out, std::uint64_t& solution) {
  const std::uint64_t dim = std::uint64_t{1} << num_vars;
  const std::uint64_t words = (dim + 63) >> 6;
  const std::uint64_t base = dim >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << dim) - 1;
  std::vector<std::uint64_t> alive(words, base);

  out.num_vars = num_vars;
  out.clauses.clear();
  std::unordered_set<std::uint32_t> seen;
  const int draw_cap = 64 * num_clauses + 256;
  int draws = 0;
  while (static_cast<int>(out.clauses.size()) < num_clauses) {
    if (++draws > draw_cap) return false;
    const TwoSatClause c = detail::random_clause(rng, num_vars);
    if (!seen.insert(detail::clause_key(c, num_vars)).second) continue;
    out.clauses.push_back(c);
    std::uint64_t any = 0;
    for (std::uint64_t w = 0; w < words; ++w) {
      const std::uint64_t va = detail::variable_word(c.var_a, w);
      const std::uint64_t vb = detail::variable_word(c.var_b, w);
      const std::uint64_t fa = c.sign_a > 0 ? va : ~va;
      const std::uint64_t fb = c.sign_b > 0 ? vb : ~vb;
      alive[w] &= ~(fa & fb);
      any |= alive[w];
    }
    if (!any) return false;
  }
  std::uint64_t count = 0;
  std::uint64_t first = 0;
  bool found = false;
  for (std::uint64_t w = 0; w < words; ++w) {
    if (alive[w] && !found) {
      first = (w << 6) + static_cast<std::uint64_t>(std::countr_zero(alive[w]));
      found = true;
    }
    count += static_cast<std::uint64_t>(std::popcount(alive[w]));
  }
  if (count != 1) return false;
  solution = first;
  return true;
}

inline void check_generation_args(int num_vars, int num_clauses) {
  if (num_vars < 2) throw std::invalid_argument("instance generation needs at least 2 variables");
  if (num_vars > kMaxScanQubits)
    throw capacity_error("instance generation capped at " + std::to_string(kMaxScanQubits) +
                         " variables");
  const long long max_clauses =
      2LL * num_vars * (num_vars - 1);  // distinct pairs times four sign patterns
  if (num_clauses < num_vars || num_clauses > max_clauses)
    throw std::invalid_argument("num_clauses must be in [" + std::to_string(num_vars) + ", " +
                                std::to_string(max_clauses) + "] for " +
                                std::to_string(num_vars) + " variables");
}

/// The default gap grid for hardness ranking: 41 uniform points on [0, 1].
inline std::vector<double> default_gap_grid() {
  std::vector<double> grid(41);
  for (int i = 0; i <= 40; ++i) grid[i] = static_cast<double>(i) / 40.0;
  return grid;
}

struct HardInstanceOptions {
  std::uint64_t max_attempts = 200000;
  /// Accept only instances whose minimum gap is at most this value; infinity
  /// accepts the first unique-solution draw.  Finite thresholds need the
  /// spectra cap (14 variables).
  double gap_threshold = std::numeric_limits<double>::infinity();
  std::vector<double> gap_grid;  // empty means default_gap_grid()
};

/// Rejection-samples unique-solution instances from the given stream until
/// one passes the gap threshold.
inline GeneratedInstance generate_hard_instance(int num_vars, int num_clauses, SplitMix& rng,
                                                const HardInstanceOptions& opts = {}) {
  check_generation_args(num_vars, num_clauses);
  const bool gated = std::isfinite(opts.gap_threshold);
  if (gated && num_vars > kMaxSpectraQubits)
    throw capacity_error("gap-thresholded generation capped at " +
                         std::to_string(kMaxSpectraQubits) + " variables");
  const std::vector<double> grid = opts.gap_grid.empty() ? default_gap_grid() : opts.gap_grid;
  GeneratedInstance g;
  for (std::uint64_t attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    if (!try_unique_instance(rng, num_vars, num_clauses, g.instance, g.solution)) continue;
    if (gated) {
      const IsingModel model = two_sat_to_ising(g.instance);
      if (minimum_gap(model, grid).gap > opts.gap_threshold) continue;
    }
    g.attempts = attempt;
    return g;
  }
  throw std::runtime_error("generate_hard_instance: no acceptable instance in " +
                           std::to_string(opts.max_attempts) + " attempts (" +
                           std::to_string(num_vars) + " variables, " +
                           std::to_string(num_clauses) + " clauses)");
}

inline GeneratedInstance generate_hard_instance(int num_vars, int num_clauses,
                                                std::uint64_t seed,
                                                const HardInstanceOptions& opts = {}) {
  SplitMix rng(seed);
  return generate_hard_instance(num_vars, num_clauses, rng, opts);
}

struct EnsembleEntry {
  TwoSatInstance instance;
  std::uint64_t solution = 0;
  std::uint64_t stream_seed = 0;  // the substream that produced this instance
  int pool_index = 0;             // slot in the generation pool
  std::uint64_t attempts = 0;
  double min_gap = 0.0;
  double gap_location = 0.0;
};

struct InstanceEnsemble {
  int num_vars = 0;
  int num_clauses = 0;
  std::uint64_t seed = 0;
  int pool_factor = 0;
  std::vector<double> gap_grid;
  std::vector<EnsembleEntry> entries;  // sorted by min_gap ascending
};

/// Draws pool_factor * count unique-solution instances (pool slot i uses the
/// substream derive_seed(seed, {i})), ranks the pool by minimum gap, and
/// keeps the count hardest.  Ties and the final order break by gap then pool
/// index, so the result is independent of evaluation order.
inline InstanceEnsemble generate_ensemble(int num_vars, int num_clauses, int count,
                                          std::uint64_t seed, int pool_factor = 10,
                                          std::vector<double> gap_grid = {}) {
  check_generation_args(num_vars, num_clauses);
  if (num_vars > kMaxSpectraQubits)
    throw capacity_error("ensemble generation capped at " + std::to_string(kMaxSpectraQubits) +
                         " variables");
  if (count < 1) throw std::invalid_argument("generate_ensemble: count must be positive");
  if (pool_factor < 1) throw std::invalid_argument("generate_ensemble: pool_factor must be >= 1");
  InstanceEnsemble ens;
  ens.num_vars = num_vars;
  ens.num_clauses = num_clauses;
  ens.seed = seed;
  ens.pool_factor = pool_factor;
  ens.gap_grid = gap_grid.empty() ? default_gap_grid() : std::move(gap_grid);

  const int pool_size = count * pool_factor;
  std::vector<EnsembleEntry> pool(pool_size);
  for (int i = 0; i < pool_size; ++i) {
    const std::uint64_t stream = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    SplitMix rng(stream);
    const GeneratedInstance g = generate_hard_instance(num_vars, num_clauses, rng);
    const GapScan gap = minimum_gap(two_sat_to_ising(g.instance), ens.gap_grid);
    pool[i] = {g.instance, g.solution, stream, i, g.attempts, gap.gap, gap.location};
  }
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return pool[a].min_gap < pool[b].min_gap; });
  ens.entries.reserve(count);
  for (int i = 0; i < count; ++i) ens.entries.push_back(std::move(pool[order[i]]));
  return ens;
}

namespace detail {

inline std::string instance_file_name(std::size_t index) {
  std::string digits = std::to_string(index);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return "instance_" + digits + ".cnf";
}

}  // namespace detail

/// Writes dir/ensemble.json plus one DIMACS file per instance.
inline void save_ensemble(const InstanceEnsemble& ens, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["format"] = "avqo-ensemble";
  j["version"] = 1;
  j["num_vars"] = ens.num_vars;
  j["num_clauses"] = ens.num_clauses;
  j["count"] = ens.entries.size();
  j["seed"] = ens.seed;
  j["pool_factor"] = ens.pool_factor;
  j["gap_grid"] = ens.gap_grid;
  j["instances"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ens.entries.size(); ++i) {
    const EnsembleEntry& e = ens.entries[i];
    const std::string file = detail::instance_file_name(i);
    write_dimacs_file(e.instance, dir / file,
                      "unique solution " + std::to_string(e.solution));
    nlohmann::ordered_json item;
    item["file"] = file;
    item["solution"] = e.solution;
    item["stream_seed"] = e.stream_seed;
    item["pool_index"] = e.pool_index;
    item["attempts"] = e.attempts;
    item["min_gap"] = e.min_gap;
    item["gap_location"] = e.gap_location;
    j["instances"].push_back(std::move(item));
  }
  const std::filesystem::path meta = dir / "ensemble.json";
  std::ofstream out(meta);
  if (!out) throw std::runtime_error("cannot write " + meta.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + meta.string());
}

/// Loads an ensemble directory and re-verifies every instance: the clause
/// set must still admit exactly the recorded solution.
inline InstanceEnsemble load_ensemble(const std::filesystem::path& dir) {
  const std::filesystem::path meta = dir / "ensemble.json";
  std::ifstream in(meta);
  if (!in) throw std::runtime_error("cannot open " + meta.string());
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(meta.string(), 0, std::string("invalid JSON: ") + e.what());
  }
  const auto require = [&](const char* key) -> const nlohmann::ordered_json& {
    if (!j.contains(key))
      throw parse_error(meta.string(), 0, std::string("missing field '") + key + "'");
    return j.at(key);
  };
  InstanceEnsemble ens;
  try {
    if (require("format").get<std::string>() != "avqo-ensemble")
      throw parse_error(meta.string(), 0, "not an avqo-ensemble file");
    if (require("version").get<int>() != 1)
      throw parse_error(meta.string(), 0, "unsupported ensemble version");
    ens.num_vars = require("num_vars").get<int>();
    ens.num_clauses = require("num_clauses").get<int>();
    ens.seed = require("seed").get<std::uint64_t>();
    ens.pool_factor = require("pool_factor").get<int>();
    ens.gap_grid = require("gap_grid").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error(meta.string(), 0, std::string("bad ensemble header: ") + ex.what());
  }
  for (const auto& item : require("instances")) {
    EnsembleEntry e;
    std::string file;
    try {
      file = item.at("file").get<std::string>();
      e.solution = item.at("solution").get<std::uint64_t>();
      e.stream_seed = item.at("stream_seed").get<std::uint64_t>();
      e.pool_index = item.at("pool_index").get<int>();
      e.attempts = item.at("attempts").get<std::uint64_t>();
      e.min_gap = item.at("min_gap").get<double>();
      e.gap_location = item.at("gap_location").get<double>();
    } catch (const nlohmann::json::exception& ex) {
      throw parse_error(meta.string(), 0, std::string("bad instance entry: ") + ex.what());
    }
    e.instance = read_dimacs_file(dir / file);
    if (e.instance.num_vars != ens.num_vars)
      throw std::runtime_error(file + ": variable count disagrees with ensemble.json");
    if (static_cast<int>(e.instance.clauses.size()) != ens.num_clauses)
      throw std::runtime_error(file + ": clause count disagrees with ensemble.json");
    const SatScan scan = scan_satisfying(e.instance);
    if (scan.count != 1)
      throw std::runtime_error(file + ": expected a unique solution, found " +
                               std::to_string(scan.count));
    if (scan.first != e.solution)
      throw std::runtime_error(file + ": solution index disagrees with ensemble.json");
    ens.entries.push_back(std::move(e));
  }
  return ens;
}

}  // namespace avqo
