#pragma once

// DIMACS CNF input and output restricted to 2-SAT.  Literal +k in a file is
// variable k-1 positive, -k is its negation.  Parse failures throw
// parse_error with the offending file name and line number.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "avqo/errors.hpp"
#include "avqo/hamiltonian.hpp"

namespace avqo {

inline void write_dimacs(const TwoSatInstance& inst, std::ostream& out,
                         const std::string& comment = "") {
  validate_instance(inst);
  if (!comment.empty()) out << "c " << comment << "\n";
  out << "p cnf " << inst.num_vars << " " << inst.clauses.size() << "\n";
  for (const TwoSatClause& c : inst.clauses)
    out << c.sign_a * (c.var_a + 1) << " " << c.sign_b * (c.var_b + 1) << " 0\n";
}

inline void write_dimacs_file(const TwoSatInstance& inst, const std::string& path,
                              const std::string& comment = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dimacs_file: cannot open " + path);
  write_dimacs(inst, out, comment);
  if (!out) throw std::runtime_error("write_dimacs_file: write failed for " + path);
}

inline TwoSatInstance read_dimacs(std::istream& in, const std::string& name = "<stream>") {
  TwoSatInstance inst;
  long declared_clauses = -1;
  long line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok == "c") continue;
    if (tok == "p") {
      if (declared_clauses >= 0) throw parse_error(name, line_no, "duplicate problem line");
      std::string kind;
      long nv = 0, nc = 0;
      if (!(ls >> kind >> nv >> nc) || kind != "cnf")
        throw parse_error(name, line_no, "malformed problem line, expected 'p cnf <vars> <clauses>'");
      if (nv < 2) throw parse_error(name, line_no, "need at least 2 variables");
      if (nc < 0) throw parse_error(name, line_no, "negative clause count");
      inst.num_vars = static_cast<int>(nv);
      declared_clauses = nc;
      continue;
    }
    if (declared_clauses < 0) throw parse_error(name, line_no, "clause before problem line");
    std::vector<long> lits;
    long lit = 0;
    std::istringstream cs(line);
    bool terminated = false;
    while (cs >> lit) {
      if (lit == 0) { terminated = true; break; }
      lits.push_back(lit);
    }
    if (!terminated) throw parse_error(name, line_no, "clause line missing terminating 0");
    if (cs >> tok) throw parse_error(name, line_no, "trailing tokens after clause terminator");
    if (lits.size() != 2)
      throw parse_error(name, line_no, "expected exactly 2 literals per clause, got " +
                                           std::to_string(lits.size()));
    TwoSatClause c;
    c.var_a = static_cast<int>(std::abs(lits[0])) - 1;
    c.var_b = static_cast<int>(std::abs(lits[1])) - 1;
    c.sign_a = lits[0] > 0 ? 1 : -1;
    c.sign_b = lits[1] > 0 ? 1 : -1;
    if (c.var_a >= inst.num_vars || c.var_b >= inst.num_vars)
      throw parse_error(name, line_no, "literal exceeds declared variable count");
    if (c.var_a == c.var_b)
      throw parse_error(name, line_no, "clause must use two distinct variables");
    inst.clauses.push_back(c);
  }
  if (declared_clauses < 0) throw parse_error(name, line_no, "missing problem line");
  if (static_cast<long>(inst.clauses.size()) != declared_clauses)
    throw parse_error(name, line_no,
                      "clause count mismatch: header declares " + std::to_string(declared_clauses) +
                          ", file has " + std::to_string(inst.clauses.size()));
  validate_instance(inst);
  return inst;
}

inline TwoSatInstance read_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dimacs_file: cannot open " + path);
  return read_dimacs(in, path);
}

}  // namespace avqo
