#ifndef MEMFLOW_CNF_HPP
#define MEMFLOW_CNF_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace memflow {

// A signed literal: variable indexes are 1-based, sign +1 = positive, -1 = negated.
struct Literal {
  int variable;  // >= 1
  int sign;      // +1 or -1

  bool operator==(const Literal&) const = default;
};

struct Clause {
  std::vector<Literal> literals;  // ordered; no repeated variable

  bool operator==(const Clause&) const = default;
};

struct CnfFormula {
  int num_variables = 0;
  std::vector<Clause> clauses;

  bool operator==(const CnfFormula&) const = default;
};

using Assignment = std::vector<bool>;

enum class ParseErrorKind {
  MalformedHeader,
  MissingHeader,
  BadToken,
  LiteralExceedsRange,
  DuplicateVariable,
  EmptyClause,
  UnterminatedClause,
  ClauseCountMismatch,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        kind_(kind),
        line_(line) {}

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  ParseErrorKind kind_;
  int line_;
};

// DIMACS CNF reader. 'c' comment lines, one 'p cnf <n> <M>' header, clauses as
// 0-terminated integer lists (may span lines). Duplicate variables within a
// clause are rejected so the gate/clause correspondence stays one-to-one.
CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs(const std::string& text);

// Emits DIMACS with LF line endings; parse_dimacs(emit_dimacs(f)) == f.
std::string emit_dimacs(const CnfFormula& formula);

// Number of clauses with no true literal under the assignment.
int count_defects(const CnfFormula& formula, const Assignment& assignment);

bool satisfies(const CnfFormula& formula, const Assignment& assignment);

// Exhaustive 2^n scan, n <= 24. Returns the lexicographically first satisfying
// assignment (false < true, values[0] most significant) or nullopt for UNSAT.
std::optional<Assignment> brute_force_solve(const CnfFormula& formula);

struct PlantedInstance {
  CnfFormula formula;
  Assignment plant;
};

// Random k-SAT with a hidden satisfying assignment. M = round(ratio*n) clauses
// of k distinct variables each; signs are resampled until the plant satisfies
// the clause. Pure function of (n, ratio, k, seed): identical arguments give
// bit-identical formulas on every platform.
PlantedInstance generate_planted_ksat(int n, double ratio, int k, uint64_t seed);

// Uniform random k-SAT without planting (may be UNSAT); used by the oracle
// cross-check suites.
CnfFormula generate_uniform_ksat(int n, int num_clauses, int k, uint64_t seed);

// FNV-1a over '0'/'1' characters; stable fingerprint for result records.
uint64_t assignment_hash(const Assignment& assignment);

}  // namespace memflow

#endif
