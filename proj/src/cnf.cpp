#include "memflow/cnf.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "memflow/rng.hpp"

namespace memflow {

namespace {

struct Token {
  std::string text;
  int line;
};

// Splits the stream into whitespace-separated tokens, skipping 'c' comment
// lines, and remembers the line number of every token.
std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == 'c') continue;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back({tok, lineno});
  }
  return tokens;
}

long parse_int(const Token& tok) {
  size_t pos = 0;
  long value;
  try {
    value = std::stol(tok.text, &pos);
  } catch (const std::exception&) {
    throw ParseError(ParseErrorKind::BadToken, tok.line,
                     "expected integer, got '" + tok.text + "'");
  }
  if (pos != tok.text.size())
    throw ParseError(ParseErrorKind::BadToken, tok.line,
                     "expected integer, got '" + tok.text + "'");
  return value;
}

}  // namespace

CnfFormula parse_dimacs(std::istream& in) {
  std::vector<Token> tokens = tokenize(in);
  size_t pos = 0;

  if (pos >= tokens.size() || tokens[pos].text != "p")
    throw ParseError(ParseErrorKind::MissingHeader,
                     pos < tokens.size() ? tokens[pos].line : 1,
                     "missing 'p cnf' header");
  int header_line = tokens[pos].line;
  if (pos + 3 >= tokens.size() || tokens[pos + 1].text != "cnf")
    throw ParseError(ParseErrorKind::MalformedHeader, header_line,
                     "malformed header, expected 'p cnf <n> <M>'");
  long n = parse_int(tokens[pos + 2]);
  long m = parse_int(tokens[pos + 3]);
  if (n < 1 || m < 1)
    throw ParseError(ParseErrorKind::MalformedHeader, header_line,
                     "header must declare n >= 1 and M >= 1");
  pos += 4;

  CnfFormula formula;
  formula.num_variables = static_cast<int>(n);
  Clause current;
  int clause_start_line = -1;
  while (pos < tokens.size()) {
    const Token& tok = tokens[pos++];
    long lit = parse_int(tok);
    if (lit == 0) {
      if (current.literals.empty())
        throw ParseError(ParseErrorKind::EmptyClause, tok.line, "empty clause");
      formula.clauses.push_back(std::move(current));
      current = Clause{};
      clause_start_line = -1;
      continue;
    }
    long var = std::labs(lit);
    if (var > n)
      throw ParseError(ParseErrorKind::LiteralExceedsRange, tok.line,
                       "literal index exceeds n");
    for (const Literal& prev : current.literals)
      if (prev.variable == var)
        throw ParseError(ParseErrorKind::DuplicateVariable, tok.line,
                         "variable " + std::to_string(var) +
                             " repeated within a clause");
    if (clause_start_line < 0) clause_start_line = tok.line;
    current.literals.push_back({static_cast<int>(var), lit > 0 ? +1 : -1});
  }
  if (!current.literals.empty())
    throw ParseError(ParseErrorKind::UnterminatedClause, clause_start_line,
                     "clause not terminated by 0");
  if (static_cast<long>(formula.clauses.size()) != m)
    throw ParseError(ParseErrorKind::ClauseCountMismatch,
                     tokens.empty() ? 1 : tokens.back().line,
                     "declared " + std::to_string(m) + " clauses, found " +
                         std::to_string(formula.clauses.size()));
  return formula;
}

CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

std::string emit_dimacs(const CnfFormula& formula) {
  std::ostringstream out;
  out << "p cnf " << formula.num_variables << ' ' << formula.clauses.size()
      << '\n';
  for (const Clause& clause : formula.clauses) {
    for (const Literal& lit : clause.literals)
      out << lit.sign * lit.variable << ' ';
    out << "0\n";
  }
  return out.str();
}

int count_defects(const CnfFormula& formula, const Assignment& assignment) {
  if (static_cast<int>(assignment.size()) != formula.num_variables)
    throw std::invalid_argument("assignment length " +
                                std::to_string(assignment.size()) +
                                " does not match n = " +
                                std::to_string(formula.num_variables));
  int defects = 0;
  for (const Clause& clause : formula.clauses) {
    bool sat = false;
    for (const Literal& lit : clause.literals) {
      bool value = assignment[lit.variable - 1];
      if ((lit.sign > 0) == value) {
        sat = true;
        break;
      }
    }
    if (!sat) ++defects;
  }
  return defects;
}

bool satisfies(const CnfFormula& formula, const Assignment& assignment) {
  return count_defects(formula, assignment) == 0;
}

std::optional<Assignment> brute_force_solve(const CnfFormula& formula) {
  int n = formula.num_variables;
  if (n > 24)
    throw std::invalid_argument("brute_force_solve limited to n <= 24, got " +
                                std::to_string(n));
  // values[0] is the most significant position, so counting a upward walks
  // assignments in lexicographic false<true order.
  Assignment assignment(n, false);
  uint64_t total = uint64_t{1} << n;
  for (uint64_t a = 0; a < total; ++a) {
    for (int i = 0; i < n; ++i)
      assignment[i] = ((a >> (n - 1 - i)) & 1u) != 0;
    if (satisfies(formula, assignment)) return assignment;
  }
  return std::nullopt;
}

PlantedInstance generate_planted_ksat(int n, double ratio, int k,
                                      uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (n < k)
    throw std::invalid_argument("n = " + std::to_string(n) +
                                " smaller than clause size k = " +
                                std::to_string(k));
  long m = std::lround(ratio * n);
  if (m < 1) throw std::invalid_argument("ratio*n must be >= 1");

  Pcg32 rng(seed, 0);
  Assignment plant(n);
  for (int i = 0; i < n; ++i) plant[i] = rng.next_bool();

  CnfFormula formula;
  formula.num_variables = n;
  formula.clauses.reserve(m);
  for (long c = 0; c < m; ++c) {
    Clause clause;
    clause.literals.reserve(k);
    while (static_cast<int>(clause.literals.size()) < k) {
      int var = static_cast<int>(rng.bounded(static_cast<uint32_t>(n))) + 1;
      bool dup = false;
      for (const Literal& lit : clause.literals)
        if (lit.variable == var) dup = true;
      if (!dup) clause.literals.push_back({var, +1});
    }
    // Resample all k signs until the plant satisfies the clause.
    for (;;) {
      bool sat = false;
      for (Literal& lit : clause.literals) {
        lit.sign = rng.next_bool() ? +1 : -1;
        if ((lit.sign > 0) == plant[lit.variable - 1]) sat = true;
      }
      if (sat) break;
    }
    formula.clauses.push_back(std::move(clause));
  }
  return {std::move(formula), std::move(plant)};
}

CnfFormula generate_uniform_ksat(int n, int num_clauses, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (n < k)
    throw std::invalid_argument("n = " + std::to_string(n) +
                                " smaller than clause size k = " +
                                std::to_string(k));
  Pcg32 rng(seed, 0);
  CnfFormula formula;
  formula.num_variables = n;
  formula.clauses.reserve(num_clauses);
  for (int c = 0; c < num_clauses; ++c) {
    Clause clause;
    clause.literals.reserve(k);
    while (static_cast<int>(clause.literals.size()) < k) {
      int var = static_cast<int>(rng.bounded(static_cast<uint32_t>(n))) + 1;
      bool dup = false;
      for (const Literal& lit : clause.literals)
        if (lit.variable == var) dup = true;
      if (!dup) clause.literals.push_back({var, rng.next_bool() ? +1 : -1});
    }
    formula.clauses.push_back(std::move(clause));
  }
  return formula;
}

uint64_t assignment_hash(const Assignment& assignment) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (bool b : assignment) {
    h ^= static_cast<uint64_t>(b ? '1' : '0');
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace memflow
