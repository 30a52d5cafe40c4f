#ifndef QJUDGE_LITERAL_HPP
#define QJUDGE_LITERAL_HPP

#include <compare>
#include <optional>
#include <vector>

#include "qjudge/constraint.hpp"

namespace qjudge {

struct Literal {
  Var var = -1;
  bool positive = true;

  Literal complement() const { return {var, !positive}; }
  auto operator<=>(const Literal&) const = default;
};

/// A disjunction of literals with at most one literal per variable
/// (non-tautological by construction). The empty clause is permitted.
class Clause {
 public:
  Clause() = default;

  /// nullopt if the literal list mentions some variable twice.
  static std::optional<Clause> make(std::vector<Literal> lits);

  const std::vector<Literal>& literals() const { return lits_; }
  bool empty() const { return lits_.empty(); }
  int size() const { return static_cast<int>(lits_.size()); }
  bool has_var(Var v) const;
  bool contains(const Literal& l) const;
  std::optional<Literal> literal_on(Var v) const;
  VarSet vars() const;
  /// The clause with any literal on v removed.
  Clause without_var(Var v) const;

  /// True when every literal evaluates to false under a (a need not be
  /// defined outside vars()).
  bool falsified_by(const Assignment& a) const;
  /// The unique assignment on vars() falsifying the clause.
  Assignment falsifier() const;

  auto operator<=>(const Clause&) const = default;

 private:
  std::vector<Literal> lits_;  // sorted by (var, positive)
};

enum class ResolveStatus { Ok, PivotNotComplementary, Tautological };

/// (a \ {L}) cup (b \ {M}) for complementary pivot literals L, M. The result
/// must again be a clause; a tautological union is an error.
ResolveStatus resolve_clauses(const Clause& a, const Clause& b, Var pivot,
                              Clause& out);

/// Throwing wrapper around resolve_clauses.
Clause resolvent(const Clause& a, const Clause& b, Var pivot);

}  // namespace qjudge

#endif  // QJUDGE_LITERAL_HPP
