#include "qjudge/literal.hpp"

#include <algorithm>
#include <stdexcept>

namespace qjudge {

std::optional<Clause> Clause::make(std::vector<Literal> lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (size_t i = 1; i < lits.size(); ++i)
    if (lits[i - 1].var == lits[i].var) return std::nullopt;
  Clause c;
  c.lits_ = std::move(lits);
  return c;
}

bool Clause::has_var(Var v) const { return literal_on(v).has_value(); }

bool Clause::contains(const Literal& l) const {
  return std::binary_search(lits_.begin(), lits_.end(), l);
}

std::optional<Literal> Clause::literal_on(Var v) const {
  for (const Literal& l : lits_)
    if (l.var == v) return l;
  return std::nullopt;
}

VarSet Clause::vars() const {
  VarSet out;
  out.reserve(lits_.size());
  for (const Literal& l : lits_) out.push_back(l.var);
  return out;  // lits_ sorted by var, one per var
}

Clause Clause::without_var(Var v) const {
  Clause out;
  for (const Literal& l : lits_)
    if (l.var != v) out.lits_.push_back(l);
  return out;
}

bool Clause::falsified_by(const Assignment& a) const {
  for (const Literal& l : lits_) {
    auto b = a.find(l.var);
    if (!b) return false;
    if ((*b != 0) == l.positive) return false;
  }
  return true;
}

Assignment Clause::falsifier() const {
  std::vector<std::pair<Var, Value>> items;
  for (const Literal& l : lits_) items.push_back({l.var, l.positive ? 0 : 1});
  return Assignment(std::move(items));
}

ResolveStatus resolve_clauses(const Clause& a, const Clause& b, Var pivot,
                              Clause& out) {
  auto la = a.literal_on(pivot);
  auto lb = b.literal_on(pivot);
  if (!la || !lb || la->positive == lb->positive)
    return ResolveStatus::PivotNotComplementary;
  std::vector<Literal> lits;
  for (const Literal& l : a.literals())
    if (l.var != pivot) lits.push_back(l);
  for (const Literal& l : b.literals())
    if (l.var != pivot) lits.push_back(l);
  auto c = Clause::make(std::move(lits));
  if (!c) return ResolveStatus::Tautological;
  out = *c;
  return ResolveStatus::Ok;
}

Clause resolvent(const Clause& a, const Clause& b, Var pivot) {
  Clause out;
  switch (resolve_clauses(a, b, pivot, out)) {
    case ResolveStatus::Ok:
      return out;
    case ResolveStatus::PivotNotComplementary:
      throw std::invalid_argument(
          "resolvent: pivot does not occur with complementary polarity");
    case ResolveStatus::Tautological:
      throw std::invalid_argument("resolvent: result is tautological");
  }
  throw std::logic_error("resolvent: unreachable");
}

}  // namespace qjudge
