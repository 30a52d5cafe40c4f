#ifndef QJUDGE_CONSTRAINT_HPP
#define QJUDGE_CONSTRAINT_HPP

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qjudge {

// Variables and universe elements are interned to small integers; all
// external formats use names (see io.hpp).
using Var = int;
using Value = int;

// A sorted, duplicate-free set of variables.
using VarSet = std::vector<Var>;

VarSet vs_make(std::vector<Var> vars);
bool vs_contains(const VarSet& s, Var v);
bool vs_subset(const VarSet& a, const VarSet& b);
VarSet vs_union(const VarSet& a, const VarSet& b);
VarSet vs_intersect(const VarSet& a, const VarSet& b);
VarSet vs_minus(const VarSet& a, const VarSet& b);
VarSet vs_remove(const VarSet& a, Var v);
VarSet vs_insert(const VarSet& a, Var v);

/// A total map from a finite variable set to universe elements, stored as a
/// sorted (variable, value) sequence so that set membership and equality are
/// structural.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::vector<std::pair<Var, Value>> items);

  const std::vector<std::pair<Var, Value>>& items() const { return items_; }
  VarSet domain() const;
  bool defined_on(Var v) const;
  std::optional<Value> find(Var v) const;
  Value at(Var v) const;  // throws std::out_of_range if absent

  Assignment restricted(const VarSet& s) const;
  /// f[v -> b]; replaces the binding if v is already defined.
  Assignment extended(Var v, Value b) const;
  /// Union of two assignments with disjoint-or-agreeing domains.
  static Assignment merge(const Assignment& a, const Assignment& b);

  auto operator<=>(const Assignment&) const = default;

 private:
  std::vector<std::pair<Var, Value>> items_;
};

/// A constraint (V, F): a variable set with a set of assignments, each
/// defined exactly on V. (emptyset, {}) and (emptyset, {e}) are distinct.
struct Constraint {
  VarSet vars;
  std::set<Assignment> rows;

  bool well_formed() const;
  bool empty() const { return rows.empty(); }
  auto operator<=>(const Constraint&) const = default;
};

/// Restriction of every row to u. Requires u to be a subset of c.vars.
Constraint project(const Constraint& c, const VarSet& u);

/// Natural join: rows over the union of the schemas whose restrictions lie
/// in both inputs. (emptyset, {e}) is the join identity.
Constraint join(const Constraint& a, const Constraint& b);

/// The operator eps_y: keeps a row f on vars minus y iff f[y -> b] is a row
/// for every b in the universe of y's sort. The universe is passed
/// explicitly; this module never sees whole structures.
Constraint forall_eliminate(const Constraint& c, Var y,
                            const std::vector<Value>& universe);

}  // namespace qjudge

#endif  // QJUDGE_CONSTRAINT_HPP
