#include "qjudge/constraint.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace qjudge {

VarSet vs_make(std::vector<Var> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool vs_contains(const VarSet& s, Var v) {
  return std::binary_search(s.begin(), s.end(), v);
}

bool vs_subset(const VarSet& a, const VarSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

VarSet vs_union(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

VarSet vs_intersect(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

VarSet vs_minus(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

VarSet vs_remove(const VarSet& a, Var v) { return vs_minus(a, {v}); }

VarSet vs_insert(const VarSet& a, Var v) { return vs_union(a, {v}); }

Assignment::Assignment(std::vector<std::pair<Var, Value>> items)
    : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  for (size_t i = 1; i < items_.size(); ++i) {
    if (items_[i - 1].first == items_[i].first)
      throw std::invalid_argument("assignment: duplicate variable");
  }
}

VarSet Assignment::domain() const {
  VarSet out;
  out.reserve(items_.size());
  for (const auto& [v, b] : items_) out.push_back(v);
  return out;
}

bool Assignment::defined_on(Var v) const { return find(v).has_value(); }

std::optional<Value> Assignment::find(Var v) const {
  auto it = std::lower_bound(
      items_.begin(), items_.end(), v,
      [](const std::pair<Var, Value>& p, Var x) { return p.first < x; });
  if (it == items_.end() || it->first != v) return std::nullopt;
  return it->second;
}

Value Assignment::at(Var v) const {
  auto b = find(v);
  if (!b) throw std::out_of_range("assignment: variable not defined");
  return *b;
}

Assignment Assignment::restricted(const VarSet& s) const {
  Assignment out;
  for (const auto& p : items_)
    if (vs_contains(s, p.first)) out.items_.push_back(p);
  return out;
}

Assignment Assignment::extended(Var v, Value b) const {
  Assignment out = *this;
  auto it = std::lower_bound(
      out.items_.begin(), out.items_.end(), v,
      [](const std::pair<Var, Value>& p, Var x) { return p.first < x; });
  if (it != out.items_.end() && it->first == v)
    it->second = b;
  else
    out.items_.insert(it, {v, b});
  return out;
}

Assignment Assignment::merge(const Assignment& a, const Assignment& b) {
  Assignment out = a;
  for (const auto& [v, val] : b.items_) out = out.extended(v, val);
  return out;
}

bool Constraint::well_formed() const {
  for (const auto& f : rows)
    if (f.domain() != vars) return false;
  return true;
}

Constraint project(const Constraint& c, const VarSet& u) {
  if (!vs_subset(u, c.vars))
    throw std::invalid_argument("project: target is not a subset of vars");
  Constraint out;
  out.vars = u;
  for (const auto& f : c.rows) out.rows.insert(f.restricted(u));
  return out;
}

Constraint join(const Constraint& a, const Constraint& b) {
  Constraint out;
  out.vars = vs_union(a.vars, b.vars);
  VarSet shared = vs_intersect(a.vars, b.vars);
  std::map<Assignment, std::vector<const Assignment*>> by_shared;
  for (const auto& g : b.rows) by_shared[g.restricted(shared)].push_back(&g);
  for (const auto& f : a.rows) {
    auto it = by_shared.find(f.restricted(shared));
    if (it == by_shared.end()) continue;
    for (const Assignment* g : it->second)
      out.rows.insert(Assignment::merge(f, *g));
  }
  return out;
}

Constraint forall_eliminate(const Constraint& c, Var y,
                            const std::vector<Value>& universe) {
  if (!vs_contains(c.vars, y))
    throw std::invalid_argument("forall_eliminate: variable not in vars");
  Constraint out;
  out.vars = vs_remove(c.vars, y);
  for (const auto& f : c.rows) {
    Assignment g = f.restricted(out.vars);
    bool all = true;
    for (Value b : universe) {
      if (!c.rows.count(g.extended(y, b))) {
        all = false;
        break;
      }
    }
    if (all) out.rows.insert(g);
  }
  return out;
}

}  // namespace qjudge
