#include "qjudge/model.hpp"

#include <algorithm>
#include <functional>

namespace qjudge {

int Signature::sort_id(const std::string& name) const {
  for (size_t i = 0; i < sorts.size(); ++i)
    if (sorts[i] == name) return static_cast<int>(i);
  return -1;
}

int Signature::relation_id(const std::string& name) const {
  for (size_t i = 0; i < relations.size(); ++i)
    if (relations[i].name == name) return static_cast<int>(i);
  return -1;
}

Structure::Structure(Signature sig,
                     std::vector<std::vector<std::string>> universes_by_sort,
                     std::vector<std::vector<NamedTuple>> tuples_by_relation)
    : sig_(std::move(sig)),
      universes_(std::move(universes_by_sort)),
      raw_(std::move(tuples_by_relation)) {
  if (universes_.size() != sig_.sorts.size())
    throw BuildError("structure: one universe per sort required");
  if (raw_.size() != sig_.relations.size())
    throw BuildError("structure: one tuple list per relation required");
  element_ids_.resize(universes_.size());
  for (size_t s = 0; s < universes_.size(); ++s) {
    for (size_t e = 0; e < universes_[s].size(); ++e) {
      auto [it, fresh] =
          element_ids_[s].insert({universes_[s][e], static_cast<Value>(e)});
      if (!fresh)
        violations_.push_back("structure: duplicate element '" +
                              universes_[s][e] + "' in sort '" +
                              sig_.sorts[s] + "'");
    }
    if (universes_[s].empty())
      violations_.push_back("structure: empty universe for sort '" +
                            sig_.sorts[s] + "'");
  }
  interps_.resize(raw_.size());
  for (size_t r = 0; r < raw_.size(); ++r) {
    const auto& arity = sig_.relations[r].arity;
    for (const NamedTuple& t : raw_[r]) {
      if (t.size() != arity.size()) {
        violations_.push_back("structure: tuple of wrong length for relation " +
                              sig_.relations[r].name);
        continue;
      }
      std::vector<Value> ids;
      bool ok = true;
      for (size_t j = 0; j < t.size(); ++j) {
        int id = element_id(arity[j], t[j]);
        if (id < 0) {
          violations_.push_back("structure: element '" + t[j] +
                                "' not in universe of sort '" +
                                sig_.sorts[arity[j]] + "' (relation " +
                                sig_.relations[r].name + ")");
          ok = false;
          break;
        }
        ids.push_back(id);
      }
      if (ok) interps_[r].insert(std::move(ids));
    }
  }
}

int Structure::universe_size(int sort) const {
  return static_cast<int>(universes_.at(sort).size());
}

const std::vector<std::string>& Structure::universe(int sort) const {
  return universes_.at(sort);
}

std::vector<Value> Structure::universe_values(int sort) const {
  std::vector<Value> out(universes_.at(sort).size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Value>(i);
  return out;
}

const std::string& Structure::element_name(int sort, Value v) const {
  return universes_.at(sort).at(v);
}

int Structure::element_id(int sort, const std::string& name) const {
  const auto& ids = element_ids_.at(sort);
  auto it = ids.find(name);
  return it == ids.end() ? -1 : it->second;
}

const std::set<std::vector<Value>>& Structure::interpretation(
    int relation) const {
  return interps_.at(relation);
}

const std::vector<Structure::NamedTuple>& Structure::raw_tuples(
    int relation) const {
  return raw_.at(relation);
}

bool Structure::tuple_in(int relation, const std::vector<Value>& t) const {
  return interps_.at(relation).count(t) != 0;
}

FormulaNode FormulaNode::atom(std::string rel, std::vector<std::string> args) {
  FormulaNode n;
  n.kind = NodeKind::Atom;
  n.relation = std::move(rel);
  n.args = std::move(args);
  return n;
}

FormulaNode FormulaNode::conj(std::vector<FormulaNode> children) {
  FormulaNode n;
  n.kind = NodeKind::And;
  n.children = std::move(children);
  return n;
}

FormulaNode FormulaNode::exists(std::string var, std::string sort,
                                FormulaNode child) {
  FormulaNode n;
  n.kind = NodeKind::Exists;
  n.var = std::move(var);
  n.sort = std::move(sort);
  n.children.push_back(std::move(child));
  return n;
}

FormulaNode FormulaNode::forall(std::string var, std::string sort,
                                FormulaNode child) {
  FormulaNode n;
  n.kind = NodeKind::Forall;
  n.var = std::move(var);
  n.sort = std::move(sort);
  n.children.push_back(std::move(child));
  return n;
}

FormulaNode FormulaNode::top() { return FormulaNode{}; }

FormulaNode FormulaNode::clause(std::vector<std::string> lits) {
  FormulaNode n;
  n.kind = NodeKind::ClauseLeaf;
  n.lits = std::move(lits);
  return n;
}

FormulaNode FormulaNode::qexists(std::string var, FormulaNode child) {
  return exists(std::move(var), "", std::move(child));
}

FormulaNode FormulaNode::qforall(std::string var, FormulaNode child) {
  return forall(std::move(var), "", std::move(child));
}

namespace {

// Variables are identified by name+sort within one formula; scoping is
// positional via the tree, so the same id may be re-bound below (shadowing,
// as in the running example's two 'exists x').
struct VarInterner {
  std::vector<QcFormula::VarInfo> vars;

  Var intern(const std::string& name, int sort) {
    for (size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].name == name) {
        if (vars[i].sort != sort)
          throw BuildError("variable '" + name + "' used with two sorts");
        return static_cast<Var>(i);
      }
    }
    vars.push_back({name, sort});
    return static_cast<Var>(vars.size() - 1);
  }
};

}  // namespace

QcFormula QcFormula::build(const Signature& sig, const FormulaNode& tree) {
  QcFormula f;
  VarInterner interner;
  int next = 1;
  std::function<int(const FormulaNode&, int)> walk =
      [&](const FormulaNode& n, int parent) -> int {
    int idx = next++;
    Node node;
    node.parent = parent;
    switch (n.kind) {
      case NodeKind::Atom: {
        node.kind = NodeKind::Atom;
        node.relation = sig.relation_id(n.relation);
        if (node.relation < 0)
          throw BuildError("unknown relation '" + n.relation + "'");
        const auto& arity = sig.relations[node.relation].arity;
        if (arity.size() != n.args.size())
          throw BuildError("atom arity mismatch for relation '" + n.relation +
                           "'");
        for (size_t j = 0; j < n.args.size(); ++j)
          node.args.push_back(interner.intern(n.args[j], arity[j]));
        node.free = vs_make(node.args);
        break;
      }
      case NodeKind::And: {
        node.kind = NodeKind::And;
        if (n.children.empty())
          throw BuildError("conjunction must have arity >= 1");
        break;
      }
      case NodeKind::Exists:
      case NodeKind::Forall: {
        node.kind = n.kind;
        if (n.children.size() != 1)
          throw BuildError("quantifier must have exactly one child");
        int sort = sig.sort_id(n.sort);
        if (sort < 0) throw BuildError("unknown sort '" + n.sort + "'");
        node.bound = interner.intern(n.var, sort);
        break;
      }
      case NodeKind::True:
        node.kind = NodeKind::True;
        break;
      case NodeKind::ClauseLeaf:
        throw BuildError("clause leaf in a qc-formula");
    }
    f.nodes_[idx] = node;
    for (const FormulaNode& c : n.children)
      f.nodes_[idx].children.push_back(walk(c, idx));
    // free sets bottom-up
    Node& me = f.nodes_[idx];
    if (me.kind == NodeKind::And) {
      VarSet fr;
      for (int c : me.children) fr = vs_union(fr, f.nodes_[c].free);
      me.free = fr;
    } else if (me.kind == NodeKind::Exists || me.kind == NodeKind::Forall) {
      me.free = vs_remove(f.nodes_[me.children[0]].free, me.bound);
    }
    return idx;
  };
  f.root_ = walk(tree, -1);
  f.vars_ = std::move(interner.vars);
  return f;
}

const QcFormula::Node& QcFormula::node(int i) const {
  auto it = nodes_.find(i);
  if (it == nodes_.end())
    throw std::out_of_range("unknown formula index " + std::to_string(i));
  return it->second;
}

bool QcFormula::is_parent(int i, int j) const { return node(j).parent == i; }

Var QcFormula::find_var(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<Var>(i);
  return -1;
}

QcFormula QcFormula::reindexed(const std::map<int, int>& renaming) const {
  QcFormula out;
  out.vars_ = vars_;
  std::set<int> used;
  for (const auto& [i, n] : nodes_) {
    auto it = renaming.find(i);
    if (it == renaming.end())
      throw std::invalid_argument("reindexed: no image for index " +
                                  std::to_string(i));
    if (!used.insert(it->second).second)
      throw std::invalid_argument("reindexed: renaming not injective");
    Node m = n;
    if (m.parent >= 0) m.parent = renaming.at(m.parent);
    for (int& c : m.children) c = renaming.at(c);
    out.nodes_[it->second] = std::move(m);
  }
  out.root_ = renaming.at(root_);
  return out;
}

FormulaNode QcFormula::to_tree(const Signature& sig, int i) const {
  const Node& n = node(i);
  switch (n.kind) {
    case NodeKind::Atom: {
      std::vector<std::string> args;
      for (Var v : n.args) args.push_back(vars_.at(v).name);
      return FormulaNode::atom(sig.relations.at(n.relation).name,
                               std::move(args));
    }
    case NodeKind::And: {
      std::vector<FormulaNode> children;
      for (int c : n.children) children.push_back(to_tree(sig, c));
      return FormulaNode::conj(std::move(children));
    }
    case NodeKind::Exists:
      return FormulaNode::exists(vars_.at(n.bound).name,
                                 sig.sorts.at(vars_.at(n.bound).sort),
                                 to_tree(sig, n.children[0]));
    case NodeKind::Forall:
      return FormulaNode::forall(vars_.at(n.bound).name,
                                 sig.sorts.at(vars_.at(n.bound).sort),
                                 to_tree(sig, n.children[0]));
    case NodeKind::True:
      return FormulaNode::top();
    default:
      throw std::logic_error("to_tree: bad node kind");
  }
}

QcbfFormula QcbfFormula::build(const FormulaNode& tree) {
  QcbfFormula f;
  std::vector<std::string> names;
  auto intern = [&](const std::string& name) -> Var {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<Var>(i);
    names.push_back(name);
    return static_cast<Var>(names.size() - 1);
  };
  int next = 1;
  std::function<int(const FormulaNode&, int)> walk =
      [&](const FormulaNode& n, int parent) -> int {
    int idx = next++;
    Node node;
    node.parent = parent;
    switch (n.kind) {
      case NodeKind::ClauseLeaf: {
        node.kind = NodeKind::ClauseLeaf;
        std::vector<Literal> lits;
        for (const std::string& s : n.lits) {
          if (s.empty()) throw BuildError("empty literal");
          bool pos = s[0] != '-';
          std::string name = pos ? s : s.substr(1);
          if (name.empty()) throw BuildError("empty literal name");
          lits.push_back({intern(name), pos});
        }
        auto c = Clause::make(std::move(lits));
        if (!c)
          throw BuildError("clause mentions some variable twice");
        node.clause = *c;
        node.free = node.clause.vars();
        break;
      }
      case NodeKind::And:
        node.kind = NodeKind::And;
        if (n.children.empty())
          throw BuildError("conjunction must have arity >= 1");
        break;
      case NodeKind::Exists:
      case NodeKind::Forall:
        node.kind = n.kind;
        if (n.children.size() != 1)
          throw BuildError("quantifier must have exactly one child");
        node.bound = intern(n.var);
        break;
      default:
        throw BuildError("node kind not allowed in a QCBF");
    }
    f.nodes_[idx] = node;
    for (const FormulaNode& c : n.children)
      f.nodes_[idx].children.push_back(walk(c, idx));
    Node& me = f.nodes_[idx];
    if (me.kind == NodeKind::And) {
      VarSet fr;
      for (int c : me.children) fr = vs_union(fr, f.nodes_[c].free);
      me.free = fr;
    } else if (me.kind == NodeKind::Exists || me.kind == NodeKind::Forall) {
      me.free = vs_remove(f.nodes_[me.children[0]].free, me.bound);
    }
    return idx;
  };
  f.root_ = walk(tree, -1);
  f.vars_ = std::move(names);
  return f;
}

const QcbfFormula::Node& QcbfFormula::node(int i) const {
  auto it = nodes_.find(i);
  if (it == nodes_.end())
    throw std::out_of_range("unknown formula index " + std::to_string(i));
  return it->second;
}

bool QcbfFormula::is_parent(int i, int j) const { return node(j).parent == i; }

Var QcbfFormula::find_var(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i] == name) return static_cast<Var>(i);
  return -1;
}

int QcbfFormula::depth(int i) const {
  int d = 0;
  for (int k = node(i).parent; k >= 0; k = node(k).parent) ++d;
  return d;
}

bool QcbfFormula::is_ancestor(int i, int j) const {
  for (int k = j; k >= 0; k = node(k).parent)
    if (k == i) return true;
  return false;
}

namespace {

template <typename Formula>
void check_tree_links(const Formula& f, std::vector<std::string>& out) {
  int roots = 0;
  for (const auto& [i, n] : f.nodes()) {
    if (n.parent < 0) {
      ++roots;
      if (i != f.root())
        out.push_back("formula: parentless node " + std::to_string(i) +
                      " is not the root");
    } else {
      if (!f.has_index(n.parent)) {
        out.push_back("formula: node " + std::to_string(i) +
                      " has unknown parent");
        continue;
      }
      const auto& cs = f.node(n.parent).children;
      if (std::find(cs.begin(), cs.end(), i) == cs.end())
        out.push_back("formula: node " + std::to_string(i) +
                      " missing from its parent's child list");
    }
    for (int c : n.children) {
      if (!f.has_index(c))
        out.push_back("formula: node " + std::to_string(i) +
                      " has unknown child");
      else if (f.node(c).parent != i)
        out.push_back("formula: child link of node " + std::to_string(i) +
                      " is not mirrored");
    }
  }
  if (roots != 1) out.push_back("formula: expected exactly one root");
}

VarSet recompute_free(const QcFormula& f, int i) {
  const auto& n = f.node(i);
  switch (n.kind) {
    case NodeKind::Atom:
      return vs_make(n.args);
    case NodeKind::And: {
      VarSet fr;
      for (int c : n.children) fr = vs_union(fr, recompute_free(f, c));
      return fr;
    }
    case NodeKind::Exists:
    case NodeKind::Forall:
      return vs_remove(recompute_free(f, n.children[0]), n.bound);
    default:
      return {};
  }
}

}  // namespace

std::vector<std::string> validate_instance(const QcInstance& inst) {
  std::vector<std::string> out = inst.structure.violations();
  const Signature& sig = inst.structure.signature();
  // unique names in the signature
  for (size_t i = 0; i < sig.relations.size(); ++i)
    for (size_t j = i + 1; j < sig.relations.size(); ++j)
      if (sig.relations[i].name == sig.relations[j].name)
        out.push_back("signature: duplicate relation name '" +
                      sig.relations[i].name + "'");
  for (size_t i = 0; i < sig.sorts.size(); ++i)
    for (size_t j = i + 1; j < sig.sorts.size(); ++j)
      if (sig.sorts[i] == sig.sorts[j])
        out.push_back("signature: duplicate sort name '" + sig.sorts[i] + "'");
  for (const auto& r : sig.relations)
    for (int s : r.arity)
      if (s < 0 || s >= static_cast<int>(sig.sorts.size()))
        out.push_back("signature: relation " + r.name +
                      " names an unknown sort");
  check_tree_links(inst.formula, out);
  for (const auto& [i, n] : inst.formula.nodes()) {
    if (n.kind == NodeKind::Atom) {
      if (n.relation < 0 || n.relation >= static_cast<int>(sig.relations.size())) {
        out.push_back("formula: atom at " + std::to_string(i) +
                      " names an unknown relation");
        continue;
      }
      const auto& arity = sig.relations[n.relation].arity;
      if (arity.size() != n.args.size())
        out.push_back("formula: atom at " + std::to_string(i) +
                      " has wrong arity for relation " +
                      sig.relations[n.relation].name);
      else
        for (size_t j = 0; j < n.args.size(); ++j)
          if (inst.formula.var(n.args[j]).sort != arity[j])
            out.push_back("formula: atom at " + std::to_string(i) +
                          " argument " + std::to_string(j + 1) +
                          " has wrong sort for relation " +
                          sig.relations[n.relation].name);
    }
    if (n.free != recompute_free(inst.formula, i))
      out.push_back("formula: cached free set at " + std::to_string(i) +
                    " is stale");
  }
  if (!inst.formula.free_vars(inst.formula.root()).empty())
    out.push_back("formula: root has free variables (not a sentence)");
  return out;
}

std::vector<std::string> validate_instance(const QcbfFormula& f) {
  std::vector<std::string> out;
  check_tree_links(f, out);
  if (!f.free_vars(f.root()).empty())
    out.push_back("formula: root has free variables (not closed)");
  return out;
}

int formula_width(const QcFormula& f) {
  int w = 0;
  for (const auto& [i, n] : f.nodes())
    w = std::max(w, static_cast<int>(n.free.size()));
  return w;
}

int formula_width(const QcbfFormula& f) {
  int w = 0;
  for (const auto& [i, n] : f.nodes())
    w = std::max(w, static_cast<int>(n.free.size()));
  return w;
}

bool Evaluator::evaluate(int index, const Assignment& a) {
  const auto& n = f_->node(index);
  if (a.domain() != n.free)
    throw std::invalid_argument(
        "evaluate: assignment domain differs from the free variables");
  for (const auto& [v, b] : a.items()) {
    int sort = f_->var(v).sort;
    if (b < 0 || b >= b_->universe_size(sort))
      throw std::invalid_argument("evaluate: value out of the universe");
  }
  return eval(index, a);
}

bool Evaluator::eval(int index, const Assignment& a) {
  auto key = std::make_pair(index, a);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const auto& n = f_->node(index);
  bool result = true;
  switch (n.kind) {
    case NodeKind::Atom: {
      std::vector<Value> t;
      t.reserve(n.args.size());
      for (Var v : n.args) t.push_back(a.at(v));
      result = b_->tuple_in(n.relation, t);
      break;
    }
    case NodeKind::And: {
      for (int c : n.children) {
        if (!eval(c, a.restricted(f_->node(c).free))) {
          result = false;
          break;
        }
      }
      break;
    }
    case NodeKind::Exists:
    case NodeKind::Forall: {
      int child = n.children[0];
      const VarSet& cf = f_->node(child).free;
      int sort = f_->var(n.bound).sort;
      bool exists = n.kind == NodeKind::Exists;
      result = !exists;
      for (Value b = 0; b < b_->universe_size(sort); ++b) {
        bool sub = eval(child, a.extended(n.bound, b).restricted(cf));
        if (exists && sub) {
          result = true;
          break;
        }
        if (!exists && !sub) {
          result = false;
          break;
        }
      }
      break;
    }
    case NodeKind::True:
      result = true;
      break;
    default:
      throw std::logic_error("eval: bad node kind");
  }
  memo_.insert({std::move(key), result});
  return result;
}

bool evaluate(const QcInstance& inst, int index, const Assignment& a) {
  Evaluator e(inst.formula, inst.structure);
  return e.evaluate(index, a);
}

bool evaluate(const QcInstance& inst) {
  return evaluate(inst, inst.formula.root(), Assignment());
}

bool QcbfEvaluator::evaluate(int index, const Assignment& a) {
  const auto& n = f_->node(index);
  if (a.domain() != n.free)
    throw std::invalid_argument(
        "evaluate: assignment domain differs from the free variables");
  for (const auto& [v, b] : a.items())
    if (b != 0 && b != 1)
      throw std::invalid_argument("evaluate: non-boolean value");
  return eval(index, a);
}

bool QcbfEvaluator::eval(int index, const Assignment& a) {
  auto key = std::make_pair(index, a);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const auto& n = f_->node(index);
  bool result = true;
  switch (n.kind) {
    case NodeKind::ClauseLeaf: {
      result = false;
      for (const Literal& l : n.clause.literals())
        if ((a.at(l.var) != 0) == l.positive) {
          result = true;
          break;
        }
      break;
    }
    case NodeKind::And: {
      for (int c : n.children) {
        if (!eval(c, a.restricted(f_->node(c).free))) {
          result = false;
          break;
        }
      }
      break;
    }
    case NodeKind::Exists:
    case NodeKind::Forall: {
      int child = n.children[0];
      const VarSet& cf = f_->node(child).free;
      bool exists = n.kind == NodeKind::Exists;
      result = !exists;
      for (Value b = 0; b <= 1; ++b) {
        bool sub = eval(child, a.extended(n.bound, b).restricted(cf));
        if (exists && sub) {
          result = true;
          break;
        }
        if (!exists && !sub) {
          result = false;
          break;
        }
      }
      break;
    }
    default:
      throw std::logic_error("eval: bad node kind");
  }
  memo_.insert({std::move(key), result});
  return result;
}

bool evaluate(const QcbfFormula& f, int index, const Assignment& a) {
  QcbfEvaluator e(f);
  return e.evaluate(index, a);
}

bool evaluate(const QcbfFormula& f) {
  return evaluate(f, f.root(), Assignment());
}

std::vector<Assignment> all_assignments(const QcFormula& f, const Structure& b,
                                        const VarSet& vs) {
  std::vector<Assignment> out{Assignment()};
  for (Var v : vs) {
    int size = b.universe_size(f.var(v).sort);
    std::vector<Assignment> next;
    for (const Assignment& a : out)
      for (Value e = 0; e < size; ++e) next.push_back(a.extended(v, e));
    out = std::move(next);
  }
  return out;
}

std::vector<Assignment> all_bool_assignments(const VarSet& vs) {
  std::vector<Assignment> out{Assignment()};
  for (Var v : vs) {
    std::vector<Assignment> next;
    for (const Assignment& a : out) {
      next.push_back(a.extended(v, 0));
      next.push_back(a.extended(v, 1));
    }
    out = std::move(next);
  }
  return out;
}

std::optional<int> prenex_matrix(const QcbfFormula& f) {
  int i = f.root();
  while (f.node(i).kind == NodeKind::Exists ||
         f.node(i).kind == NodeKind::Forall)
    i = f.node(i).children[0];
  if (f.node(i).kind != NodeKind::And) return std::nullopt;
  for (int c : f.node(i).children)
    if (f.node(c).kind != NodeKind::ClauseLeaf) return std::nullopt;
  return i;
}

bool is_prenex(const QcFormula& f) {
  int i = f.root();
  while (f.node(i).kind == NodeKind::Exists ||
         f.node(i).kind == NodeKind::Forall)
    i = f.node(i).children[0];
  // quantifier-free below
  std::vector<int> stack{i};
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    const auto& n = f.node(k);
    if (n.kind == NodeKind::Exists || n.kind == NodeKind::Forall) return false;
    for (int c : n.children) stack.push_back(c);
  }
  return true;
}

}  // namespace qjudge
