#include "qjudge/consistency.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace qjudge {

namespace {

std::vector<VarSet> subsets_up_to(const VarSet& vs, int k) {
  std::vector<VarSet> out{{}};
  for (Var v : vs) {
    size_t n = out.size();
    for (size_t j = 0; j < n; ++j) {
      if (static_cast<int>(out[j].size()) < k) {
        VarSet s = out[j];
        s.push_back(v);  // vs sorted, appended in order
        out.push_back(std::move(s));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<Assignment> all_rows(const QcInstance& inst, const VarSet& vs) {
  auto v = all_assignments(inst.formula, inst.structure, vs);
  return {v.begin(), v.end()};
}

std::set<Assignment> restrict_rows(const std::set<Assignment>& rows,
                                   const VarSet& u) {
  std::set<Assignment> out;
  for (const auto& f : rows) out.insert(f.restricted(u));
  return out;
}

std::set<Assignment> eps_rows(const std::set<Assignment>& rows, Var y,
                              const std::vector<Value>& universe) {
  Constraint c;
  if (!rows.empty())
    c.vars = rows.begin()->domain();
  else
    return {};
  c.rows = rows;
  return forall_eliminate(c, y, universe).rows;
}

// one narrowing rule application site
struct RuleApp {
  enum class Kind { Pi, Lambda, Eps } kind;
  int i = -1, j = -1;  // j: child (lambda/eps)
  VarSet v, u;         // pi: u subset v; eps: u contains y
  Var y = -1;
};

std::vector<RuleApp> rule_apps(const QcInstance& inst, int k) {
  std::vector<RuleApp> apps;
  const auto& f = inst.formula;
  for (const auto& [i, n] : f.nodes()) {
    auto keys = subsets_up_to(n.free, k);
    for (const VarSet& v : keys)
      for (const VarSet& u : subsets_up_to(v, k))
        if (u != v) apps.push_back({RuleApp::Kind::Pi, i, -1, v, u, -1});
    for (int j : n.children) {
      VarSet shared = vs_intersect(n.free, f.node(j).free);
      for (const VarSet& v : subsets_up_to(shared, k))
        apps.push_back({RuleApp::Kind::Lambda, i, j, v, {}, -1});
    }
    if (n.kind == NodeKind::Forall) {
      int j = n.children[0];
      Var y = n.bound;
      for (const VarSet& u : subsets_up_to(f.node(j).free, k))
        if (vs_contains(u, y))
          apps.push_back({RuleApp::Kind::Eps, i, j, {}, u, y});
    }
  }
  return apps;
}

}  // namespace

PropagateResult propagate(const QcInstance& inst, int k, RuleOrder order) {
  if (k < 1) throw std::invalid_argument("propagate: k must be >= 1");
  const auto& f = inst.formula;
  PropagateResult res;
  auto& table = res.table.entries;

  for (const auto& [i, n] : f.nodes()) {
    for (const VarSet& v : subsets_up_to(n.free, k)) {
      if (n.kind == NodeKind::Atom && v == vs_make(n.args)) {
        table[{i, v}] = atom_constraint(inst, i).rows;
      } else {
        table[{i, v}] = all_rows(inst, v);
      }
    }
  }

  std::vector<RuleApp> apps = rule_apps(inst, k);
  if (order == RuleOrder::Alternate)
    std::reverse(apps.begin(), apps.end());

  bool changed = true;
  while (changed) {
    changed = false;
    for (const RuleApp& app : apps) {
      switch (app.kind) {
        case RuleApp::Kind::Pi: {
          auto& qv = table.at({app.i, app.v});
          auto& qu = table.at({app.i, app.u});
          std::set<Assignment> down = restrict_rows(qv, app.u);
          std::set<Assignment> nu;
          std::set_intersection(qu.begin(), qu.end(), down.begin(),
                                down.end(), std::inserter(nu, nu.end()));
          if (nu != qu) {
            qu = std::move(nu);
            changed = true;
          }
          std::set<Assignment> nv;
          for (const auto& g : qv)
            if (qu.count(g.restricted(app.u))) nv.insert(g);
          if (nv != qv) {
            qv = std::move(nv);
            changed = true;
          }
          break;
        }
        case RuleApp::Kind::Lambda: {
          auto& qi = table.at({app.i, app.v});
          auto& qj = table.at({app.j, app.v});
          std::set<Assignment> both;
          std::set_intersection(qi.begin(), qi.end(), qj.begin(), qj.end(),
                                std::inserter(both, both.end()));
          if (both != qi || both != qj) {
            qi = both;
            qj = std::move(both);
            changed = true;
          }
          break;
        }
        case RuleApp::Kind::Eps: {
          auto& qj = table.at({app.j, app.u});
          VarSet v = vs_remove(app.u, app.y);
          auto& qi = table.at({app.i, v});
          int sort = f.var(app.y).sort;
          std::set<Assignment> eps =
              eps_rows(qj, app.y, inst.structure.universe_values(sort));
          std::set<Assignment> ni;
          std::set_intersection(qi.begin(), qi.end(), eps.begin(), eps.end(),
                                std::inserter(ni, ni.end()));
          if (ni != qi) {
            qi = std::move(ni);
            changed = true;
          }
          break;
        }
      }
    }
    if (changed) ++res.iterations;
  }

  res.consistent = true;
  for (const auto& [key, rows] : table)
    if (rows.empty()) res.consistent = false;
  return res;
}

long propagate_iteration_bound(const QcInstance& inst, int k) {
  long n = formula_width(inst.formula);
  long bmax = 0;
  for (size_t s = 0; s < inst.structure.signature().sorts.size(); ++s)
    bmax = std::max(bmax,
                    static_cast<long>(inst.structure.universe_size(
                        static_cast<int>(s))));
  auto choose = [](long n, long j) {
    if (j > n) return 0L;
    long r = 1;
    for (long t = 0; t < j; ++t) r = r * (n - t) / (t + 1);
    return r;
  };
  long per_index = 0;
  for (long j = 0; j <= k; ++j) {
    long pw = 1;
    for (long t = 0; t < j; ++t) pw *= bmax;
    per_index += choose(n, j) * pw;
  }
  return static_cast<long>(inst.formula.nodes().size()) * per_index;
}

std::vector<SystemViolation> verify_system(const QcInstance& inst, int k,
                                           const ConstraintSystemTable& t) {
  std::vector<SystemViolation> out;
  const auto& f = inst.formula;
  // keys exactly the (i, V subseteq free(phi(i)), |V| <= k) pairs
  std::set<std::pair<int, VarSet>> expected;
  for (const auto& [i, n] : f.nodes())
    for (const VarSet& v : subsets_up_to(n.free, k))
      expected.insert({i, v});
  for (const auto& key : expected)
    if (!t.entries.count(key))
      out.push_back({"keys", key.first, key.second, "missing entry"});
  for (const auto& [key, rows] : t.entries) {
    if (!expected.count(key)) {
      out.push_back({"keys", key.first, key.second, "unexpected entry"});
      continue;
    }
    if (rows.empty())
      out.push_back({"non-empty", key.first, key.second, "entry is empty"});
    for (const auto& g : rows)
      if (g.domain() != key.second) {
        out.push_back({"keys", key.first, key.second,
                       "row domain differs from the key"});
        break;
      }
  }
  if (!out.empty()) return out;

  for (const auto& [i, n] : f.nodes()) {
    // (alpha)
    if (n.kind == NodeKind::Atom) {
      VarSet v = vs_make(n.args);
      if (static_cast<int>(v.size()) <= k) {
        auto atom = atom_constraint(inst, i).rows;
        for (const auto& g : t.entries.at({i, v}))
          if (!atom.count(g)) {
            out.push_back({"alpha", i, v, "row outside the atom rows"});
            break;
          }
      }
    }
    // (pi)
    for (const VarSet& v : subsets_up_to(n.free, k))
      for (const VarSet& u : subsets_up_to(v, k)) {
        if (u == v) continue;
        if (t.entries.at({i, u}) != restrict_rows(t.entries.at({i, v}), u)) {
          out.push_back({"pi", i, u, "P[i,U] differs from P[i,V] | U"});
        }
      }
    // (lambda)
    for (int j : n.children) {
      VarSet shared = vs_intersect(n.free, f.node(j).free);
      for (const VarSet& v : subsets_up_to(shared, k))
        if (t.entries.at({i, v}) != t.entries.at({j, v}))
          out.push_back({"lambda", i, v, "parent and child entries differ"});
    }
    // (eps)
    if (n.kind == NodeKind::Forall) {
      int j = n.children[0];
      Var y = n.bound;
      int sort = f.var(y).sort;
      for (const VarSet& u : subsets_up_to(f.node(j).free, k)) {
        if (!vs_contains(u, y)) continue;
        VarSet v = vs_remove(u, y);
        auto eps = eps_rows(t.entries.at({j, u}), y,
                            inst.structure.universe_values(sort));
        for (const auto& g : t.entries.at({i, v}))
          if (!eps.count(g)) {
            SystemViolation sv{"eps", i, v, "witness row escapes eps_y"};
            out.push_back(std::move(sv));
            break;
          }
      }
    }
  }
  return out;
}

bool is_k_judge_consistent(const QcInstance& inst, int k) {
  return propagate(inst, k).consistent;
}

namespace {

struct DerivedJudgement {
  Judgement j;
  JudgementRule rule;
  std::vector<int> premises;  // ids
  VarSet projection_to;
  Var eliminated = -1;
};

}  // namespace

SaturationResult saturate_judgements(const QcInstance& inst, int k,
                                     long max_judgements) {
  if (k < 1) throw std::invalid_argument("saturate: k must be >= 1");
  const auto& f = inst.formula;
  std::vector<DerivedJudgement> store;
  std::map<std::pair<int, Constraint>, int> seen;
  std::map<int, std::vector<int>> by_location;
  std::deque<int> queue;
  int first_empty = -1;

  auto add = [&](Judgement j, JudgementRule rule, std::vector<int> premises,
                 VarSet proj = {}, Var elim = -1) {
    auto key = std::make_pair(j.location, j.constraint);
    if (seen.count(key)) return;
    if (static_cast<long>(store.size()) >= max_judgements)
      throw ResourceLimitError("saturation: judgement limit exceeded");
    int id = static_cast<int>(store.size());
    seen.emplace(std::move(key), id);
    by_location[j.location].push_back(id);
    bool empty = j.constraint.rows.empty();
    store.push_back({std::move(j), rule, std::move(premises), std::move(proj),
                     elim});
    if (empty && first_empty < 0) first_empty = id;
    queue.push_back(id);
  };

  for (const auto& [i, n] : f.nodes()) {
    if (n.kind != NodeKind::Atom) continue;
    Constraint c = atom_constraint(inst, i);
    if (static_cast<int>(c.vars.size()) > k) continue;
    add({i, std::move(c)}, JudgementRule::Atom, {});
  }

  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    Judgement j = store[id].j;  // copy: store may reallocate
    const int i = j.location;
    const auto& node = f.node(i);
    // projections to proper subsets
    for (const VarSet& u : subsets_up_to(j.constraint.vars, k)) {
      if (u == j.constraint.vars) continue;
      add({i, project(j.constraint, u)}, JudgementRule::Projection, {id}, u);
    }
    // joins with everything known at the same location
    {
      auto partners = by_location[i];
      for (int other : partners) {
        if (other == id) continue;
        const Constraint& oc = store[other].j.constraint;
        VarSet uni = vs_union(j.constraint.vars, oc.vars);
        if (static_cast<int>(uni.size()) > k) continue;
        add({i, join(j.constraint, oc)}, JudgementRule::Join, {id, other});
      }
    }
    // upward flow
    if (node.parent >= 0 &&
        vs_subset(j.constraint.vars, f.node(node.parent).free))
      add({node.parent, j.constraint}, JudgementRule::UpwardFlow, {id});
    // downward flow
    for (int c : node.children)
      if (vs_subset(j.constraint.vars, f.node(c).free))
        add({c, j.constraint}, JudgementRule::DownwardFlow, {id});
    // universal elimination at the parent
    if (node.parent >= 0) {
      const auto& pn = f.node(node.parent);
      if (pn.kind == NodeKind::Forall &&
          vs_contains(j.constraint.vars, pn.bound)) {
        int sort = f.var(pn.bound).sort;
        add({node.parent,
             forall_eliminate(j.constraint, pn.bound,
                              inst.structure.universe_values(sort))},
            JudgementRule::ForallElimination, {id}, {}, pn.bound);
      }
    }
  }

  SaturationResult res;
  res.derived.reserve(store.size());
  for (const auto& d : store) res.derived.push_back(d.j);
  if (first_empty >= 0) {
    JudgementProof proof;
    std::map<int, int> pos;  // id -> step position
    std::function<int(int)> emit = [&](int id) -> int {
      auto it = pos.find(id);
      if (it != pos.end()) return it->second;
      const DerivedJudgement& d = store[id];
      JudgementStep s;
      s.rule = d.rule;
      for (int p : d.premises) s.premises.push_back(emit(p));
      s.projection_to = d.projection_to;
      s.eliminated = d.eliminated;
      s.result = d.j;
      proof.steps.push_back(std::move(s));
      int at = proof.length() - 1;
      pos.emplace(id, at);
      return at;
    };
    emit(first_empty);
    res.refutation = std::move(proof);
  }
  return res;
}

std::optional<JudgementProof> bounded_width_refutation_search(
    const QcInstance& inst, int k, long max_judgements) {
  return saturate_judgements(inst, k, max_judgements).refutation;
}

QcFormula rewrite(const QcFormula& f, const Signature& sig, RewriteRule rule,
                  int at, const RewriteParams& params) {
  const auto& target = f.node(at);
  auto subtree = [&](int i) { return f.to_tree(sig, i); };
  auto block_tree = [&](const std::vector<int>& block) {
    std::vector<FormulaNode> kids;
    for (int c : block) kids.push_back(subtree(c));
    return kids.size() == 1 ? std::move(kids[0])
                            : FormulaNode::conj(std::move(kids));
  };

  FormulaNode replacement;
  switch (rule) {
    case RewriteRule::SplitConjunction: {
      if (target.kind != NodeKind::And || target.children.size() < 2)
        throw std::invalid_argument(
            "rewrite: split needs a conjunction with >= 2 conjuncts");
      std::vector<int> first, second;
      for (int c : target.children) {
        bool in_first =
            std::find(params.first_block.begin(), params.first_block.end(),
                      c) != params.first_block.end();
        (in_first ? first : second).push_back(c);
      }
      if (first.empty() || second.empty())
        throw std::invalid_argument("rewrite: both blocks must be non-empty");
      if (first.size() + second.size() != target.children.size() ||
          params.first_block.size() != first.size())
        throw std::invalid_argument("rewrite: block is not a child subset");
      std::vector<FormulaNode> kids;
      kids.push_back(FormulaNode::conj([&] {
        std::vector<FormulaNode> v;
        for (int c : first) v.push_back(subtree(c));
        return v;
      }()));
      kids.push_back(FormulaNode::conj([&] {
        std::vector<FormulaNode> v;
        for (int c : second) v.push_back(subtree(c));
        return v;
      }()));
      replacement = FormulaNode::conj(std::move(kids));
      break;
    }
    case RewriteRule::PullQuantifier: {
      if (target.kind != NodeKind::Exists && target.kind != NodeKind::Forall)
        throw std::invalid_argument("rewrite: pull needs a quantifier node");
      const auto& body = f.node(target.children[0]);
      if (body.kind != NodeKind::And)
        throw std::invalid_argument(
            "rewrite: pull needs a conjunction under the quantifier");
      std::vector<int> keep, moved;
      for (int c : body.children) {
        bool in_keep =
            std::find(params.first_block.begin(), params.first_block.end(),
                      c) != params.first_block.end();
        (in_keep ? keep : moved).push_back(c);
      }
      if (keep.empty() || moved.empty())
        throw std::invalid_argument("rewrite: both blocks must be non-empty");
      if (keep.size() != params.first_block.size())
        throw std::invalid_argument("rewrite: block is not a child subset");
      for (int c : moved)
        if (vs_contains(f.node(c).free, target.bound))
          throw std::invalid_argument(
              "rewrite: bound variable free in a moved conjunct");
      const auto& vi = f.var(target.bound);
      FormulaNode inner = block_tree(keep);
      FormulaNode quant =
          target.kind == NodeKind::Exists
              ? FormulaNode::exists(vi.name, sig.sorts.at(vi.sort),
                                    std::move(inner))
              : FormulaNode::forall(vi.name, sig.sorts.at(vi.sort),
                                    std::move(inner));
      std::vector<FormulaNode> kids;
      kids.push_back(std::move(quant));
      for (int c : moved) kids.push_back(subtree(c));
      replacement = FormulaNode::conj(std::move(kids));
      break;
    }
    case RewriteRule::DistributeForall: {
      if (target.kind != NodeKind::Forall)
        throw std::invalid_argument(
            "rewrite: distribute needs a universal quantifier");
      const auto& body = f.node(target.children[0]);
      if (body.kind != NodeKind::And)
        throw std::invalid_argument(
            "rewrite: distribute needs a conjunction under the quantifier");
      const auto& vi = f.var(target.bound);
      std::vector<FormulaNode> kids;
      for (int c : body.children)
        kids.push_back(FormulaNode::forall(vi.name, sig.sorts.at(vi.sort),
                                           subtree(c)));
      replacement = FormulaNode::conj(std::move(kids));
      break;
    }
  }

  std::function<FormulaNode(int)> rebuild = [&](int i) -> FormulaNode {
    if (i == at) return replacement;
    const auto& n = f.node(i);
    switch (n.kind) {
      case NodeKind::And: {
        std::vector<FormulaNode> kids;
        for (int c : n.children) kids.push_back(rebuild(c));
        return FormulaNode::conj(std::move(kids));
      }
      case NodeKind::Exists:
      case NodeKind::Forall: {
        const auto& vi = f.var(n.bound);
        FormulaNode child = rebuild(n.children[0]);
        return n.kind == NodeKind::Exists
                   ? FormulaNode::exists(vi.name, sig.sorts.at(vi.sort),
                                         std::move(child))
                   : FormulaNode::forall(vi.name, sig.sorts.at(vi.sort),
                                         std::move(child));
      }
      default:
        return f.to_tree(sig, i);
    }
  };
  return QcFormula::build(sig, rebuild(f.root()));
}

QwidthCheck qwidth_consistency_check(const QcInstance& inst, int k) {
  if (!is_prenex(inst.formula))
    throw std::invalid_argument(
        "qwidth_consistency_check: formula is not prenex");
  QwidthCheck out;
  out.consistent = is_k_judge_consistent(inst, k);
  out.oracle_truth = evaluate(inst);
  out.agree = out.consistent == out.oracle_truth;
  return out;
}

}  // namespace qjudge
