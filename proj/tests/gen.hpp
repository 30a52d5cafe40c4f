// Shared fixtures and randomized generators for the test suites. Test-only.
#ifndef QJUDGE_TESTS_GEN_HPP
#define QJUDGE_TESTS_GEN_HPP

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qjudge/clause.hpp"
#include "qjudge/judgement.hpp"
#include "qjudge/model.hpp"

namespace qjudge::testgen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// ------------------------------------------------------- running example

inline Signature example33_signature() {
  Signature sig;
  sig.sorts = {"e", "u"};
  sig.relations.push_back({"E", {0, 1}});
  return sig;
}

inline QcInstance example33_instance(bool drop_af = false) {
  Signature sig = example33_signature();
  std::vector<Structure::NamedTuple> tuples = {
      {"a", "d"}, {"a", "e"}, {"a", "f"}, {"b", "e"}, {"c", "f"}};
  if (drop_af) tuples.erase(tuples.begin() + 2);
  Structure b(sig, {{"a", "b", "c"}, {"d", "e", "f"}}, {tuples});
  FormulaNode tree = FormulaNode::exists(
      "x", "e",
      FormulaNode::forall(
          "y", "u",
          FormulaNode::conj([] {
            std::vector<FormulaNode> kids;
            kids.push_back(FormulaNode::atom("E", {"x", "y"}));
            kids.push_back(FormulaNode::exists(
                "x", "e", FormulaNode::atom("E", {"x", "y"})));
            return kids;
          }())));
  return {QcFormula::build(sig, tree), std::move(b)};
}

/// exists x forall y E(x,y) over {a,b} x {d,e,f} with E = {(a,d),(a,e),(b,f)}
inline QcInstance false2_instance() {
  Signature sig = example33_signature();
  Structure b(sig, {{"a", "b"}, {"d", "e", "f"}},
              {{{"a", "d"}, {"a", "e"}, {"b", "f"}}});
  FormulaNode tree = FormulaNode::exists(
      "x", "e", FormulaNode::forall("y", "u", FormulaNode::atom("E", {"x", "y"})));
  return {QcFormula::build(sig, tree), std::move(b)};
}

inline Assignment row(const QcFormula& f, const Structure& b,
                      std::vector<std::pair<std::string, std::string>> items) {
  Assignment out;
  for (const auto& [var, elem] : items) {
    Var v = f.find_var(var);
    int e = b.element_id(f.var(v).sort, elem);
    out = out.extended(v, e);
  }
  return out;
}

// ------------------------------------------------------- random instances

struct InstanceOptions {
  int max_nodes = 6;
  int max_universe = 3;
  int max_relations = 3;
  int max_sorts = 2;
};

inline QcInstance random_instance(Rng& rng, const InstanceOptions& opt = {}) {
  Signature sig;
  int nsorts = pick(rng, 1, opt.max_sorts);
  for (int s = 0; s < nsorts; ++s) sig.sorts.push_back("s" + std::to_string(s));

  int nrels = pick(rng, 1, opt.max_relations);
  for (int r = 0; r < nrels; ++r) {
    Signature::Relation rel;
    rel.name = "R" + std::to_string(r);
    int arity = chance(rng, 0.1) ? 0 : pick(rng, 1, 2);
    for (int j = 0; j < arity; ++j)
      rel.arity.push_back(pick(rng, 0, nsorts - 1));
    sig.relations.push_back(std::move(rel));
  }

  std::vector<std::vector<std::string>> universes(nsorts);
  for (int s = 0; s < nsorts; ++s) {
    int size = pick(rng, 1, opt.max_universe);
    for (int e = 0; e < size; ++e)
      universes[s].push_back("s" + std::to_string(s) + "_" +
                             std::to_string(e));
  }

  std::vector<std::vector<Structure::NamedTuple>> tuples(sig.relations.size());
  for (size_t r = 0; r < sig.relations.size(); ++r) {
    double density =
        std::uniform_real_distribution<double>(0.25, 0.85)(rng);
    std::vector<Structure::NamedTuple> all{{}};
    for (int sort : sig.relations[r].arity) {
      std::vector<Structure::NamedTuple> next;
      for (const auto& t : all)
        for (const auto& e : universes[sort]) {
          auto t2 = t;
          t2.push_back(e);
          next.push_back(std::move(t2));
        }
      all = std::move(next);
    }
    for (auto& t : all)
      if (chance(rng, density)) tuples[r].push_back(std::move(t));
  }

  // variable name pool with fixed sorts per name
  std::vector<std::string> names = {"x", "y", "z", "w"};
  std::vector<int> name_sort(names.size());
  for (size_t j = 0; j < names.size(); ++j)
    name_sort[j] = pick(rng, 0, nsorts - 1);

  int budget = pick(rng, 2, opt.max_nodes);
  std::function<FormulaNode(std::vector<int>&, int)> gen =
      [&](std::vector<int>& scope, int depth) -> FormulaNode {
    --budget;
    std::vector<int> feasible;  // relations with all sorts available
    for (size_t r = 0; r < sig.relations.size(); ++r) {
      bool ok = true;
      for (int sort : sig.relations[r].arity) {
        bool found = false;
        for (int nm : scope)
          if (name_sort[nm] == sort) found = true;
        if (!found) ok = false;
      }
      if (ok) feasible.push_back(static_cast<int>(r));
    }
    auto emit_atom = [&]() -> FormulaNode {
      int r = feasible[pick(rng, 0, static_cast<int>(feasible.size()) - 1)];
      std::vector<std::string> args;
      for (int sort : sig.relations[r].arity) {
        std::vector<int> pool;
        for (int nm : scope)
          if (name_sort[nm] == sort) pool.push_back(nm);
        args.push_back(names[pool[pick(rng, 0, static_cast<int>(pool.size()) - 1)]]);
      }
      return FormulaNode::atom(sig.relations[r].name, std::move(args));
    };
    auto emit_quant = [&]() -> FormulaNode {
      int nm = pick(rng, 0, static_cast<int>(names.size()) - 1);
      auto inner = scope;
      if (std::find(inner.begin(), inner.end(), nm) == inner.end())
        inner.push_back(nm);
      FormulaNode child = gen(inner, depth + 1);
      return chance(rng, 0.5)
                 ? FormulaNode::exists(names[nm], sig.sorts[name_sort[nm]],
                                       std::move(child))
                 : FormulaNode::forall(names[nm], sig.sorts[name_sort[nm]],
                                       std::move(child));
    };
    if (budget <= 0) {
      if (!feasible.empty()) return emit_atom();
      return FormulaNode::top();
    }
    int roll = pick(rng, 0, 9);
    if (roll < 4 && !feasible.empty()) return emit_atom();
    if (roll < 6 && budget >= 2) {
      int kids = std::min(budget, pick(rng, 2, 3));
      std::vector<FormulaNode> children;
      for (int j = 0; j < kids; ++j) children.push_back(gen(scope, depth + 1));
      return FormulaNode::conj(std::move(children));
    }
    if (roll < 9 || feasible.empty()) return emit_quant();
    if (!feasible.empty()) return emit_atom();
    return FormulaNode::top();
  };
  std::vector<int> scope;
  FormulaNode tree = gen(scope, 0);

  Structure b(sig, std::move(universes), std::move(tuples));
  return {QcFormula::build(sig, tree), std::move(b)};
}

// ----------------------------------------------------------- random QCBFs

inline Clause random_clause(Rng& rng, const std::vector<Var>& scope,
                            double var_p = 0.6, bool allow_empty = false) {
  while (true) {
    std::vector<Literal> lits;
    for (Var v : scope)
      if (chance(rng, var_p)) lits.push_back({v, chance(rng, 0.5)});
    if (lits.empty() && !allow_empty && !scope.empty()) continue;
    return *Clause::make(std::move(lits));
  }
}

inline QcbfFormula random_prenex_qcbf(Rng& rng, int max_vars,
                                      int max_clauses) {
  int n = pick(rng, 1, max_vars);
  int m = pick(rng, 1, max_clauses);
  std::vector<int> order(n);
  for (int j = 0; j < n; ++j) order[j] = j;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Var> scope(n);
  for (int j = 0; j < n; ++j) scope[j] = j;
  std::vector<FormulaNode> leaves;
  for (int j = 0; j < m; ++j) {
    Clause c = random_clause(rng, scope, 0.6, chance(rng, 0.05));
    std::vector<std::string> lits;
    for (const Literal& l : c.literals())
      lits.push_back((l.positive ? "" : "-") + ("v" + std::to_string(l.var)));
    leaves.push_back(FormulaNode::clause(std::move(lits)));
  }
  FormulaNode tree = FormulaNode::conj(std::move(leaves));
  for (int j = n - 1; j >= 0; --j) {
    std::string name = "v" + std::to_string(order[j]);
    tree = chance(rng, 0.5) ? FormulaNode::qexists(name, std::move(tree))
                            : FormulaNode::qforall(name, std::move(tree));
  }
  return QcbfFormula::build(tree);
}

inline QcbfFormula random_qcbf(Rng& rng, int max_vars, int max_clauses,
                               int max_nodes = 9) {
  if (chance(rng, 0.4)) return random_prenex_qcbf(rng, max_vars, max_clauses);
  int nvars = pick(rng, 1, max_vars);
  int clauses_left = pick(rng, 1, max_clauses);
  int budget = max_nodes;
  std::function<FormulaNode(std::vector<int>&, int)> gen =
      [&](std::vector<int>& scope, int depth) -> FormulaNode {
    --budget;
    auto emit_clause = [&]() -> FormulaNode {
      --clauses_left;
      std::vector<Var> sc(scope.begin(), scope.end());
      Clause c = random_clause(rng, sc, 0.7, scope.empty());
      std::vector<std::string> lits;
      for (const Literal& l : c.literals())
        lits.push_back((l.positive ? "" : "-") +
                       ("v" + std::to_string(l.var)));
      return FormulaNode::clause(std::move(lits));
    };
    auto emit_quant = [&]() -> FormulaNode {
      int v = pick(rng, 0, nvars - 1);
      auto inner = scope;
      if (std::find(inner.begin(), inner.end(), v) == inner.end())
        inner.push_back(v);
      FormulaNode child = gen(inner, depth + 1);
      std::string name = "v" + std::to_string(v);
      return chance(rng, 0.5)
                 ? FormulaNode::qexists(name, std::move(child))
                 : FormulaNode::qforall(name, std::move(child));
    };
    bool can_leaf = !scope.empty() || chance(rng, 0.1);
    if (budget <= 0 && can_leaf && clauses_left > 0) return emit_clause();
    if (budget <= 0) return emit_quant();
    int roll = pick(rng, 0, 9);
    if (roll < 3 && can_leaf && clauses_left > 0) return emit_clause();
    if (roll < 5 && budget >= 2 && clauses_left >= 2 && !scope.empty()) {
      int kids = std::min({budget, clauses_left, pick(rng, 2, 3)});
      std::vector<FormulaNode> children;
      for (int j = 0; j < kids; ++j) children.push_back(gen(scope, depth + 1));
      return FormulaNode::conj(std::move(children));
    }
    return emit_quant();
  };
  std::vector<int> scope;
  return QcbfFormula::build(gen(scope, 0));
}

// ---------------------------------------------------- random clause proofs

inline ClauseProof random_clause_proof(Rng& rng, const QcbfFormula& f,
                                       int extra_steps) {
  ClauseProof proof;
  std::vector<int> clause_locs;
  for (const auto& [i, n] : f.nodes())
    if (n.kind == NodeKind::ClauseLeaf) clause_locs.push_back(i);
  int seeds = pick(rng, 1, std::min<int>(3, clause_locs.size()));
  for (int j = 0; j < seeds; ++j) {
    int loc = clause_locs[pick(rng, 0, static_cast<int>(clause_locs.size()) - 1)];
    ClauseStep s;
    s.rule = ClauseRule::Clause;
    s.result = {loc, f.node(loc).clause};
    proof.steps.push_back(std::move(s));
  }
  for (int round = 0; round < extra_steps; ++round) {
    struct Candidate {
      ClauseStep step;
    };
    std::vector<Candidate> cands;
    int len = proof.length();
    for (int a = 0; a < len; ++a) {
      const ClauseJudgement& ja = proof.steps[a].result;
      const auto& node = f.node(ja.location);
      // clause introduction anywhere stays available
      if (node.parent >= 0) {
        const auto& pn = f.node(node.parent);
        if (vs_subset(ja.clause.vars(), pn.free)) {
          ClauseStep s;
          s.rule = ClauseRule::UpwardFlow;
          s.premises = {a};
          s.result = {node.parent, ja.clause};
          cands.push_back({std::move(s)});
        }
        if (pn.kind == NodeKind::Forall) {
          ClauseStep s;
          s.rule = ClauseRule::ForallRemoval;
          s.premises = {a};
          s.result = {node.parent, ja.clause.without_var(pn.bound)};
          cands.push_back({std::move(s)});
        }
      }
      for (int c : node.children) {
        if (vs_subset(ja.clause.vars(), f.node(c).free)) {
          ClauseStep s;
          s.rule = ClauseRule::DownwardFlow;
          s.premises = {a};
          s.result = {c, ja.clause};
          cands.push_back({std::move(s)});
        }
      }
      for (int b = 0; b < len; ++b) {
        if (b == a) continue;
        const ClauseJudgement& jb = proof.steps[b].result;
        if (jb.location != ja.location) continue;
        for (Var v : vs_intersect(ja.clause.vars(), jb.clause.vars())) {
          Clause out;
          if (resolve_clauses(ja.clause, jb.clause, v, out) !=
              ResolveStatus::Ok)
            continue;
          ClauseStep s;
          s.rule = ClauseRule::Resolve;
          s.premises = {a, b};
          s.pivot = v;
          s.result = {ja.location, std::move(out)};
          cands.push_back({std::move(s)});
        }
      }
    }
    {
      int loc =
          clause_locs[pick(rng, 0, static_cast<int>(clause_locs.size()) - 1)];
      ClauseStep s;
      s.rule = ClauseRule::Clause;
      s.result = {loc, f.node(loc).clause};
      cands.push_back({std::move(s)});
    }
    proof.steps.push_back(
        cands[pick(rng, 0, static_cast<int>(cands.size()) - 1)].step);
  }
  return proof;
}

// ------------------------------------------------- random judgement proofs

inline JudgementProof random_judgement_proof(Rng& rng, const QcInstance& inst,
                                             int extra_steps) {
  JudgementProof proof;
  std::vector<int> atom_locs;
  for (const auto& [i, n] : inst.formula.nodes())
    if (n.kind == NodeKind::Atom) atom_locs.push_back(i);
  if (atom_locs.empty()) return proof;
  int seeds = pick(rng, 1, std::min<int>(3, atom_locs.size()));
  for (int j = 0; j < seeds; ++j) {
    int loc = atom_locs[pick(rng, 0, static_cast<int>(atom_locs.size()) - 1)];
    JudgementStep s;
    s.rule = JudgementRule::Atom;
    s.result = {loc, atom_constraint(inst, loc)};
    proof.steps.push_back(std::move(s));
  }
  for (int round = 0; round < extra_steps; ++round) {
    std::vector<JudgementStep> cands;
    int len = proof.length();
    for (int a = 0; a < len; ++a) {
      const Judgement& ja = proof.steps[a].result;
      const auto& node = inst.formula.node(ja.location);
      if (!ja.constraint.vars.empty()) {
        // drop a random variable
        VarSet u = ja.constraint.vars;
        u.erase(u.begin() + pick(rng, 0, static_cast<int>(u.size()) - 1));
        JudgementStep s;
        s.rule = JudgementRule::Projection;
        s.premises = {a};
        s.projection_to = u;
        s.result = {ja.location, project(ja.constraint, u)};
        cands.push_back(std::move(s));
      }
      if (node.parent >= 0) {
        const auto& pn = inst.formula.node(node.parent);
        if (vs_subset(ja.constraint.vars, pn.free)) {
          JudgementStep s;
          s.rule = JudgementRule::UpwardFlow;
          s.premises = {a};
          s.result = {node.parent, ja.constraint};
          cands.push_back(std::move(s));
        }
        if (pn.kind == NodeKind::Forall &&
            vs_contains(ja.constraint.vars, pn.bound)) {
          JudgementStep s;
          s.rule = JudgementRule::ForallElimination;
          s.premises = {a};
          s.eliminated = pn.bound;
          int sort = inst.formula.var(pn.bound).sort;
          s.result = {node.parent,
                      forall_eliminate(ja.constraint, pn.bound,
                                       inst.structure.universe_values(sort))};
          cands.push_back(std::move(s));
        }
      }
      for (int c : node.children) {
        if (vs_subset(ja.constraint.vars, inst.formula.node(c).free)) {
          JudgementStep s;
          s.rule = JudgementRule::DownwardFlow;
          s.premises = {a};
          s.result = {c, ja.constraint};
          cands.push_back(std::move(s));
        }
      }
      for (int b = 0; b < len; ++b) {
        if (b == a) continue;
        const Judgement& jb = proof.steps[b].result;
        if (jb.location != ja.location) continue;
        JudgementStep s;
        s.rule = JudgementRule::Join;
        s.premises = {a, b};
        s.result = {ja.location, join(ja.constraint, jb.constraint)};
        cands.push_back(std::move(s));
      }
    }
    {
      int loc =
          atom_locs[pick(rng, 0, static_cast<int>(atom_locs.size()) - 1)];
      JudgementStep s;
      s.rule = JudgementRule::Atom;
      s.result = {loc, atom_constraint(inst, loc)};
      cands.push_back(std::move(s));
    }
    proof.steps.push_back(
        cands[pick(rng, 0, static_cast<int>(cands.size()) - 1)]);
  }
  return proof;
}

}  // namespace qjudge::testgen

#endif  // QJUDGE_TESTS_GEN_HPP
