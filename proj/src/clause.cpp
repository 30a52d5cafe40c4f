#include "qjudge/clause.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace qjudge {

int ClauseProof::width() const {
  int w = 0;
  for (const auto& s : steps)
    w = std::max(w, s.result.clause.size());
  return w;
}

int non_flow_count(const ClauseProof& proof) {
  int n = 0;
  for (const auto& s : proof.steps)
    if (s.rule != ClauseRule::UpwardFlow && s.rule != ClauseRule::DownwardFlow)
      ++n;
  return n;
}

std::optional<std::string> check_clause_step(const QcbfFormula& f,
                                             const ClauseProof& prefix,
                                             const ClauseStep& step) {
  const int i = step.result.location;
  if (!f.has_index(i)) return "unknown location index";
  if (!vs_subset(step.result.clause.vars(), f.free_vars(i)))
    return "variable-set escape: clause vars not free at the location";
  const int n = prefix.length();
  for (int p : step.premises)
    if (p < 0 || p >= n) return "premise position out of range";
  auto premise = [&](int k) -> const ClauseJudgement& {
    return prefix.steps[step.premises[k]].result;
  };

  switch (step.rule) {
    case ClauseRule::Clause: {
      if (!step.premises.empty()) return "clause rule takes no premises";
      const auto& node = f.node(i);
      if (node.kind != NodeKind::ClauseLeaf) return "location is not a clause";
      if (node.clause != step.result.clause)
        return "clause mismatch with the formula";
      return std::nullopt;
    }
    case ClauseRule::Resolve: {
      if (step.premises.size() != 2) return "resolve takes two premises";
      const auto& a = premise(0);
      const auto& b = premise(1);
      if (a.location != i || b.location != i)
        return "resolve premises must sit at the result location";
      Clause out;
      switch (resolve_clauses(a.clause, b.clause, step.pivot, out)) {
        case ResolveStatus::PivotNotComplementary:
          return "pivot does not occur with complementary polarity";
        case ResolveStatus::Tautological:
          return "resolvent is tautological";
        case ResolveStatus::Ok:
          break;
      }
      if (out != step.result.clause)
        return "clause mismatch with the resolvent";
      return std::nullopt;
    }
    case ClauseRule::UpwardFlow: {
      if (step.premises.size() != 1) return "upward flow takes one premise";
      const auto& p = premise(0);
      if (!f.is_parent(i, p.location))
        return "wrong parent link: result location is not the premise's parent";
      if (p.clause != step.result.clause)
        return "flow must keep the clause unchanged";
      return std::nullopt;
    }
    case ClauseRule::ForallRemoval: {
      if (step.premises.size() != 1) return "forall-removal takes one premise";
      const auto& p = premise(0);
      if (!f.is_parent(i, p.location))
        return "wrong parent link: result location is not the premise's parent";
      const auto& node = f.node(i);
      if (node.kind != NodeKind::Forall)
        return "result location is not a universal quantifier";
      if (p.clause.without_var(node.bound) != step.result.clause)
        return "clause mismatch with the removal";
      return std::nullopt;
    }
    case ClauseRule::DownwardFlow: {
      if (step.premises.size() != 1) return "downward flow takes one premise";
      const auto& p = premise(0);
      if (!f.is_parent(p.location, i))
        return "wrong parent link: premise location is not the result's parent";
      if (p.clause != step.result.clause)
        return "flow must keep the clause unchanged";
      return std::nullopt;
    }
  }
  return "unknown rule";
}

ClauseProofReport check_clause_proof(const QcbfFormula& f,
                                     const ClauseProof& proof) {
  ClauseProofReport rep;
  rep.length = proof.length();
  rep.width = proof.width();
  rep.non_flow_count = non_flow_count(proof);
  std::vector<int> uses(proof.length(), 0);
  ClauseProof prefix;
  for (int k = 0; k < proof.length(); ++k) {
    const auto& step = proof.steps[k];
    if (auto bad = check_clause_step(f, prefix, step))
      rep.violations.push_back({k, *bad});
    if (step.result.empty()) rep.refutes = true;
    for (int p : step.premises)
      if (p >= 0 && p < proof.length()) ++uses[p];
    prefix.steps.push_back(step);
  }
  rep.tree_like =
      std::all_of(uses.begin(), uses.end(), [](int u) { return u <= 1; });
  rep.valid = rep.violations.empty();
  return rep;
}

namespace {

struct PrefixInfo {
  int matrix = -1;
  std::vector<int> chain;          // matrix child-to-root quantifier indices
  std::map<Var, int> binder;       // variable -> quantifier index
  std::map<Var, int> binder_depth; // variable -> position in chain (0 deepest)
};

PrefixInfo prefix_info(const QcbfFormula& f) {
  auto matrix = prenex_matrix(f);
  if (!matrix)
    throw std::invalid_argument("qres: formula is not in prenex form");
  PrefixInfo info;
  info.matrix = *matrix;
  int pos = 0;
  for (int k = f.node(*matrix).parent; k >= 0; k = f.node(k).parent) {
    info.chain.push_back(k);
    info.binder[f.node(k).bound] = k;
    info.binder_depth[f.node(k).bound] = pos++;
  }
  return info;
}

struct Derivation {
  enum class Kind { Input, Resolvent, Removal } kind = Kind::Input;
  int leaf = -1;            // Input
  Clause left, right;       // Resolvent
  Var pivot = -1;           // Resolvent
  Clause source;            // Removal
  Var removed = -1;         // Removal
  int quantifier = -1;      // Removal
};

std::map<Clause, Derivation> saturate(const QcbfFormula& f,
                                      const PrefixInfo& info,
                                      const QResOptions& opts) {
  std::map<Clause, Derivation> derived;
  std::vector<Clause> order;
  std::vector<Clause> queue;
  auto add = [&](Clause c, Derivation d) {
    if (derived.count(c)) return;
    if (static_cast<long>(derived.size()) >= opts.max_clauses)
      throw ResourceLimitError("qres closure: clause limit exceeded");
    derived.emplace(c, std::move(d));
    order.push_back(c);
    queue.push_back(std::move(c));
  };
  for (int leaf : f.node(info.matrix).children) {
    Derivation d;
    d.kind = Derivation::Kind::Input;
    d.leaf = leaf;
    add(f.node(leaf).clause, std::move(d));
  }
  while (!queue.empty()) {
    Clause c = queue.back();
    queue.pop_back();
    // universal removal: the removed variable must be the innermost
    // quantified one among the clause's variables
    if (!c.empty()) {
      Var inner = -1;
      int best = -1;
      for (Var v : c.vars()) {
        int d = info.binder_depth.at(v);
        if (best < 0 || d < best) {
          best = d;
          inner = v;
        }
      }
      int q = info.binder.at(inner);
      if (f.node(q).kind == NodeKind::Forall) {
        Derivation d;
        d.kind = Derivation::Kind::Removal;
        d.source = c;
        d.removed = inner;
        d.quantifier = q;
        add(c.without_var(inner), std::move(d));
      }
    }
    // resolvents against everything derived so far
    size_t known = order.size();
    for (size_t k = 0; k < known; ++k) {
      const Clause other = order[k];
      for (Var v : vs_intersect(c.vars(), other.vars())) {
        if (opts.existential_pivots_only &&
            f.node(info.binder.at(v)).kind != NodeKind::Exists)
          continue;
        Clause out;
        if (resolve_clauses(c, other, v, out) != ResolveStatus::Ok) continue;
        Derivation d;
        d.kind = Derivation::Kind::Resolvent;
        d.left = c;
        d.right = other;
        d.pivot = v;
        add(std::move(out), std::move(d));
      }
    }
  }
  return derived;
}

}  // namespace

std::set<Clause> qres_closure(const QcbfFormula& f, const QResOptions& opts) {
  PrefixInfo info = prefix_info(f);
  std::set<Clause> out;
  for (const auto& [c, d] : saturate(f, info, opts)) out.insert(c);
  return out;
}

std::optional<ClauseProof> qres_closure_derive(const QcbfFormula& f,
                                               const Clause& target,
                                               const QResOptions& opts) {
  PrefixInfo info = prefix_info(f);
  auto derived = saturate(f, info, opts);
  if (!derived.count(target)) return std::nullopt;

  ClauseProof proof;
  std::map<Clause, int> at_matrix;  // clause -> position of (c, clause)
  auto append = [&](ClauseStep s) {
    proof.steps.push_back(std::move(s));
    return proof.length() - 1;
  };
  std::function<int(const Clause&)> emit = [&](const Clause& c) -> int {
    auto it = at_matrix.find(c);
    if (it != at_matrix.end()) return it->second;
    const Derivation& d = derived.at(c);
    int pos = -1;
    switch (d.kind) {
      case Derivation::Kind::Input: {
        ClauseStep leaf;
        leaf.rule = ClauseRule::Clause;
        leaf.result = {d.leaf, c};
        int lp = append(std::move(leaf));
        ClauseStep up;
        up.rule = ClauseRule::UpwardFlow;
        up.premises = {lp};
        up.result = {info.matrix, c};
        pos = append(std::move(up));
        break;
      }
      case Derivation::Kind::Resolvent: {
        int pa = emit(d.left);
        int pb = emit(d.right);
        ClauseStep rs;
        rs.rule = ClauseRule::Resolve;
        rs.premises = {pa, pb};
        rs.pivot = d.pivot;
        rs.result = {info.matrix, c};
        pos = append(std::move(rs));
        break;
      }
      case Derivation::Kind::Removal: {
        int pa = emit(d.source);
        // walk up from the matrix to the child of the removing quantifier
        std::vector<int> path{info.matrix};
        while (f.node(path.back()).parent != d.quantifier)
          path.push_back(f.node(path.back()).parent);
        int cur = pa;
        for (size_t t = 1; t < path.size(); ++t) {
          ClauseStep up;
          up.rule = ClauseRule::UpwardFlow;
          up.premises = {cur};
          up.result = {path[t], d.source};
          cur = append(std::move(up));
        }
        ClauseStep rm;
        rm.rule = ClauseRule::ForallRemoval;
        rm.premises = {cur};
        rm.result = {d.quantifier, c};
        cur = append(std::move(rm));
        for (auto it2 = path.rbegin(); it2 != path.rend(); ++it2) {
          ClauseStep down;
          down.rule = ClauseRule::DownwardFlow;
          down.premises = {cur};
          down.result = {*it2, c};
          cur = append(std::move(down));
        }
        pos = cur;
        break;
      }
    }
    at_matrix.emplace(c, pos);
    return pos;
  };
  emit(target);
  return proof;
}

ClauseProof make_tree_like(const ClauseProof& proof) {
  if (proof.steps.empty()) return {};
  ClauseProof out;
  std::function<int(int)> rebuild = [&](int pos) -> int {
    ClauseStep s = proof.steps[pos];
    std::vector<int> fresh;
    for (int p : s.premises) fresh.push_back(rebuild(p));
    s.premises = std::move(fresh);
    out.steps.push_back(std::move(s));
    return out.length() - 1;
  };
  rebuild(proof.length() - 1);
  return out;
}

}  // namespace qjudge
