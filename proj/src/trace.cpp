#include "qjudge/trace.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

namespace qjudge {

bool follows(const QcbfFormula& f, int j, const LocatedVariable& lv) {
  if (j == lv.location) return false;
  int k = j;
  while (k >= 0 && k != lv.location) {
    if (!vs_contains(f.free_vars(k), lv.var)) return false;
    k = f.node(k).parent;
  }
  return k == lv.location;
}

bool follows_set(const QcbfFormula& f, int j,
                 const std::vector<LocatedVariable>& s) {
  for (const auto& lv : s)
    if (!follows(f, j, lv)) return false;
  return true;
}

bool coherent(const QcbfFormula& f, const std::vector<LocatedVariable>& s) {
  for (size_t a = 0; a < s.size(); ++a)
    for (size_t b = a + 1; b < s.size(); ++b) {
      if (s[a] == s[b]) continue;
      if (!follows(f, s[a].location, s[b]) &&
          !follows(f, s[b].location, s[a]))
        return false;
    }
  return true;
}

VarSet located_vars(const std::vector<LocatedVariable>& s) {
  VarSet out;
  for (const auto& lv : s) out.push_back(lv.var);
  return vs_make(out);
}

namespace {

std::vector<LocatedVariable> lv_sorted(std::vector<LocatedVariable> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::vector<LocatedVariable> lv_minus(
    const std::vector<LocatedVariable>& a,
    const std::vector<LocatedVariable>& b) {
  std::vector<LocatedVariable> out;
  for (const auto& lv : a)
    if (std::find(b.begin(), b.end(), lv) == b.end()) out.push_back(lv);
  return out;
}

bool lv_subset(const std::vector<LocatedVariable>& a,
               const std::vector<LocatedVariable>& b) {
  for (const auto& lv : a)
    if (std::find(b.begin(), b.end(), lv) == b.end()) return false;
  return true;
}

/// Every located variable of the formula: quantifier locations with their
/// bound variable.
std::vector<LocatedVariable> all_located(const QcbfFormula& f) {
  std::vector<LocatedVariable> out;
  for (const auto& [i, n] : f.nodes())
    if (n.kind == NodeKind::Exists || n.kind == NodeKind::Forall)
      out.push_back({i, n.bound, n.kind == NodeKind::Forall});
  return out;
}

}  // namespace

std::vector<TraceViolation> validate_trace(const QcbfFormula& f,
                                           const Trace& t) {
  std::vector<TraceViolation> out;
  if (t.root < 0 || t.root >= t.node_count()) {
    out.push_back({-1, "root index out of range"});
    return out;
  }
  std::vector<int> seen(t.node_count(), 0);
  std::function<void(int)> mark = [&](int id) {
    if (id < 0 || id >= t.node_count() || seen[id]) {
      out.push_back({id, "broken tree structure"});
      return;
    }
    seen[id] = 1;
    for (int c : t.nodes[id].children) mark(c);
  };
  mark(t.root);
  if (!out.empty()) return out;

  for (int id = 0; id < t.node_count(); ++id) {
    const TraceNode& n = t.nodes[id];
    if (!seen[id]) {
      out.push_back({id, "node not reachable from the root"});
      continue;
    }
    for (const auto& lv : n.located) {
      if (!f.has_index(lv.location)) {
        out.push_back({id, "located variable at unknown index"});
        continue;
      }
      const auto& qn = f.node(lv.location);
      bool quant =
          qn.kind == NodeKind::Exists || qn.kind == NodeKind::Forall;
      if (!quant || qn.bound != lv.var)
        out.push_back({id, "located variable not quantified at its location"});
      else if (lv.universal != (qn.kind == NodeKind::Forall))
        out.push_back({id, "universal flag does not match the quantifier"});
    }
    if (!coherent(f, n.located))
      out.push_back({id, "located set is not coherent"});
    if (n.assignment.domain() != located_vars(n.located))
      out.push_back({id, "assignment domain differs from vars(S)"});
    for (const auto& [v, b] : n.assignment.items())
      if (b != 0 && b != 1) out.push_back({id, "non-boolean value"});

    if (n.children.empty()) {
      if (n.falsifies < 0 || !f.has_index(n.falsifies)) {
        out.push_back({id, "leaf without a falsified clause index"});
        continue;
      }
      const auto& cn = f.node(n.falsifies);
      if (cn.kind != NodeKind::ClauseLeaf) {
        out.push_back({id, "falsified index is not a clause"});
        continue;
      }
      if (!follows_set(f, n.falsifies, n.located))
        out.push_back({id, "falsified clause does not follow S"});
      if (cn.clause.vars() != located_vars(n.located))
        out.push_back({id, "vars mismatch: clause vars must equal vars(S)"});
      else if (!cn.clause.falsified_by(n.assignment))
        out.push_back({id, "clause is not falsified by the assignment"});
    } else if (n.children.size() == 1) {
      const TraceNode& c = t.nodes[n.children[0]];
      auto added = lv_minus(c.located, n.located);
      if (added.size() != 1 || !lv_subset(n.located, c.located)) {
        out.push_back({id, "child label not generable by a forall-branch"});
        continue;
      }
      const LocatedVariable& lv = added[0];
      if (!lv.universal) {
        out.push_back({id, "forall-branch on a non-universal variable"});
        continue;
      }
      if (!follows_set(f, lv.location, n.located))
        out.push_back({id, "forall-branch variable does not follow S"});
      auto b = c.assignment.find(lv.var);
      if (!b || c.assignment != n.assignment.extended(lv.var, *b))
        out.push_back({id, "child assignment is not a[y -> b]"});
    } else if (n.children.size() == 2) {
      const TraceNode& c0 = t.nodes[n.children[0]];
      const TraceNode& c1 = t.nodes[n.children[1]];
      auto add0 = lv_minus(c0.located, n.located);
      auto add1 = lv_minus(c1.located, n.located);
      if (add0.size() != 1 || add1.size() != 1 || add0[0] != add1[0]) {
        out.push_back({id, "children labels not generable by a Q-branch"});
        continue;
      }
      const LocatedVariable& lv = add0[0];
      auto s_plus = lv_sorted([&] {
        auto v = n.located;
        v.push_back(lv);
        return v;
      }());
      if (!coherent(f, s_plus))
        out.push_back({id, "Q-branch breaks coherence"});
      auto s0 = lv_minus(c0.located, {lv});
      auto s1 = lv_minus(c1.located, {lv});
      if (!lv_subset(s0, n.located) || !lv_subset(s1, n.located) ||
          lv_sorted([&] {
            auto v = s0;
            v.insert(v.end(), s1.begin(), s1.end());
            return v;
          }()) != lv_sorted(n.located)) {
        out.push_back({id, "Q-branch requires S0 cup S1 = S"});
        continue;
      }
      Assignment a0 =
          n.assignment.restricted(located_vars(s0)).extended(lv.var, 0);
      Assignment a1 =
          n.assignment.restricted(located_vars(s1)).extended(lv.var, 1);
      if (c0.assignment != a0 || c1.assignment != a1)
        out.push_back({id, "children assignments do not match the split"});
    } else {
      out.push_back({id, "branching degree above 2"});
    }
  }
  return out;
}

namespace {

struct TmpNode {
  std::vector<LocatedVariable> located;
  Assignment assignment;
  std::vector<TmpNode> children;
  int falsifies = -1;
};

struct Searcher {
  const QcbfFormula& f;
  SearchPolicy policy;
  std::vector<LocatedVariable> candidates;  // all located variables
  long steps = 0;
  bool limit_hit = false;
  std::mt19937_64 rng;
  std::set<std::pair<std::vector<LocatedVariable>, Assignment>> failed;
  std::set<std::pair<std::vector<LocatedVariable>, Assignment>> in_stack;

  explicit Searcher(const QcbfFormula& fa, const SearchPolicy& p)
      : f(fa), policy(p), rng(p.seed) {
    candidates = all_located(fa);
    std::sort(candidates.begin(), candidates.end(),
              [&](const LocatedVariable& a, const LocatedVariable& b) {
                int da = fa.depth(a.location), db = fa.depth(b.location);
                if (da != db) return da < db;  // shallowest first
                return a.location < b.location;
              });
  }

  template <typename T>
  void maybe_shuffle(std::vector<T>& v) {
    if (policy.kind == SearchPolicy::Kind::Random)
      std::shuffle(v.begin(), v.end(), rng);
  }

  std::optional<TmpNode> search(const std::vector<LocatedVariable>& s,
                                const Assignment& a) {
    if (limit_hit) return std::nullopt;
    if (++steps > policy.max_steps) {
      limit_hit = true;
      return std::nullopt;
    }
    auto key = std::make_pair(s, a);
    if (failed.count(key)) return std::nullopt;
    if (!in_stack.insert(key).second) return std::nullopt;
    auto result = explore(s, a);
    in_stack.erase(key);
    if (!result && !limit_hit) failed.insert(std::move(key));
    return result;
  }

  std::optional<TmpNode> explore(const std::vector<LocatedVariable>& s,
                                 const Assignment& a) {
    VarSet sv = located_vars(s);
    // (falsify)
    std::vector<int> clause_locs;
    for (const auto& [i, n] : f.nodes())
      if (n.kind == NodeKind::ClauseLeaf && n.clause.vars() == sv &&
          n.clause.falsified_by(a) && follows_set(f, i, s))
        clause_locs.push_back(i);
    if (!clause_locs.empty()) {
      TmpNode leaf;
      leaf.located = s;
      leaf.assignment = a;
      leaf.falsifies = clause_locs.front();
      return leaf;
    }
    // (forall-branch)
    std::vector<LocatedVariable> univ;
    for (const auto& lv : candidates)
      if (lv.universal && follows_set(f, lv.location, s))
        univ.push_back(lv);
    maybe_shuffle(univ);
    for (const auto& lv : univ) {
      auto s2 = lv_sorted([&] {
        auto v = s;
        v.push_back(lv);
        return v;
      }());
      for (Value b = 0; b <= 1; ++b) {
        auto sub = search(s2, a.extended(lv.var, b));
        if (limit_hit) return std::nullopt;
        if (sub) {
          TmpNode node;
          node.located = s;
          node.assignment = a;
          node.children.push_back(std::move(*sub));
          return node;
        }
      }
    }
    // (Q-branch)
    std::vector<LocatedVariable> qcand;
    for (const auto& lv : candidates) {
      if (std::find(s.begin(), s.end(), lv) != s.end()) continue;
      auto s2 = s;
      s2.push_back(lv);
      if (coherent(f, s2)) qcand.push_back(lv);
    }
    maybe_shuffle(qcand);
    for (const auto& lv : qcand) {
      // each element of S lands in S0, in S1, or in both
      long combos = 1;
      for (size_t j = 0; j < s.size(); ++j) combos *= 3;
      for (long k = 0; k < combos; ++k) {
        std::vector<LocatedVariable> s0{lv}, s1{lv};
        long rest = k;
        for (const auto& e : s) {
          switch (rest % 3) {
            case 0:
              s0.push_back(e);
              s1.push_back(e);
              break;
            case 1:
              s0.push_back(e);
              break;
            case 2:
              s1.push_back(e);
              break;
          }
          rest /= 3;
        }
        s0 = lv_sorted(std::move(s0));
        s1 = lv_sorted(std::move(s1));
        Assignment a0 = a.restricted(located_vars(lv_minus(s0, {lv})))
                            .extended(lv.var, 0);
        auto sub0 = search(s0, a0);
        if (limit_hit) return std::nullopt;
        if (!sub0) continue;
        Assignment a1 = a.restricted(located_vars(lv_minus(s1, {lv})))
                            .extended(lv.var, 1);
        auto sub1 = search(s1, a1);
        if (limit_hit) return std::nullopt;
        if (!sub1) continue;
        TmpNode node;
        node.located = s;
        node.assignment = a;
        node.children.push_back(std::move(*sub0));
        node.children.push_back(std::move(*sub1));
        return node;
      }
    }
    return std::nullopt;
  }
};

int flatten(const TmpNode& n, Trace& t) {
  TraceNode out;
  out.located = n.located;
  out.assignment = n.assignment;
  out.falsifies = n.falsifies;
  t.nodes.push_back(out);
  int id = t.node_count() - 1;
  std::vector<int> kids;
  for (const TmpNode& c : n.children) kids.push_back(flatten(c, t));
  t.nodes[id].children = std::move(kids);
  return id;
}

}  // namespace

DetectResult detect_falsity(const QcbfFormula& f, const SearchPolicy& policy) {
  Searcher s(f, policy);
  auto found = s.search({}, Assignment());
  DetectResult out;
  out.steps = s.steps;
  if (found) {
    out.status = DetectResult::Status::Found;
    out.trace.root = flatten(*found, out.trace);
  } else if (s.limit_hit) {
    out.status = DetectResult::Status::ResourceLimit;
  } else {
    out.status = DetectResult::Status::NotFound;
  }
  return out;
}

namespace {

int first_binder_above(const QcbfFormula& f, int i, Var v) {
  for (int k = f.node(i).parent; k >= 0; k = f.node(k).parent) {
    const auto& n = f.node(k);
    if ((n.kind == NodeKind::Exists || n.kind == NodeKind::Forall) &&
        n.bound == v)
      return k;
  }
  throw std::logic_error("no binder above location for variable");
}

LocatedVariable locate(const QcbfFormula& f, int i, Var v) {
  int k = first_binder_above(f, i, v);
  return {k, v, f.node(k).kind == NodeKind::Forall};
}

/// Deepest location in a nonempty located set.
int lowest_location(const QcbfFormula& f,
                    const std::vector<LocatedVariable>& s) {
  int best = -1, bestd = -1;
  for (const auto& lv : s) {
    int d = f.depth(lv.location);
    if (d > bestd) {
      bestd = d;
      best = lv.location;
    }
  }
  return best;
}

}  // namespace

ClauseProof trace_to_proof(const QcbfFormula& f, const Trace& t) {
  {
    auto bad = validate_trace(f, t);
    if (!bad.empty())
      throw std::invalid_argument("trace_to_proof: invalid trace: " +
                                  bad[0].message);
    const TraceNode& root = t.nodes[t.root];
    if (!root.located.empty() || !root.assignment.items().empty())
      throw std::invalid_argument(
          "trace_to_proof: root label must be (emptyset, e)");
  }
  ClauseProof out;
  auto append = [&](ClauseStep s) {
    out.steps.push_back(std::move(s));
    return out.length() - 1;
  };
  // flows from the end location of a subproof up to "to" (exclusive walk up)
  auto upflow_to = [&](int pos, int to) {
    while (out.steps[pos].result.location != to) {
      ClauseStep s;
      s.rule = ClauseRule::UpwardFlow;
      s.premises = {pos};
      s.result = {f.node(out.steps[pos].result.location).parent,
                  out.steps[pos].result.clause};
      pos = append(std::move(s));
    }
    return pos;
  };
  auto downflow_to = [&](int pos, int to) {
    while (out.steps[pos].result.location != to) {
      // walk one step down along to's ancestor chain
      int cur = out.steps[pos].result.location;
      int next = to;
      while (f.node(next).parent != cur) next = f.node(next).parent;
      ClauseStep s;
      s.rule = ClauseRule::DownwardFlow;
      s.premises = {pos};
      s.result = {next, out.steps[pos].result.clause};
      pos = append(std::move(s));
    }
    return pos;
  };

  std::function<int(int)> rec = [&](int id) -> int {
    const TraceNode& n = t.nodes[id];
    if (n.children.empty()) {
      ClauseStep s;
      s.rule = ClauseRule::Clause;
      s.result = {n.falsifies, f.node(n.falsifies).clause};
      return append(std::move(s));
    }
    if (n.children.size() == 1) {
      const TraceNode& c = t.nodes[n.children[0]];
      LocatedVariable lv = lv_minus(c.located, n.located)[0];
      int sub = rec(n.children[0]);
      int pos = upflow_to(sub, f.node(lv.location).children[0]);
      ClauseStep rm;
      rm.rule = ClauseRule::ForallRemoval;
      rm.premises = {pos};
      rm.result = {lv.location,
                   out.steps[pos].result.clause.without_var(lv.var)};
      return append(std::move(rm));
    }
    // Q-branch: resolve the two child clauses at the child of the lowest
    // location of S cup {(j,u)}
    const TraceNode& c0 = t.nodes[n.children[0]];
    LocatedVariable lv = lv_minus(c0.located, n.located)[0];
    auto s_plus = lv_sorted([&] {
      auto v = n.located;
      v.push_back(lv);
      return v;
    }());
    int m = f.node(lowest_location(f, s_plus)).children[0];
    int p0 = rec(n.children[0]);
    int p1 = rec(n.children[1]);
    p0 = upflow_to(p0, f.node(lowest_location(f, c0.located)).children[0]);
    p1 = upflow_to(
        p1, f.node(lowest_location(f, t.nodes[n.children[1]].located))
                .children[0]);
    p0 = downflow_to(p0, m);
    p1 = downflow_to(p1, m);
    ClauseStep rs;
    rs.rule = ClauseRule::Resolve;
    rs.premises = {p0, p1};
    rs.pivot = lv.var;
    rs.result = {m, resolvent(out.steps[p0].result.clause,
                              out.steps[p1].result.clause, lv.var)};
    return append(std::move(rs));
  };
  rec(t.root);
  return out;
}

Trace proof_to_trace(const QcbfFormula& f, const ClauseProof& p) {
  ClauseProofReport rep = check_clause_proof(f, p);
  if (!rep.valid)
    throw std::invalid_argument("proof_to_trace: invalid proof");
  if (!rep.tree_like)
    throw std::invalid_argument("proof_to_trace: proof is not tree-like");
  if (p.steps.empty() || !p.steps.back().result.empty())
    throw std::invalid_argument(
        "proof_to_trace: final judgement must be an empty clause");
  // every step must feed the final one
  {
    std::vector<char> used(p.length(), 0);
    std::function<void(int)> mark = [&](int pos) {
      used[pos] = 1;
      for (int q : p.steps[pos].premises) mark(q);
    };
    mark(p.length() - 1);
    for (int k = 0; k < p.length(); ++k)
      if (!used[k])
        throw std::invalid_argument(
            "proof_to_trace: proof is not tree-like (unused steps)");
  }

  Trace t;
  std::function<int(int)> rec = [&](int pos) -> int {
    const ClauseStep& s = p.steps[pos];
    switch (s.rule) {
      case ClauseRule::Clause: {
        TraceNode leaf;
        for (Var v : s.result.clause.vars())
          leaf.located.push_back(locate(f, s.result.location, v));
        leaf.located = lv_sorted(std::move(leaf.located));
        leaf.assignment = s.result.clause.falsifier();
        leaf.falsifies = s.result.location;
        t.nodes.push_back(std::move(leaf));
        return t.node_count() - 1;
      }
      case ClauseRule::UpwardFlow:
      case ClauseRule::DownwardFlow:
        return rec(s.premises[0]);
      case ClauseRule::ForallRemoval: {
        const ClauseStep& prem = p.steps[s.premises[0]];
        Var y = f.node(s.result.location).bound;
        if (!prem.result.clause.has_var(y))
          throw std::invalid_argument(
              "proof_to_trace: forall-removal without the removed variable "
              "has no trace counterpart");
        int child = rec(s.premises[0]);
        TraceNode node;
        node.located = lv_minus(t.nodes[child].located,
                                {{s.result.location, y, true}});
        node.assignment = t.nodes[child].assignment.restricted(
            located_vars(node.located));
        node.children.push_back(child);
        t.nodes.push_back(std::move(node));
        return t.node_count() - 1;
      }
      case ClauseRule::Resolve: {
        int n0 = rec(s.premises[0]);
        int n1 = rec(s.premises[1]);
        // child assigning pivot -> 0 comes first
        if (t.nodes[n0].assignment.at(s.pivot) != 0) std::swap(n0, n1);
        const auto& sa = t.nodes[n0].located;
        const auto& sb = t.nodes[n1].located;
        LocatedVariable la, lb;
        for (const auto& lv : sa)
          if (lv.var == s.pivot) la = lv;
        for (const auto& lv : sb)
          if (lv.var == s.pivot) lb = lv;
        // the inductive invariant pins both to the first binder above
        if (la != lb)
          throw std::logic_error(
              "proof_to_trace: pivot bound at two distinct locations");
        TraceNode node;
        node.located = lv_minus(lv_sorted([&] {
                                  auto v = sa;
                                  v.insert(v.end(), sb.begin(), sb.end());
                                  return v;
                                }()),
                                {la});
        node.assignment = s.result.clause.falsifier();
        node.children = {n0, n1};
        t.nodes.push_back(std::move(node));
        return t.node_count() - 1;
      }
    }
    throw std::logic_error("proof_to_trace: unknown rule");
  };
  t.root = rec(p.length() - 1);
  return t;
}

}  // namespace qjudge
