#include "qjudge/translation.hpp"

#include <algorithm>
#include <functional>

namespace qjudge {

TranslationMap qcsp_translation(const QcbfFormula& f) {
  {
    auto bad = validate_instance(f);
    if (!bad.empty())
      throw std::invalid_argument("qcsp_translation: invalid QCBF: " + bad[0]);
  }
  // fresh relation names are "C<index>", keyed by clause leaf index
  std::map<int, std::string> relnames;
  std::function<FormulaNode(int)> walk = [&](int i) -> FormulaNode {
    const auto& n = f.node(i);
    switch (n.kind) {
      case NodeKind::ClauseLeaf: {
        std::string rel = "C" + std::to_string(i);
        relnames[i] = rel;
        std::vector<std::string> args;
        for (Var v : n.clause.vars()) args.push_back(f.var_name(v));
        std::sort(args.begin(), args.end());
        return FormulaNode::atom(rel, std::move(args));
      }
      case NodeKind::And: {
        std::vector<FormulaNode> kids;
        for (int c : n.children) kids.push_back(walk(c));
        return FormulaNode::conj(std::move(kids));
      }
      case NodeKind::Exists:
        return FormulaNode::exists(f.var_name(n.bound), "s",
                                   walk(n.children[0]));
      case NodeKind::Forall:
        return FormulaNode::forall(f.var_name(n.bound), "s",
                                   walk(n.children[0]));
      default:
        throw std::logic_error("qcsp_translation: bad node kind");
    }
  };
  FormulaNode tree = walk(f.root());

  Signature sig;
  sig.sorts = {"s"};

  std::vector<std::vector<Structure::NamedTuple>> tuples;
  for (const auto& [leaf, rel] : relnames) {
    const Clause& c = f.node(leaf).clause;
    // argument order is the clause's variables sorted by name
    std::vector<Var> vars;
    for (Var v : c.vars()) vars.push_back(v);
    std::sort(vars.begin(), vars.end(), [&](Var a, Var b) {
      return f.var_name(a) < f.var_name(b);
    });
    Signature::Relation r;
    r.name = rel;
    r.arity.assign(vars.size(), 0);
    sig.relations.push_back(std::move(r));
    std::vector<Structure::NamedTuple> rows;
    for (const Assignment& g : all_bool_assignments(c.vars())) {
      if (g == c.falsifier()) continue;
      Structure::NamedTuple t;
      for (Var v : vars) t.push_back(g.at(v) ? "1" : "0");
      rows.push_back(std::move(t));
    }
    tuples.push_back(std::move(rows));
  }

  Structure b(sig, {{"0", "1"}}, std::move(tuples));
  QcFormula phi = QcFormula::build(sig, tree);

  // the translation shares indices and variable ids with the source
  for (const auto& [i, n] : f.nodes())
    if (!phi.has_index(i))
      throw std::logic_error("qcsp_translation: index sets differ");
  for (Var v = 0; v < f.var_count(); ++v)
    if (phi.var(v).name != f.var_name(v))
      throw std::logic_error("qcsp_translation: variable ids differ");

  TranslationMap out;
  out.instance = {std::move(phi), std::move(b)};
  out.clause_relation = std::move(relnames);
  return out;
}

JudgementProof clause_to_constraint_proof(const QcbfFormula& f,
                                          const TranslationMap& tr,
                                          const ClauseProof& cp) {
  if (!check_clause_proof(f, cp).valid)
    throw std::invalid_argument("clause_to_constraint_proof: invalid proof");
  JudgementProof out;
  std::vector<int> mapped(cp.length(), -1);  // cp position -> jp position
  auto append = [&](JudgementStep s) {
    out.steps.push_back(std::move(s));
    return out.length() - 1;
  };
  for (int t = 0; t < cp.length(); ++t) {
    const ClauseStep& s = cp.steps[t];
    const int i = s.result.location;
    switch (s.rule) {
      case ClauseRule::Clause: {
        JudgementStep a;
        a.rule = JudgementRule::Atom;
        a.result = {i, atom_constraint(tr.instance, i)};
        mapped[t] = append(std::move(a));
        break;
      }
      case ClauseRule::Resolve: {
        int pa = mapped[s.premises[0]];
        int pb = mapped[s.premises[1]];
        JudgementStep jn;
        jn.rule = JudgementRule::Join;
        jn.premises = {pa, pb};
        jn.result = {i, join(out.steps[pa].result.constraint,
                             out.steps[pb].result.constraint)};
        int jp = append(std::move(jn));
        JudgementStep pr;
        pr.rule = JudgementRule::Projection;
        pr.premises = {jp};
        pr.projection_to = s.result.clause.vars();
        pr.result = {i, project(out.steps[jp].result.constraint,
                                pr.projection_to)};
        mapped[t] = append(std::move(pr));
        break;
      }
      case ClauseRule::UpwardFlow:
      case ClauseRule::DownwardFlow: {
        int p = mapped[s.premises[0]];
        JudgementStep fl;
        fl.rule = s.rule == ClauseRule::UpwardFlow
                      ? JudgementRule::UpwardFlow
                      : JudgementRule::DownwardFlow;
        fl.premises = {p};
        fl.result = {i, out.steps[p].result.constraint};
        mapped[t] = append(std::move(fl));
        break;
      }
      case ClauseRule::ForallRemoval: {
        int p = mapped[s.premises[0]];
        const Constraint& c = out.steps[p].result.constraint;
        Var y = tr.instance.formula.node(i).bound;
        if (vs_contains(c.vars, y)) {
          JudgementStep el;
          el.rule = JudgementRule::ForallElimination;
          el.premises = {p};
          el.eliminated = y;
          el.result = {i, forall_eliminate(c, y, {0, 1})};
          mapped[t] = append(std::move(el));
        } else {
          // removal of an absent variable: the constraint just flows up
          JudgementStep fl;
          fl.rule = JudgementRule::UpwardFlow;
          fl.premises = {p};
          fl.result = {i, c};
          mapped[t] = append(std::move(fl));
        }
        break;
      }
    }
  }
  if (out.length() > 2 * cp.length() || out.width() > cp.width() + 1)
    throw std::logic_error("clause_to_constraint_proof: bound exceeded");
  return out;
}

namespace {

/// Witness bookkeeping for the constraint -> clause direction: for every
/// judgement (i, V, F) and every g: V -> {0,1} outside F we track a clause
/// judgement position at i that g falsifies.
struct ClauseEmitter {
  const QcbfFormula& f;
  ClauseProof out;
  std::map<std::pair<int, Clause>, int> registry;

  int position_of(int loc, const Clause& c) const {
    auto it = registry.find({loc, c});
    return it == registry.end() ? -1 : it->second;
  }

  int append(ClauseStep s) {
    auto key = std::make_pair(s.result.location, s.result.clause);
    out.steps.push_back(std::move(s));
    int pos = out.length() - 1;
    registry.emplace(key, pos);
    return pos;
  }

  const Clause& clause_at(int pos) const {
    return out.steps[pos].result.clause;
  }

  /// Decision-tree resolution: from a total witness map over V produce the
  /// empty clause at loc. Every internal resolvent's literals are falsified
  /// by a single partial assignment, so it is never tautological.
  int derive_falsum(int loc, const VarSet& vars,
                    const std::map<Assignment, int>& witness) {
    std::function<int(size_t, const Assignment&)> rec =
        [&](size_t d, const Assignment& a) -> int {
      if (d == vars.size()) return witness.at(a);
      Var v = vars[d];
      int p0 = rec(d + 1, a.extended(v, 0));
      int p1 = rec(d + 1, a.extended(v, 1));
      const Clause& a0 = clause_at(p0);
      const Clause& a1 = clause_at(p1);
      if (!a0.has_var(v)) return p0;
      if (!a1.has_var(v)) return p1;
      Clause g = resolvent(a0, a1, v);
      int pos = position_of(loc, g);
      if (pos >= 0) return pos;
      ClauseStep s;
      s.rule = ClauseRule::Resolve;
      s.premises = {p0, p1};
      s.pivot = v;
      s.result = {loc, g};
      return append(std::move(s));
    };
    return rec(0, Assignment());
  }
};

std::set<Assignment> restricted_rows(const Constraint& c, const VarSet& u) {
  std::set<Assignment> out;
  for (const auto& r : c.rows) out.insert(r.restricted(u));
  return out;
}

}  // namespace

ClauseProof constraint_to_clause_proof(const QcbfFormula& f,
                                       const TranslationMap& tr,
                                       const JudgementProof& jp) {
  if (!check_proof(tr.instance, jp).valid)
    throw std::invalid_argument("constraint_to_clause_proof: invalid proof");
  ClauseEmitter em{f, {}, {}};
  // per jp step: complement assignment -> witness clause position
  std::vector<std::map<Assignment, int>> witness(jp.length());

  for (int t = 0; t < jp.length(); ++t) {
    const JudgementStep& s = jp.steps[t];
    const int i = s.result.location;
    const Constraint& c = s.result.constraint;
    std::map<Assignment, int>& wit = witness[t];

    switch (s.rule) {
      case JudgementRule::Atom: {
        const Clause& gamma = f.node(i).clause;
        int pos = em.position_of(i, gamma);
        if (pos < 0) {
          ClauseStep cs;
          cs.rule = ClauseRule::Clause;
          cs.result = {i, gamma};
          pos = em.append(std::move(cs));
        }
        for (const Assignment& g : all_bool_assignments(c.vars))
          if (!c.rows.count(g)) wit[g] = pos;
        break;
      }
      case JudgementRule::Projection: {
        const auto& prem = jp.steps[s.premises[0]].result.constraint;
        std::map<Assignment, int> cur = witness[s.premises[0]];
        VarSet cur_vars = prem.vars;
        VarSet drop = vs_minus(prem.vars, s.projection_to);
        for (Var v : drop) {
          VarSet next_vars = vs_remove(cur_vars, v);
          std::set<Assignment> next_rows = restricted_rows(prem, next_vars);
          std::map<Assignment, int> next;
          for (const Assignment& g : all_bool_assignments(next_vars)) {
            if (next_rows.count(g)) continue;
            int p0 = cur.at(g.extended(v, 0));
            int p1 = cur.at(g.extended(v, 1));
            const Clause& a0 = em.clause_at(p0);
            const Clause& a1 = em.clause_at(p1);
            if (!a0.has_var(v)) {
              next[g] = p0;
            } else if (!a1.has_var(v)) {
              next[g] = p1;
            } else {
              Clause gam = resolvent(a0, a1, v);
              int pos = em.position_of(i, gam);
              if (pos < 0) {
                ClauseStep cs;
                cs.rule = ClauseRule::Resolve;
                cs.premises = {p0, p1};
                cs.pivot = v;
                cs.result = {i, gam};
                pos = em.append(std::move(cs));
              }
              next[g] = pos;
            }
          }
          cur = std::move(next);
          cur_vars = next_vars;
        }
        wit = std::move(cur);
        break;
      }
      case JudgementRule::Join: {
        const auto& c1 = jp.steps[s.premises[0]].result.constraint;
        const auto& c2 = jp.steps[s.premises[1]].result.constraint;
        const auto& w1 = witness[s.premises[0]];
        const auto& w2 = witness[s.premises[1]];
        for (const Assignment& g : all_bool_assignments(c.vars)) {
          if (c.rows.count(g)) continue;
          Assignment g1 = g.restricted(c1.vars);
          if (!c1.rows.count(g1)) {
            wit[g] = w1.at(g1);
          } else {
            wit[g] = w2.at(g.restricted(c2.vars));
          }
        }
        break;
      }
      case JudgementRule::UpwardFlow:
      case JudgementRule::DownwardFlow: {
        const auto& prev = witness[s.premises[0]];
        std::map<int, int> moved;  // old position -> position at i
        for (const auto& [g, p] : prev) {
          auto it = moved.find(p);
          int pos;
          if (it != moved.end()) {
            pos = it->second;
          } else {
            const Clause& a = em.clause_at(p);
            pos = em.position_of(i, a);
            if (pos < 0) {
              ClauseStep cs;
              cs.rule = s.rule == JudgementRule::UpwardFlow
                            ? ClauseRule::UpwardFlow
                            : ClauseRule::DownwardFlow;
              cs.premises = {p};
              cs.result = {i, a};
              pos = em.append(std::move(cs));
            }
            moved[p] = pos;
          }
          wit[g] = pos;
        }
        break;
      }
      case JudgementRule::ForallElimination: {
        const auto& prem = jp.steps[s.premises[0]].result.constraint;
        const auto& prev = witness[s.premises[0]];
        Var y = s.eliminated;
        for (const Assignment& g : all_bool_assignments(c.vars)) {
          if (c.rows.count(g)) continue;
          int b = prem.rows.count(g.extended(y, 0)) ? 1 : 0;
          int p = prev.at(g.extended(y, b));
          const Clause& a = em.clause_at(p);
          Clause removed = a.without_var(y);
          int pos = em.position_of(i, removed);
          if (pos < 0) {
            ClauseStep cs;
            cs.rule = ClauseRule::ForallRemoval;
            cs.premises = {p};
            cs.result = {i, removed};
            pos = em.append(std::move(cs));
          }
          wit[g] = pos;
        }
        break;
      }
    }

    // Once a judgement's rows are empty, collapse its witnesses to one
    // empty clause so later flow steps move a single judgement.
    if (c.rows.empty() && !wit.empty()) {
      int bottom = em.derive_falsum(i, c.vars, wit);
      for (auto& [g, p] : wit) p = bottom;
    }
  }

  int w = jp.width();
  long budget = static_cast<long>(jp.length()) *
                std::max<long>(w > 0 ? static_cast<long>(w) * (1L << (w - 1))
                                     : 0L,
                               1L);
  if (em.out.length() > budget || em.out.width() > w)
    throw std::logic_error("constraint_to_clause_proof: bound exceeded");
  return std::move(em.out);
}

}  // namespace qjudge
