#include "qjudge/judgement.hpp"

#include <algorithm>
#include <functional>

namespace qjudge {

int JudgementProof::width() const {
  int w = 0;
  for (const auto& s : steps)
    w = std::max(w, static_cast<int>(s.result.constraint.vars.size()));
  return w;
}

Constraint atom_constraint(const QcInstance& inst, int i) {
  const auto& n = inst.formula.node(i);
  if (n.kind != NodeKind::Atom)
    throw std::invalid_argument("atom_constraint: not an atom location");
  Constraint c;
  c.vars = vs_make(n.args);
  for (const auto& tuple : inst.structure.interpretation(n.relation)) {
    Assignment f;
    bool consistent = true;
    for (size_t j = 0; j < n.args.size(); ++j) {
      auto prev = f.find(n.args[j]);
      if (prev && *prev != tuple[j]) {
        consistent = false;
        break;
      }
      f = f.extended(n.args[j], tuple[j]);
    }
    if (consistent) c.rows.insert(std::move(f));
  }
  return c;
}

namespace {

std::optional<std::string> check_judgement_shape(const QcInstance& inst,
                                                 const Judgement& j) {
  if (!inst.formula.has_index(j.location)) return "unknown location index";
  if (!vs_subset(j.constraint.vars, inst.formula.free_vars(j.location)))
    return "variable-set escape: vars not free at the location";
  for (const auto& f : j.constraint.rows) {
    if (f.domain() != j.constraint.vars) return "row domain mismatch";
    for (const auto& [v, b] : f.items()) {
      int sort = inst.formula.var(v).sort;
      if (b < 0 || b >= inst.structure.universe_size(sort))
        return "row value outside the universe";
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> check_step(const QcInstance& inst,
                                      const JudgementProof& prefix,
                                      const JudgementStep& step) {
  if (auto bad = check_judgement_shape(inst, step.result)) return bad;
  const int n = prefix.length();
  for (int p : step.premises) {
    if (p < 0 || p >= n) return "premise position out of range";
  }
  auto premise = [&](int k) -> const Judgement& {
    return prefix.steps[step.premises[k]].result;
  };
  const int i = step.result.location;
  const Constraint& rc = step.result.constraint;

  switch (step.rule) {
    case JudgementRule::Atom: {
      if (!step.premises.empty()) return "atom takes no premises";
      if (inst.formula.node(i).kind != NodeKind::Atom)
        return "location is not an atom";
      Constraint want = atom_constraint(inst, i);
      if (rc.vars != want.vars) return "result vars differ from the atom's";
      if (rc.rows != want.rows) return "row-set mismatch with the atom rows";
      return std::nullopt;
    }
    case JudgementRule::Projection: {
      if (step.premises.size() != 1) return "projection takes one premise";
      const Judgement& p = premise(0);
      if (p.location != i) return "location differs from the premise's";
      if (!vs_subset(step.projection_to, p.constraint.vars))
        return "projection target escapes the premise vars";
      if (rc.vars != step.projection_to)
        return "result vars differ from the projection target";
      if (rc.rows != project(p.constraint, step.projection_to).rows)
        return "row-set mismatch with the restriction";
      return std::nullopt;
    }
    case JudgementRule::Join: {
      if (step.premises.size() != 2) return "join takes two premises";
      const Judgement& p1 = premise(0);
      const Judgement& p2 = premise(1);
      if (p1.location != i || p2.location != i)
        return "join premises must sit at the result location";
      Constraint want = join(p1.constraint, p2.constraint);
      if (rc.vars != want.vars) return "result vars differ from the union";
      if (rc.rows != want.rows) return "row-set mismatch with the join";
      return std::nullopt;
    }
    case JudgementRule::UpwardFlow: {
      if (step.premises.size() != 1) return "upward flow takes one premise";
      const Judgement& p = premise(0);
      if (!inst.formula.is_parent(i, p.location))
        return "wrong parent link: result location is not the premise's parent";
      if (rc.vars != p.constraint.vars || rc.rows != p.constraint.rows)
        return "flow must keep the constraint unchanged";
      return std::nullopt;
    }
    case JudgementRule::ForallElimination: {
      if (step.premises.size() != 1)
        return "forall-elimination takes one premise";
      const Judgement& p = premise(0);
      if (!inst.formula.is_parent(i, p.location))
        return "wrong parent link: result location is not the premise's parent";
      const auto& pn = inst.formula.node(i);
      if (pn.kind != NodeKind::Forall)
        return "result location is not a universal quantifier";
      if (pn.bound != step.eliminated)
        return "eliminated variable is not the one quantified here";
      if (!vs_contains(p.constraint.vars, step.eliminated))
        return "eliminated variable not in the premise vars";
      int sort = inst.formula.var(step.eliminated).sort;
      Constraint want = forall_eliminate(
          p.constraint, step.eliminated,
          inst.structure.universe_values(sort));
      if (rc.vars != want.vars)
        return "result vars must drop exactly the eliminated variable";
      if (rc.rows != want.rows)
        return "row-set mismatch with the universal elimination";
      return std::nullopt;
    }
    case JudgementRule::DownwardFlow: {
      if (step.premises.size() != 1) return "downward flow takes one premise";
      const Judgement& p = premise(0);
      if (!inst.formula.is_parent(p.location, i))
        return "wrong parent link: premise location is not the result's parent";
      if (rc.vars != p.constraint.vars || rc.rows != p.constraint.rows)
        return "flow must keep the constraint unchanged";
      return std::nullopt;
    }
  }
  return "unknown rule";
}

JudgementProofReport check_proof(const QcInstance& inst,
                                 const JudgementProof& proof) {
  JudgementProofReport rep;
  rep.length = proof.length();
  rep.width = proof.width();
  JudgementProof prefix;
  for (int k = 0; k < proof.length(); ++k) {
    const auto& step = proof.steps[k];
    if (auto bad = check_step(inst, prefix, step))
      rep.violations.push_back({k, *bad});
    if (step.result.empty()) rep.refutes = true;
    prefix.steps.push_back(step);
  }
  rep.valid = rep.violations.empty();
  return rep;
}

QcFormula extract_defining_formula(const QcInstance& inst,
                                   const JudgementProof& proof, int position) {
  if (position < 0 || position >= proof.length())
    throw std::invalid_argument("extract: position out of range");
  JudgementProof prefix;
  for (int k = 0; k <= position; ++k) {
    if (check_step(inst, prefix, proof.steps[k]))
      throw std::invalid_argument("extract: invalid proof prefix");
    prefix.steps.push_back(proof.steps[k]);
  }
  const Signature& sig = inst.structure.signature();
  std::function<FormulaNode(int)> psi = [&](int p) -> FormulaNode {
    const JudgementStep& s = proof.steps[p];
    switch (s.rule) {
      case JudgementRule::Atom:
        return inst.formula.to_tree(sig, s.result.location);
      case JudgementRule::Projection: {
        FormulaNode inner = psi(s.premises[0]);
        VarSet removed =
            vs_minus(proof.steps[s.premises[0]].result.constraint.vars,
                     s.projection_to);
        for (auto it = removed.rbegin(); it != removed.rend(); ++it) {
          const auto& vi = inst.formula.var(*it);
          inner = FormulaNode::exists(vi.name, sig.sorts.at(vi.sort),
                                      std::move(inner));
        }
        return inner;
      }
      case JudgementRule::Join: {
        std::vector<FormulaNode> kids;
        kids.push_back(psi(s.premises[0]));
        kids.push_back(psi(s.premises[1]));
        return FormulaNode::conj(std::move(kids));
      }
      case JudgementRule::ForallElimination: {
        const auto& vi = inst.formula.var(s.eliminated);
        return FormulaNode::forall(vi.name, sig.sorts.at(vi.sort),
                                   psi(s.premises[0]));
      }
      case JudgementRule::UpwardFlow:
      case JudgementRule::DownwardFlow:
        return psi(s.premises[0]);
    }
    throw std::logic_error("extract: unknown rule");
  };
  return QcFormula::build(sig, psi(position));
}

namespace {

struct RefutationBuilder {
  const QcInstance& inst;
  JudgementProof proof;

  int append(JudgementStep step) {
    proof.steps.push_back(std::move(step));
    return proof.length() - 1;
  }

  // Returns the position of the judgement derived at location i whose rows
  // are the satisfying assignments of phi(i), or -1 for atom-free (always
  // true) subtrees, which never contribute a conjunct.
  int build(int i) {
    const auto& n = inst.formula.node(i);
    switch (n.kind) {
      case NodeKind::True:
        return -1;
      case NodeKind::Atom: {
        JudgementStep s;
        s.rule = JudgementRule::Atom;
        s.result = {i, atom_constraint(inst, i)};
        return append(std::move(s));
      }
      case NodeKind::And: {
        int acc = -1;
        for (int child : n.children) {
          int cp = build(child);
          if (cp < 0) continue;
          JudgementStep up;
          up.rule = JudgementRule::UpwardFlow;
          up.premises = {cp};
          up.result = {i, proof.steps[cp].result.constraint};
          int uppos = append(std::move(up));
          if (acc < 0) {
            acc = uppos;
          } else {
            JudgementStep jn;
            jn.rule = JudgementRule::Join;
            jn.premises = {acc, uppos};
            jn.result = {i, join(proof.steps[acc].result.constraint,
                                 proof.steps[uppos].result.constraint)};
            acc = append(std::move(jn));
          }
        }
        return acc;
      }
      case NodeKind::Exists: {
        int cp = build(n.children[0]);
        if (cp < 0) return -1;
        const Constraint& c = proof.steps[cp].result.constraint;
        if (vs_contains(c.vars, n.bound)) {
          JudgementStep pr;
          pr.rule = JudgementRule::Projection;
          pr.premises = {cp};
          pr.projection_to = vs_remove(c.vars, n.bound);
          pr.result = {n.children[0], project(c, pr.projection_to)};
          cp = append(std::move(pr));
        }
        JudgementStep up;
        up.rule = JudgementRule::UpwardFlow;
        up.premises = {cp};
        up.result = {i, proof.steps[cp].result.constraint};
        return append(std::move(up));
      }
      case NodeKind::Forall: {
        int cp = build(n.children[0]);
        if (cp < 0) return -1;
        const Constraint& c = proof.steps[cp].result.constraint;
        if (vs_contains(c.vars, n.bound)) {
          JudgementStep el;
          el.rule = JudgementRule::ForallElimination;
          el.premises = {cp};
          el.eliminated = n.bound;
          int sort = inst.formula.var(n.bound).sort;
          el.result = {i, forall_eliminate(
                              c, n.bound,
                              inst.structure.universe_values(sort))};
          return append(std::move(el));
        }
        // forall over a variable that is not free below: flow suffices
        JudgementStep up;
        up.rule = JudgementRule::UpwardFlow;
        up.premises = {cp};
        up.result = {i, c};
        return append(std::move(up));
      }
      default:
        throw std::logic_error("generate_refutation: bad node kind");
    }
  }
};

}  // namespace

std::optional<JudgementProof> generate_refutation(const QcInstance& inst) {
  RefutationBuilder b{inst, {}};
  int root = b.build(inst.formula.root());
  if (root < 0) return std::nullopt;  // atom-free sentences are true
  if (!b.proof.steps[root].result.empty()) return std::nullopt;
  return std::move(b.proof);
}

Assignment translate_assignment(const QcFormula& from, const QcFormula& to,
                                const Assignment& a) {
  Assignment out;
  for (const auto& [v, b] : a.items()) {
    Var w = to.find_var(from.var(v).name);
    if (w < 0)
      throw std::invalid_argument("translate_assignment: unknown variable '" +
                                  from.var(v).name + "'");
    out = out.extended(w, b);
  }
  return out;
}

}  // namespace qjudge
