#ifndef QJUDGE_JUDGEMENT_HPP
#define QJUDGE_JUDGEMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "qjudge/model.hpp"

namespace qjudge {

/// A constraint pinned to a formula location; vars must be free there.
struct Judgement {
  int location = -1;
  Constraint constraint;

  bool empty() const { return constraint.rows.empty(); }
  auto operator<=>(const Judgement&) const = default;
};

enum class JudgementRule {
  Atom,
  Projection,
  Join,
  UpwardFlow,
  ForallElimination,
  DownwardFlow,
};

struct JudgementStep {
  JudgementRule rule = JudgementRule::Atom;
  std::vector<int> premises;  // positions of earlier steps (0-based)
  VarSet projection_to;       // Projection: the target set U
  Var eliminated = -1;        // ForallElimination: the variable y
  Judgement result;
};

struct JudgementProof {
  std::vector<JudgementStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  int width() const;
};

struct ProofViolation {
  int step = -1;  // 0-based position
  std::string message;
};

struct JudgementProofReport {
  bool valid = false;
  int width = 0;
  int length = 0;
  bool refutes = false;
  std::vector<ProofViolation> violations;
};

/// Validates one step against an already-checked prefix; nullopt means the
/// step is fine, otherwise the violated side condition by name.
std::optional<std::string> check_step(const QcInstance& inst,
                                      const JudgementProof& prefix,
                                      const JudgementStep& step);

JudgementProofReport check_proof(const QcInstance& inst,
                                 const JudgementProof& proof);

/// The satisfying-row constraint of the atom at location i (the (atom)
/// rule's F). Repeated argument variables force equal values.
Constraint atom_constraint(const QcInstance& inst, int i);

/// The defining formula of the judgement at the given step: a qc-formula
/// psi with free(psi) = V whose satisfying assignments over the structure
/// are exactly the rows, built per rule (atom -> the atom itself,
/// projection -> an exists-prefix, join -> conjunction, forall-elimination
/// -> forall y psi', flows -> unchanged). The prefix up to the position must
/// be valid.
QcFormula extract_defining_formula(const QcInstance& inst,
                                   const JudgementProof& proof, int position);

/// Bottom-up refutation generator: derives, at every location carrying
/// atoms, the judgement whose rows are exactly the satisfying assignments
/// of that subformula, by the proof rules alone. Returns nullopt when the
/// instance is true (no refutation exists); otherwise a valid proof whose
/// last step is an empty judgement at the root, of width at most the
/// formula width.
std::optional<JudgementProof> generate_refutation(const QcInstance& inst);

/// Rebuild an assignment over `to` from one over `from`, matching variables
/// by name.
Assignment translate_assignment(const QcFormula& from, const QcFormula& to,
                                const Assignment& a);

}  // namespace qjudge

#endif  // QJUDGE_JUDGEMENT_HPP
