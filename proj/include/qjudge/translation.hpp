#ifndef QJUDGE_TRANSLATION_HPP
#define QJUDGE_TRANSLATION_HPP

#include <map>
#include <string>

#include "qjudge/clause.hpp"
#include "qjudge/judgement.hpp"
#include "qjudge/model.hpp"

namespace qjudge {

/// A QCSP instance behaving exactly like the source QCBF: one sort with
/// universe {0,1}, one fresh relation per clause leaf whose interpretation
/// is the clause's satisfying assignments. Indices and variable ids are
/// shared with the source formula.
struct TranslationMap {
  QcInstance instance;
  std::map<int, std::string> clause_relation;  // leaf index -> relation name
};

TranslationMap qcsp_translation(const QcbfFormula& f);

/// Clause judgement proof -> constraint judgement proof on the translation,
/// with length <= 2s and width <= w+1. Every clause judgement (i, alpha)
/// gets a produced judgement (i, vars(alpha), F) excluding alpha's unique
/// falsifying assignment: Clause maps to Atom, Resolve to Join+Projection,
/// ForallRemoval to ForallElimination (or a flow when the removed variable
/// is absent), flows to flows.
JudgementProof clause_to_constraint_proof(const QcbfFormula& f,
                                          const TranslationMap& tr,
                                          const ClauseProof& cp);

/// Constraint judgement proof on the translation -> clause judgement proof,
/// with length <= s * max(w * 2^(w-1), 1) and width <= w. Every constraint
/// judgement (i, V, F) and assignment g outside F gets a produced clause
/// judgement at i over a subset of V that g falsifies.
ClauseProof constraint_to_clause_proof(const QcbfFormula& f,
                                       const TranslationMap& tr,
                                       const JudgementProof& jp);

}  // namespace qjudge

#endif  // QJUDGE_TRANSLATION_HPP
