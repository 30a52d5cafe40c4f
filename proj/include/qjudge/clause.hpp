#ifndef QJUDGE_CLAUSE_HPP
#define QJUDGE_CLAUSE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qjudge/model.hpp"

namespace qjudge {

/// A clause pinned to a formula location; its variables must be free there.
struct ClauseJudgement {
  int location = -1;
  Clause clause;

  bool empty() const { return clause.empty(); }
  auto operator<=>(const ClauseJudgement&) const = default;
};

enum class ClauseRule {
  Clause,
  Resolve,
  UpwardFlow,
  ForallRemoval,
  DownwardFlow,
};

struct ClauseStep {
  ClauseRule rule = ClauseRule::Clause;
  std::vector<int> premises;  // positions of earlier steps (0-based)
  Var pivot = -1;             // Resolve
  ClauseJudgement result;
};

struct ClauseProof {
  std::vector<ClauseStep> steps;

  int length() const { return static_cast<int>(steps.size()); }
  int width() const;
};

/// Judgements not derived by the two flow rules.
int non_flow_count(const ClauseProof& proof);

struct ClauseProofReport {
  bool valid = false;
  int width = 0;
  int length = 0;
  bool refutes = false;
  bool tree_like = false;  // every step used as a premise at most once
  int non_flow_count = 0;
  std::vector<std::pair<int, std::string>> violations;
};

std::optional<std::string> check_clause_step(const QcbfFormula& f,
                                             const ClauseProof& prefix,
                                             const ClauseStep& step);

ClauseProofReport check_clause_proof(const QcbfFormula& f,
                                     const ClauseProof& proof);

struct QResOptions {
  /// The paper's closure resolves on any pivot; restricting pivots to
  /// existentially quantified variables models classical Q-resolution.
  bool existential_pivots_only = false;
  long max_clauses = 200000;
};

/// The smallest clause set containing the input clauses and closed under
/// (non-tautological) resolvents and removal of a universal variable that is
/// innermost among the clause's variables in the prefix. Requires a prenex
/// formula.
std::set<Clause> qres_closure(const QcbfFormula& f, const QResOptions& = {});

/// If target is in the closure, a clause judgement proof ending in
/// (c, target) where c is the matrix index, assembled per the simulation:
/// Clause+UpwardFlow for inputs, Resolve for resolvents, an UpwardFlow
/// chain + ForallRemoval + DownwardFlow chain for universal removal.
std::optional<ClauseProof> qres_closure_derive(const QcbfFormula& f,
                                               const Clause& target,
                                               const QResOptions& = {});

/// Expand shared subderivations so every step is used as a premise at most
/// once and all steps feed the final one.
ClauseProof make_tree_like(const ClauseProof& proof);

}  // namespace qjudge

#endif  // QJUDGE_CLAUSE_HPP
