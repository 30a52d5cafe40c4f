#ifndef QJUDGE_CONSISTENCY_HPP
#define QJUDGE_CONSISTENCY_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qjudge/judgement.hpp"
#include "qjudge/model.hpp"

namespace qjudge {

/// The table Q[i, V] maintained by the propagation: one entry per index i
/// and V subseteq free(phi(i)) with |V| <= k.
struct ConstraintSystemTable {
  std::map<std::pair<int, VarSet>, std::set<Assignment>> entries;
};

enum class RuleOrder { Standard, Alternate };

struct PropagateResult {
  bool consistent = false;
  ConstraintSystemTable table;
  long iterations = 0;  // passes that changed the table
};

/// Narrowing to a fixpoint: initialize atom entries from the relations and
/// everything else to all maps, then repeat the restriction rule (both
/// directions), the child/parent intersection rule, and the universal
/// narrowing rule until nothing changes. The fixpoint is order-independent;
/// the order parameter exists to demonstrate that.
PropagateResult propagate(const QcInstance& inst, int k,
                          RuleOrder order = RuleOrder::Standard);

/// Iterations never exceed |I| * sum_j C(n,j) |B|^j (one deleted map per
/// changing pass).
long propagate_iteration_bound(const QcInstance& inst, int k);

struct SystemViolation {
  std::string property;  // "keys", "non-empty", "alpha", "pi", "lambda", "eps"
  int location = -1;
  VarSet vars;
  std::string detail;
};

/// Checks the four defining properties of a k-constraint system literally,
/// plus non-emptiness and exact keying.
std::vector<SystemViolation> verify_system(const QcInstance& inst, int k,
                                           const ConstraintSystemTable& table);

bool is_k_judge_consistent(const QcInstance& inst, int k);

struct SaturationResult {
  std::vector<Judgement> derived;     // all width-<=k derivable judgements
  std::optional<JudgementProof> refutation;  // ends in an empty judgement
};

/// Independent width-bounded derivability oracle: closes the atom
/// judgements under the six proof rules, keeping every judgement of width
/// at most k, with derivation back-pointers for proof extraction. Throws
/// ResourceLimitError past the judgement limit.
SaturationResult saturate_judgements(const QcInstance& inst, int k,
                                     long max_judgements = 2000000);

/// A refutation of width <= k extracted from the saturation, or nullopt.
std::optional<JudgementProof> bounded_width_refutation_search(
    const QcInstance& inst, int k, long max_judgements = 2000000);

enum class RewriteRule {
  SplitConjunction = 1,   // split an and-node into two blocks
  PullQuantifier = 2,     // Qv (phi and psi) -> (Qv phi) and psi
  DistributeForall = 3,   // forall y (and_i phi_i) -> and_i (forall y phi_i)
};

struct RewriteParams {
  /// Rules 1 and 2: the child indices forming the first block (rule 1) or
  /// staying under the quantifier (rule 2).
  std::vector<int> first_block;
};

/// Applies one of the three equivalence-preserving transformations at the
/// given index and rebuilds the formula (indices are re-assigned in
/// depth-first preorder). Shape or side-condition failures throw
/// std::invalid_argument.
QcFormula rewrite(const QcFormula& f, const Signature& sig, RewriteRule rule,
                  int at, const RewriteParams& params = {});

struct QwidthCheck {
  bool consistent = false;
  bool oracle_truth = false;
  bool agree = false;
};

/// For prenex sentences whose Q-width the caller asserts to be at most k,
/// k-judge-consistency must coincide with truth.
QwidthCheck qwidth_consistency_check(const QcInstance& inst, int k);

}  // namespace qjudge

#endif  // QJUDGE_CONSISTENCY_HPP
