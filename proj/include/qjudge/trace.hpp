#ifndef QJUDGE_TRACE_HPP
#define QJUDGE_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qjudge/clause.hpp"
#include "qjudge/model.hpp"

namespace qjudge {

/// A variable together with the quantifier location binding it.
struct LocatedVariable {
  int location = -1;
  Var var = -1;
  bool universal = false;

  auto operator<=>(const LocatedVariable&) const = default;
};

/// Index j follows (i, u) when i is a strict ancestor of j and u stays free
/// at every location on the path below i down to j.
bool follows(const QcbfFormula& f, int j, const LocatedVariable& lv);
bool follows_set(const QcbfFormula& f, int j,
                 const std::vector<LocatedVariable>& s);
/// Pairwise follows in one direction or the other; implies the located
/// variables carry pairwise distinct variables.
bool coherent(const QcbfFormula& f, const std::vector<LocatedVariable>& s);

VarSet located_vars(const std::vector<LocatedVariable>& s);

/// A recursion tree of the falsity search: nodes carry (coherent located
/// set, assignment on its variables); leaves name the clause they falsify.
struct TraceNode {
  std::vector<LocatedVariable> located;  // sorted
  Assignment assignment;
  std::vector<int> children;  // 0, 1 (forall-branch) or 2 (Q-branch)
  int falsifies = -1;         // leaves: clause location
};

struct Trace {
  std::vector<TraceNode> nodes;
  int root = -1;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

struct TraceViolation {
  int node = -1;
  std::string message;
};

std::vector<TraceViolation> validate_trace(const QcbfFormula& f,
                                           const Trace& t);

struct SearchPolicy {
  enum class Kind { Default, Random } kind = Kind::Default;
  uint64_t seed = 0;
  long max_steps = 1 << 20;
};

struct DetectResult {
  enum class Status { Found, NotFound, ResourceLimit } status =
      Status::NotFound;
  Trace trace;      // meaningful when Found; root label (emptyset, e)
  long steps = 0;   // search invocations spent
};

/// Exhaustive backtracking over the nondeterministic choices of the falsity
/// search: try to falsify a clause, else forall-branch on a located
/// variable following S, else Q-branch on a coherent located variable with
/// all splits S0 cup S1 = S (overlap allowed). Finds a trace iff the
/// instance is false, resources permitting.
DetectResult detect_falsity(const QcbfFormula& f, const SearchPolicy& = {});

/// Trace -> tree-like clause judgement proof of an empty clause whose
/// non-flow judgement count equals the trace's node count.
ClauseProof trace_to_proof(const QcbfFormula& f, const Trace& t);

/// Tree-like proof of an empty clause -> trace with root (emptyset, e) and
/// as many nodes as the proof has non-flow judgements. Rejects proofs with
/// unused steps and proofs containing a forall-removal whose premise lacks
/// the removed variable (no trace node can account for those).
Trace proof_to_trace(const QcbfFormula& f, const ClauseProof& p);

}  // namespace qjudge

#endif  // QJUDGE_TRACE_HPP
