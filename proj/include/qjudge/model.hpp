#ifndef QJUDGE_MODEL_HPP
#define QJUDGE_MODEL_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qjudge/constraint.hpp"
#include "qjudge/literal.hpp"

namespace qjudge {

/// Raised when an object cannot be represented at all (unknown names,
/// irreconcilable sorts). Representable-but-wrong data is reported by the
/// validate functions instead.
struct BuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Signature {
  struct Relation {
    std::string name;
    std::vector<int> arity;  // sort ids
  };

  std::vector<std::string> sorts;
  std::vector<Relation> relations;

  int sort_id(const std::string& name) const;      // -1 if absent
  int relation_id(const std::string& name) const;  // -1 if absent
};

/// A finite multi-sorted structure. Universe elements are interned per sort
/// in document order; interpretations keep the raw name tuples so that
/// invalid data stays representable and reportable.
class Structure {
 public:
  using NamedTuple = std::vector<std::string>;

  Structure() = default;
  Structure(Signature sig,
            std::vector<std::vector<std::string>> universes_by_sort,
            std::vector<std::vector<NamedTuple>> tuples_by_relation);

  const Signature& signature() const { return sig_; }
  int universe_size(int sort) const;
  const std::vector<std::string>& universe(int sort) const;
  std::vector<Value> universe_values(int sort) const;  // 0..size-1
  const std::string& element_name(int sort, Value v) const;
  int element_id(int sort, const std::string& name) const;  // -1 if absent

  const std::set<std::vector<Value>>& interpretation(int relation) const;
  const std::vector<NamedTuple>& raw_tuples(int relation) const;
  bool tuple_in(int relation, const std::vector<Value>& t) const;

  /// Tuples that failed interning plus empty-universe reports.
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  Signature sig_;
  std::vector<std::vector<std::string>> universes_;
  std::vector<std::map<std::string, Value>> element_ids_;
  std::vector<std::vector<NamedTuple>> raw_;
  std::vector<std::set<std::vector<Value>>> interps_;
  std::vector<std::string> violations_;
};

enum class NodeKind { Atom, And, Exists, Forall, True, ClauseLeaf };

/// Construction-time formula tree; indices are assigned on build (depth
/// first preorder starting at 1, matching the running example's numbering).
struct FormulaNode {
  NodeKind kind = NodeKind::True;
  std::string relation;            // Atom
  std::vector<std::string> args;   // Atom
  std::string var, sort;           // quantifiers (sort empty for QCBF)
  std::vector<std::string> lits;   // ClauseLeaf, "-x" for negative
  std::vector<FormulaNode> children;

  static FormulaNode atom(std::string rel, std::vector<std::string> args);
  static FormulaNode conj(std::vector<FormulaNode> children);
  static FormulaNode exists(std::string var, std::string sort,
                            FormulaNode child);
  static FormulaNode forall(std::string var, std::string sort,
                            FormulaNode child);
  static FormulaNode top();
  static FormulaNode clause(std::vector<std::string> lits);
  static FormulaNode qexists(std::string var, FormulaNode child);
  static FormulaNode qforall(std::string var, FormulaNode child);
};

/// An indexed qc-formula tree. Indices are names, not positions: any set of
/// distinct ints works, and evaluation is invariant under re-indexing.
class QcFormula {
 public:
  struct Node {
    NodeKind kind = NodeKind::True;
    int relation = -1;          // Atom: relation id in the signature
    std::vector<Var> args;      // Atom argument variables (may repeat)
    Var bound = -1;             // Exists/Forall
    std::vector<int> children;  // And: arity >= 1; quantifiers: exactly 1
    int parent = -1;            // -1 at the root
    VarSet free;                // cached free-variable set
  };

  struct VarInfo {
    std::string name;
    int sort = -1;
  };

  static QcFormula build(const Signature& sig, const FormulaNode& tree);

  int root() const { return root_; }
  const std::map<int, Node>& nodes() const { return nodes_; }
  bool has_index(int i) const { return nodes_.count(i) != 0; }
  const Node& node(int i) const;  // throws std::out_of_range
  bool is_parent(int i, int j) const;

  int var_count() const { return static_cast<int>(vars_.size()); }
  const VarInfo& var(Var v) const { return vars_.at(v); }
  Var find_var(const std::string& name) const;  // -1 if absent

  VarSet free_vars(int i) const { return node(i).free; }

  /// Copy with indices renamed by a bijection (must cover every index).
  QcFormula reindexed(const std::map<int, int>& renaming) const;
  /// Export the subtree at i as a construction tree (signature needed for
  /// relation names).
  FormulaNode to_tree(const Signature& sig, int i) const;

 private:
  std::map<int, Node> nodes_;
  int root_ = -1;
  std::vector<VarInfo> vars_;
};

/// An indexed QCBF tree: clause leaves under conjunction and propositional
/// quantifiers, closed at the root.
class QcbfFormula {
 public:
  struct Node {
    NodeKind kind = NodeKind::ClauseLeaf;
    Clause clause;              // ClauseLeaf
    Var bound = -1;             // Exists/Forall
    std::vector<int> children;  // And: arity >= 1; quantifiers: exactly 1
    int parent = -1;
    VarSet free;
  };

  static QcbfFormula build(const FormulaNode& tree);

  int root() const { return root_; }
  const std::map<int, Node>& nodes() const { return nodes_; }
  bool has_index(int i) const { return nodes_.count(i) != 0; }
  const Node& node(int i) const;
  bool is_parent(int i, int j) const;

  int var_count() const { return static_cast<int>(vars_.size()); }
  const std::string& var_name(Var v) const { return vars_.at(v); }
  Var find_var(const std::string& name) const;

  VarSet free_vars(int i) const { return node(i).free; }

  /// Depth of index i from the root (root = 0).
  int depth(int i) const;
  /// True iff i is an ancestor of j (i <= j in the tree order).
  bool is_ancestor(int i, int j) const;

 private:
  std::map<int, Node> nodes_;
  int root_ = -1;
  std::vector<std::string> vars_;
};

struct QcInstance {
  QcFormula formula;
  Structure structure;
};

std::vector<std::string> validate_instance(const QcInstance& inst);
std::vector<std::string> validate_instance(const QcbfFormula& f);

int formula_width(const QcFormula& f);
int formula_width(const QcbfFormula& f);

/// Brute-force semantic oracle. Quantifiers enumerate the quantified
/// variable's universe; results are memoized on (index, assignment
/// restricted to the free variables), which keeps the recursion exact while
/// avoiding re-evaluation blowup.
class Evaluator {
 public:
  Evaluator(const QcFormula& f, const Structure& b) : f_(&f), b_(&b) {}

  /// a must be defined exactly on free_vars(index), with sort-correct
  /// values; throws std::invalid_argument otherwise.
  bool evaluate(int index, const Assignment& a);

 private:
  bool eval(int index, const Assignment& a);
  const QcFormula* f_;
  const Structure* b_;
  std::map<std::pair<int, Assignment>, bool> memo_;
};

bool evaluate(const QcInstance& inst, int index, const Assignment& a);
bool evaluate(const QcInstance& inst);  // root under the empty assignment

class QcbfEvaluator {
 public:
  explicit QcbfEvaluator(const QcbfFormula& f) : f_(&f) {}
  bool evaluate(int index, const Assignment& a);

 private:
  bool eval(int index, const Assignment& a);
  const QcbfFormula* f_;
  std::map<std::pair<int, Assignment>, bool> memo_;
};

bool evaluate(const QcbfFormula& f, int index, const Assignment& a);
bool evaluate(const QcbfFormula& f);

/// All sort-correct assignments on the given variables.
std::vector<Assignment> all_assignments(const QcFormula& f,
                                        const Structure& b, const VarSet& vs);
/// All {0,1} assignments on the given variables.
std::vector<Assignment> all_bool_assignments(const VarSet& vs);

/// For a prenex QCBF (a chain of quantifiers over a conjunction of
/// clauses), the index of the matrix conjunction; nullopt otherwise.
std::optional<int> prenex_matrix(const QcbfFormula& f);
/// True when the formula is a chain of quantifiers over a quantifier-free
/// part (atoms and conjunctions only).
bool is_prenex(const QcFormula& f);

}  // namespace qjudge

#endif  // QJUDGE_MODEL_HPP
