#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qjudge/model.hpp"
#include "gen.hpp"

using namespace qjudge;
using testgen::example33_instance;

TEST_CASE("running example validates and uses indices 1..6") {
  QcInstance inst = example33_instance();
  CHECK(validate_instance(inst).empty());
  CHECK(inst.formula.nodes().size() == 6);
  CHECK(inst.formula.root() == 1);
  CHECK(inst.formula.node(2).kind == NodeKind::Forall);
  CHECK(inst.formula.node(3).kind == NodeKind::And);
  CHECK(inst.formula.node(4).kind == NodeKind::Atom);
  CHECK(inst.formula.node(5).kind == NodeKind::Exists);
  CHECK(inst.formula.node(6).kind == NodeKind::Atom);
}

TEST_CASE("sort-swapped tuple is a violation naming the relation") {
  Signature sig = testgen::example33_signature();
  Structure b(sig, {{"a", "b", "c"}, {"d", "e", "f"}}, {{{"d", "a"}}});
  QcInstance inst{example33_instance().formula, b};
  auto bad = validate_instance(inst);
  REQUIRE(!bad.empty());
  bool names_e = false;
  for (const auto& v : bad)
    if (v.find("E") != std::string::npos) names_e = true;
  CHECK(names_e);
}

TEST_CASE("the true sentence validates over any structure") {
  Signature sig = testgen::example33_signature();
  Structure b(sig, {{"a"}, {"d"}}, {{}});
  QcInstance inst{QcFormula::build(sig, FormulaNode::top()), b};
  CHECK(validate_instance(inst).empty());
  CHECK(evaluate(inst));
  CHECK(formula_width(inst.formula) == 0);
}

TEST_CASE("free variable sets of the running example") {
  QcInstance inst = example33_instance();
  Var x = inst.formula.find_var("x");
  Var y = inst.formula.find_var("y");
  CHECK(inst.formula.free_vars(3) == vs_make({x, y}));
  CHECK(inst.formula.free_vars(1).empty());
  CHECK(inst.formula.free_vars(5) == VarSet{y});
  CHECK_THROWS_AS(inst.formula.free_vars(99), std::out_of_range);
}

TEST_CASE("width of the running example is 2") {
  QcInstance inst = example33_instance();
  CHECK(formula_width(inst.formula) == 2);

  Signature sig = testgen::example33_signature();
  FormulaNode prenex = FormulaNode::exists(
      "x", "e",
      FormulaNode::forall("y", "u", FormulaNode::atom("E", {"x", "y"})));
  CHECK(formula_width(QcFormula::build(sig, prenex)) == 2);
}

TEST_CASE("evaluation of the running example") {
  QcInstance inst = example33_instance();
  CHECK(evaluate(inst));  // B satisfies phi

  Var x = inst.formula.find_var("x");
  Var y = inst.formula.find_var("y");
  CHECK(evaluate(inst, 4, testgen::row(inst.formula, inst.structure,
                                       {{"x", "a"}, {"y", "d"}})));
  CHECK(!evaluate(inst, 2, testgen::row(inst.formula, inst.structure,
                                        {{"x", "b"}})));
  // domain mismatch and bad values are rejected
  CHECK_THROWS_AS(evaluate(inst, 4, Assignment()), std::invalid_argument);
  CHECK_THROWS_AS(
      evaluate(inst, 2, Assignment({{x, 7}})), std::invalid_argument);
  (void)y;
}

TEST_CASE("conjunction semantics matches child conjunction exhaustively") {
  testgen::Rng rng(7);
  for (int round = 0; round < 60; ++round) {
    QcInstance inst = testgen::random_instance(rng);
    if (!validate_instance(inst).empty()) continue;
    Evaluator ev(inst.formula, inst.structure);
    for (const auto& [i, n] : inst.formula.nodes()) {
      if (n.kind != NodeKind::And) continue;
      for (const auto& a :
           all_assignments(inst.formula, inst.structure, n.free)) {
        bool whole = ev.evaluate(i, a);
        bool parts = true;
        for (int c : n.children)
          parts = parts && ev.evaluate(
                               c, a.restricted(inst.formula.node(c).free));
        CHECK(whole == parts);
      }
    }
  }
}

TEST_CASE("evaluation is invariant under re-indexing") {
  testgen::Rng rng(8);
  for (int round = 0; round < 40; ++round) {
    QcInstance inst = testgen::random_instance(rng);
    std::map<int, int> renaming;
    for (const auto& [i, n] : inst.formula.nodes())
      renaming[i] = 1000 - 7 * i;
    QcFormula g = inst.formula.reindexed(renaming);
    QcInstance other{g, inst.structure};
    CHECK(evaluate(inst) == evaluate(other));
  }
}

TEST_CASE("qcbf evaluation and width") {
  // exists x forall y exists z ((-y or z) and (y or -z or x))
  FormulaNode tree = FormulaNode::qexists(
      "x",
      FormulaNode::qforall(
          "y", FormulaNode::qexists(
                   "z", FormulaNode::conj([] {
                     std::vector<FormulaNode> kids;
                     kids.push_back(FormulaNode::clause({"-y", "z"}));
                     kids.push_back(FormulaNode::clause({"y", "-z", "x"}));
                     return kids;
                   }()))));
  QcbfFormula f = QcbfFormula::build(tree);
  CHECK(validate_instance(f).empty());
  CHECK(f.nodes().size() == 6);
  CHECK(evaluate(f));
  CHECK(formula_width(f) == 3);
  CHECK(prenex_matrix(f) == 4);

  QcbfFormula contradiction = QcbfFormula::build(FormulaNode::qexists(
      "x", FormulaNode::conj([] {
        std::vector<FormulaNode> kids;
        kids.push_back(FormulaNode::clause({"x"}));
        kids.push_back(FormulaNode::clause({"-x"}));
        return kids;
      }())));
  CHECK(!evaluate(contradiction));
}

TEST_CASE("prenex detection on qc-formulas") {
  QcInstance inst = example33_instance();
  CHECK(!is_prenex(inst.formula));  // the inner exists breaks prenexness
  CHECK(is_prenex(testgen::false2_instance().formula));
}

TEST_CASE("build rejects unrepresentable input") {
  Signature sig = testgen::example33_signature();
  CHECK_THROWS_AS(
      QcFormula::build(sig, FormulaNode::atom("Q", {"x", "y"})), BuildError);
  CHECK_THROWS_AS(
      QcFormula::build(sig, FormulaNode::atom("E", {"x"})), BuildError);
  // same name with two sorts
  CHECK_THROWS_AS(
      QcFormula::build(sig, FormulaNode::atom("E", {"x", "x"})), BuildError);
  CHECK_THROWS_AS(QcbfFormula::build(FormulaNode::clause({"x", "-x"})),
                  BuildError);
}
