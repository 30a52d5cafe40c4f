#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qjudge/constraint.hpp"
#include "gen.hpp"

using namespace qjudge;

namespace {

Assignment mk(std::vector<std::pair<Var, Value>> items) {
  return Assignment(std::move(items));
}

Constraint table(VarSet vars, std::vector<Assignment> rows) {
  Constraint c;
  c.vars = std::move(vars);
  c.rows.insert(rows.begin(), rows.end());
  return c;
}

Constraint random_constraint(testgen::Rng& rng, int max_vars, int max_univ) {
  int n = testgen::pick(rng, 0, max_vars);
  VarSet vars;
  for (int v = 0; v < n; ++v) vars.push_back(v);
  Constraint c;
  c.vars = vars;
  std::vector<Assignment> all{Assignment()};
  for (Var v : vars) {
    std::vector<Assignment> next;
    for (const auto& a : all)
      for (Value b = 0; b < max_univ; ++b) next.push_back(a.extended(v, b));
    all = std::move(next);
  }
  for (const auto& a : all)
    if (testgen::chance(rng, 0.5)) c.rows.insert(a);
  return c;
}

}  // namespace

TEST_CASE("assignment basics") {
  Assignment a = mk({{1, 2}, {0, 1}});
  CHECK(a.domain() == VarSet{0, 1});
  CHECK(a.at(0) == 1);
  CHECK(a.at(1) == 2);
  CHECK(!a.find(3));
  CHECK(a.restricted({1}).items().size() == 1);
  CHECK(a.extended(3, 0).at(3) == 0);
  CHECK(a.extended(0, 5).at(0) == 5);
  CHECK_THROWS_AS(mk({{0, 1}, {0, 2}}), std::invalid_argument);
}

TEST_CASE("projection of the running example atom rows") {
  // F_E over (x, y) interned as x=0, y=1; elements a,b,c -> 0,1,2 and
  // d,e,f -> 0,1,2
  Constraint fe = table({0, 1}, {mk({{0, 0}, {1, 0}}), mk({{0, 0}, {1, 1}}),
                                 mk({{0, 0}, {1, 2}}), mk({{0, 1}, {1, 1}}),
                                 mk({{0, 2}, {1, 2}})});
  Constraint h = project(fe, {0});
  CHECK(h.vars == VarSet{0});
  CHECK(h.rows == table({0}, {mk({{0, 0}}), mk({{0, 1}}), mk({{0, 2}})}).rows);

  CHECK(project(fe, fe.vars) == fe);
  Constraint none = table({}, {});
  CHECK(project(none, {}) == none);
  CHECK_THROWS_AS(project(h, {5}), std::invalid_argument);
}

TEST_CASE("join on a shared schema is intersection") {
  Constraint a = table({0}, {mk({{0, 0}}), mk({{0, 1}})});
  Constraint b = table({0}, {mk({{0, 1}}), mk({{0, 2}})});
  Constraint j = join(a, b);
  CHECK(j.vars == VarSet{0});
  CHECK(j.rows == table({0}, {mk({{0, 1}})}).rows);
}

TEST_CASE("the empty-domain singleton is the join identity") {
  Constraint e = table({}, {Assignment()});
  Constraint a = table({0}, {mk({{0, 0}}), mk({{0, 2}})});
  CHECK(join(a, e) == a);
  CHECK(join(e, a) == a);
  Constraint nothing = table({}, {});
  CHECK(join(a, nothing).rows.empty());
}

TEST_CASE("join on disjoint schemas is the product") {
  Constraint a = table({0}, {mk({{0, 0}})});
  Constraint b = table({1}, {mk({{1, 0}}), mk({{1, 1}})});
  Constraint j = join(a, b);
  CHECK(j.vars == VarSet{0, 1});
  CHECK(j.rows == table({0, 1}, {mk({{0, 0}, {1, 0}}),
                                 mk({{0, 0}, {1, 1}})}).rows);
}

TEST_CASE("forall_eliminate on the running example") {
  Constraint fe = table({0, 1}, {mk({{0, 0}, {1, 0}}), mk({{0, 0}, {1, 1}}),
                                 mk({{0, 0}, {1, 2}}), mk({{0, 1}, {1, 1}}),
                                 mk({{0, 2}, {1, 2}})});
  Constraint g = forall_eliminate(fe, 1, {0, 1, 2});
  CHECK(g.vars == VarSet{0});
  CHECK(g.rows == table({0}, {mk({{0, 0}})}).rows);  // only x -> a survives

  // full table: every remaining map survives
  Constraint full = table({0, 1}, {});
  for (Value x = 0; x < 2; ++x)
    for (Value y = 0; y < 3; ++y) full.rows.insert(mk({{0, x}, {1, y}}));
  Constraint all = forall_eliminate(full, 1, {0, 1, 2});
  CHECK(all.rows.size() == 2);

  Constraint none = table({1}, {});
  CHECK(forall_eliminate(none, 1, {0, 1}).rows.empty());
  CHECK_THROWS_AS(forall_eliminate(none, 0, {0}), std::invalid_argument);
}

TEST_CASE("semi-join containment and eps definition on random constraints") {
  testgen::Rng rng(20260810);
  for (int round = 0; round < 300; ++round) {
    Constraint c1 = random_constraint(rng, 3, 3);
    Constraint c2 = random_constraint(rng, 3, 3);
    Constraint j = join(c1, c2);
    for (const auto& f : project(j, c1.vars).rows) CHECK(c1.rows.count(f));

    if (!c1.vars.empty()) {
      Var y = c1.vars[testgen::pick(rng, 0, static_cast<int>(c1.vars.size()) - 1)];
      std::vector<Value> universe{0, 1, 2};
      Constraint e = forall_eliminate(c1, y, universe);
      // brute-force: f in result iff every extension is a row
      for (const auto& f : testgen::chance(rng, 0.5) ? e.rows : e.rows) {
        for (Value b : universe) CHECK(c1.rows.count(f.extended(y, b)));
      }
      Constraint rest = project(c1, vs_remove(c1.vars, y));
      for (const auto& f : rest.rows) {
        bool all = true;
        for (Value b : universe)
          if (!c1.rows.count(f.extended(y, b))) all = false;
        CHECK(all == (e.rows.count(f) != 0));
      }
    }
  }
}

TEST_CASE("join is commutative and associative") {
  testgen::Rng rng(42);
  for (int round = 0; round < 200; ++round) {
    Constraint a = random_constraint(rng, 3, 2);
    Constraint b = random_constraint(rng, 3, 2);
    Constraint c = random_constraint(rng, 2, 2);
    CHECK(join(a, b) == join(b, a));
    CHECK(join(join(a, b), c) == join(a, join(b, c)));
  }
}
