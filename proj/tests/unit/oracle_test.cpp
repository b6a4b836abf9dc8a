#include <doctest.h>

#include "../support/fixtures.hpp"
#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"
#include "termrank/oracle/oracle.hpp"

using namespace termrank;
using namespace termrank::oracle;
using testing::load;
using testing::load_loop;

namespace {

// Plain re-execution of Loop 2's deterministic updates.
std::size_t loop2_reference(std::int64_t x, std::int64_t y, std::int64_t z) {
  std::size_t steps = 0;
  while (x >= 0) {
    x += y;
    y += z;
    z -= 1;
    ++steps;
  }
  return steps;
}

}  // namespace

TEST_CASE("Loop 1 from (0, 5)") {
  const auto v = run_box(load("loop1.json"), {10, 1000}, std::vector<State>{{0, 5}});
  REQUIRE(v.results.size() == 1);
  CHECK(v.results[0].outcome == Outcome::kTerminated);
  CHECK(v.results[0].steps == 6);
}

TEST_CASE("fixpoint loop has a self-lasso") {
  const auto v = run_box(load("fixpoint.json"), {5, 100}, std::vector<State>{{0}});
  CHECK(v.results[0].outcome == Outcome::kNonterminated);
}

TEST_CASE("Loop 2 from (0, 0, 3)") {
  REQUIRE(loop2_reference(0, 0, 3) == 12);
  const auto v = run_box(load("loop2.json"), {40, 1000}, std::vector<State>{{0, 0, 3}});
  CHECK(v.results[0].outcome == Outcome::kTerminated);
  CHECK(v.results[0].steps == 12);
}

TEST_CASE("steps_curve") {
  SUBCASE("Loop 2 grows linearly") {
    const auto curve = steps_curve(load_loop("loop2.json"), [](std::int64_t k) { return State{0, 0, k}; }, 1, 10,
                                   {1000, 10000});
    std::vector<std::size_t> steps;
    for (const auto& p : curve) {
      CHECK(p.outcome == Outcome::kTerminated);
      CHECK(p.steps == loop2_reference(0, 0, p.k));
      steps.push_back(p.steps);
    }
    CHECK(steps == std::vector<std::size_t>{6, 9, 12, 15, 18, 21, 24, 27, 30, 33});
  }
  SUBCASE("Loop 1 family (0, k)") {
    for (const auto& p : steps_curve(load_loop("loop1.json"), [](std::int64_t k) { return State{0, k}; }, 0, 8,
                                     {10, 1000})) {
      CHECK(p.outcome == Outcome::kTerminated);
      CHECK(p.steps == static_cast<std::size_t>(p.k + 1));
    }
  }
  SUBCASE("empty relation") {
    model::SLCLoop empty{{"x"}, geom::Polyhedron({"x", "x'"}, geom::parse_constraints("x >= 1, x <= 0"))};
    for (const auto& p : steps_curve(empty, [](std::int64_t k) { return State{k}; }, -3, 3, {5, 10})) {
      CHECK(p.outcome == Outcome::kTerminated);
      CHECK(p.steps == 0);
    }
  }
}

TEST_CASE("escapes and budgets are reported, never guessed") {
  SUBCASE("leaving the box") {
    model::SLCLoop up{{"x"}, geom::Polyhedron({"x", "x'"}, geom::parse_constraints("x >= 0, x' = x + 1"))};
    const auto v = run_box(up, {3, 100}, std::vector<State>{{0}});
    CHECK(v.results[0].outcome == Outcome::kEscaped);
  }
  SUBCASE("no integer successor but a rational one") {
    model::SLCLoop half{{"x"}, geom::Polyhedron({"x", "x'"}, geom::parse_constraints("x >= 1, 2x' = x")), };
    const auto v = run_box(half, {8, 100}, std::vector<State>{{3}, {4}});
    CHECK(v.results[0].outcome == Outcome::kEscaped);
    CHECK(v.results[1].outcome == Outcome::kEscaped);  // 4 -> 2 -> 1 -> 1/2
  }
  SUBCASE("budget") {
    const auto v = run_box(load("loop1.json"), {10, 3}, std::vector<State>{{0, 5}});
    CHECK(v.results[0].outcome == Outcome::kBudget);
    CHECK(v.results[0].steps == 3);
  }
  SUBCASE("strict rows tighten over integers") {
    model::SLCLoop l{{"x"}, geom::Polyhedron({"x", "x'"}, geom::parse_constraints("x > 0, x' < x"))};
    const auto v = run_box(l, {4, 100}, std::vector<State>{{4}});
    CHECK(v.results[0].outcome == Outcome::kTerminated);
    CHECK(v.results[0].steps == 4);
  }
}

TEST_CASE("transition systems start anywhere at init") {
  const auto v = run_box(load("example_ts.json"), {3, 1000});
  CHECK(v.results.size() == 343);
  for (const auto& r : v.results) {
    CHECK(r.location == "n0");
    CHECK(r.outcome == Outcome::kTerminated);
  }
  const auto spin = run_box(load("spin_ts.json"), {2, 100});
  for (const auto& r : spin.results) {
    CHECK(r.outcome == (r.initial[0] >= 0 ? Outcome::kNonterminated : Outcome::kTerminated));
  }
}

TEST_CASE("property: parallel kernel matches the serial reference") {
  for (const char* name : {"example_ts.json", "example_refined.json", "loop1.json", "nested_ts.json", "spin_ts.json",
                           "twophase_loop.json", "bounded_loop.json"}) {
    CAPTURE(name);
    const auto m = load(name);
    const auto a = run_box(m, {4, 1000});
    const auto b = run_box_serial(m, {4, 1000});
    CHECK(a.explored == b.explored);
    CHECK(a.reachable == b.reachable);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t i = 0; i < a.results.size(); ++i) {
      CHECK(a.results[i].outcome == b.results[i].outcome);
      CHECK(a.results[i].steps == b.results[i].steps);
    }
  }
}

TEST_CASE("parse_state and JSON") {
  CHECK(parse_state("x=0, y = -5", {"x", "y"}) == State{0, -5});
  CHECK_THROWS_AS(parse_state("x=0", {"x", "y"}), SemanticError);
  CHECK_THROWS_AS(parse_state("x=0,w=1", {"x"}), SemanticError);
  CHECK_THROWS_AS(parse_state("x:0", {"x"}), ParseError);
  const auto v = run_box(load("loop1.json"), {10, 1000}, std::vector<State>{{0, 5}});
  const auto j = to_json(v, {"x", "y"}, {10, 1000});
  CHECK(j["results"][0]["steps"] == 6);
  CHECK(j["results"][0]["outcome"] == "terminated");
  CHECK(j["format"] == 1);
}
