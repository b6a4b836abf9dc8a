#include <doctest.h>

#include <set>

#include "../support/fixtures.hpp"
#include "../support/iso.hpp"
#include "termrank/cfr/cfr.hpp"
#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"

using namespace termrank;
using namespace termrank::cfr;
using testing::isomorphic;
using testing::load_loop;
using testing::load_ts;

namespace {

const model::Scc& first_nontrivial(const std::vector<model::Scc>& all) {
  for (const auto& s : all) {
    if (!s.trivial) return s;
  }
  throw std::runtime_error("no non-trivial SCC");
}

PropertyMap example_props() {
  return {{"n1", {geom::normalize(geom::parse_constraint("x >= 1")), geom::normalize(geom::parse_constraint("y >= z"))}}};
}

std::set<std::string> as_set(const std::vector<Constraint>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(geom::to_string(c));
  return out;
}

}  // namespace

TEST_CASE("ts_to_chc reproduces the five-clause listing") {
  const CHCProgram p = ts_to_chc(load_ts("example_ts.json"));
  CHECK(p.clauses.size() == 5);
  CHECK(p.entry == "n0");
  CHECK(dump(p) ==
        "q_n0(x,y,z) :- q_n1(x,y,z).\n"
        "q_n1(x,y,z) :- {x >= 1}, q_n2(x,y,z).\n"
        "q_n1(x,y,z) :- {x <= 0}, q_n3(x,y,z).\n"
        "q_n2(x,y,z) :- {y <= z - 1, y' = y + 1}, q_n1(x,y',z).\n"
        "q_n2(x,y,z) :- {y >= z, x' = x - 1}, q_n1(x',y,z).\n");
}

TEST_CASE("ts_to_chc and chc_to_ts are inverse") {
  for (const char* name : {"example_ts.json", "example_refined.json", "nested_ts.json", "spin_ts.json"}) {
    const auto ts = load_ts(name);
    CHECK(model::structurally_equal(chc_to_ts(ts_to_chc(ts)), ts));
  }
  model::TransitionSystem bare{{"x"}, {"a", "b"}, "a", {}};
  const CHCProgram p = ts_to_chc(bare);
  CHECK(p.clauses.empty());
  CHECK(p.preds.size() == 2);
  CHECK(chc_to_ts(p).edges.empty());
}

TEST_CASE("chc_to_ts rejects dangling predicates and drops facts") {
  CHCProgram p = ts_to_chc(load_ts("example_ts.json"));
  p.clauses.push_back(Clause{"fact", "n3", std::nullopt, Polyhedron(model::transition_space(p.vars)), "fact"});
  CHECK(chc_to_ts(p).edges.size() == 5);
  p.clauses.push_back(Clause{"bad", "n3", std::string("nowhere"), Polyhedron(model::transition_space(p.vars)), "bad"});
  CHECK_THROWS_AS(chc_to_ts(p), SemanticError);
}

TEST_CASE("infer_properties") {
  SUBCASE("running example loop head") {
    const auto ts = load_ts("example_ts.json");
    const auto all = model::sccs(ts);
    const PropertyMap props = infer_properties(ts, first_nontrivial(all));
    REQUIRE(props.size() == 1);
    REQUIRE(props.count("n1"));
    CHECK(as_set(props.at("n1")) == std::set<std::string>{"x >= 1", "y >= z"});
    CHECK(infer_properties(ts, first_nontrivial(all), true).size() == 2);
  }
  SUBCASE("no guards") {
    const auto ts = model::as_transition_system(load_loop("loop2.json"));
    auto loop = load_loop("loop2.json");
    loop.rel = Polyhedron(loop.rel.space(), geom::parse_constraints("x' = x + y, y' = y + z, z' = z - 1"));
    const auto bare = model::as_transition_system(loop);
    CHECK(infer_properties(bare, model::sccs(bare)[0]).empty());
    CHECK(infer_properties(ts, model::sccs(ts)[0]).at("l0").size() == 1);
  }
  SUBCASE("complementary pair collapses") {
    model::TransitionSystem ts{{"x"}, {"a", "b"}, "a", {}};
    const auto space = model::transition_space(ts.vars);
    ts.edges.push_back({"e1", "a", "b", Polyhedron(space, geom::parse_constraints("x >= 1, x' = x - 1"))});
    ts.edges.push_back({"e2", "b", "a", Polyhedron(space, geom::parse_constraints("x <= 0, x' = x + 5"))});
    const PropertyMap props = infer_properties(ts, model::sccs(ts)[0]);
    REQUIRE(props.count("a"));
    CHECK(as_set(props.at("a")) == std::set<std::string>{"x >= 1"});
  }
  SUBCASE("rational complement") {
    model::TransitionSystem ts{{"x"}, {"a"}, "a", {}};
    const auto space = model::transition_space(ts.vars);
    ts.edges.push_back({"e1", "a", "a", Polyhedron(space, geom::parse_constraints("x > 0, x' = x - 1"))});
    ts.edges.push_back({"e2", "a", "a", Polyhedron(space, geom::parse_constraints("x <= 0, x' = x + 1"))});
    CHECK(as_set(infer_properties(ts, model::sccs(ts)[0]).at("a")) == std::set<std::string>{"x > 0"});
  }
}

TEST_CASE("partial_evaluate reproduces the nine-clause listing") {
  const auto ts = load_ts("example_ts.json");
  const CHCProgram pe = partial_evaluate(ts_to_chc(ts), example_props());
  CHECK(pe.clauses.size() == 9);
  CHECK(pe.preds.size() == 8);
  std::map<std::string, int> per_base;
  for (const auto& [name, v] : pe.versions) ++per_base[v.base];
  CHECK(per_base == std::map<std::string, int>{{"n0", 1}, {"n1", 3}, {"n2", 2}, {"n3", 2}});
  CHECK(isomorphic(chc_to_ts(pe), load_ts("example_refined.json")));

  // The strengthened constraints of Q5..Q8 all appear.
  const auto pe_fixture = load_ts("example_refined.json");
  for (const char* q : {"Q5", "Q6", "Q7", "Q8"}) {
    bool found = false;
    for (const auto& c : pe.clauses) found = found || geom::equivalent(c.constraint, pe_fixture.edge(q).rel);
    CHECK_MESSAGE(found, q);
  }
  SUBCASE("every specialized clause strengthens its source") {
    for (const auto& c : pe.clauses) CHECK(geom::entails(c.constraint, ts.edge(c.origin).rel));
  }
  SUBCASE("versions are distinct") {
    std::set<std::pair<std::string, std::set<std::string>>> seen;
    for (const auto& [name, v] : pe.versions) CHECK(seen.emplace(v.base, as_set(v.context)).second);
  }
  SUBCASE("refinement separates the phases") {
    auto count = [](const model::TransitionSystem& t) {
      int k = 0;
      for (const auto& s : model::sccs(t)) k += !s.trivial;
      return k;
    };
    CHECK(count(ts) == 1);
    CHECK(count(chc_to_ts(pe)) == 2);
  }
}

TEST_CASE("partial_evaluate edge cases") {
  SUBCASE("no properties keeps the program") {
    for (const char* name : {"example_ts.json", "nested_ts.json", "spin_ts.json"}) {
      const auto ts = load_ts(name);
      const CHCProgram pe = partial_evaluate(ts_to_chc(ts), {});
      CHECK(pe.preds == ts.locations);
      CHECK(isomorphic(chc_to_ts(pe), ts));
    }
  }
  SUBCASE("unreachable predicates vanish") {
    auto ts = load_ts("example_ts.json");
    ts.locations.push_back("island");
    ts.edges.push_back({"lost", "island", "n1", ts.edge("Q0").rel});
    const CHCProgram pe = partial_evaluate(ts_to_chc(ts), {});
    CHECK(std::find(pe.preds.begin(), pe.preds.end(), "island") == pe.preds.end());
    for (const auto& c : pe.clauses) CHECK(c.origin != "lost");
  }
  SUBCASE("version cap") {
    PeOptions opts;
    opts.version_cap = 2;
    CHECK_THROWS_AS(partial_evaluate(ts_to_chc(load_ts("example_ts.json")), example_props(), opts), ResourceError);
  }
  SUBCASE("unknown predicate in properties") {
    CHECK_THROWS_AS(partial_evaluate(ts_to_chc(load_ts("example_ts.json")), {{"nope", {}}}), SemanticError);
  }
}

TEST_CASE("refine infers properties and yields the refined system") {
  const Refinement r = refine(load_ts("example_ts.json"));
  CHECK(r.props.size() == 1);
  CHECK(isomorphic(r.refined, load_ts("example_refined.json")));
}

TEST_CASE("scc_subsystem") {
  const auto ts = load_ts("example_ts.json");
  const auto all = model::sccs(ts);
  const auto sub = scc_subsystem(ts, first_nontrivial(all));
  CHECK(sub.init == "entry");
  CHECK(sub.locations.size() == 3);
  CHECK(sub.edges.size() == 4);
  CHECK(sub.edges[0].dst == "n1");
}

TEST_CASE("property file JSON") {
  const PropertyMap p = example_props();
  const PropertyMap back = properties_from_json(properties_to_json(p), {"x", "y", "z"});
  CHECK(back == p);
  CHECK_THROWS_AS(properties_from_json(nlohmann::json{{"n1", {"w >= 1"}}}, {"x"}), SemanticError);
}
