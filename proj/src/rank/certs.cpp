#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"
#include "termrank/rank/ranking.hpp"

namespace termrank::rank {

using nlohmann::json;

namespace {

void expect_kind(const json& j, const char* kind) {
  if (!j.is_object() || j.value("kind", "") != kind) {
    throw SemanticError(std::string("expected a certificate of kind \"") + kind + "\"");
  }
}

}  // namespace

json to_json(const LRFCert& c) { return json{{"kind", "lrf"}, {"rho", geom::to_json(c.rho)}}; }

json to_json(const MLRFCert& c) {
  json comps = json::array();
  for (const auto& f : c.components) comps.push_back(geom::to_json(f));
  return json{{"kind", "mlrf"}, {"components", comps}};
}

json to_json(const LexCert& c) {
  json stages = json::array();
  for (const auto& s : c.stages) {
    json funcs = json::object();
    for (const auto& [l, f] : s.functions) funcs[l] = geom::to_json(f);
    stages.push_back(json{{"ranked", s.ranked}, {"functions", funcs}});
  }
  return json{{"kind", "lex"}, {"dead_edges", c.dead_edges}, {"stages", stages}};
}

json to_json(const RecurrentSetWitness& w) {
  return json{{"kind", "recurrent_set"}, {"constraints", model::constraint_strings(w.set)}, {"round", w.round}};
}

LRFCert lrf_from_json(const json& j) {
  expect_kind(j, "lrf");
  return LRFCert{geom::affine_from_json(j.at("rho"))};
}

MLRFCert mlrf_from_json(const json& j) {
  expect_kind(j, "mlrf");
  MLRFCert c;
  for (const auto& f : j.at("components")) c.components.push_back(geom::affine_from_json(f));
  return c;
}

LexCert lex_from_json(const json& j) {
  expect_kind(j, "lex");
  LexCert c;
  c.dead_edges = j.at("dead_edges").get<std::vector<std::string>>();
  for (const auto& s : j.at("stages")) {
    LexStage stage;
    stage.ranked = s.at("ranked").get<std::vector<std::string>>();
    for (const auto& [l, f] : s.at("functions").items()) stage.functions[l] = geom::affine_from_json(f);
    c.stages.push_back(std::move(stage));
  }
  return c;
}

RecurrentSetWitness recurrent_from_json(const json& j, const std::vector<geom::VarId>& vars) {
  expect_kind(j, "recurrent_set");
  std::vector<geom::Constraint> rows;
  for (const auto& s : j.at("constraints")) rows.push_back(geom::parse_constraint(s.get<std::string>()));
  return RecurrentSetWitness{Polyhedron(model::transition_space(vars), rows), j.value("round", std::size_t{0})};
}

}  // namespace termrank::rank
