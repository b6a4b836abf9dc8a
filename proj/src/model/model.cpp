#include "termrank/model/model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"

namespace termrank::model {

using geom::AffineFunc;
using geom::Constraint;
using nlohmann::json;

VarId primed(const VarId& v) { return v + "'"; }

bool is_primed(const VarId& v) { return !v.empty() && v.back() == '\''; }

VarId unprimed(const VarId& v) { return is_primed(v) ? v.substr(0, v.size() - 1) : v; }

std::vector<VarId> primed(const std::vector<VarId>& vars) {
  std::vector<VarId> out;
  for (const auto& v : vars) out.push_back(primed(v));
  return out;
}

std::vector<VarId> transition_space(const std::vector<VarId>& vars) {
  std::vector<VarId> out = vars;
  for (const auto& v : vars) out.push_back(primed(v));
  return out;
}

bool TransitionSystem::has_location(const LocId& l) const {
  return std::find(locations.begin(), locations.end(), l) != locations.end();
}

const Edge* TransitionSystem::find_edge(const std::string& id) const {
  for (const auto& e : edges) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const Edge& TransitionSystem::edge(const std::string& id) const {
  if (const Edge* e = find_edge(id)) return *e;
  throw SemanticError("no edge with id '" + id + "'");
}

namespace {

void check_vars(const std::vector<VarId>& vars) {
  std::set<VarId> seen;
  for (const auto& v : vars) {
    if (v.empty() || is_primed(v)) throw SemanticError("invalid variable name '" + v + "'");
    if (!seen.insert(v).second) throw SemanticError("duplicate variable '" + v + "'");
  }
}

void check_rel_space(const Polyhedron& rel, const std::vector<VarId>& vars, const std::string& what) {
  if (rel.space() != transition_space(vars)) {
    throw SemanticError(what + ": relation space does not match the declared variables");
  }
}

std::vector<Constraint> parse_rows(const json& arr, const std::vector<VarId>& vars,
                                   const std::string& what) {
  if (!arr.is_array()) throw SemanticError(what + ": constraints must be an array of strings");
  const std::vector<VarId> space = transition_space(vars);
  const std::set<VarId> allowed(space.begin(), space.end());
  std::vector<Constraint> rows;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw SemanticError(what + ": constraint " + std::to_string(i) + " is not a string");
    const std::string text = arr[i].get<std::string>();
    Constraint c;
    try {
      c = geom::parse_constraint(text);
    } catch (const ParseError& e) {
      throw ParseError(what + ", constraint \"" + text + "\": " + e.what(), e.line(), e.column());
    }
    for (const auto& v : c.lhs.vars()) {
      if (!allowed.count(v)) throw SemanticError(what + ": unknown variable '" + v + "'");
    }
    rows.push_back(geom::normalize(c));
  }
  return rows;
}

std::vector<VarId> parse_vars(const json& doc) {
  if (!doc.contains("vars") || !doc["vars"].is_array()) throw SemanticError("missing \"vars\" array");
  std::vector<VarId> vars;
  for (const auto& v : doc["vars"]) {
    if (!v.is_string()) throw SemanticError("variable names must be strings");
    vars.push_back(v.get<std::string>());
  }
  check_vars(vars);
  if (vars.empty()) throw SemanticError("at least one variable is required");
  return vars;
}

std::string get_string(const json& obj, const char* key, const std::string& what) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw SemanticError(what + ": missing string field \"" + key + "\"");
  }
  return obj[key].get<std::string>();
}

}  // namespace

void validate(const SLCLoop& loop) {
  check_vars(loop.vars);
  if (loop.vars.empty()) throw SemanticError("loop needs at least one variable");
  check_rel_space(loop.rel, loop.vars, "loop");
}

void validate(const TransitionSystem& ts) {
  check_vars(ts.vars);
  std::set<LocId> locs;
  for (const auto& l : ts.locations) {
    if (!locs.insert(l).second) throw SemanticError("duplicate location '" + l + "'");
  }
  if (!locs.count(ts.init)) throw SemanticError("init location '" + ts.init + "' is not declared");
  std::set<std::string> ids;
  for (const auto& e : ts.edges) {
    const std::string what = "edge '" + e.id + "'";
    if (!ids.insert(e.id).second) throw SemanticError("duplicate edge id '" + e.id + "'");
    if (!locs.count(e.src)) throw SemanticError(what + ": unknown source location '" + e.src + "'");
    if (!locs.count(e.dst)) throw SemanticError(what + ": unknown target location '" + e.dst + "'");
    check_rel_space(e.rel, ts.vars, what);
  }
}

Model model_from_json(const json& doc) {
  if (!doc.is_object()) throw SemanticError("model document must be a JSON object");
  const std::vector<VarId> vars = parse_vars(doc);
  const std::vector<VarId> space = transition_space(vars);
  if (doc.contains("loop")) {
    if (doc.contains("transitions")) throw SemanticError("a document holds either \"loop\" or \"transitions\"");
    SLCLoop loop{vars, Polyhedron(space, parse_rows(doc["loop"], vars, "loop"))};
    validate(loop);
    return loop;
  }
  if (!doc.contains("transitions") || !doc["transitions"].is_array()) {
    throw SemanticError("missing \"transitions\" array (or \"loop\")");
  }
  TransitionSystem ts;
  ts.vars = vars;
  ts.init = get_string(doc, "init", "document");
  auto add_loc = [&](const LocId& l) {
    if (!ts.has_location(l)) ts.locations.push_back(l);
  };
  const bool declared = doc.contains("locations");
  if (declared) {
    if (!doc["locations"].is_array()) throw SemanticError("\"locations\" must be an array");
    for (const auto& l : doc["locations"]) {
      if (!l.is_string()) throw SemanticError("location names must be strings");
      if (ts.has_location(l.get<std::string>())) throw SemanticError("duplicate location '" + l.get<std::string>() + "'");
      ts.locations.push_back(l.get<std::string>());
    }
  } else {
    add_loc(ts.init);
  }
  for (std::size_t i = 0; i < doc["transitions"].size(); ++i) {
    const json& t = doc["transitions"][i];
    if (!t.is_object()) throw SemanticError("transition " + std::to_string(i) + " is not an object");
    Edge e;
    e.id = t.contains("id") ? get_string(t, "id", "transition " + std::to_string(i)) : "t" + std::to_string(i);
    const std::string what = "edge '" + e.id + "'";
    e.src = get_string(t, "src", what);
    e.dst = get_string(t, "dst", what);
    e.rel = Polyhedron(space, parse_rows(t.contains("constraints") ? t["constraints"] : json::array(), vars, what));
    if (!declared) {
      add_loc(e.src);
      add_loc(e.dst);
    }
    ts.edges.push_back(std::move(e));
  }
  validate(ts);
  return ts;
}

Model parse_input(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Map the byte offset to a line/column pair.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("malformed JSON", line, col);
  }
  return model_from_json(doc);
}

std::vector<std::string> constraint_strings(const Polyhedron& p) {
  std::vector<std::string> out;
  for (const auto& c : p.constraints()) out.push_back(geom::to_string(c));
  return out;
}

json serialize(const SLCLoop& loop) {
  return json{{"vars", loop.vars}, {"loop", constraint_strings(loop.rel)}};
}

json serialize(const TransitionSystem& ts) {
  json edges = json::array();
  for (const auto& e : ts.edges) {
    edges.push_back(json{{"id", e.id}, {"src", e.src}, {"dst", e.dst}, {"constraints", constraint_strings(e.rel)}});
  }
  return json{{"vars", ts.vars}, {"locations", ts.locations}, {"init", ts.init}, {"transitions", edges}};
}

json serialize(const Model& m) {
  return std::visit([](const auto& x) { return serialize(x); }, m);
}

std::vector<Scc> sccs(const TransitionSystem& ts) {
  const std::size_t n = ts.locations.size();
  std::map<LocId, std::size_t> index_of;
  for (std::size_t i = 0; i < n; ++i) index_of[ts.locations[i]] = i;
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : ts.edges) succ[index_of.at(e.src)].push_back(index_of.at(e.dst));

  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : succ[v]) {
      if (index[w] == kUnvisited) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> members;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps.size();
        members.push_back(w);
      } while (w != v);
      std::sort(members.begin(), members.end());
      comps.push_back(std::move(members));
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == kUnvisited) visit(v);
  }

  std::vector<Scc> out(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t v : comps[c]) out[c].locations.push_back(ts.locations[v]);
  }
  for (const auto& e : ts.edges) {
    const std::size_t c = comp[index_of.at(e.src)];
    if (c == comp[index_of.at(e.dst)]) {
      out[c].edges.push_back(e.id);
      out[c].trivial = false;
    }
  }
  return out;
}

DisplacementLoop to_displacement(const SLCLoop& loop) {
  std::set<VarId> taken(loop.vars.begin(), loop.vars.end());
  DisplacementLoop d;
  d.vars = loop.vars;
  for (const auto& v : loop.vars) {
    VarId name = "y_" + v;
    while (taken.count(name)) name += "_";
    taken.insert(name);
    d.disp.push_back(name);
  }
  std::vector<Constraint> rows;
  for (const auto& c : loop.rel.constraints()) {
    AffineFunc f = c.lhs;
    for (std::size_t i = 0; i < loop.vars.size(); ++i) {
      f = f.substitute(primed(loop.vars[i]),
                       AffineFunc::variable(loop.vars[i]) + AffineFunc::variable(d.disp[i]));
    }
    rows.push_back({f, c.rel});
  }
  std::vector<VarId> space = d.vars;
  space.insert(space.end(), d.disp.begin(), d.disp.end());
  d.rel = Polyhedron(space, rows);
  return d;
}

TransitionSystem as_transition_system(const SLCLoop& loop) {
  TransitionSystem ts;
  ts.vars = loop.vars;
  ts.locations = {"l0"};
  ts.init = "l0";
  ts.edges.push_back(Edge{"t0", "l0", "l0", loop.rel});
  return ts;
}

bool same_constraints(const Polyhedron& a, const Polyhedron& b) {
  auto canon = [](const Polyhedron& p) {
    std::vector<Constraint> rows;
    for (const auto& c : p.constraints()) rows.push_back(geom::normalize(c));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
  };
  return a.space() == b.space() && canon(a) == canon(b);
}

bool structurally_equal(const TransitionSystem& a, const TransitionSystem& b) {
  if (a.vars != b.vars || a.locations != b.locations || a.init != b.init) return false;
  if (a.edges.size() != b.edges.size()) return false;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const Edge& x = a.edges[i];
    const Edge& y = b.edges[i];
    if (x.id != y.id || x.src != y.src || x.dst != y.dst || !same_constraints(x.rel, y.rel)) return false;
  }
  return true;
}

bool structurally_equal(const SLCLoop& a, const SLCLoop& b) {
  return a.vars == b.vars && same_constraints(a.rel, b.rel);
}

}  // namespace termrank::model
