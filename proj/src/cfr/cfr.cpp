#include "termrank/cfr/cfr.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"

namespace termrank::cfr {

using geom::AffineFunc;
using geom::Rel;
using model::LocId;
using model::primed;

CHCProgram ts_to_chc(const TransitionSystem& ts) {
  CHCProgram p;
  p.vars = ts.vars;
  p.preds = ts.locations;
  p.entry = ts.init;
  for (const auto& e : ts.edges) p.clauses.push_back(Clause{e.id, e.src, e.dst, e.rel, e.id});
  return p;
}

TransitionSystem chc_to_ts(const CHCProgram& p) {
  TransitionSystem ts;
  ts.vars = p.vars;
  ts.locations = p.preds;
  ts.init = p.entry;
  for (const auto& c : p.clauses) {
    if (!c.body) continue;  // facts carry no transition
    if (!ts.has_location(*c.body) || !ts.has_location(c.head)) {
      throw SemanticError("clause '" + c.id + "' names an unknown predicate");
    }
    ts.edges.push_back(model::Edge{c.id, c.head, *c.body, c.constraint});
  }
  model::validate(ts);
  return ts;
}

std::vector<LocId> scc_heads(const TransitionSystem& ts, const model::Scc& scc) {
  const std::set<LocId> in(scc.locations.begin(), scc.locations.end());
  std::vector<LocId> heads;
  for (const auto& l : scc.locations) {
    bool entered = l == ts.init;
    for (const auto& e : ts.edges) entered = entered || (e.dst == l && !in.count(e.src));
    if (entered) heads.push_back(l);
  }
  return heads;
}

namespace {

bool unprimed_only(const Constraint& c) {
  if (c.lhs.is_constant()) return false;
  for (const auto& v : c.lhs.vars()) {
    if (model::is_primed(v)) return false;
  }
  return true;
}

// p and q split the integers (lhs sum 1, both closed) or the rationals (lhs
// sum 0, exactly one strict).
bool complementary(const Constraint& p, const Constraint& q) {
  if (p.rel == Rel::kEq || q.rel == Rel::kEq) return false;
  const AffineFunc sum = p.lhs + q.lhs;
  if (!sum.is_constant()) return false;
  if (p.rel == Rel::kLe && q.rel == Rel::kLe) return sum.constant() == 1;
  return sum.constant() == 0 && (p.strict() != q.strict());
}

// In ">= 0" form the kept member has a positive leading coefficient.
bool preferred(const Constraint& c) { return (-c.lhs).coeffs().begin()->second > 0; }

}  // namespace

PropertyMap infer_properties(const TransitionSystem& ts, const model::Scc& scc, bool all_locations) {
  std::vector<Constraint> guards;
  for (const auto& id : scc.edges) {
    for (const auto& c : ts.edge(id).rel.constraints()) {
      if (!unprimed_only(c)) continue;
      const Constraint n = geom::normalize(c);
      if (std::find(guards.begin(), guards.end(), n) == guards.end()) guards.push_back(n);
    }
  }
  std::vector<Constraint> kept;
  for (std::size_t i = 0; i < guards.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < guards.size() && !drop; ++j) {
      drop = j != i && complementary(guards[i], guards[j]) && !preferred(guards[i]) && preferred(guards[j]);
    }
    if (!drop) kept.push_back(guards[i]);
  }
  PropertyMap out;
  if (kept.empty()) return out;
  std::vector<LocId> targets = all_locations ? scc.locations : scc_heads(ts, scc);
  if (targets.empty()) targets = scc.locations;
  for (const auto& l : targets) out[l] = kept;
  return out;
}

CHCProgram partial_evaluate(const CHCProgram& p, const PropertyMap& props, const PeOptions& opts) {
  for (const auto& [pred, _] : props) {
    if (std::find(p.preds.begin(), p.preds.end(), pred) == p.preds.end()) {
      throw SemanticError("properties given for unknown predicate '" + pred + "'");
    }
  }
  std::vector<Constraint> pool;
  for (const auto& [_, ps] : props) {
    for (const auto& c : ps) {
      const Constraint n = geom::normalize(c);
      if (std::find(pool.begin(), pool.end(), n) == pool.end()) pool.push_back(n);
    }
  }
  auto pool_of = [&](const std::string& pred) -> const std::vector<Constraint>& {
    auto it = props.find(pred);
    return it == props.end() ? pool : it->second;
  };

  const std::vector<VarId> space = model::transition_space(p.vars);
  struct Node {
    std::string base;
    std::vector<Constraint> context;
  };
  std::vector<Node> nodes;
  std::map<std::string, std::vector<std::size_t>> by_base;
  auto intern = [&](const std::string& base, std::vector<Constraint> ctx) {
    for (std::size_t k : by_base[base]) {
      if (nodes[k].context == ctx) return std::pair{k, false};
    }
    if (by_base[base].size() >= opts.version_cap) {
      throw ResourceError("predicate '" + base + "' exceeds " + std::to_string(opts.version_cap) + " versions");
    }
    nodes.push_back({base, std::move(ctx)});
    by_base[base].push_back(nodes.size() - 1);
    return std::pair{nodes.size() - 1, true};
  };

  struct Out {
    std::size_t head;
    std::optional<std::size_t> body;
    Polyhedron constraint;
    std::string origin;
  };
  std::vector<Out> out;
  std::deque<std::size_t> work{intern(p.entry, {}).first};
  while (!work.empty()) {
    const std::size_t cur = work.front();
    work.pop_front();
    for (const auto& c : p.clauses) {
      if (c.head != nodes[cur].base) continue;
      const Polyhedron strengthened = c.constraint.with(nodes[cur].context).simplified();
      if (geom::is_empty(strengthened)) continue;
      std::optional<std::size_t> target;
      if (c.body) {
        std::vector<Constraint> ctx;
        for (const auto& prop : pool_of(*c.body)) {
          if (geom::entails(strengthened, prop.rename([](const VarId& v) { return primed(v); }))) ctx.push_back(prop);
        }
        std::sort(ctx.begin(), ctx.end());
        auto [k, fresh] = intern(*c.body, std::move(ctx));
        if (fresh) work.push_back(k);
        target = k;
      }
      out.push_back({cur, target, strengthened, c.origin});
    }
  }

  CHCProgram r;
  r.vars = p.vars;
  std::vector<std::string> names(nodes.size());
  for (const auto& base : p.preds) {
    auto it = by_base.find(base);
    if (it == by_base.end()) continue;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const std::size_t k = it->second[i];
      names[k] = it->second.size() == 1 ? base : base + "^" + std::to_string(i + 1);
    }
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    r.preds.push_back(names[k]);
    r.versions[names[k]] = Version{nodes[k].base, nodes[k].context};
  }
  r.entry = names[0];
  std::map<std::string, std::size_t> uses;
  for (const auto& o : out) {
    const std::size_t n = ++uses[o.origin];
    const std::string id = n == 1 ? o.origin : o.origin + "_" + std::to_string(n);
    r.clauses.push_back(Clause{id, names[o.head], o.body ? std::optional(names[*o.body]) : std::nullopt,
                               o.constraint, o.origin});
  }
  return r;
}

TransitionSystem scc_subsystem(const TransitionSystem& ts, const model::Scc& scc) {
  TransitionSystem sub;
  sub.vars = ts.vars;
  LocId entry = "entry";
  while (ts.has_location(entry)) entry += "_";
  sub.init = entry;
  sub.locations.push_back(entry);
  sub.locations.insert(sub.locations.end(), scc.locations.begin(), scc.locations.end());
  std::vector<LocId> heads = scc_heads(ts, scc);
  if (heads.empty()) heads = scc.locations;
  std::vector<Constraint> identity;
  for (const auto& v : ts.vars) identity.push_back(Constraint::eq(AffineFunc::variable(primed(v)), AffineFunc::variable(v)));
  std::set<std::string> ids;
  for (const auto& id : scc.edges) ids.insert(id);
  for (const auto& h : heads) {
    std::string id = "enter_" + h;
    while (ids.count(id)) id += "_";
    ids.insert(id);
    sub.edges.push_back(model::Edge{id, entry, h, Polyhedron(model::transition_space(ts.vars), identity)});
  }
  for (const auto& id : scc.edges) sub.edges.push_back(ts.edge(id));
  model::validate(sub);
  return sub;
}

Refinement refine(const TransitionSystem& ts, const std::optional<PropertyMap>& props, bool all_locations,
                  const PeOptions& opts) {
  Refinement r;
  if (props) {
    r.props = *props;
  } else {
    for (const auto& scc : model::sccs(ts)) {
      if (scc.trivial) continue;
      for (auto& [l, ps] : infer_properties(ts, scc, all_locations)) r.props[l] = ps;
    }
  }
  r.chc = ts_to_chc(ts);
  r.specialized = partial_evaluate(r.chc, r.props, opts);
  r.refined = chc_to_ts(r.specialized);
  return r;
}

namespace {

std::string atom(const std::string& pred, const std::vector<VarId>& args) {
  std::string s = "q_" + pred + "(";
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
  return s + ")";
}

}  // namespace

std::string dump(const CHCProgram& p) {
  std::ostringstream os;
  for (const auto& c : p.clauses) {
    // Rows v' = v become a shared argument; the rest keep the primed name.
    std::vector<Constraint> rows = c.constraint.constraints();
    std::vector<VarId> body_args;
    for (const auto& v : p.vars) {
      const Constraint id = geom::normalize(Constraint::eq(AffineFunc::variable(primed(v)), AffineFunc::variable(v)));
      auto it = std::find_if(rows.begin(), rows.end(), [&](const Constraint& r) { return geom::normalize(r) == id; });
      if (it != rows.end() && c.body) {
        rows.erase(it);
        for (auto& r : rows) r.lhs = r.lhs.substitute(primed(v), AffineFunc::variable(v));
        body_args.push_back(v);
      } else {
        body_args.push_back(primed(v));
      }
    }
    os << atom(c.head, p.vars) << " :-";
    std::vector<std::string> parts;
    if (!rows.empty()) {
      std::string braces = "{";
      for (std::size_t i = 0; i < rows.size(); ++i) braces += (i ? ", " : "") + geom::to_string(rows[i]);
      parts.push_back(braces + "}");
    }
    if (c.body) parts.push_back(atom(*c.body, body_args));
    if (parts.empty()) parts.push_back("true");
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? ", " : " ") << parts[i];
    os << ".\n";
  }
  return os.str();
}

nlohmann::json properties_to_json(const PropertyMap& props) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [pred, ps] : props) {
    std::vector<std::string> rows;
    for (const auto& c : ps) rows.push_back(geom::to_string(c));
    j[pred] = rows;
  }
  return j;
}

PropertyMap properties_from_json(const nlohmann::json& j, const std::vector<VarId>& vars) {
  if (!j.is_object()) throw SemanticError("property file must be a JSON object");
  PropertyMap out;
  for (const auto& [pred, arr] : j.items()) {
    if (!arr.is_array()) throw SemanticError("properties of '" + pred + "' must be an array");
    for (const auto& s : arr) {
      const Constraint c = geom::normalize(geom::parse_constraint(s.get<std::string>()));
      for (const auto& v : c.lhs.vars()) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
          throw SemanticError("property of '" + pred + "' mentions unknown variable '" + v + "'");
        }
      }
      out[pred].push_back(c);
    }
  }
  return out;
}

}  // namespace termrank::cfr
