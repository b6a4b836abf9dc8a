#include "termrank/oracle/oracle.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "termrank/geom/errors.hpp"

namespace termrank::oracle {

using geom::AffineFunc;
using geom::Constraint;
using geom::Rel;
using model::Edge;
using model::TransitionSystem;

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kTerminated: return "terminated";
    case Outcome::kNonterminated: return "nonterminated";
    case Outcome::kEscaped: return "escaped";
    case Outcome::kBudget: return "budget";
  }
  return "?";
}

namespace {

// a.(x, x') + k <= 0 (or = 0) with integer coefficients.
struct IntRow {
  std::vector<std::int64_t> a;  // 2n entries
  std::int64_t k = 0;
  bool eq = false;
  int last = -1;  // highest primed index with a nonzero coefficient, -1 for guards
};

struct CompiledEdge {
  const Edge* edge;
  std::size_t dst;
  std::vector<IntRow> rows;
};

std::int64_t to_i64(const Integer& z) {
  if (!z.fits_slong_p()) throw ResourceError("oracle coefficient exceeds 64 bits");
  return z.get_si();
}

IntRow compile_row(const Constraint& c, const std::vector<geom::VarId>& space, std::size_t n) {
  const Rational scale = geom::integer_scale(c.lhs);
  const AffineFunc f = c.lhs * scale;
  IntRow r;
  r.a.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) r.a[i] = to_i64(f.coeff(space[i]).get_num());
  r.k = to_i64(f.constant().get_num());
  if (c.rel == Rel::kLt) r.k += 1;  // integer tightening
  r.eq = c.rel == Rel::kEq;
  for (std::size_t j = 0; j < n; ++j) {
    if (r.a[n + j] != 0) r.last = static_cast<int>(j);
  }
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

class Explorer {
 public:
  Explorer(const TransitionSystem& ts, const BoxConfig& cfg) : ts_(ts), cfg_(cfg), n_(ts.vars.size()) {
    if (cfg.bound <= 0 || cfg.max_steps == 0) throw SemanticError("box bound and step budget must be positive");
    const auto space = model::transition_space(ts.vars);
    for (std::size_t i = 0; i < ts.locations.size(); ++i) loc_index_[ts.locations[i]] = i;
    out_.resize(ts.locations.size());
    for (const auto& e : ts.edges) {
      CompiledEdge ce{&e, loc_index_.at(e.dst), {}};
      for (const auto& c : e.rel.constraints()) ce.rows.push_back(compile_row(c, space, n_));
      out_[loc_index_.at(e.src)].push_back(std::move(ce));
    }
  }

  struct Succ {
    std::vector<std::pair<std::size_t, State>> next;
    bool escaping = false;
  };

  // Successors of (loc, x) inside the box.
  Succ successors(std::size_t loc, const State& x) const {
    Succ s;
    for (const auto& ce : out_[loc]) {
      const std::size_t before = s.next.size();
      if (!guards_hold(ce, x)) continue;
      State y(n_);
      enumerate(ce, x, y, 0, s.next);
      if (s.next.size() == before && rationally_enabled(ce, x)) s.escaping = true;
    }
    // Escape only matters when nothing stays inside the box.
    if (!s.next.empty()) s.escaping = false;
    return s;
  }

  OracleVerdict run(const std::vector<std::pair<std::size_t, State>>& init, bool parallel) const {
    std::vector<std::pair<std::size_t, State>> nodes;
    std::unordered_map<std::string, std::size_t> ids;
    std::vector<std::vector<std::size_t>> succ;
    std::vector<bool> escaping;
    auto intern = [&](const std::pair<std::size_t, State>& node) {
      const std::string key = encode(node);
      auto [it, fresh] = ids.emplace(key, nodes.size());
      if (fresh) nodes.push_back(node);
      return std::pair{it->second, fresh};
    };
    std::vector<std::size_t> roots, frontier;
    for (const auto& node : init) {
      auto [id, fresh] = intern(node);
      roots.push_back(id);
      if (fresh) frontier.push_back(id);
    }
    while (!frontier.empty()) {
      std::vector<Succ> found(frontier.size());
      const std::int64_t count = static_cast<std::int64_t>(frontier.size());
      if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < count; ++i) found[i] = successors(nodes[frontier[i]].first, nodes[frontier[i]].second);
      } else {
        for (std::int64_t i = 0; i < count; ++i) found[i] = successors(nodes[frontier[i]].first, nodes[frontier[i]].second);
      }
      std::vector<std::size_t> next;
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        const std::size_t id = frontier[i];
        if (succ.size() < nodes.size()) {
          succ.resize(nodes.size());
          escaping.resize(nodes.size(), false);
        }
        escaping[id] = found[i].escaping;
        for (const auto& node : found[i].next) {
          auto [to, fresh] = intern(node);
          succ[id].push_back(to);
          if (fresh) next.push_back(to);
        }
      }
      frontier = std::move(next);
    }
    succ.resize(nodes.size());
    escaping.resize(nodes.size(), false);
    return summarize(nodes, succ, escaping, roots);
  }

  std::size_t loc(const model::LocId& l) const { return loc_index_.at(l); }

 private:
  bool guards_hold(const CompiledEdge& ce, const State& x) const {
    for (const auto& r : ce.rows) {
      if (r.last >= 0) continue;
      const std::int64_t v = r.k + dot_pre(r, x);
      if (r.eq ? v != 0 : v > 0) return false;
    }
    return true;
  }

  std::int64_t dot_pre(const IntRow& r, const State& x) const {
    std::int64_t v = 0;
    for (std::size_t i = 0; i < n_; ++i) v += r.a[i] * x[i];
    return v;
  }

  void enumerate(const CompiledEdge& ce, const State& x, State& y, std::size_t j,
                 std::vector<std::pair<std::size_t, State>>& out) const {
    if (j == n_) {
      out.emplace_back(ce.dst, y);
      return;
    }
    std::int64_t lo = -cfg_.bound, hi = cfg_.bound;
    for (const auto& r : ce.rows) {
      if (r.last != static_cast<int>(j)) continue;
      std::int64_t rest = r.k + dot_pre(r, x);
      for (std::size_t i = 0; i < j; ++i) rest += r.a[n_ + i] * y[i];
      const std::int64_t c = r.a[n_ + j];
      // c*v + rest <= 0 (or = 0)
      if (r.eq) {
        if (rest % c != 0) return;
        lo = std::max(lo, -rest / c);
        hi = std::min(hi, -rest / c);
      } else if (c > 0) {
        hi = std::min(hi, floor_div(-rest, c));
      } else {
        lo = std::max(lo, ceil_div(-rest, c));
      }
    }
    for (std::int64_t v = lo; v <= hi; ++v) {
      y[j] = v;
      enumerate(ce, x, y, j + 1, out);
    }
  }

  bool rationally_enabled(const CompiledEdge& ce, const State& x) const {
    std::vector<Constraint> fix;
    for (std::size_t i = 0; i < n_; ++i) {
      fix.push_back(Constraint::eq(AffineFunc::variable(ts_.vars[i]), AffineFunc(Rational(static_cast<long>(x[i])))));
    }
    return !geom::is_empty(ce.edge->rel.with(fix));
  }

  static std::string encode(const std::pair<std::size_t, State>& node) {
    std::string key(reinterpret_cast<const char*>(&node.first), sizeof(node.first));
    key.append(reinterpret_cast<const char*>(node.second.data()), node.second.size() * sizeof(std::int64_t));
    return key;
  }

  OracleVerdict summarize(const std::vector<std::pair<std::size_t, State>>& nodes,
                          const std::vector<std::vector<std::size_t>>& succ, const std::vector<bool>& escaping,
                          const std::vector<std::size_t>& roots) const {
    const std::size_t n = nodes.size();
    // Iterative Tarjan; components come out in reverse topological order.
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kNone), low(n), comp(n, kNone);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<bool> comp_cyclic;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (index[root] != kNone) continue;
      std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call.empty()) {
        auto& [v, pos] = call.back();
        if (pos < succ[v].size()) {
          const std::size_t w = succ[v][pos++];
          if (index[w] == kNone) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call.emplace_back(w, 0);
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], index[w]);
          }
          continue;
        }
        const std::size_t done = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        if (low[done] == index[done]) {
          std::size_t size = 0, w;
          bool self = false;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = comp_cyclic.size();
            ++size;
            self = self || std::find(succ[w].begin(), succ[w].end(), w) != succ[w].end();
          } while (w != done);
          comp_cyclic.push_back(size > 1 || self);
        }
      }
    }
    // Per component, in reverse topological order: reaches a cycle, reaches an
    // escape, longest run length.
    const std::size_t nc = comp_cyclic.size();
    std::vector<std::vector<std::size_t>> members(nc);
    for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(v);
    std::vector<bool> cyc(nc, false), esc(nc, false);
    std::vector<std::size_t> longest(n, 0);
    for (std::size_t c = 0; c < nc; ++c) {
      cyc[c] = comp_cyclic[c];
      for (std::size_t v : members[c]) {
        esc[c] = esc[c] || escaping[v];
        for (std::size_t w : succ[v]) {
          if (comp[w] == c) continue;
          cyc[c] = cyc[c] || cyc[comp[w]];
          esc[c] = esc[c] || esc[comp[w]];
        }
      }
      if (!cyc[c]) {
        // Acyclic components are single nodes.
        const std::size_t v = members[c][0];
        for (std::size_t w : succ[v]) longest[v] = std::max(longest[v], longest[w] + 1);
      }
    }
    OracleVerdict out;
    out.explored = n;
    for (const auto& node : nodes) out.reachable.insert(node.second);
    for (std::size_t r : roots) {
      StateVerdict sv{ts_.locations[nodes[r].first], nodes[r].second, Outcome::kTerminated, 0};
      const std::size_t c = comp[r];
      if (cyc[c]) {
        sv.outcome = Outcome::kNonterminated;
      } else if (esc[c]) {
        sv.outcome = Outcome::kEscaped;
      } else if (longest[r] > cfg_.max_steps) {
        sv.outcome = Outcome::kBudget;
        sv.steps = cfg_.max_steps;
      } else {
        sv.steps = longest[r];
      }
      out.results.push_back(std::move(sv));
    }
    return out;
  }

  const TransitionSystem& ts_;
  BoxConfig cfg_;
  std::size_t n_;
  std::map<model::LocId, std::size_t> loc_index_;
  std::vector<std::vector<CompiledEdge>> out_;
};

TransitionSystem as_ts(const model::Model& m) {
  if (auto* ts = std::get_if<TransitionSystem>(&m)) return *ts;
  return model::as_transition_system(std::get<model::SLCLoop>(m));
}

OracleVerdict run_impl(const model::Model& m, const BoxConfig& cfg, const std::optional<std::vector<State>>& initial,
                       bool parallel) {
  const TransitionSystem ts = as_ts(m);
  Explorer ex(ts, cfg);
  const std::size_t n = ts.vars.size();
  std::vector<std::pair<std::size_t, State>> init;
  const std::size_t start = ex.loc(ts.init);
  if (initial) {
    for (const auto& s : *initial) {
      if (s.size() != n) throw SemanticError("initial state has the wrong number of values");
      init.emplace_back(start, s);
    }
  } else {
    State s(n, -cfg.bound);
    while (true) {
      init.emplace_back(start, s);
      std::size_t i = 0;
      while (i < n && s[i] == cfg.bound) s[i++] = -cfg.bound;
      if (i == n) break;
      ++s[i];
    }
  }
  return ex.run(init, parallel);
}

}  // namespace

OracleVerdict run_box(const model::Model& m, const BoxConfig& cfg, const std::optional<std::vector<State>>& initial) {
  return run_impl(m, cfg, initial, true);
}

OracleVerdict run_box_serial(const model::Model& m, const BoxConfig& cfg,
                             const std::optional<std::vector<State>>& initial) {
  return run_impl(m, cfg, initial, false);
}

std::vector<CurvePoint> steps_curve(const model::SLCLoop& loop, const std::function<State(std::int64_t)>& family,
                                    std::int64_t k_lo, std::int64_t k_hi, const BoxConfig& cfg) {
  std::vector<CurvePoint> out;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const OracleVerdict v = run_box(loop, cfg, std::vector<State>{family(k)});
    out.push_back({k, v.results[0].outcome, v.results[0].steps});
  }
  return out;
}

State parse_state(const std::string& text, const std::vector<geom::VarId>& vars) {
  std::map<std::string, std::int64_t> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("expected name=value in \"" + item + "\"", 1, 1);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    const std::string name = trim(item.substr(0, eq));
    try {
      vals[name] = std::stoll(trim(item.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ParseError("bad integer for '" + name + "'", 1, eq + 2);
    }
  }
  State s;
  for (const auto& v : vars) {
    auto it = vals.find(v);
    if (it == vals.end()) throw SemanticError("no value given for '" + v + "'");
    s.push_back(it->second);
    vals.erase(it);
  }
  if (!vals.empty()) throw SemanticError("unknown variable '" + vals.begin()->first + "'");
  return s;
}

nlohmann::json to_json(const OracleVerdict& v, const std::vector<geom::VarId>& vars, const BoxConfig& cfg) {
  nlohmann::json results = nlohmann::json::array();
  std::map<std::string, std::size_t> counts;
  for (const auto& r : v.results) {
    nlohmann::json state = nlohmann::json::object();
    for (std::size_t i = 0; i < vars.size(); ++i) state[vars[i]] = r.initial[i];
    nlohmann::json item{{"location", r.location}, {"state", state}, {"outcome", to_string(r.outcome)}};
    if (r.outcome == Outcome::kTerminated || r.outcome == Outcome::kBudget) item["steps"] = r.steps;
    results.push_back(item);
    ++counts[to_string(r.outcome)];
  }
  return nlohmann::json{{"format", 1},   {"box", cfg.bound},           {"max_steps", cfg.max_steps},
                        {"explored", v.explored}, {"summary", counts}, {"results", results}};
}

}  // namespace termrank::oracle
