// Command-line front end: analyze, check, refine, oracle.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "termrank/cfr/cfr.hpp"
#include "termrank/driver/driver.hpp"
#include "termrank/geom/errors.hpp"
#include "termrank/oracle/oracle.hpp"

using namespace termrank;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw SemanticError("cannot write '" + path + "'");
  out << text;
}

const std::vector<geom::VarId>& vars_of(const model::Model& m) {
  return std::visit([](const auto& x) -> const std::vector<geom::VarId>& { return x.vars; }, m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"termrank: termination analysis with ranking functions and control-flow refinement"};
  app.require_subcommand(1);

  std::string file, strategy = "auto", cfr_name = "none", report = "text", dump_chc, dump_refined, props_path;
  driver::StrategyConfig cfg;
  bool check = false;
  auto* an = app.add_subcommand("analyze", "Prove termination or nontermination of a model");
  an->add_option("file", file, "Model file (JSON)")->required();
  an->add_option("--strategy", strategy, "Ranking classes")->check(CLI::IsMember({"lrf", "lex", "mlrf", "auto"}));
  an->add_option("--cfr", cfr_name, "Control-flow refinement scheme")
      ->check(CLI::IsMember({"none", "pre", "on-failure"}));
  an->add_option("--max-mlrf-depth", cfg.max_mlrf_depth, "Largest MLRF depth tried")->check(CLI::PositiveNumber);
  an->add_option("--max-lex-stages", cfg.max_lex_stages, "Largest lexicographic stage count")
      ->check(CLI::PositiveNumber);
  an->add_option("--max-iter-rounds", cfg.max_iterative_rounds, "Rounds of the iterative MLRF search")
      ->check(CLI::PositiveNumber);
  an->add_option("--dump-chc", dump_chc, "Write the (specialized) clause program here");
  an->add_option("--dump-refined", dump_refined, "Write the refined transition system here");
  an->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));
  an->add_flag("--check", check, "Re-verify the report with the independent checker");
  an->add_option("--props", props_path, "Properties for refinement (JSON map location -> constraints)");
  an->add_flag("--props-all-locations", cfg.props_all_locations,
               "Attach inferred properties to every SCC location (experimental)");

  std::string report_path;
  auto* ck = app.add_subcommand("check", "Verify a JSON report against its model");
  ck->add_option("model", file, "Model file")->required();
  ck->add_option("report", report_path, "Report file")->required();

  std::string refine_out;
  auto* rf = app.add_subcommand("refine", "Refine a transition system and print it");
  rf->add_option("file", file, "Model file")->required();
  rf->add_option("--props", props_path, "Properties (JSON map location -> constraints)");
  rf->add_flag("--props-all-locations", cfg.props_all_locations, "Attach properties to every SCC location");
  rf->add_option("--dump-chc", dump_chc, "Write the specialized clause program here");

  oracle::BoxConfig box;
  std::vector<std::string> from;
  bool serial = false;
  auto* orc = app.add_subcommand("oracle", "Exhaustive bounded execution inside an integer box");
  orc->add_option("file", file, "Model file")->required();
  orc->add_option("--box", box.bound, "Box half-width B")->check(CLI::PositiveNumber);
  orc->add_option("--max-steps", box.max_steps, "Step budget")->check(CLI::PositiveNumber);
  orc->add_option("--from", from, "Initial state, e.g. x=0,y=5 (repeatable; default: whole box)");
  orc->add_flag("--serial", serial, "Use the single-threaded kernel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    const model::Model m = model::parse_input(slurp(file));
    if (!props_path.empty()) cfg.props = cfr::properties_from_json(json::parse(slurp(props_path)), vars_of(m));

    if (*an) {
      cfg.rank_classes = driver::strategy_classes(strategy);
      cfg.cfr = driver::cfr_scheme(cfr_name);
      const auto rep = driver::analyze(m, cfg);
      if (!dump_chc.empty()) {
        if (const auto* ts = std::get_if<model::TransitionSystem>(&m)) {
          write_file(dump_chc, cfr::dump(rep.refinement ? rep.refinement->specialized : cfr::ts_to_chc(*ts)));
        } else {
          write_file(dump_chc, cfr::dump(cfr::ts_to_chc(model::as_transition_system(std::get<model::SLCLoop>(m)))));
        }
      }
      if (!dump_refined.empty()) {
        if (!rep.refinement) throw SemanticError("no refinement ran; use --cfr pre");
        write_file(dump_refined, model::serialize(rep.refinement->refined).dump(2) + "\n");
      }
      if (report == "json") {
        std::cout << rep.to_json().dump(2) << "\n";
      } else {
        std::cout << rep.to_text();
      }
      if (check) {
        const auto c = driver::verify_certificate(m, rep.to_json());
        std::cerr << (c ? "check: ok" : "check: FAILED: " + c.message) << "\n";
        if (!c) return 6;
      }
      return driver::exit_code(rep.overall);
    }
    if (*ck) {
      const auto c = driver::verify_certificate(m, json::parse(slurp(report_path)));
      std::cout << (c ? "ok" : "rejected: " + c.message) << "\n";
      return c ? 0 : 6;
    }
    if (*rf) {
      const auto* ts = std::get_if<model::TransitionSystem>(&m);
      if (!ts) throw SemanticError("refine expects a transition system");
      const auto r = cfr::refine(*ts, cfg.props, cfg.props_all_locations);
      if (!dump_chc.empty()) write_file(dump_chc, cfr::dump(r.specialized));
      std::cout << model::serialize(r.refined).dump(2) << "\n";
      return 0;
    }
    if (*orc) {
      std::optional<std::vector<oracle::State>> init;
      if (!from.empty()) {
        init.emplace();
        for (const auto& s : from) init->push_back(oracle::parse_state(s, vars_of(m)));
      }
      const auto v = serial ? oracle::run_box_serial(m, box, init) : oracle::run_box(m, box, init);
      std::cout << oracle::to_json(v, vars_of(m), box).dump(2) << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 5;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 7;
  }
  return 0;
}
