#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "termrank/model/model.hpp"

namespace termrank::testing {

inline std::string fixture_path(const std::string& name) { return std::string(TERMRANK_FIXTURES) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline model::Model load(const std::string& name) { return model::parse_input(read_fixture(name)); }
inline model::TransitionSystem load_ts(const std::string& name) { return std::get<model::TransitionSystem>(load(name)); }
inline model::SLCLoop load_loop(const std::string& name) { return std::get<model::SLCLoop>(load(name)); }

}  // namespace termrank::testing
