// Fixture loading shared by the unit tests.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "lci/solutions.hpp"

namespace testing_util {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline lci::OdeSpec fixture(const std::string& name) {
  return lci::parse_ode(read_file(std::string(LCI_FIXTURES) + "/" + name + ".json"));
}

inline lci::ClosedForm closed_form(const std::string& name) {
  return lci::parse_closed_form(read_file(std::string(LCI_FIXTURES) + "/closed_forms/" + name + ".json"));
}

inline double rel(lci::cplx a, lci::cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace testing_util
