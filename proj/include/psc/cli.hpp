#ifndef PSC_CLI_HPP
#define PSC_CLI_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "psc/ctl.hpp"

namespace psc {

struct RunConfig {
  std::string system_path;
  std::string property;       // inline property text; wins over property_path
  std::string property_path;  // file containing the property
  ApproxLabel label = ApproxLabel::Precise;
  EngineOverride engine = EngineOverride::Auto;
  std::optional<double> timeout_s;
  std::size_t max_iterations = 0;  // 0 = unlimited
  std::size_t max_flat_len = 12;
  std::size_t qe_node_limit = 80'000'000;
  bool record = false;  // machine-readable key=value report instead of human text
  bool dump_refined = false;
  std::size_t dump_flattenings = 0;  // enumeration length; 0 = off
  bool dump_iterations = false;
};

// Runs one query end to end: parse, stuck-complete, resolve reachability,
// evaluate the property, report. Returns the process exit status:
// 0 = precise, 10 = under, 11 = over, 2 = error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace psc

#endif
