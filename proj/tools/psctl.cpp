#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "psc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CTL model checker for Presburger counter systems"};

  psc::RunConfig cfg;
  std::string label = "precise";
  std::string engine = "auto";
  std::string format = "human";
  double timeout_s = 0;

  app.add_option("--system", cfg.system_path, "counter system file")->required();
  app.add_option("--prop", cfg.property, "property text, e.g. \"EG (x < 10)\"");
  app.add_option("--prop-file", cfg.property_path, "file containing the property");
  app.add_option("--label", label, "requested approximation: precise|under|over")
      ->check(CLI::IsMember({"precise", "under", "over"}));
  app.add_option("--engine", engine,
                 "EG routine for precise runs: auto|under|over (auto picks over)")
      ->check(CLI::IsMember({"auto", "under", "over"}));
  app.add_option("--timeout", timeout_s, "wall-clock limit in seconds");
  app.add_option("--max-iters", cfg.max_iterations, "engine iteration cap (0 = unlimited)");
  app.add_option("--max-flat-len", cfg.max_flat_len, "largest flattening length tried");
  app.add_option("--qe-node-limit", cfg.qe_node_limit,
                 "node budget per quantifier elimination");
  app.add_option("--format", format, "report style: human|record")
      ->check(CLI::IsMember({"human", "record"}));
  app.add_flag("--dump-refined", cfg.dump_refined, "print the property-refined system");
  app.add_option("--dump-flattenings", cfg.dump_flattenings,
                 "print all flattenings up to this length");
  app.add_flag("--dump-iterations", cfg.dump_iterations,
               "print the engine's per-iteration state sets");

  CLI11_PARSE(app, argc, argv);

  if (cfg.property.empty() && cfg.property_path.empty()) {
    std::cerr << "error: give a property with --prop or --prop-file\n";
    return 2;
  }
  if (timeout_s != 0) cfg.timeout_s = timeout_s;
  cfg.label = label == "under"  ? psc::ApproxLabel::Under
              : label == "over" ? psc::ApproxLabel::Over
                                : psc::ApproxLabel::Precise;
  cfg.engine = engine == "under"  ? psc::EngineOverride::Under
               : engine == "over" ? psc::EngineOverride::Over
                                  : psc::EngineOverride::Auto;
  cfg.record = format == "record";

  return psc::run(cfg, std::cout, std::cerr);
}
