#include "psc/cli.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "psc/flatten.hpp"
#include "psc/system.hpp"

namespace psc {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The formula an EG-rooted property refines the system with; used by the dump
// flags to show the system the engine actually works on.
Formula eg_refinement(const CtlFormula& psi) {
  if (psi && psi->op == CtlOp::EG && psi->a && psi->a->op == CtlOp::Prop)
    return simplify(psi->a->prop);
  return f_true();
}

void report(std::ostream& out, bool record, const std::string& formula,
            const std::string& label, long long rt_ms, const Stats& st, int exit_code) {
  if (record) {
    out << "formula=" << formula << "\n";
    out << "label=" << label << "\n";
    out << "rt_ms=" << rt_ms << "\n";
    out << "fl=" << st.fl << "\n";
    out << "nfe=" << st.nfe << "\n";
    out << "ni=" << st.ni << "\n";
    out << "reach_tag=" << (st.reach_tag.empty() ? "given" : st.reach_tag) << "\n";
    out << "exit=" << exit_code << "\n";
  } else {
    out << "result: " << formula << "\n";
    out << "label: " << label << "\n";
    out << "rt_ms: " << rt_ms << "\n";
    out << "fl: " << st.fl << "\n";
    out << "nfe: " << st.nfe << "\n";
    out << "ni: " << st.ni << "\n";
    out << "reach_tag: " << (st.reach_tag.empty() ? "given" : st.reach_tag) << "\n";
  }
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto t0 = std::chrono::steady_clock::now();
  try {
    CounterSystem M = parse_system(read_file(cfg.system_path));
    std::string prop_text =
        !cfg.property.empty() ? cfg.property : read_file(cfg.property_path);
    CtlFormula psi = parse_property(prop_text);

    Budget budget;
    budget.max_iterations = cfg.max_iterations;
    budget.max_flat_len = cfg.max_flat_len;
    budget.qe_node_limit = cfg.qe_node_limit;
    if (cfg.timeout_s) {
      if (*cfg.timeout_s <= 0) throw std::runtime_error("timeout must be positive");
      budget.wall_limit =
          std::chrono::milliseconds(static_cast<long long>(*cfg.timeout_s * 1000.0));
    }

    if (cfg.dump_refined) {
      out << "-- refined system --\n"
          << print_system(refine(M, eg_refinement(psi))) << "-- end refined system --\n";
    }
    if (cfg.dump_flattenings > 0) {
      std::vector<Flattening> flats =
          enumerate_flattenings(refine(M, eg_refinement(psi)), cfg.dump_flattenings, 20000);
      out << "-- flattenings: " << flats.size() << " of length "
          << cfg.dump_flattenings << " --\n";
      for (std::size_t i = 0; i < flats.size(); ++i) {
        out << "-- flattening " << i << " (" << flats[i].length << " edges) --\n"
            << print_system(flats[i].system);
      }
      out << "-- end flattenings --\n";
    }

    Stats prep_stats;
    CounterSystem Mp = prepare(M, cfg.label, budget, &prep_stats);
    CheckResult res = sat(Mp, psi, cfg.label, budget, cfg.engine);
    res.stats.reach_tag = prep_stats.reach_tag;

    if (cfg.dump_iterations) {
      for (std::size_t i = 0; i < res.stats.snapshots.size(); ++i) {
        const auto& [tag, f] = res.stats.snapshots[i];
        out << "-- iteration " << i << " " << tag << ": " << print_formula(f) << "\n";
      }
    }

    Formula shown;
    try {
      shown = minimize(res.states, budget.qe_limits());
    } catch (const ResourceExhausted&) {
      shown = simplify(res.states);
    }
    long long rt_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    res.stats.rt_ms = rt_ms;

    int exit_code = res.label == ApproxLabel::Precise ? 0
                    : res.label == ApproxLabel::Under ? 10
                                                      : 11;
    report(out, cfg.record, print_formula(shown), to_string(res.label), rt_ms, res.stats,
           exit_code);
    return exit_code;
  } catch (const ParseError& e) {
    err << "parse error at " << e.line << ":" << e.col << ": " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceededPrecise& e) {
    err << "precise run out of budget: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace psc
