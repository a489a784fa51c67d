#ifndef PSC_CTL_HPP
#define PSC_CTL_HPP

#include "psc/check.hpp"
#include "psc/system.hpp"

namespace psc {

// Existential normal form. Universal operators and conjunction are surface
// syntax only; parse_property desugars them.
enum class CtlOp { Prop, Not, Or, EX, EU, EG };

struct CtlNode;
using CtlFormula = std::shared_ptr<const CtlNode>;

struct CtlNode {
  CtlOp op = CtlOp::Prop;
  Formula prop;     // Prop
  CtlFormula a, b;  // Not/EX/EG use a; Or/EU use a and b
};

// Builders. Boolean connectives over Prop leaves fold into a single Prop.
CtlFormula ctl_prop(Formula f);
CtlFormula ctl_not(CtlFormula a);
CtlFormula ctl_or(CtlFormula a, CtlFormula b);
CtlFormula ctl_and(CtlFormula a, CtlFormula b);  // desugars to !(!a || !b)
CtlFormula ctl_ex(CtlFormula a);
CtlFormula ctl_eu(CtlFormula a, CtlFormula b);
CtlFormula ctl_eg(CtlFormula a);
CtlFormula ctl_ef(CtlFormula a);                 // E[true U a]
CtlFormula ctl_ax(CtlFormula a);                 // !EX !a
CtlFormula ctl_ag(CtlFormula a);                 // !E[true U !a]
CtlFormula ctl_af(CtlFormula a);                 // !EG !a
CtlFormula ctl_au(CtlFormula a, CtlFormula b);   // !(E[!b U !a && !b] || EG !b)

// Surface syntax: EX/EG/EF/AX/AG/AF p, E[p U p], A[p U p], !, &&, ||, ->,
// with Presburger state formulas at the leaves.
CtlFormula parse_property(const std::string& text);
std::string print_property(const CtlFormula& f);

std::size_t property_depth(const CtlFormula& f);

enum class EngineOverride { Auto, Under, Over };

// Stuck-completion plus reachability resolution (post* of init when no hint
// is given). With label precise the reachability pass must finish exactly;
// running out of wall clock there raises BudgetExceededPrecise.
CounterSystem prepare(const CounterSystem& M, ApproxLabel label, const Budget& budget,
                      Stats* stats = nullptr);

// The inductive driver over a prepared system. `label` is the requested
// approximation direction; the result's label refines it.
CheckResult sat(const CounterSystem& M, const CtlFormula& psi, ApproxLabel label,
                const Budget& budget, EngineOverride engine = EngineOverride::Auto);

CheckResult compute_until(const CounterSystem& M, const Formula& phi1, const Formula& phi2,
                          ApproxLabel label, const Budget& budget);

CheckResult compute_global(const CounterSystem& M, const Formula& phi, ApproxLabel label,
                           const Budget& budget, EngineOverride engine = EngineOverride::Auto);

}  // namespace psc

#endif
