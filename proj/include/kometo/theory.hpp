#pragma once

#include <string>

#include "kometo/fidelity.hpp"
#include "kometo/tree_instance.hpp"

namespace kometo {

// Principal branch of the inverse of w -> w*exp(w), for x >= 0.
// Halley iteration; |w*exp(w) - x| <= 1e-12 * max(x, 1).
double lambert_w0(double x);

// Piecewise closed-form lower bound on lambert_w0: x/e for x <= e,
// log(x) - log(log(x)) above. Continuous at e; used by the rate envelopes.
double lambert_w0_floor(double x);

// Guaranteed ceiling on the optimizer's simple regret at effective budget
// lambda_tilde, on any instance matching the profile whose fidelities
// respect the bias model. `depth` is the positive real solving the
// defining budget-vs-depth fixed point for the selected regime.
struct RegretCeiling {
  bool high_budget = false;
  double depth = 0.0;
  double value = 0.0;
};

RegretCeiling upper_bound(const SmoothnessProfile& profile,
                          const CostToBiasModel& model, double lambda_tilde);

// Minimax floor: no policy can beat `value` uniformly once the raw budget
// exceeds `valid_above`; below that threshold the floor weakens to `r_min`.
// `coefficient` is the leading constant (multiplier for the polynomial
// shapes, exponent coefficient for the exponential ones).
struct RegretFloor {
  double value = 0.0;
  double coefficient = 0.0;
  double r_min = 0.0;
  double valid_above = 1.0;
};

RegretFloor lower_bound(const SmoothnessProfile& profile,
                        const CostToBiasModel& model, double lambda);

// Asymptotic decay descriptor: human-readable rate tags per budget regime
// plus a closed-form envelope that dominates upper_bound(...) pointwise
// (the Lambert-W terms are replaced by their explicit floor).
struct DecayRate {
  SmoothnessProfile profile;
  CostToBiasModel model;
  std::string tag_high;
  std::string tag_low;

  double envelope(double lambda_tilde) const;
};

DecayRate decay_rate(const SmoothnessProfile& profile,
                     const CostToBiasModel& model);

// The two adversarial-construction floors: width limitation starves the
// sibling count at one depth, depth limitation starves the descent rate.
enum class AdversarialVariant { kWidthLimited, kDepthLimited };

// Largest regret value certified achievable against any policy of budget
// lambda by the matching adversarial family; 0 when the feasible set is
// empty. Monotone bisection, boundary located to ~1e-12 relative.
double adversarial_floor(const SmoothnessProfile& profile,
                         const CostToBiasModel& model, double lambda,
                         AdversarialVariant variant);

// Certificate that depth h_tilde is safely reachable: (1) the bias at cost
// e^j is at most nu*rho^h_tilde and (2) the budget share per depth covers
// the near-optimal cell count. When both hold, the regret is bounded by
// certificate_regret_bound.
bool certificate_conditions(const SmoothnessProfile& profile,
                            const CostToBiasModel& psi, double lambda_tilde,
                            int j, double h_tilde);

double certificate_regret_bound(const SmoothnessProfile& profile,
                                const CostToBiasModel& psi,
                                double lambda_tilde, double h_tilde);

}  // namespace kometo
