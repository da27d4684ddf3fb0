#pragma once

#include "kometo/partition.hpp"

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kometo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper bounds on the evaluation bias purchasable at a given cost.  Phi maps
// a cost c >= 1 to the bias ceiling of the fidelity that cost buys.
struct PolyDecay {
  double A = 1.0;       // bias scale
  double alpha = 1.0;   // polynomial decay exponent
};
struct ExpDecay {
  double B = 1.0;
  double sigma = 1.0;
  double beta = 1.0;
};
struct Cutoff {
  double a = 1.0;       // cost threshold of exactness
};

using CostToBiasModel = std::variant<PolyDecay, ExpDecay, Cutoff>;

// Bias ceiling at cost c.  Costs below 1 are outside the request range.
// Cutoff models return +inf below the threshold: no guarantee at all.
double phi(const CostToBiasModel& model, double cost);

// inf{c >= 1 : phi(c) <= y}: the cheapest cost whose bias ceiling is at most
// y.  +inf when no finite cost reaches y.
double phi_inverse_at_most(const CostToBiasModel& model, double y);

void validate(const CostToBiasModel& model);
std::string describe(const CostToBiasModel& model);

// JSON object form used by instance files and experiment configs, e.g.
// {"type":"poly","A":1,"alpha":1}.  Parsing rejects unknown keys.
CostToBiasModel model_from_json(const std::string& json_text);
std::string model_to_json(const CostToBiasModel& model);

// Map between requested costs and fidelity coordinates z in [0, 1].  The
// cost of an exact evaluation (z = 1) may be infinite, in which case z_c
// approaches 1 from below and every request is charged its full cost.
// With a finite top cost the charge is min(cost, top): fidelity saturates.
struct FidelitySchedule {
  double top_cost = kInf;  // lambda(1)

  double z_of_cost(double cost) const;
  double cost_of_z(double z) const;
  double charge_for(double cost) const;
};

// A target with a family of approximations indexed by request cost, plus an
// optional per-fidelity strictly increasing distortion applied to what the
// caller observes.  `fidelity(x, c)` is the undistorted approximation whose
// bias obeys the instance's cost-to-bias model.
struct MultiFidelityFunction {
  Box domain;
  std::function<double(const Point&)> target;
  std::function<double(const Point&, double cost)> fidelity;
  double sup_value = 0.0;
  std::function<double(double value, double cost)> distortion;  // optional
};

struct BudgetExceeded : std::runtime_error {
  double requested_charge;
  double remaining;
  BudgetExceeded(double req, double rem)
      : std::runtime_error("evaluation charge exceeds remaining budget"),
        requested_charge(req),
        remaining(rem) {}
};

struct InapplicableEnvironment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvaluationEvent {
  std::size_t round;
  Point x;
  double z;
  double requested_cost;
  double charged;
};

// Total budget, spend so far, and the per-request event log.
class BudgetLedger {
 public:
  explicit BudgetLedger(double total) : total_(total) {}

  double total() const { return total_; }
  double spent() const { return spent_; }
  double remaining() const { return total_ - spent_; }

  void charge(Point x, double z, double requested_cost, double amount);
  const std::vector<EvaluationEvent>& events() const { return events_; }

 private:
  double total_;
  double spent_ = 0.0;
  std::vector<EvaluationEvent> events_;
};

// The only gate through which algorithms touch an objective.  Serves
// fidelity-capped observations, charges the ledger, and scores regret
// without charging.  Deterministic: identical requests return identical
// values and are charged again each time.
class Environment {
 public:
  Environment(MultiFidelityFunction fn, FidelitySchedule schedule, double budget);

  // Observed (possibly distorted) value of the fidelity that `cost` buys.
  // Throws std::domain_error for points outside the domain or cost < 1, and
  // BudgetExceeded when the charge would overdraw the ledger.
  double evaluate_at_cost(const Point& x, double cost);

  // Exact evaluation at z = 1; requires a finite top cost.
  double evaluate_exact(const Point& x);

  // sup f - f(x); uses the hidden target, not charged.
  double regret(const Point& x) const;

  double charge_for(double cost) const { return schedule_.charge_for(cost); }
  bool can_afford(double cost) const {
    return charge_for(cost) <= ledger_.remaining();
  }

  const BudgetLedger& ledger() const { return ledger_; }
  const Box& domain() const { return fn_.domain; }
  double top_cost() const { return schedule_.top_cost; }
  const FidelitySchedule& schedule() const { return schedule_; }

 private:
  MultiFidelityFunction fn_;
  FidelitySchedule schedule_;
  BudgetLedger ledger_;
};

}  // namespace kometo
