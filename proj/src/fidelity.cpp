#include "kometo/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace kometo {

double phi(const CostToBiasModel& model, double cost) {
  if (!(cost >= 1.0)) throw std::domain_error("phi: cost must be >= 1");
  return std::visit(
      [cost](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PolyDecay>) {
          return m.A / std::pow(cost, m.alpha);
        } else if constexpr (std::is_same_v<T, ExpDecay>) {
          return m.B * std::exp(-std::pow(cost, m.beta) / m.sigma);
        } else {
          return cost < m.a ? kInf : 0.0;
        }
      },
      model);
}

double phi_inverse_at_most(const CostToBiasModel& model, double y) {
  if (!(y >= 0.0)) throw std::domain_error("phi_inverse_at_most: y must be >= 0");
  return std::visit(
      [y](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PolyDecay>) {
          if (y == 0.0) return kInf;
          if (y >= m.A) return 1.0;
          return std::pow(m.A / y, 1.0 / m.alpha);
        } else if constexpr (std::is_same_v<T, ExpDecay>) {
          if (y == 0.0) return kInf;
          if (y >= m.B * std::exp(-1.0 / m.sigma)) {
            // cost 1 already reaches y
            return 1.0;
          }
          return std::pow(m.sigma * std::log(m.B / y), 1.0 / m.beta);
        } else {
          return std::max(m.a, 1.0);
        }
      },
      model);
}

void validate(const CostToBiasModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PolyDecay>) {
          if (!(m.A > 0) || !(m.alpha > 0))
            throw std::invalid_argument("poly decay needs A > 0, alpha > 0");
        } else if constexpr (std::is_same_v<T, ExpDecay>) {
          if (!(m.B > 0) || !(m.sigma > 0) || !(m.beta > 0))
            throw std::invalid_argument("exp decay needs B, sigma, beta > 0");
        } else {
          if (!(m.a >= 1.0))
            throw std::invalid_argument("cutoff threshold must be >= 1");
        }
      },
      model);
}

std::string describe(const CostToBiasModel& model) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PolyDecay>) {
          out << "poly(A=" << m.A << ",alpha=" << m.alpha << ")";
        } else if constexpr (std::is_same_v<T, ExpDecay>) {
          out << "exp(B=" << m.B << ",sigma=" << m.sigma << ",beta=" << m.beta
              << ")";
        } else {
          out << "cutoff(a=" << m.a << ")";
        }
      },
      model);
  return out.str();
}

namespace {

void reject_unknown_keys(const nlohmann::json& obj,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("unknown model key: " + it.key());
  }
}

}  // namespace

CostToBiasModel model_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("model must be an object with a \"type\" key");
  std::string type = j.at("type").get<std::string>();
  CostToBiasModel model;
  if (type == "poly") {
    reject_unknown_keys(j, {"type", "A", "alpha"});
    model = PolyDecay{j.value("A", 1.0), j.value("alpha", 1.0)};
  } else if (type == "exp") {
    reject_unknown_keys(j, {"type", "B", "sigma", "beta"});
    model = ExpDecay{j.value("B", 1.0), j.value("sigma", 1.0),
                     j.value("beta", 1.0)};
  } else if (type == "cutoff") {
    reject_unknown_keys(j, {"type", "a"});
    model = Cutoff{j.value("a", 1.0)};
  } else {
    throw std::invalid_argument("unknown model type: " + type);
  }
  validate(model);
  return model;
}

std::string model_to_json(const CostToBiasModel& model) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PolyDecay>) {
          j = {{"type", "poly"}, {"A", m.A}, {"alpha", m.alpha}};
        } else if constexpr (std::is_same_v<T, ExpDecay>) {
          j = {{"type", "exp"}, {"B", m.B}, {"sigma", m.sigma},
               {"beta", m.beta}};
        } else {
          j = {{"type", "cutoff"}, {"a", m.a}};
        }
      },
      model);
  return j.dump();
}

double FidelitySchedule::z_of_cost(double cost) const {
  if (!(cost >= 1.0)) throw std::domain_error("cost must be >= 1");
  if (std::isinf(top_cost)) return cost / (1.0 + cost);
  return std::min(cost / top_cost, 1.0);
}

double FidelitySchedule::cost_of_z(double z) const {
  if (!(z >= 0.0) || !(z <= 1.0)) throw std::domain_error("z must lie in [0, 1]");
  if (std::isinf(top_cost)) return z >= 1.0 ? kInf : z / (1.0 - z);
  return z * top_cost;
}

double FidelitySchedule::charge_for(double cost) const {
  if (!(cost >= 1.0)) throw std::domain_error("cost must be >= 1");
  return std::isinf(top_cost) ? cost : std::min(cost, top_cost);
}

void BudgetLedger::charge(Point x, double z, double requested_cost,
                          double amount) {
  if (amount > remaining()) throw BudgetExceeded(amount, remaining());
  spent_ += amount;
  events_.push_back(
      EvaluationEvent{events_.size(), std::move(x), z, requested_cost, amount});
}

Environment::Environment(MultiFidelityFunction fn, FidelitySchedule schedule,
                         double budget)
    : fn_(std::move(fn)), schedule_(schedule), ledger_(budget) {
  if (!fn_.target || !fn_.fidelity)
    throw std::invalid_argument("environment needs target and fidelity maps");
  if (!(budget >= 0.0)) throw std::invalid_argument("negative budget");
}

double Environment::evaluate_at_cost(const Point& x, double cost) {
  if (!(cost >= 1.0)) throw std::domain_error("cost must be >= 1");
  if (!fn_.domain.contains(x)) throw std::domain_error("point outside domain");
  double amount = schedule_.charge_for(cost);
  if (amount > ledger_.remaining())
    throw BudgetExceeded(amount, ledger_.remaining());
  double v = fn_.fidelity(x, cost);
  if (fn_.distortion) v = fn_.distortion(v, cost);
  ledger_.charge(x, schedule_.z_of_cost(cost), cost, amount);
  return v;
}

double Environment::evaluate_exact(const Point& x) {
  if (std::isinf(schedule_.top_cost))
    throw InapplicableEnvironment(
        "exact evaluation has infinite cost in this environment");
  return evaluate_at_cost(x, schedule_.top_cost);
}

double Environment::regret(const Point& x) const {
  if (!fn_.domain.contains(x)) throw std::domain_error("point outside domain");
  return fn_.sup_value - fn_.target(x);
}

}  // namespace kometo
