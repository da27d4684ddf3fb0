#include "kometo/theory.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace kometo {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

std::string format_tag(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

double lambert_w0(double x) {
  if (!(x >= 0.0)) throw std::domain_error("lambert_w0: x must be >= 0");
  if (x == 0.0) return 0.0;
  double w = x < kE ? x / kE : std::log(x) - std::log(std::log(x));
  if (w <= 0.0) w = x / kE;
  for (int it = 0; it < 64; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    double step = f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2));
    w -= step;
    if (std::abs(step) <= 1e-15 * std::max(std::abs(w), 1.0)) break;
  }
  return w;
}

double lambert_w0_floor(double x) {
  if (!(x >= 0.0)) throw std::domain_error("lambert_w0_floor: x must be >= 0");
  if (x <= kE) return x / kE;
  return std::log(x) - std::log(std::log(x));
}

namespace {

// Positive real h solving lambda_tilde / (4 * h * unit_cost) = C * rho^(-d*h):
// linear when d = 0, Lambert-W otherwise.
double depth_fixed_point(const SmoothnessProfile& p, double lambda_tilde,
                         double unit_cost, bool envelope) {
  double L = std::log(1.0 / p.rho);
  if (p.d == 0.0) return lambda_tilde / (4.0 * p.C * unit_cost);
  double arg = lambda_tilde * p.d * L / (4.0 * p.C * unit_cost);
  double w = envelope ? lambert_w0_floor(arg) : lambert_w0(arg);
  return w / (p.d * L);
}

// Depth fixed point when the required cost itself grows with depth as
// e * (A / (nu * rho^h))^(1/alpha).
double poly_matched_depth(const SmoothnessProfile& p, const PolyDecay& m,
                          double lambda_tilde, bool envelope) {
  double L = std::log(1.0 / p.rho);
  double gamma = (p.d + 1.0 / m.alpha) * L;
  double arg = lambda_tilde * std::pow(p.nu, 1.0 / m.alpha) * gamma /
               (4.0 * p.C * kE * std::pow(m.A, 1.0 / m.alpha));
  double w = envelope ? lambert_w0_floor(arg) : lambert_w0(arg);
  return w / gamma;
}

// Depth fixed point when the required cost grows as
// e * (2*sigma*h*log(1/rho))^(1/beta).
double exp_matched_depth(const SmoothnessProfile& p, const ExpDecay& m,
                         double lambda_tilde, bool envelope) {
  double L = std::log(1.0 / p.rho);
  double x = std::pow(lambda_tilde / (4.0 * p.C * kE), m.beta / (m.beta + 1)) *
             std::pow(2.0 * m.sigma * L, -1.0 / (m.beta + 1));
  if (p.d == 0.0) return x;
  double gp = m.beta / (m.beta + 1) * p.d * L;
  double w = envelope ? lambert_w0_floor(gp * x) : lambert_w0(gp * x);
  return w / gp;
}

struct CeilingParts {
  bool high = false;
  double depth = 0.0;
  double bias_term = 0.0;
  double depth_coefficient = 0.0;  // multiplies rho^depth
};

CeilingParts ceiling_parts(const SmoothnessProfile& p,
                           const CostToBiasModel& model, double lt,
                           bool envelope) {
  CeilingParts out;
  double L = std::log(1.0 / p.rho);
  if (const PolyDecay* m = std::get_if<PolyDecay>(&model)) {
    double h1 = poly_matched_depth(p, *m, lt, false);
    out.high = p.nu * std::pow(p.rho, h1) <= std::pow(kE, m->alpha) * m->A;
    out.depth = out.high ? (envelope ? poly_matched_depth(p, *m, lt, true) : h1)
                         : depth_fixed_point(p, lt, 1.0, envelope);
    out.bias_term = 2.0 * m->A / std::pow(lt, m->alpha);
    out.depth_coefficient = 3.0 * p.nu / p.rho;
  } else if (const ExpDecay* m = std::get_if<ExpDecay>(&model)) {
    double abn = std::max(1.0 / (2.0 * m->sigma), std::log(m->B / p.nu));
    double h1 = exp_matched_depth(p, *m, lt, false);
    out.high = h1 >= abn / L;
    double unit = kE * std::pow(2.0 * m->sigma * abn, 1.0 / m->beta);
    out.depth = out.high ? (envelope ? exp_matched_depth(p, *m, lt, true) : h1)
                         : depth_fixed_point(p, lt, unit, envelope);
    out.bias_term = 2.0 * m->B * std::exp(-std::pow(lt, m->beta) / m->sigma);
    out.depth_coefficient = 3.0 * p.nu / p.rho;
  } else {
    const Cutoff& cm = std::get<Cutoff>(model);
    out.high = lt >= cm.a;
    out.depth = depth_fixed_point(p, lt, cm.a * kE, envelope);
    out.bias_term = 0.0;
    out.depth_coefficient = p.nu / p.rho;
  }
  return out;
}

}  // namespace

RegretCeiling upper_bound(const SmoothnessProfile& profile,
                          const CostToBiasModel& model, double lambda_tilde) {
  profile.validate();
  validate(model);
  RegretCeiling r;
  if (lambda_tilde < 1.0) {
    r.value = profile.nu / profile.rho;
    return r;
  }
  CeilingParts parts = ceiling_parts(profile, model, lambda_tilde, false);
  r.high_budget = parts.high;
  r.depth = parts.depth;
  r.value = parts.depth_coefficient * std::pow(profile.rho, parts.depth) +
            parts.bias_term;
  return r;
}

double DecayRate::envelope(double lambda_tilde) const {
  if (lambda_tilde < 1.0) return profile.nu / profile.rho;
  CeilingParts parts = ceiling_parts(profile, model, lambda_tilde, true);
  return parts.depth_coefficient * std::pow(profile.rho, parts.depth) +
         parts.bias_term;
}

DecayRate decay_rate(const SmoothnessProfile& profile,
                     const CostToBiasModel& model) {
  profile.validate();
  validate(model);
  DecayRate out;
  out.profile = profile;
  out.model = model;
  if (const PolyDecay* m = std::get_if<PolyDecay>(&model)) {
    if (profile.d == 0.0) {
      out.tag_high = out.tag_low =
          format_tag("O~(Lambda^-%.6g)", m->alpha);
    } else {
      out.tag_high =
          format_tag("O~(Lambda^-%.6g)", 1.0 / (profile.d + 1.0 / m->alpha));
      out.tag_low = format_tag("O~(Lambda^-%.6g", 1.0 / profile.d) +
                    format_tag(" + Lambda^-%.6g)", m->alpha);
    }
  } else if (const ExpDecay* m = std::get_if<ExpDecay>(&model)) {
    if (profile.d == 0.0) {
      out.tag_high =
          format_tag("exp(-O~(Lambda^%.6g))", m->beta / (1.0 + m->beta));
      out.tag_low = format_tag("exp(-O~(Lambda^%.6g))", m->beta) +
                    std::string(" + exp(-O~(Lambda))");
    } else {
      out.tag_high = out.tag_low =
          format_tag("O~(Lambda^-%.6g)", 1.0 / profile.d);
    }
  } else {
    out.tag_high = out.tag_low =
        profile.d == 0.0
            ? std::string("exp(-O~(Lambda))")
            : format_tag("O~(Lambda^-%.6g)", 1.0 / profile.d);
  }
  return out;
}

RegretFloor lower_bound(const SmoothnessProfile& profile,
                        const CostToBiasModel& model, double lambda) {
  profile.validate();
  validate(model);
  if (!(lambda >= 1.0)) throw std::domain_error("lower_bound: lambda >= 1");
  const double nu = profile.nu, rho = profile.rho, d = profile.d;
  const double K = profile.K;
  const double L = std::log(1.0 / rho);
  RegretFloor out;
  if (const PolyDecay* m = std::get_if<PolyDecay>(&model)) {
    double e1 = d + 1.0 / m->alpha;
    out.coefficient = std::pow(K, -1.0 / e1) *
                      std::pow(2.0 / (nu * rho), -d / e1) *
                      std::pow(2.0 / (rho * m->A), -1.0 / (1.0 + d * m->alpha));
    out.r_min = std::min(rho * m->A / 2.0, nu * rho / 2.0);
    double r = out.r_min;
    out.valid_above =
        std::max(1.0, std::pow(2.0 * r / (nu * rho), -d) *
                          std::pow(2.0 * r / (rho * m->A), -1.0 / m->alpha) /
                          K);
    out.value = lambda >= out.valid_above
                    ? out.coefficient * std::pow(lambda, -1.0 / e1)
                    : out.r_min;
  } else if (const ExpDecay* m = std::get_if<ExpDecay>(&model)) {
    if (d == 0.0) {
      double D = std::pow(4.0, 1.0 + 1.0 / m->beta) * L *
                 std::pow(m->sigma, -1.0 / m->beta);
      out.coefficient = 2.0 * std::pow(D, m->beta / (1.0 + m->beta));
      double l1 = std::log(nu / 4.0) - 8.0 * L;
      double l2 = std::log(std::pow(m->B / nu, 4.0) * nu / 4.0);
      out.r_min = std::min({nu * std::pow(rho, 6.0) / 4.0,
                            std::pow(rho * m->B / nu, 4.0) * nu / 4.0,
                            std::exp(2.0 * l1), std::exp(2.0 * l2)});
      double r = out.r_min;
      double openings = std::log(nu / (4.0 * r)) / (4.0 * L) - 2.0;
      double cost = std::max(
          1.0, phi_inverse_at_most(
                   model, nu / rho * std::pow(4.0 * r / nu, 0.25)));
      out.valid_above = std::max(1.0, openings * cost);
      out.value = lambda >= out.valid_above
                      ? std::exp(-out.coefficient *
                                 std::pow(lambda, m->beta / (1.0 + m->beta)))
                      : out.r_min;
    } else {
      out.coefficient = nu * rho / 2.0 * std::pow(K, -1.0 / d);
      out.r_min = nu * rho / 2.0;
      out.valid_above = std::max(
          1.0, phi_inverse_at_most(model, 2.0 * out.r_min / rho) / K);
      out.value = lambda >= out.valid_above
                      ? out.coefficient * std::pow(lambda, -1.0 / d)
                      : out.r_min;
    }
  } else {
    const Cutoff& cm = std::get<Cutoff>(model);
    if (d == 0.0) {
      out.coefficient = 8.0 * L / cm.a;
      out.r_min = nu * std::pow(rho, 6.0) / 4.0;
      double openings = std::log(nu / (4.0 * out.r_min)) / (4.0 * L) - 2.0;
      double extra = cm.a / (4.0 * L) * (std::log(4.0 / nu) + 8.0 * L);
      out.valid_above = std::max({1.0, openings * cm.a, extra});
      out.value = lambda >= out.valid_above
                      ? std::exp(-out.coefficient * lambda)
                      : out.r_min;
    } else {
      out.coefficient = nu * rho / 2.0 * std::pow(K, -1.0 / d);
      out.r_min = nu * rho / 2.0;
      out.valid_above = std::max(1.0, std::max(cm.a, 1.0) / K);
      out.value = lambda >= out.valid_above
                      ? out.coefficient * std::pow(lambda, -1.0 / d)
                      : out.r_min;
    }
  }
  return out;
}

namespace {

// Budget an adversary can force a policy to spend before distinguishing the
// instances that keep regret r alive; non-increasing in r.
double adversary_budget(const SmoothnessProfile& p, const CostToBiasModel& m,
                        double r, AdversarialVariant v) {
  if (v == AdversarialVariant::kWidthLimited) {
    double cost = std::max(1.0, phi_inverse_at_most(m, 2.0 * r / p.rho));
    return std::pow(2.0 * r / (p.nu * p.rho), -p.d) * cost / p.K;
  }
  double L = std::log(1.0 / p.rho);
  double openings = std::log(p.nu / (4.0 * r)) / (4.0 * L) - 2.0;
  if (openings <= 0.0) return 0.0;
  double cost = std::max(
      1.0, phi_inverse_at_most(m, p.nu / p.rho * std::pow(4.0 * r / p.nu,
                                                          0.25)));
  return openings * cost;
}

}  // namespace

double adversarial_floor(const SmoothnessProfile& profile,
                         const CostToBiasModel& model, double lambda,
                         AdversarialVariant variant) {
  profile.validate();
  validate(model);
  if (!(lambda > 0)) throw std::domain_error("adversarial_floor: lambda > 0");
  double cap = variant == AdversarialVariant::kWidthLimited
                   ? profile.nu * profile.rho / 2.0
                   : profile.nu * std::pow(profile.rho, 6.0) / 4.0;
  auto feasible = [&](double r) {
    return lambda <= adversary_budget(profile, model, r, variant);
  };
  if (feasible(cap)) return cap;
  double lo = cap;
  while (!feasible(lo)) {
    lo /= 2.0;
    if (lo < 1e-300) return 0.0;
  }
  double hi = lo * 2.0;  // infeasible, lo feasible
  for (int it = 0; it < 200 && hi - lo > 1e-14 * lo; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

bool certificate_conditions(const SmoothnessProfile& profile,
                            const CostToBiasModel& psi, double lambda_tilde,
                            int j, double h_tilde) {
  if (j < 0 || !(h_tilde > 0))
    throw std::domain_error("certificate needs j >= 0 and h_tilde > 0");
  double bias = phi(psi, std::exp(static_cast<double>(j)));
  if (!(bias <= profile.nu * std::pow(profile.rho, h_tilde))) return false;
  double share = lambda_tilde /
                 (4.0 * h_tilde * std::exp(static_cast<double>(j)));
  return share >= profile.C * std::pow(profile.rho, -profile.d * h_tilde);
}

double certificate_regret_bound(const SmoothnessProfile& profile,
                                const CostToBiasModel& psi,
                                double lambda_tilde, double h_tilde) {
  double depth_term = 3.0 * profile.nu / profile.rho *
                      std::pow(profile.rho, h_tilde);
  return depth_term + 2.0 * phi(psi, std::max(lambda_tilde, 1.0));
}

}  // namespace kometo
