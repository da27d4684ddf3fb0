#include "kometo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace kometo {

namespace {

constexpr double kPi = std::numbers::pi;

double branin_raw(double x1, double x2, double b, double t) {
  const double a = 1.0, c = 5.0 / kPi, r = 6.0, s = 10.0;
  const double u = x2 - b * x1 * x1 + c * x1 - r;
  return a * u * u + s * (1.0 - t) * std::cos(x1) + s;
}

double branin_hi(const Point& x) {
  return -branin_raw(x[0], x[1], 5.1 / (4 * kPi * kPi), 1.0 / (8 * kPi));
}

double branin_lo(const Point& x) {
  return -branin_raw(x[0], x[1], 5.1 / (4 * kPi * kPi) - 0.01,
                     1.0 / (8 * kPi) + 0.05);
}

constexpr double kAlpha[4] = {1.0, 1.2, 3.0, 3.2};
constexpr double kDelta[4] = {0.1, -0.1, -0.1, 0.1};

constexpr double kA3[4][3] = {
    {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
constexpr double kP3[4][3] = {{0.3689, 0.1170, 0.2673},
                              {0.4699, 0.4387, 0.7470},
                              {0.1091, 0.8732, 0.5547},
                              {0.0381, 0.5743, 0.8828}};

constexpr double kA6[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                              {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                              {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                              {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kP6[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                              {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                              {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                              {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

template <int N>
double hartmann(const Point& x, const double (&A)[4][N],
                const double (&P)[4][N], bool low) {
  double out = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < N; ++j) {
      const double dx = x[j] - P[i][j];
      inner += A[i][j] * dx * dx;
    }
    out += (kAlpha[i] + (low ? kDelta[i] : 0.0)) * std::exp(-inner);
  }
  return out;
}

double hartmann3_hi(const Point& x) { return hartmann<3>(x, kA3, kP3, false); }
double hartmann3_lo(const Point& x) { return hartmann<3>(x, kA3, kP3, true); }
double hartmann6_hi(const Point& x) { return hartmann<6>(x, kA6, kP6, false); }
double hartmann6_lo(const Point& x) { return hartmann<6>(x, kA6, kP6, true); }

double currin_at(double x1, double x2) {
  const double fac = x2 > 0.0 ? 1.0 - std::exp(-1.0 / (2.0 * x2)) : 1.0;
  const double num =
      2300.0 * (x1 * x1 * x1) + 1900.0 * (x1 * x1) + 2092.0 * x1 + 60.0;
  const double den =
      100.0 * (x1 * x1 * x1) + 500.0 * (x1 * x1) + 4.0 * x1 + 20.0;
  return fac * num / den;
}

double currin_hi(const Point& x) { return currin_at(x[0], x[1]); }

double currin_lo(const Point& x) {
  const double x1 = x[0], x2 = x[1];
  const double down = std::max(0.0, x2 - 0.05);
  return (currin_at(x1 + 0.05, x2 + 0.05) + currin_at(x1 + 0.05, down) +
          currin_at(x1 - 0.05, x2 + 0.05) + currin_at(x1 - 0.05, down)) /
         4.0;
}

double borehole_raw(const Point& x, double front, double shift) {
  const double rw = x[0], r = x[1], tu = x[2], hu = x[3];
  const double tl = x[4], hl = x[5], len = x[6], kw = x[7];
  const double lr = std::log(r / rw);
  return front * tu * (hu - hl) /
         (lr * (shift + 2.0 * len * tu / (lr * (rw * rw) * kw) + tu / tl));
}

double borehole_hi(const Point& x) { return borehole_raw(x, 2.0 * kPi, 1.0); }
double borehole_lo(const Point& x) { return borehole_raw(x, 5.0, 1.5); }

struct Definition {
  Box box;
  double (*hi)(const Point&);
  double (*lo)(const Point&);
  Point peak;
};

Box make_box(std::vector<Interval> dims) {
  Box b;
  b.dims = std::move(dims);
  return b;
}

const std::map<std::string, Definition>& registry() {
  static const std::map<std::string, Definition> defs = [] {
    std::map<std::string, Definition> m;
    m["branin"] = {make_box({{-5.0, 10.0}, {0.0, 15.0}}),
                   branin_hi,
                   branin_lo,
                   {kPi, 2.275}};
    m["currin"] = {make_box({{0.0, 1.0}, {0.0, 1.0}}),
                   currin_hi,
                   currin_lo,
                   {0.21666666688693653, 0.0}};
    m["hartmann3"] = {
        make_box({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}),
        hartmann3_hi,
        hartmann3_lo,
        {0.11458888091277883, 0.55564889671688023, 0.85254698424564168}};
    m["hartmann6"] = {make_box({{0.0, 1.0},
                                {0.0, 1.0},
                                {0.0, 1.0},
                                {0.0, 1.0},
                                {0.0, 1.0},
                                {0.0, 1.0}}),
                      hartmann6_hi,
                      hartmann6_lo,
                      {0.20168950909365746, 0.15001069354111374,
                       0.47687397292509981, 0.2753324275220782,
                       0.31165161723956858, 0.65730053455367021}};
    m["borehole"] = {make_box({{0.05, 0.15},
                               {100.0, 50000.0},
                               {63070.0, 115600.0},
                               {990.0, 1110.0},
                               {63.1, 116.0},
                               {700.0, 820.0},
                               {1120.0, 1680.0},
                               {9855.0, 12045.0}}),
                     borehole_hi,
                     borehole_lo,
                     {0.15, 100.0, 115600.0, 1110.0, 116.0, 700.0, 1120.0,
                      12045.0}};
    return m;
  }();
  return defs;
}

const Definition& lookup(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::invalid_argument("unknown benchmark: " + name);
  return it->second;
}

// Root of x^(dim+1) = x + 1, the base of the additive-recurrence grid.
double plastic_root(int dim) {
  double x = 2.0;
  for (int i = 0; i < 200; ++i) x = std::pow(1.0 + x, 1.0 / (dim + 1));
  return x;
}

// 1.25 * max |hi - lo| over the box corners plus a 4096-point
// additive-recurrence grid; the inflation absorbs what the grid misses.
double calibration(const Definition& def) {
  const int dim = static_cast<int>(def.box.dim());
  double worst = 0.0;
  auto visit = [&](const Point& x) {
    worst = std::max(worst, std::abs(def.hi(x) - def.lo(x)));
  };
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Point x(dim);
    for (int j = 0; j < dim; ++j)
      x[j] = (mask >> j & 1) ? def.box.dims[j].hi : def.box.dims[j].lo;
    visit(x);
  }
  const double g = plastic_root(dim);
  std::vector<double> alpha(dim);
  for (int j = 0; j < dim; ++j)
    alpha[j] = std::fmod(1.0 / std::pow(g, j + 1), 1.0);
  for (int k = 1; k <= 4096; ++k) {
    Point x(dim);
    for (int j = 0; j < dim; ++j) {
      const double u = std::fmod(0.5 + k * alpha[j], 1.0);
      x[j] = def.box.dims[j].lo + u * (def.box.dims[j].hi - def.box.dims[j].lo);
    }
    visit(x);
  }
  return 1.25 * worst;
}

}  // namespace

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  for (const auto& [name, def] : registry()) names.push_back(name);
  return names;
}

Point benchmark_peak(const std::string& name) { return lookup(name).peak; }

MultiFidelityFunction benchmark(const std::string& name,
                                const CostToBiasModel& model,
                                double top_cost) {
  const Definition& def = lookup(name);
  validate(model);
  if (!(top_cost >= 1.0))
    throw std::invalid_argument("benchmark top cost must be >= 1");

  const double cal = calibration(def);
  auto hi = def.hi;
  auto lo = def.lo;

  MultiFidelityFunction fn;
  fn.domain = def.box;
  fn.sup_value = hi(def.peak);
  fn.target = [hi](const Point& x) { return hi(x); };
  fn.fidelity = [hi, lo, model, cal, top_cost](const Point& x, double cost) {
    if (cost >= top_cost) return hi(x);
    const double w =
        cal > 0.0 ? std::min(1.0, phi(model, cost) / cal) : 0.0;
    return (1.0 - w) * hi(x) + w * lo(x);
  };
  return fn;
}

}  // namespace kometo
