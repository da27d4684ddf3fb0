#include "kometo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "kometo/baselines.hpp"
#include "kometo/benchmarks.hpp"
#include "kometo/theory.hpp"
#include "kometo/tree_instance.hpp"

namespace kometo {

namespace {

constexpr const char* kCsvHeader =
    "algorithm,instance,budget,seed,spent,regret,wall_ms";

const std::set<std::string>& runnable_names() {
  static const std::set<std::string> names{"kometo", "sequool",
                                           "modified_sqrt", "modified_log"};
  return names;
}

OpeningSchedule::Kind baseline_kind(const std::string& name) {
  if (name == "sequool") return OpeningSchedule::Kind::kSequOOL;
  if (name == "modified_sqrt") return OpeningSchedule::Kind::kModifiedSqrt;
  return OpeningSchedule::Kind::kModifiedLog;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.benchmark.empty() == cfg.instance_file.empty())
    throw std::invalid_argument(
        "config needs exactly one of a benchmark name or an instance file");
  if (cfg.algorithms.empty())
    throw std::invalid_argument("config needs at least one algorithm");
  for (const AlgorithmSpec& a : cfg.algorithms) {
    if (a.name == "theorem3_bound") {
      if (cfg.instance_file.empty())
        throw std::invalid_argument(
            "theorem3_bound overlays need a tree-instance file");
    } else if (!runnable_names().count(a.name)) {
      throw std::invalid_argument("unknown algorithm: " + a.name);
    }
  }
  if (cfg.budgets.empty())
    throw std::invalid_argument("config needs at least one budget");
  for (double b : cfg.budgets)
    if (!(b > 0.0) || std::isinf(b))
      throw std::invalid_argument("budgets must be positive and finite");
  if (cfg.seeds.empty())
    throw std::invalid_argument("config needs at least one seed");
  if (cfg.arity < 2) throw std::invalid_argument("arity must be at least 2");
  if (!(cfg.top_cost >= 1.0))
    throw std::invalid_argument("top_cost must be >= 1");
}

void reject_unknown_keys(const nlohmann::json& obj,
                         std::initializer_list<const char*> allowed,
                         const char* what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument(std::string("unknown ") + what +
                                  " key: " + it.key());
  }
}

// Everything run_experiment needs from either instance source.
struct Source {
  MultiFidelityFunction fn;
  FidelitySchedule schedule;
  std::string label;
  int arity = 2;
  bool has_profile = false;
  SmoothnessProfile profile;
  CostToBiasModel model;
};

Source load_source(const ExperimentConfig& cfg) {
  Source s;
  if (!cfg.benchmark.empty()) {
    s.fn = benchmark(cfg.benchmark, cfg.model, cfg.top_cost);
    s.schedule = FidelitySchedule{cfg.top_cost};
    s.label = cfg.benchmark;
    s.arity = cfg.arity;
  } else {
    std::ifstream in(cfg.instance_file);
    if (!in) throw std::runtime_error("cannot read " + cfg.instance_file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    TreeInstance inst = TreeInstance::from_json(text);
    s.fn = inst.function();
    s.schedule = inst.schedule();
    s.label = inst.name();
    s.arity = inst.profile().K;
    s.has_profile = true;
    s.profile = inst.profile();
    s.model = inst.model();
  }
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const TraceRow& r) {
  std::ostringstream out;
  out << csv_field(r.algorithm) << ',' << csv_field(r.instance) << ','
      << fmt(r.budget) << ',' << r.seed << ',' << fmt(r.spent) << ','
      << fmt(r.regret) << ',' << fmt(r.wall_ms);
  return out.str();
}

std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool started = false;  // any content on the current record
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
      started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (started || !field.empty()) {
        fields.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(fields));
        fields.clear();
        started = false;
      }
    } else {
      field += c;
      started = true;
    }
  }
  if (started || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

double parse_number(const std::string& s, const std::string& path) {
  if (s.empty()) throw std::invalid_argument("empty numeric field in " + path);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw std::invalid_argument("bad numeric field '" + s + "' in " + path);
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

bool same_row(const TraceRow& a, const TraceRow& b) {
  auto deq = [](double x, double y) {
    return x == y || (std::isnan(x) && std::isnan(y));
  };
  return a.algorithm == b.algorithm && a.instance == b.instance &&
         deq(a.budget, b.budget) && a.seed == b.seed &&
         deq(a.spent, b.spent) && deq(a.regret, b.regret) &&
         deq(a.wall_ms, b.wall_ms);
}

ExperimentConfig config_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  reject_unknown_keys(
      j, {"instance", "algorithms", "budgets", "seeds", "arity", "csv", "svg"},
      "config");
  ExperimentConfig cfg;

  if (!j.contains("instance"))
    throw std::invalid_argument("config needs an \"instance\" object");
  const nlohmann::json& inst = j.at("instance");
  if (!inst.is_object())
    throw std::invalid_argument("\"instance\" must be an object");
  if (inst.contains("file")) {
    reject_unknown_keys(inst, {"file"}, "instance");
    cfg.instance_file = inst.at("file").get<std::string>();
  } else if (inst.contains("benchmark")) {
    reject_unknown_keys(inst, {"benchmark", "model", "top_cost"}, "instance");
    cfg.benchmark = inst.at("benchmark").get<std::string>();
    if (inst.contains("model"))
      cfg.model = model_from_json(inst.at("model").dump());
    if (inst.contains("top_cost"))
      cfg.top_cost = inst.at("top_cost").get<double>();
  } else {
    throw std::invalid_argument(
        "instance needs a \"benchmark\" or \"file\" key");
  }

  if (j.contains("arity")) {
    if (!cfg.instance_file.empty())
      throw std::invalid_argument(
          "arity applies only to benchmark instances (tree files carry K)");
    cfg.arity = j.at("arity").get<int>();
  }

  if (!j.contains("algorithms"))
    throw std::invalid_argument("config needs an \"algorithms\" array");
  for (const nlohmann::json& a : j.at("algorithms")) {
    if (!a.is_object())
      throw std::invalid_argument("each algorithm must be an object");
    reject_unknown_keys(a,
                        {"name", "budget_optimization",
                         "lazy_child_evaluation", "parent_reuse"},
                        "algorithm");
    AlgorithmSpec spec;
    if (!a.contains("name"))
      throw std::invalid_argument("each algorithm needs a \"name\"");
    spec.name = a.at("name").get<std::string>();
    for (const char* k :
         {"budget_optimization", "lazy_child_evaluation", "parent_reuse"})
      if (spec.name != "kometo" && a.contains(k))
        throw std::invalid_argument(std::string(k) +
                                    " applies only to kometo");
    spec.options.budget_optimization =
        a.value("budget_optimization", spec.options.budget_optimization);
    spec.options.lazy_child_evaluation =
        a.value("lazy_child_evaluation", spec.options.lazy_child_evaluation);
    spec.options.parent_reuse =
        a.value("parent_reuse", spec.options.parent_reuse);
    cfg.algorithms.push_back(std::move(spec));
  }

  if (!j.contains("budgets"))
    throw std::invalid_argument("config needs a \"budgets\" array");
  cfg.budgets = j.at("budgets").get<std::vector<double>>();
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<long long>>();
  if (!j.contains("csv"))
    throw std::invalid_argument("config needs a \"csv\" output path");
  cfg.csv_path = j.at("csv").get<std::string>();
  if (cfg.csv_path.empty())
    throw std::invalid_argument("csv output path must not be empty");
  cfg.svg_path = j.value("svg", std::string());

  validate_config(cfg);
  return cfg;
}

ExperimentConfig bench_config(const std::string& benchmark_name) {
  ExperimentConfig cfg;
  cfg.benchmark = benchmark_name;
  cfg.model = PolyDecay{1.0, 1.0};
  cfg.top_cost = 100.0;
  cfg.algorithms = {{"kometo", {}}, {"modified_sqrt", {}}, {"sequool", {}}};
  cfg.budgets = {10.0, 50.0, 100.0, 200.0, 400.0};
  cfg.seeds = {0};
  cfg.csv_path = benchmark_name + "_traces.csv";
  cfg.svg_path = benchmark_name + "_traces.svg";
  return cfg;
}

void sort_rows(std::vector<TraceRow>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const TraceRow& a, const TraceRow& b) {
              if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
              if (a.instance != b.instance) return a.instance < b.instance;
              if (a.budget != b.budget) return a.budget < b.budget;
              return a.seed < b.seed;
            });
}

std::vector<TraceRow> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const Source src = load_source(config);

  std::ofstream live;
  if (!config.csv_path.empty()) {
    live.open(config.csv_path, std::ios::trunc);
    if (!live) throw std::runtime_error("cannot write " + config.csv_path);
    live << kCsvHeader << '\n' << std::flush;
  }

  std::vector<TraceRow> rows;
  auto record = [&](TraceRow row) {
    if (live.is_open()) live << csv_line(row) << '\n' << std::flush;
    rows.push_back(std::move(row));
  };

  for (const AlgorithmSpec& algo : config.algorithms) {
    for (double b : config.budgets) {
      const double cash =
          std::isinf(src.schedule.top_cost) ? b : b * src.schedule.top_cost;
      if (algo.name == "theorem3_bound") {
        TraceRow row{algo.name, src.label, b, 0, 0.0, 0.0, 0.0};
        const double lt =
            static_cast<double>(effective_budget(cash, src.arity));
        row.regret = upper_bound(src.profile, src.model, lt).value;
        record(std::move(row));
        continue;
      }
      for (long long seed : config.seeds) {
        TraceRow row{algo.name, src.label, b, seed, 0.0, 0.0, 0.0};
        Environment env(src.fn, src.schedule, cash);
        const auto t0 = std::chrono::steady_clock::now();
        try {
          RegretTrace t;
          if (algo.name == "kometo") {
            KometoConfig opts = algo.options;
            opts.budget = cash;
            opts.arity = src.arity;
            t = run_kometo(opts, env);
          } else {
            t = run_baseline(baseline_kind(algo.name), env, cash, src.arity);
          }
          row.spent = t.spent;
          row.regret = env.regret(t.output);
        } catch (const InapplicableEnvironment&) {
          row.spent = 0.0;
          row.regret = std::numeric_limits<double>::quiet_NaN();
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        record(std::move(row));
      }
    }
  }

  sort_rows(rows);
  if (!config.csv_path.empty()) {
    live.close();
    emit_csv(rows, config.csv_path);
  }
  if (!config.svg_path.empty()) emit_svg(rows, config.svg_path);
  return rows;
}

void emit_csv(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kCsvHeader << '\n';
  for (const TraceRow& r : rows) out << csv_line(r) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<TraceRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const auto records = split_records(text);
  if (records.empty())
    throw std::invalid_argument("missing header in " + path);
  static const std::vector<std::string> header{
      "algorithm", "instance", "budget", "seed", "spent", "regret", "wall_ms"};
  if (records[0] != header)
    throw std::invalid_argument("unexpected header in " + path);
  std::vector<TraceRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != header.size())
      throw std::invalid_argument("expected 7 fields per row in " + path);
    TraceRow r;
    r.algorithm = rec[0];
    r.instance = rec[1];
    r.budget = parse_number(rec[2], path);
    r.seed = static_cast<long long>(parse_number(rec[3], path));
    r.spent = parse_number(rec[4], path);
    r.regret = parse_number(rec[5], path);
    r.wall_ms = parse_number(rec[6], path);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_svg(const std::vector<TraceRow>& rows, const std::string& path) {
  if (rows.empty())
    throw std::invalid_argument("emit_svg: no traces to plot");
  constexpr double kFloor = 1e-10;
  constexpr double kW = 640.0, kH = 420.0;
  constexpr double kMl = 74.0, kMr = 170.0, kMt = 24.0, kMb = 50.0;

  // algorithm -> budget -> mean finite regret (clamped to the floor)
  std::map<std::string, std::map<double, std::pair<double, int>>> groups;
  for (const TraceRow& r : rows) {
    if (std::isnan(r.regret)) continue;
    auto& cell = groups[r.algorithm][r.budget];
    cell.first += std::max(r.regret, kFloor);
    cell.second += 1;
  }

  double xmin = kInf, xmax = -kInf, ymax = kFloor;
  std::set<double> xticks;
  for (const auto& [name, pts] : groups) {
    (void)name;
    for (const auto& [b, sc] : pts) {
      xmin = std::min(xmin, b);
      xmax = std::max(xmax, b);
      ymax = std::max(ymax, sc.first / sc.second);
      xticks.insert(b);
    }
  }
  if (groups.empty()) {
    xmin = 1.0;
    xmax = 10.0;
  }
  if (xmin == xmax) {
    xmin *= 0.9;
    xmax = xmax * 1.1 + 1e-12;
  }
  const int dec_lo = -10;
  int dec_hi = static_cast<int>(std::ceil(std::log10(ymax)));
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1;

  auto px = [&](double x) {
    return kMl + (x - xmin) / (xmax - xmin) * (kW - kMl - kMr);
  };
  auto py = [&](double y) {
    const double t = (std::log10(y) - dec_lo) / (dec_hi - dec_lo);
    return kH - kMb - t * (kH - kMt - kMb);
  };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW
      << "' height='" << kH << "' viewBox='0 0 " << kW << " " << kH << "'>\n";
  svg << "<rect x='0' y='0' width='" << kW << "' height='" << kH
      << "' fill='#ffffff'/>\n";
  svg << "<rect x='" << coord(kMl) << "' y='" << coord(kMt) << "' width='"
      << coord(kW - kMl - kMr) << "' height='" << coord(kH - kMt - kMb)
      << "' fill='none' stroke='#444444'/>\n";

  // horizontal gridlines at decades, labelled 1e<k>
  const int step = std::max(1, (dec_hi - dec_lo) / 10);
  for (int dec = dec_lo; dec <= dec_hi; dec += step) {
    const double y = py(std::pow(10.0, dec));
    svg << "<line x1='" << coord(kMl) << "' y1='" << coord(y) << "' x2='"
        << coord(kW - kMr) << "' y2='" << coord(y)
        << "' stroke='#dddddd'/>\n";
    svg << "<text x='" << coord(kMl - 6) << "' y='" << coord(y + 4)
        << "' font-size='11' text-anchor='end' fill='#333333'>1e" << dec
        << "</text>\n";
  }
  // x ticks on the observed budgets (thinned when crowded)
  std::vector<double> xs(xticks.begin(), xticks.end());
  if (xs.size() > 8) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < xs.size(); i += (xs.size() + 7) / 8)
      kept.push_back(xs[i]);
    if (kept.back() != xs.back()) kept.push_back(xs.back());
    xs = kept;
  }
  for (double x : xs) {
    char label[32];
    std::snprintf(label, sizeof label, "%g", x);
    svg << "<line x1='" << coord(px(x)) << "' y1='" << coord(kH - kMb)
        << "' x2='" << coord(px(x)) << "' y2='" << coord(kH - kMb + 5)
        << "' stroke='#444444'/>\n";
    svg << "<text x='" << coord(px(x)) << "' y='" << coord(kH - kMb + 18)
        << "' font-size='11' text-anchor='middle' fill='#333333'>" << label
        << "</text>\n";
  }
  svg << "<text x='" << coord(kMl + (kW - kMl - kMr) / 2) << "' y='"
      << coord(kH - 10)
      << "' font-size='12' text-anchor='middle' fill='#333333'>budget"
      << "</text>\n";
  svg << "<text x='16' y='" << coord(kMt + (kH - kMt - kMb) / 2)
      << "' font-size='12' text-anchor='middle' fill='#333333' "
      << "transform='rotate(-90 16 " << coord(kMt + (kH - kMt - kMb) / 2)
      << ")'>simple regret</text>\n";

  int idx = 0;
  for (const auto& [name, pts] : groups) {
    const char* color = kPalette[idx % 8];
    std::ostringstream line;
    for (const auto& [b, sc] : pts) {
      const double y = sc.first / sc.second;
      line << coord(px(b)) << ',' << coord(py(y)) << ' ';
      svg << "<circle cx='" << coord(px(b)) << "' cy='" << coord(py(y))
          << "' r='2.6' fill='" << color << "'/>\n";
    }
    svg << "<polyline points='" << line.str() << "' fill='none' stroke='"
        << color << "' stroke-width='1.8'/>\n";
    const double ly = kMt + 14 + 18 * idx;
    svg << "<line x1='" << coord(kW - kMr + 10) << "' y1='" << coord(ly)
        << "' x2='" << coord(kW - kMr + 34) << "' y2='" << coord(ly)
        << "' stroke='" << color << "' stroke-width='1.8'/>\n";
    svg << "<text x='" << coord(kW - kMr + 40) << "' y='" << coord(ly + 4)
        << "' font-size='12' fill='#333333'>" << escape_xml(name)
        << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace kometo
