#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kometo/harness.hpp"
#include "kometo/theory.hpp"
#include "kometo/tree_instance.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Accepts either inline JSON or a path to a JSON file.
std::string json_or_file(const std::string& arg) {
  for (char c : arg)
    if (!std::isspace(static_cast<unsigned char>(c)))
      return c == '{' ? arg : read_file(arg);
  throw std::invalid_argument("empty JSON argument");
}

struct BoundSpec {
  kometo::SmoothnessProfile profile;
  kometo::CostToBiasModel model;
};

BoundSpec parse_bound_spec(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object() || !j.contains("profile") || !j.contains("model"))
    throw std::invalid_argument(
        "bound spec needs \"profile\" and \"model\" keys");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "profile" && it.key() != "model")
      throw std::invalid_argument("unknown bound-spec key: " + it.key());
  const nlohmann::json& p = j.at("profile");
  for (auto it = p.begin(); it != p.end(); ++it)
    if (it.key() != "nu" && it.key() != "rho" && it.key() != "d" &&
        it.key() != "C" && it.key() != "K")
      throw std::invalid_argument("unknown profile key: " + it.key());
  BoundSpec spec;
  spec.profile.nu = p.at("nu").get<double>();
  spec.profile.rho = p.at("rho").get<double>();
  spec.profile.d = p.at("d").get<double>();
  spec.profile.C = p.at("C").get<double>();
  spec.profile.K = p.at("K").get<int>();
  spec.profile.validate();
  spec.model = kometo::model_from_json(j.at("model").dump());
  return spec;
}

int cmd_run(const std::string& config_path) {
  const kometo::ExperimentConfig cfg =
      kometo::config_from_json(read_file(config_path));
  const auto rows = kometo::run_experiment(cfg);
  std::printf("%zu rows -> %s", rows.size(), cfg.csv_path.c_str());
  if (!cfg.svg_path.empty()) std::printf(", %s", cfg.svg_path.c_str());
  std::printf("\n");
  return 0;
}

int cmd_bench(const std::string& name, const std::vector<double>& budgets,
              const std::vector<std::string>& algos, double top_cost,
              const std::string& model_arg,
              const std::vector<long long>& seeds, const std::string& csv,
              const std::string& svg) {
  kometo::ExperimentConfig cfg = kometo::bench_config(name);
  if (!budgets.empty()) cfg.budgets = budgets;
  if (!algos.empty()) {
    cfg.algorithms.clear();
    for (const std::string& a : algos) cfg.algorithms.push_back({a, {}});
  }
  cfg.top_cost = top_cost;
  if (!model_arg.empty())
    cfg.model = kometo::model_from_json(json_or_file(model_arg));
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!csv.empty()) cfg.csv_path = csv;
  if (!svg.empty()) cfg.svg_path = svg;
  const auto rows = kometo::run_experiment(cfg);
  std::printf("%zu rows -> %s, %s\n", rows.size(), cfg.csv_path.c_str(),
              cfg.svg_path.c_str());
  return 0;
}

int cmd_bounds(const std::string& spec_arg,
               const std::vector<double>& budgets) {
  const BoundSpec spec = parse_bound_spec(json_or_file(spec_arg));
  const kometo::DecayRate rate =
      kometo::decay_rate(spec.profile, spec.model);
  std::printf("model: %s\n", kometo::describe(spec.model).c_str());
  std::printf("decay: high-budget %s, low-budget %s\n",
              rate.tag_high.c_str(), rate.tag_low.c_str());
  std::printf("%12s  %6s  %10s  %14s  %14s  %14s\n", "lambda", "regime",
              "depth", "ceiling", "floor", "envelope");
  for (double b : budgets) {
    const kometo::RegretCeiling up =
        kometo::upper_bound(spec.profile, spec.model, b);
    const kometo::RegretFloor lo =
        kometo::lower_bound(spec.profile, spec.model, std::max(b, 1.0));
    std::printf("%12g  %6s  %10.6g  %14.8g  %14.8g  %14.8g\n", b,
                up.high_budget ? "high" : "low", up.depth, up.value,
                lo.value, rate.envelope(b));
  }
  return 0;
}

int cmd_adversarial(const std::string& variant, const std::string& spec_arg,
                    double lambda, int h, int s, const std::string& emit_dir) {
  const BoundSpec spec = parse_bound_spec(json_or_file(spec_arg));
  const kometo::AdversarialVariant v =
      variant == "a" ? kometo::AdversarialVariant::kWidthLimited
                     : kometo::AdversarialVariant::kDepthLimited;
  const double floor =
      kometo::adversarial_floor(spec.profile, spec.model, lambda, v);
  std::printf("variant %s floor at lambda=%g: %.17g\n", variant.c_str(),
              lambda, floor);
  if (emit_dir.empty()) return 0;
  std::filesystem::create_directories(emit_dir);
  if (v == kometo::AdversarialVariant::kWidthLimited) {
    const auto family =
        kometo::adversarial_width_family(spec.profile, spec.model, h, s);
    for (std::size_t i = 0; i < family.size(); ++i) {
      std::ostringstream name;
      name << emit_dir << "/width_h" << h << "_s" << s << "_i" << i
           << ".json";
      std::ofstream out(name.str(), std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + name.str());
      out << family[i].to_json() << '\n';
      std::printf("wrote %s\n", name.str().c_str());
    }
  } else {
    const kometo::TreeInstance inst = kometo::adversarial_depth_instance(
        spec.profile, spec.model, h, kometo::BranchRule::fixed(0));
    std::ostringstream name;
    name << emit_dir << "/depth_h" << h << ".json";
    std::ofstream out(name.str(), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + name.str());
    out << inst.to_json() << '\n';
    std::printf("wrote %s\n", name.str().c_str());
  }
  return 0;
}

int cmd_verify(const std::string& path, int horizon) {
  const kometo::TreeInstance inst =
      kometo::TreeInstance::from_json(read_file(path));
  const kometo::VerifyReport report =
      kometo::verify_membership(inst, horizon);
  std::printf("%s: %s\n", inst.name().c_str(), report.describe().c_str());
  return report.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-fidelity tree-search optimizer"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "run a sweep from a config file");
  run->add_option("config", run_config, "JSON experiment config")->required();

  std::string bench_name, bench_model, bench_csv, bench_svg;
  std::vector<double> bench_budgets;
  std::vector<std::string> bench_algos;
  std::vector<long long> bench_seeds;
  double bench_top = 100.0;
  CLI::App* bench =
      app.add_subcommand("bench", "sweep a named benchmark function");
  bench->add_option("name", bench_name, "benchmark name")->required();
  bench->add_option("--budgets", bench_budgets,
                    "budget grid, multiples of lambda(1)");
  bench->add_option("--algos", bench_algos, "algorithms to run");
  bench->add_option("--top-cost", bench_top, "exact-evaluation cost");
  bench->add_option("--model", bench_model, "fidelity model JSON or file");
  bench->add_option("--seeds", bench_seeds, "seed list");
  bench->add_option("--csv", bench_csv, "CSV output path");
  bench->add_option("--svg", bench_svg, "SVG output path");

  std::string bounds_spec;
  std::vector<double> bounds_budgets{10, 100, 1000, 1e4, 1e5, 1e6};
  CLI::App* bounds =
      app.add_subcommand("bounds", "print regret ceiling/floor tables");
  bounds->add_option("profile", bounds_spec,
                     "JSON {profile, model} or a file holding it")
      ->required();
  bounds->add_option("--budgets", bounds_budgets, "budgets to tabulate");

  std::string adv_variant, adv_spec, adv_emit;
  double adv_lambda = 1000.0;
  int adv_h = 3, adv_s = 1;
  CLI::App* adv = app.add_subcommand(
      "adversarial", "evaluate hard-family regret floors");
  adv->add_option("--variant", adv_variant, "a = width-limited, b = depth-limited")
      ->required()
      ->check(CLI::IsMember({"a", "b"}));
  adv->add_option("--profile", adv_spec,
                  "JSON {profile, model} or a file holding it")
      ->required();
  adv->add_option("--lambda", adv_lambda, "budget for the floor");
  adv->add_option("--depth", adv_h, "construction depth h");
  adv->add_option("--shift", adv_s, "width-family shift s");
  adv->add_option("--emit", adv_emit, "write instance files to this directory");

  std::string verify_path;
  int verify_horizon = 10;
  CLI::App* verify = app.add_subcommand(
      "verify", "check a tree-instance file against its declared profile");
  verify->add_option("instance-file", verify_path, "instance JSON file")
      ->required();
  verify->add_option("--horizon", verify_horizon, "depths to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (bench->parsed())
      return cmd_bench(bench_name, bench_budgets, bench_algos, bench_top,
                       bench_model, bench_seeds, bench_csv, bench_svg);
    if (bounds->parsed()) return cmd_bounds(bounds_spec, bounds_budgets);
    if (adv->parsed())
      return cmd_adversarial(adv_variant, adv_spec, adv_lambda, adv_h, adv_s,
                             adv_emit);
    if (verify->parsed()) return cmd_verify(verify_path, verify_horizon);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
