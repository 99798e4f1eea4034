// procurl: run curriculum experiments, merge charts, and run the verification probes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "procurl/charts.hpp"
#include "procurl/config.hpp"
#include "procurl/errors.hpp"
#include "procurl/experiment.hpp"
#include "procurl/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kCapabilityError = 4;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  const procurl::ExperimentConfig cfg = procurl::load_config(config_path, overrides);
  const procurl::RunSummary summary = procurl::run_experiment(cfg);
  for (const auto& f : summary.files) std::cout << "wrote " << f.string() << '\n';
  if (summary.numerical_error) {
    std::cerr << "numerical error: " << summary.message << " (partial outputs written)\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_chart(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  for (const auto& f : procurl::emit_charts(paths, out_dir, &std::cerr)) std::cout << "wrote " << f.string() << '\n';
  return kOk;
}

int verify_prop1(int trials, std::uint64_t seed) {
  const auto sweep = procurl::prop1_sweep(trials, seed);
  std::cout << "prop1: " << trials << " instances, max relative error " << sweep.max_rel_err << '\n';
  const bool ok = sweep.max_rel_err <= 1e-10;
  std::cout << (ok ? "PASS" : "FAIL") << " (tolerance 1e-10)\n";
  return ok ? kOk : kCheckFailed;
}

int verify_taylor(int trials, std::uint64_t seed) {
  const auto sweep = procurl::taylor_sweep(trials, seed);
  std::vector<double> slopes = sweep.slopes;
  std::sort(slopes.begin(), slopes.end());
  const double median = slopes.empty() ? std::nan("") : slopes[slopes.size() / 2];
  std::cout << "taylor: " << trials << " instances, " << slopes.size() << " with a measurable gap\n"
            << "  median log-log slope of |gap| vs eta: " << median << '\n'
            << "  sign agreement at eta = " << sweep.etas.back() << ": " << sweep.sign_agreements << '/'
            << sweep.trials << '\n';
  const bool ok = sweep.sign_agreements == sweep.trials && (slopes.empty() || std::abs(median - 2.0) <= 0.3);
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kOk : kCheckFailed;
}

int verify_convergence(int trials, std::uint64_t seed, const std::string& strategy_name, double eta,
                       const std::string& out_dir) {
  procurl::Rng rng(seed);
  const procurl::Bandit bandit = procurl::probe_bandit(rng);
  procurl::ProbeConfig probe = procurl::default_probe_config();
  probe.n_trials = trials;
  procurl::LearnerConfig learner;
  learner.learning_rate = eta;
  const auto strategy = procurl::parse_strategy(strategy_name);
  const auto report =
      procurl::run_convergence_probe(bandit, bandit.spec.contexts.front(), strategy, learner, probe, rng);
  report.write_summary(std::cout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "convergence.csv");
    report.write_csv(csv);
    std::ofstream summary(std::filesystem::path(out_dir) / "convergence_summary.txt");
    report.write_summary(summary);
  }
  const long steps = report.steps_to_epsilon.at(0.05);
  const bool ok = steps >= 0 && report.slope < 0.0 && report.r_squared > 0.8;
  std::cout << (ok ? "PASS" : "FAIL") << " (mean e_t <= 0.05, negative slope, R^2 > 0.8)\n";
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum selection experiments for contextual RL"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  app.add_option("--override", overrides, "Config override section.key=value (repeatable)")->type_name("KEY=VALUE");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--override", overrides, "Config override section.key=value (repeatable)")->type_name("KEY=VALUE");

  std::vector<std::string> chart_inputs;
  std::string chart_out;
  auto* chart = app.add_subcommand("chart", "Merge metrics.csv files into SVG learning curves");
  chart->add_option("metrics", chart_inputs, "metrics.csv files")->required();
  chart->add_option("--out", chart_out, "Output directory")->required();

  std::string which;
  int trials = -1;
  std::uint64_t seed = 0;
  std::string strategy = "gradient-align";
  double eta = 0.5;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run a verification probe");
  verify->add_option("check", which, "prop1 | taylor | convergence")
      ->required()
      ->check(CLI::IsMember({"prop1", "taylor", "convergence"}));
  verify->add_option("--trials", trials, "Number of trials");
  verify->add_option("--seed", seed, "Master seed");
  verify->add_option("--strategy", strategy, "Convergence probe strategy");
  verify->add_option("--eta", eta, "Convergence probe learning rate");
  verify->add_option("--out", verify_out, "Directory for the convergence report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, overrides);
    if (*chart) return cmd_chart(chart_inputs, chart_out);
    if (which == "prop1") return verify_prop1(trials > 0 ? trials : 100, seed);
    if (which == "taylor") return verify_taylor(trials > 0 ? trials : 100, seed);
    return verify_convergence(trials > 0 ? trials : 100, seed, strategy, eta, verify_out);
  } catch (const procurl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const procurl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const procurl::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return kCapabilityError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
