#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procurl/config.hpp"
#include "procurl/context.hpp"
#include "procurl/learner.hpp"
#include "procurl/mdp.hpp"
#include "procurl/random.hpp"
#include "procurl/value.hpp"

namespace procurl {

/// Everything a run needs about the task family, built once per experiment.
struct Environment {
  std::shared_ptr<const ContextualMdp> mdp;
  std::shared_ptr<const FeatureMap> phi;
  std::vector<Context> task_space;
  TargetSpec target;
  /// Target modes used by the distance metric.
  std::vector<Context> target_modes;
};

Environment build_environment(const EnvironmentConfig& cfg);

struct MetricRow {
  std::uint64_t seed = 0;
  long env_steps = 0;
  double mean_target_return = 0.0;
  /// Mean distance of the selections since the previous row; NaN when there were none.
  double mean_distance_to_target = 0.0;
  std::string strategy;
  double wall_time_ms = 0.0;
};

struct SelectionRow {
  long step = 0;
  std::string strategy;
  int chosen_context_id = 0;
  /// -1 when the strategy does not pair with a target context.
  int paired_target_id = -1;
  /// NaN when the strategy has no score.
  double score = 0.0;
  double distance_to_target = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "seed,env_steps,mean_target_return,mean_distance_to_target,strategy,wall_time_ms";
inline constexpr const char* kSelectionsHeader =
    "step,strategy,chosen_context_id,paired_target_id,score,distance_to_target";
inline constexpr const char* kValuesHeader = "step,context_id,value";

void write_metric_row(std::ostream& out, const MetricRow& row);
void write_selection_row(std::ostream& out, const SelectionRow& row);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MetricRow> metrics;
  std::vector<SelectionRow> selections;
  /// Concatenated value-table dumps (rows of kValuesHeader), when enabled.
  std::string value_dump;
  PolicyParams final_params;
  long env_steps = 0;
  /// Set when the run stopped on a NumericalError; rows up to that point are kept.
  std::optional<std::string> numerical_error;
};

/// Mean per-context value over the held-out set: exact DP or `episodes`
/// Monte-Carlo rollouts per context. Repeated contexts are evaluated once in
/// exact mode.
double evaluate_policy(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                       const std::vector<Context>& held_out, ValueMode mode, int episodes, Rng& rng);

/// The fixed held-out target set shared by every seed of an experiment.
std::vector<Context> held_out_set(const ExperimentConfig& cfg, const Environment& env);

/// One seed of the teacher-student loop.
SeedResult run_seed(const ExperimentConfig& cfg, const Environment& env, const std::vector<Context>& held_out,
                    std::uint64_t seed);

/// All seeds, `cfg.threads` at a time; results come back in seed order.
std::vector<SeedResult> run_all_seeds(const ExperimentConfig& cfg, const Environment& env);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  bool numerical_error = false;
  std::string message;
};

/// Runs the experiment and writes metrics.csv, seed_<S>/selections.csv
/// (plus values.csv and policy.txt when enabled) and charts into
/// cfg.output_dir. Numerical failures still flush every row produced.
RunSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace procurl
