#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "procurl/envs.hpp"
#include "procurl/learner.hpp"
#include "procurl/teacher.hpp"
#include "procurl/value.hpp"

namespace procurl {

struct EnvironmentConfig {
  enum class Kind { GateGrid, Bandit };
  enum class Features { GateRelative, Tabular };
  Kind kind = Kind::GateGrid;

  GateGridSpec grid;
  /// point_mass | two_mode | uniform
  std::string target = "point_mass";
  Features features = Features::GateRelative;

  int bandit_dimension = 4;
  int bandit_contexts = 10;
  PsiScheme bandit_psi = PsiScheme::clustered(2, 0.1);
  std::uint64_t bandit_seed = 0;
  int bandit_target = 0;
};

struct ExperimentConfig {
  EnvironmentConfig environment;
  TeacherConfig teacher;
  double v_max = 1.0;
  LearnerConfig learner;
  int n_unif = 100;
  int n_targ = 100;
  /// Redraw both pools every this many env steps; 0 keeps them fixed.
  long pool_refresh_every = 0;

  std::vector<std::uint64_t> seeds{0};
  long total_env_steps = 25000;
  long eval_every = 2500;
  ValueMode eval_mode = ValueMode::Exact;
  int eval_episodes = 20;
  int held_out_size = 100;
  /// Seed of the held-out target set, shared by every seed and strategy.
  std::uint64_t held_out_seed = 0;
  long n_pos = 2000;
  ValueMode value_mode = ValueMode::Exact;
  int mc_episodes = 20;
  int threads = 1;
  std::filesystem::path output_dir = "out";
  /// When false wall_time_ms is written as 0, keeping metrics.csv reproducible.
  bool wall_time = false;
  bool dump_values = false;
  bool charts = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the INI-style config text. `overrides` are `section.key=value`
/// strings applied after the file. `source` names the input in diagnostics.
ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {},
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace procurl
