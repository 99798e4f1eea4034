#include "procurl/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "procurl/charts.hpp"
#include "procurl/envs.hpp"
#include "procurl/errors.hpp"
#include "procurl/teacher.hpp"

namespace procurl {

namespace {

// Per-seed stream indices for split_seed.
constexpr std::uint64_t kPoolStream = 1;
constexpr std::uint64_t kHeldOutStream = 2;
constexpr std::uint64_t kTeacherStream = 3;
constexpr std::uint64_t kRolloutStream = 4;
constexpr std::uint64_t kValueStream = 5;
constexpr std::uint64_t kEvalStream = 6;

double distance_to_modes(const Context& c, const std::vector<Context>& modes) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : modes) best = std::min(best, euclidean_distance(c, m));
  return best;
}

std::string library_key(const std::string& target) {
  if (target == "point_mass") return "point-mass";
  if (target == "two_mode") return "two-mode";
  return target;
}

}  // namespace

Environment build_environment(const EnvironmentConfig& cfg) {
  Environment env;
  if (cfg.kind == EnvironmentConfig::Kind::Bandit) {
    Rng rng(cfg.bandit_seed);
    Bandit bandit = make_bandit(cfg.bandit_dimension, cfg.bandit_contexts, cfg.bandit_psi, rng);
    env.mdp = bandit.mdp;
    env.phi = bandit.features;
    env.task_space = bandit.spec.contexts;
    env.target = TargetSpec::point_mass(cfg.bandit_target);
  } else {
    auto grid = std::make_shared<const GateGrid>(cfg.grid);
    env.mdp = grid;
    env.task_space = grid->task_space();
    const auto library = target_spec_library(*grid);
    env.target = library.at(library_key(cfg.target));
    if (cfg.features == EnvironmentConfig::Features::GateRelative) {
      // The map refers to the grid; the deleter keeps the grid alive with it.
      auto* map = new GateRelativeFeatureMap(*grid);
      env.phi = std::shared_ptr<const FeatureMap>(map, [grid](const FeatureMap* p) { delete p; });
    } else {
      env.phi = std::make_shared<TabularFeatureMap>(grid->num_states(), static_cast<int>(env.task_space.size()),
                                                    grid->num_actions());
    }
  }
  validate_task_space(env.task_space);
  env.target.validate(static_cast<int>(env.task_space.size()));
  env.target_modes = env.target.modes(env.task_space);
  return env;
}

void write_metric_row(std::ostream& out, const MetricRow& row) {
  out << row.seed << ',' << row.env_steps << ',' << std::setprecision(12) << row.mean_target_return << ','
      << row.mean_distance_to_target << ',' << row.strategy << ',' << std::setprecision(10) << row.wall_time_ms
      << '\n';
}

void write_selection_row(std::ostream& out, const SelectionRow& row) {
  out << row.step << ',' << row.strategy << ',' << row.chosen_context_id << ',' << row.paired_target_id << ','
      << std::setprecision(12) << row.score << ',' << row.distance_to_target << '\n';
}

double evaluate_policy(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                       const std::vector<Context>& held_out, ValueMode mode, int episodes, Rng& rng) {
  if (held_out.empty()) throw std::invalid_argument("evaluate_policy: empty held-out set");
  const SoftmaxPolicy policy(params, phi);
  double total = 0.0;
  if (mode == ValueMode::Exact) {
    double weight = 0.0;
    for (const auto& wc : dedup_by_id(held_out)) {
      total += wc.weight * value_exact(mdp, policy, wc.context);
      weight += wc.weight;
    }
    return total / weight;
  }
  for (const auto& c : held_out) total += value_mc(mdp, policy, c, episodes, rng);
  return total / static_cast<double>(held_out.size());
}

std::vector<Context> held_out_set(const ExperimentConfig& cfg, const Environment& env) {
  Rng rng(split_seed(cfg.held_out_seed, kHeldOutStream));
  std::vector<Context> out;
  out.reserve(static_cast<std::size_t>(cfg.held_out_size));
  for (int i = 0; i < cfg.held_out_size; ++i) {
    out.push_back(env.task_space.at(static_cast<std::size_t>(env.target.sample(rng))));
  }
  return out;
}

SeedResult run_seed(const ExperimentConfig& cfg, const Environment& env, const std::vector<Context>& held_out,
                    std::uint64_t seed) {
  SeedResult res;
  res.seed = seed;
  Rng pool_rng(split_seed(seed, kPoolStream));
  Rng teacher_rng(split_seed(seed, kTeacherStream));
  Rng rollout_rng(split_seed(seed, kRolloutStream));
  Rng value_rng(split_seed(seed, kValueStream));
  Rng eval_rng(split_seed(seed, kEvalStream));

  const ContextualMdp& mdp = *env.mdp;
  const FeatureMap& phi = *env.phi;
  const Strategy strategy = cfg.teacher.strategy;
  const std::string name = to_string(strategy);
  TaskPools pools;
  std::vector<Context> candidates;
  std::vector<WeightedContext> target_mix;
  const auto draw_pools = [&]() {
    pools = build_pools(env.task_space, env.target, cfg.n_unif, cfg.n_targ, pool_rng);
    candidates.clear();
    for (const auto& wc : dedup_by_id(pools.unif_pool)) candidates.push_back(wc.context);
    target_mix = dedup_by_id(pools.targ_pool, pools.target_weights);
  };
  draw_pools();

  PolicyParams& params = res.final_params;
  params = PolicyParams::zeros(phi.dimension());
  const SoftmaxPolicy policy(params, phi);
  const bool uses_values = strategy == Strategy::ProCuRLTarget || strategy == Strategy::ProCuRLUnif;
  const RefreshOptions refresh{cfg.value_mode, true, cfg.mc_episodes};
  ValueTable table(cfg.v_max);
  std::ostringstream values_out;

  const auto start = std::chrono::steady_clock::now();
  long env_steps = 0;
  long teacher_step = 0;
  long last_refresh = 0;
  long last_pool_draw = 0;
  long next_eval = cfg.eval_every;
  double dist_sum = 0.0;
  long dist_count = 0;

  const auto eval_row = [&]() {
    MetricRow row;
    row.seed = seed;
    row.env_steps = env_steps;
    row.mean_target_return = evaluate_policy(params, mdp, phi, held_out, cfg.eval_mode, cfg.eval_episodes, eval_rng);
    row.mean_distance_to_target =
        dist_count > 0 ? dist_sum / static_cast<double>(dist_count) : std::numeric_limits<double>::quiet_NaN();
    row.strategy = name;
    row.wall_time_ms =
        cfg.wall_time
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
            : 0.0;
    res.metrics.push_back(row);
    dist_sum = 0.0;
    dist_count = 0;
  };
  const auto refresh_table = [&]() {
    table = refresh_values(table, mdp, policy, pools, refresh, env_steps, &value_rng).table;
    last_refresh = env_steps;
    if (cfg.dump_values) table.dump_csv(values_out);
  };

  try {
    if (uses_values) refresh_table();
    eval_row();
    std::vector<Trajectory> batch(static_cast<std::size_t>(cfg.learner.batch_size));
    do {
      if (cfg.pool_refresh_every > 0 && env_steps - last_pool_draw >= cfg.pool_refresh_every) {
        draw_pools();
        last_pool_draw = env_steps;
        if (uses_values) refresh_table();
      }
      if (uses_values && env_steps - last_refresh >= cfg.n_pos) refresh_table();

      SelectionRow sel;
      sel.step = teacher_step;
      sel.strategy = name;
      sel.score = std::numeric_limits<double>::quiet_NaN();
      Context chosen;
      switch (strategy) {
        case Strategy::ProCuRLTarget: {
          const PairSelection pick = select_softmax_pair(table, pools, cfg.teacher, teacher_rng);
          chosen = pick.c;
          sel.paired_target_id = pick.c_targ.id;
          sel.score = pick.score;
          break;
        }
        case Strategy::ProCuRLUnif: {
          const UnifSelection pick = select_procurl_unif(table, pools, cfg.teacher, teacher_rng);
          chosen = pick.c;
          sel.score = pick.potential;
          break;
        }
        case Strategy::IID:
        case Strategy::Target:
          chosen = select_baseline(pools, cfg.teacher, teacher_rng);
          break;
        case Strategy::GradientAlign: {
          const Context& c_targ = pools.targ_pool[teacher_rng.categorical(pools.target_weights)];
          chosen = select_gradient_align(params, mdp, phi, candidates, c_targ);
          sel.paired_target_id = c_targ.id;
          break;
        }
        case Strategy::GreedyOracle:
          chosen = select_greedy_oracle(params, mdp, phi, cfg.learner, candidates, target_mix);
          break;
      }
      sel.chosen_context_id = chosen.id;
      sel.distance_to_target = distance_to_modes(chosen, env.target_modes);

      long steps_this_round = 0;
      for (auto& traj : batch) {
        traj = rollout(mdp, policy, chosen, rollout_rng);
        steps_this_round += static_cast<long>(traj.length());
      }
      if (steps_this_round == 0) throw CapabilityError("rollout produced an empty episode");
      params = reinforce_update(params, batch, chosen, phi, cfg.learner.rate_at(teacher_step));
      if (!params.all_finite()) {
        throw NumericalError("non-finite policy parameters after teacher step " + std::to_string(teacher_step));
      }

      env_steps += steps_this_round;
      ++teacher_step;
      res.selections.push_back(sel);
      dist_sum += sel.distance_to_target;
      ++dist_count;
      if (env_steps >= next_eval) {
        eval_row();
        next_eval = (env_steps / cfg.eval_every + 1) * cfg.eval_every;
      }
    } while (env_steps < cfg.total_env_steps);
  } catch (const NumericalError& e) {
    res.numerical_error = "seed " + std::to_string(seed) + ": " + e.what();
  }
  res.env_steps = env_steps;
  res.value_dump = values_out.str();
  return res;
}

std::vector<SeedResult> run_all_seeds(const ExperimentConfig& cfg, const Environment& env) {
  const std::vector<Context> held_out = held_out_set(cfg, env);
  const std::size_t n = cfg.seeds.size();
  std::vector<SeedResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_seed(cfg, env, held_out, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.threads, 1)), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Environment env = build_environment(cfg.environment);
  const std::vector<SeedResult> results = run_all_seeds(cfg, env);

  RunSummary summary;
  std::filesystem::create_directories(cfg.output_dir);
  const auto open = [&summary](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    summary.files.push_back(p);
    return out;
  };

  const auto metrics_path = cfg.output_dir / "metrics.csv";
  {
    std::ofstream out = open(metrics_path);
    out << kMetricsHeader << '\n';
    for (const auto& r : results) {
      for (const auto& row : r.metrics) write_metric_row(out, row);
    }
  }
  for (const auto& r : results) {
    const auto dir = cfg.output_dir / ("seed_" + std::to_string(r.seed));
    std::filesystem::create_directories(dir);
    {
      std::ofstream out = open(dir / "selections.csv");
      out << kSelectionsHeader << '\n';
      for (const auto& row : r.selections) write_selection_row(out, row);
    }
    if (cfg.dump_values) {
      std::ofstream out = open(dir / "values.csv");
      out << kValuesHeader << '\n' << r.value_dump;
      std::ofstream params_out = open(dir / "policy.txt");
      save_params(params_out, r.final_params);
    }
    if (r.numerical_error && !summary.numerical_error) {
      summary.numerical_error = true;
      summary.message = *r.numerical_error;
    }
  }
  if (cfg.charts) {
    for (auto& p : emit_charts({metrics_path}, cfg.output_dir)) summary.files.push_back(p);
  }
  return summary;
}

}  // namespace procurl
