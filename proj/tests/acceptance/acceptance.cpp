// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "procurl/config.hpp"
#include "procurl/envs.hpp"
#include "procurl/experiment.hpp"
#include "procurl/learner.hpp"
#include "procurl/teacher.hpp"
#include "procurl/value.hpp"
#include "procurl/verify.hpp"

using namespace procurl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

PolicyParams normal_params(int dim, Rng& rng) {
  PolicyParams p = PolicyParams::zeros(dim);
  for (int i = 0; i < dim; ++i) p.theta[i] = rng.normal();
  return p;
}

double gradient_rel_err(const PolicyParams& p, const ContextualMdp& mdp, const FeatureMap& phi, const Context& c) {
  const Eigen::VectorXd exact = expected_policy_gradient(p, mdp, phi, c);
  const double h = 1e-5;
  Eigen::VectorXd fd(p.theta.size());
  PolicyParams q = p;
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    q.theta[i] = p.theta[i] + h;
    const double up = value_exact(mdp, SoftmaxPolicy(q, phi), c);
    q.theta[i] = p.theta[i] - h;
    const double down = value_exact(mdp, SoftmaxPolicy(q, phi), c);
    q.theta[i] = p.theta[i];
    fd[i] = (up - down) / (2 * h);
  }
  return (exact - fd).norm() / std::max(exact.norm(), 1e-12);
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const auto sweep = prop1_sweep(100, 2024);
  const double secs = seconds_since(t0);
  report(1, sweep.results.size() == 100 && sweep.max_rel_err <= 1e-10 && secs < 5.0,
         "100 bandit instances, max relative error " + fmt(sweep.max_rel_err) + " (<= 1e-10), " + fmt(secs, 3) +
             " s (< 5 s)");
}

void criterion2() {
  const auto t0 = Clock::now();
  Rng rng(split_seed(2024, 2));
  double worst_bandit = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Bandit b = sweep_bandit(i, rng);
    const PolicyParams p = normal_params(b.features->dimension(), rng);
    for (const Context& c : b.spec.contexts) {
      worst_bandit = std::max(worst_bandit, gradient_rel_err(p, *b.mdp, *b.features, c));
    }
  }
  GateGridSpec spec;
  spec.grid_size = 5;
  spec.wall_row = 2;
  spec.horizon_cap = 50;
  const GateGrid grid(spec);
  const auto contexts = grid.task_space();
  const TabularFeatureMap phi(grid.num_states(), static_cast<int>(contexts.size()), grid.num_actions());
  double worst_grid = 0.0;
  for (const Context& c : contexts) {
    const PolicyParams p = normal_params(phi.dimension(), rng);
    worst_grid = std::max(worst_grid, gradient_rel_err(p, grid, phi, c));
  }
  const double secs = seconds_since(t0);
  report(2, worst_bandit <= 1e-5 && worst_grid <= 1e-5 && secs < 60.0,
         "max relative error vs central differences: 20 bandits " + fmt(worst_bandit) + ", 5x5 gate grid (" +
             std::to_string(contexts.size()) + " contexts, horizon 50) " + fmt(worst_grid) + " (<= 1e-5), " +
             fmt(secs, 3) + " s (< 60 s)");
}

void criterion3() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const Bandit b = probe_bandit(rng);
  ProbeConfig probe = default_probe_config();
  probe.n_trials = 100;
  LearnerConfig learner;
  learner.learning_rate = 0.5;
  const auto r = run_convergence_probe(b, b.spec.contexts.front(), Strategy::GradientAlign, learner, probe, rng);
  const double secs = seconds_since(t0);
  const long steps = r.steps_to_epsilon.at(0.05);
  // Reported only: the mean curve never rises by more than 3 standard errors.
  bool non_increasing = true;
  for (std::size_t t = 0; t + 1 < r.mean.size(); ++t) {
    if (r.mean[t + 1] > r.mean[t] + 3 * r.std_error[t + 1] + 1e-12) non_increasing = false;
  }
  report(3, steps >= 0 && r.slope < 0.0 && r.r_squared > 0.8 && secs < 60.0,
         "GradientAlign, 100 trials: mean e_t <= 0.05 at step " + std::to_string(steps) + ", fit over " +
             std::to_string(r.fit_points) + " steps slope " + fmt(r.slope) + " R^2 " + fmt(r.r_squared) +
             ", mean curve non-increasing within 3 SE: " + (non_increasing ? "yes" : "no") + ", " + fmt(secs, 3) +
             " s (< 60 s)");
}

// ---------------------------------------------------------------------------

long first_hit(const std::vector<MetricRow>& rows, double threshold) {
  for (const auto& m : rows) {
    if (m.mean_target_return >= threshold) return m.env_steps;
  }
  return std::numeric_limits<long>::max();
}

std::vector<SeedResult> run_strategy(ExperimentConfig cfg, const Environment& env, Strategy s,
                                     const std::vector<std::uint64_t>& seeds, double beta) {
  cfg.teacher.strategy = s;
  cfg.teacher.beta = beta;
  cfg.seeds = seeds;
  return run_all_seeds(cfg, env);
}

struct Comparison {
  double win_fraction = 0.0;
  double mean_diff = 0.0;
  double se_diff = 0.0;
  std::vector<long> hits_p, hits_i, hits_t;
};

Comparison compare(const std::vector<SeedResult>& p, const std::vector<SeedResult>& iid,
                   const std::vector<SeedResult>& targ, double threshold) {
  Comparison out;
  std::vector<double> diffs;
  int wins = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const long hp = first_hit(p[k].metrics, threshold);
    const long hi = first_hit(iid[k].metrics, threshold);
    const long ht = first_hit(targ[k].metrics, threshold);
    out.hits_p.push_back(hp);
    out.hits_i.push_back(hi);
    out.hits_t.push_back(ht);
    if (hp < hi && hp < ht) ++wins;
    const std::size_t n = std::min(p[k].metrics.size(), targ[k].metrics.size());
    diffs.push_back(p[k].metrics[n - 1].mean_target_return - targ[k].metrics[n - 1].mean_target_return);
  }
  const double n = static_cast<double>(diffs.size());
  out.win_fraction = wins / n;
  out.mean_diff = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : diffs) ss += (d - out.mean_diff) * (d - out.mean_diff);
  out.se_diff = std::sqrt(ss / (n - 1)) / std::sqrt(n);
  return out;
}

std::string median_steps(std::vector<long> hits) {
  std::sort(hits.begin(), hits.end());
  const long m = hits[hits.size() / 2];
  return m == std::numeric_limits<long>::max() ? "never" : std::to_string(m);
}

std::vector<std::uint64_t> seed_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

void criterion4() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = load_config(fs::path(PROCURL_SOURCE_DIR) / "configs/gate_point_mass.ini");
  cfg.environment.target = "point_mass";
  cfg.value_mode = ValueMode::Exact;
  cfg.n_pos = 2000;
  const Environment env = build_environment(cfg.environment);
  const Context& target = env.task_space[static_cast<std::size_t>(env.target.components.front().front())];
  const double v_opt = optimal_value(*env.mdp, target);
  const double threshold = 0.5 * v_opt;

  const auto tune_seeds = seed_range(100, 119);
  const auto eval_seeds = seed_range(0, 19);
  const auto tune_i = run_strategy(cfg, env, Strategy::IID, tune_seeds, cfg.teacher.beta);
  const auto tune_t = run_strategy(cfg, env, Strategy::Target, tune_seeds, cfg.teacher.beta);
  double best_beta = 0.0;
  double best_wins = -1.0;
  std::string tuning;
  for (double beta : {10.0, 50.0, 130.0}) {
    const auto p = run_strategy(cfg, env, Strategy::ProCuRLTarget, tune_seeds, beta);
    const double wins = compare(p, tune_i, tune_t, threshold).win_fraction;
    tuning += (tuning.empty() ? "" : ", ") + fmt(beta) + ":" + fmt(wins, 3);
    if (wins > best_wins) {
      best_wins = wins;
      best_beta = beta;
    }
  }
  const auto p = run_strategy(cfg, env, Strategy::ProCuRLTarget, eval_seeds, best_beta);
  const auto i = run_strategy(cfg, env, Strategy::IID, eval_seeds, best_beta);
  const auto t = run_strategy(cfg, env, Strategy::Target, eval_seeds, best_beta);
  const Comparison c = compare(p, i, t, threshold);
  const double secs = seconds_since(t0);
  const bool ok = c.win_fraction >= 0.7 && c.mean_diff >= -3.0 * c.se_diff && secs < 900.0;
  report(4, ok,
         "beta tuned on seeds 100..119 (beta:wins " + tuning + ") -> " + fmt(best_beta) +
             "; seeds 0..19: ProCuRL-Target first to 0.5*V_opt=" + fmt(threshold) + " in " +
             fmt(100 * c.win_fraction, 3) + "% (>= 70%), median steps P/IID/Target " + median_steps(c.hits_p) + "/" +
             median_steps(c.hits_i) + "/" + median_steps(c.hits_t) + "; final P - Target " + fmt(c.mean_diff) +
             " (SE " + fmt(c.se_diff) + ", need >= -3 SE), " + fmt(secs, 4) + " s (< 900 s)");
}

// ---------------------------------------------------------------------------

double middle_third_distance(const SeedResult& r) {
  const std::size_t n = r.selections.size();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = n / 3; k < 2 * n / 3; ++k) {
    sum += r.selections[k].distance_to_target;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::nan("");
}

void criterion5() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = load_config(fs::path(PROCURL_SOURCE_DIR) / "configs/gate_two_mode.ini");
  const Environment env = build_environment(cfg.environment);
  const auto seeds = seed_range(0, 19);
  const auto p = run_strategy(cfg, env, Strategy::ProCuRLTarget, seeds, cfg.teacher.beta);
  const auto iid = run_strategy(cfg, env, Strategy::IID, seeds, cfg.teacher.beta);
  double dp = 0.0;
  double di = 0.0;
  // Near-target: within distance 2 of the closest mode, credited to that mode.
  std::vector<long> near(env.target_modes.size(), 0);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    dp += middle_third_distance(p[k]) / static_cast<double>(seeds.size());
    di += middle_third_distance(iid[k]) / static_cast<double>(seeds.size());
    for (const auto& s : p[k].selections) {
      const Context& c = env.task_space[static_cast<std::size_t>(s.chosen_context_id)];
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < env.target_modes.size(); ++m) {
        const double d = euclidean_distance(c, env.target_modes[m]);
        if (d < best_d) {
          best_d = d;
          best = m;
        }
      }
      if (best_d <= 2.0) ++near[best];
    }
  }
  const long total_near = std::accumulate(near.begin(), near.end(), 0L);
  double min_share = 1.0;
  std::string shares;
  for (long n : near) {
    const double share = total_near ? static_cast<double>(n) / static_cast<double>(total_near) : 0.0;
    min_share = std::min(min_share, share);
    shares += (shares.empty() ? "" : "/") + fmt(100 * share, 3) + "%";
  }
  const double secs = seconds_since(t0);
  report(5, near.size() == 2 && dp < di && min_share >= 0.2,
         "two-mode target, 20 seeds: middle-third mean distance ProCuRL-Target " + fmt(dp) + " vs IID " + fmt(di) +
             "; near-target selections per mode " + shares + " of " + std::to_string(total_near) +
             " (each >= 20%), " + fmt(secs, 4) + " s");
}

// ---------------------------------------------------------------------------

void criterion6() {
  const auto t0 = Clock::now();
  std::vector<Context> contexts;
  for (int id = 0; id < 8; ++id) contexts.push_back(Context{id, {static_cast<double>(id), 0.5 * id}});
  TaskPools pools;
  for (int id : {0, 1, 1, 2, 3, 4, 5, 5, 5, 6, 7}) pools.unif_pool.push_back(contexts[static_cast<std::size_t>(id)]);
  for (int id : {6, 7, 7}) pools.targ_pool.push_back(contexts[static_cast<std::size_t>(id)]);
  pools.target_weights.assign(pools.targ_pool.size(), 1.0 / 3.0);
  ValueTable table(1.0);
  Rng vrng(11);
  for (const auto& c : contexts) table.set(c.id, vrng.uniform());

  TeacherConfig cfg;
  cfg.strategy = Strategy::ProCuRLTarget;
  cfg.beta = 0.0;
  // Expected pair probabilities from the raw pools: weight(c_targ) * multiplicity(c) / |unif|.
  std::map<std::pair<int, int>, double> expected;
  for (std::size_t i = 0; i < pools.targ_pool.size(); ++i) {
    for (const auto& c : pools.unif_pool) {
      expected[{pools.targ_pool[i].id, c.id}] += pools.target_weights[i] / static_cast<double>(pools.unif_pool.size());
    }
  }
  const int draws = 100000;
  std::map<std::pair<int, int>, long> counts;
  Rng rng(split_seed(2024, 6));
  for (int k = 0; k < draws; ++k) {
    const PairSelection s = select_softmax_pair(table, pools, cfg, rng);
    ++counts[{s.c_targ.id, s.c.id}];
  }
  double chi2 = 0.0;
  bool unexpected = false;
  for (const auto& [key, n] : counts) unexpected |= expected.count(key) == 0;
  for (const auto& [key, prob] : expected) {
    const double e = prob * draws;
    const double o = counts.count(key) ? static_cast<double>(counts.at(key)) : 0.0;
    chi2 += (o - e) * (o - e) / e;
  }
  const int dof = static_cast<int>(expected.size()) - 1;
  const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));

  // A unique maximum: the target with half mastery paired with itself.
  ValueTable sharp(1.0);
  for (const auto& c : contexts) sharp.set(c.id, 0.05);
  sharp.set(7, 0.5);
  cfg.beta = 1000.0;
  const PairDistribution dist = softmax_pair_distribution(sharp, pools, cfg);
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(dist.scores.begin(), dist.scores.end()) - dist.scores.begin());
  const int best_t = dist.targets[best / dist.candidates.size()].context.id;
  const int best_c = dist.candidates[best % dist.candidates.size()].context.id;
  int unique = 0;
  for (double s : dist.scores) unique += s == dist.scores[best];
  long hits = 0;
  for (int k = 0; k < draws; ++k) {
    const PairSelection s = select_softmax_pair(sharp, pools, cfg, rng);
    hits += (s.c_targ.id == best_t && s.c.id == best_c);
  }
  const double freq = static_cast<double>(hits) / draws;
  const double secs = seconds_since(t0);
  report(6, !unexpected && p_value > 0.01 && unique == 1 && freq > 0.99,
         "beta=0: chi-square " + fmt(chi2) + " on " + std::to_string(dof) + " dof over " +
             std::to_string(expected.size()) + " pairs, p = " + fmt(p_value) + " (> 0.01); beta=1000: argmax pair (" +
             std::to_string(best_t) + "," + std::to_string(best_c) + ") frequency " + fmt(freq, 5) + " (> 0.99), " +
             fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_outputs(const ExperimentConfig& a, const ExperimentConfig& b, std::string& why) {
  if (slurp(a.output_dir / "metrics.csv") != slurp(b.output_dir / "metrics.csv")) {
    why = "metrics.csv differs";
    return false;
  }
  for (auto seed : a.seeds) {
    const fs::path rel = fs::path("seed_" + std::to_string(seed)) / "selections.csv";
    if (slurp(a.output_dir / rel) != slurp(b.output_dir / rel)) {
      why = rel.string() + " differs";
      return false;
    }
  }
  return true;
}

void criterion7() {
  const auto t0 = Clock::now();
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::string detail;
  int compared = 0;
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"gate_point_mass.ini", {"run.seeds=0..3", "run.total_env_steps=20000", "teacher.strategy=procurl-target"}},
      {"gate_two_mode.ini", {"run.seeds=0..3", "run.total_env_steps=20000", "teacher.strategy=procurl-unif"}},
      {"bandit_clustered.ini", {"run.seeds=0..3"}},
      {"bandit_clustered.ini", {"run.seeds=0..3", "teacher.strategy=gradient-align"}},
  };
  for (std::size_t k = 0; k < cases.size() && ok; ++k) {
    const auto& [file, base] = cases[k];
    std::vector<ExperimentConfig> runs;
    for (int variant = 0; variant < 3; ++variant) {
      auto ov = base;
      ov.push_back("run.charts=false");
      ov.push_back(std::string("run.threads=") + (variant == 2 ? "3" : "1"));
      ov.push_back("run.output_dir=" + (root / (std::to_string(k) + "_" + std::to_string(variant))).string());
      runs.push_back(load_config(fs::path(PROCURL_SOURCE_DIR) / "configs" / file, ov));
      run_experiment(runs.back());
    }
    std::string why;
    for (int variant = 1; variant < 3 && ok; ++variant) {
      if (!same_outputs(runs[0], runs[static_cast<std::size_t>(variant)], why)) {
        ok = false;
        detail = file + (variant == 1 ? " repeat: " : " threads=3: ") + why;
      }
      ++compared;
    }
  }
  const double secs = seconds_since(t0);
  report(7, ok,
         (ok ? std::to_string(compared) + " comparisons (repeat, threads 1 vs 3) over 4 configs byte-identical"
             : detail) +
             ", " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------

struct PropertyOutcome {
  std::string name;
  int cases = 0;
  int failures = 0;
};

PropertyOutcome property(const std::string& name, int cases, const std::function<bool(Rng&)>& body, Rng& rng) {
  PropertyOutcome out{name, cases, 0};
  for (int k = 0; k < cases; ++k) {
    try {
      if (!body(rng)) ++out.failures;
    } catch (const std::exception&) {
      ++out.failures;
    }
  }
  return out;
}

void criterion8() {
  const auto t0 = Clock::now();
  Rng rng(split_seed(2024, 8));
  const int n = 1000;
  std::vector<PropertyOutcome> results;

  results.push_back(property("potential endpoints and maximiser", n, [](Rng& r) {
    const double vmax = 0.1 + 10 * r.uniform();
    const double v = vmax * r.uniform();
    const double peak = learning_potential(vmax / 2, vmax);
    return learning_potential(0.0, vmax) == 0.0 && learning_potential(vmax, vmax) == 0.0 &&
           std::abs(peak - vmax / 4) <= 1e-12 * vmax && learning_potential(v, vmax) <= peak;
  }, rng));

  results.push_back(property("potential range [0, vmax/4]", n, [](Rng& r) {
    const double vmax = 0.1 + 10 * r.uniform();
    const double z = learning_potential(vmax * r.uniform(), vmax);
    return z >= 0.0 && z <= vmax / 4 * (1 + 1e-15);
  }, rng));

  results.push_back(property("softmax shift invariance", n, [](Rng& r) {
    const std::size_t k = 1 + r.uniform_index(20);
    std::vector<double> s(k), shifted(k), lw(k);
    const double shift = 200 * (r.uniform() - 0.5);
    for (std::size_t i = 0; i < k; ++i) {
      s[i] = 4 * r.normal();
      shifted[i] = s[i] + shift;
      lw[i] = std::log(1 + r.uniform_index(5));
    }
    const double beta = 100 * r.uniform();
    const auto a = softmax_probabilities(s, lw, beta);
    const auto b = softmax_probabilities(shifted, lw, beta);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::abs(a[i] - b[i]) > 1e-9) return false;
      sum += a[i];
    }
    return std::abs(sum - 1.0) < 1e-12;
  }, rng));

  results.push_back(property("score argmax invariant to positive value scale", n, [](Rng& r) {
    const int m = 2 + static_cast<int>(r.uniform_index(8));
    std::vector<Context> ctx;
    for (int id = 0; id < m; ++id) ctx.push_back(Context{id, {r.normal(), r.normal()}});
    TaskPools pools;
    for (int k = 0; k < 6; ++k) pools.unif_pool.push_back(ctx[r.uniform_index(ctx.size())]);
    for (int k = 0; k < 3; ++k) pools.targ_pool.push_back(ctx[r.uniform_index(ctx.size())]);
    pools.target_weights.assign(3, 1.0 / 3.0);
    const double vmax = 0.5 + r.uniform();
    const double alpha = std::exp(3 * r.normal());
    ValueTable a(vmax);
    ValueTable b(alpha * vmax);
    for (const auto& c : ctx) {
      const double v = vmax * r.uniform();
      a.set(c.id, v);
      b.set(c.id, alpha * v);
    }
    TeacherConfig cfg;
    cfg.kernel.kind = r.uniform() < 0.5 ? SimilarityKernel::Kind::NegExpDistance : SimilarityKernel::Kind::InnerProduct;
    const auto da = softmax_pair_distribution(a, pools, cfg);
    const auto db = softmax_pair_distribution(b, pools, cfg);
    const auto ia = std::max_element(da.scores.begin(), da.scores.end()) - da.scores.begin();
    const auto ib = std::max_element(db.scores.begin(), db.scores.end()) - db.scores.begin();
    if (ia == ib) return true;
    // Different indices are acceptable only for scores tied up to rounding.
    return std::abs(da.scores[static_cast<std::size_t>(ia)] - da.scores[static_cast<std::size_t>(ib)]) <=
           1e-12 * std::max(1.0, std::abs(da.scores[static_cast<std::size_t>(ia)]));
  }, rng));

  results.push_back(property("value table clamping", n, [](Rng& r) {
    const double vmax = 0.1 + 5 * r.uniform();
    ValueTable t(vmax);
    const double raw = vmax * (4 * r.uniform() - 1.5);
    const bool clamped = t.set(3, raw);
    const double expect = std::clamp(raw, 0.0, vmax);
    return t.get(3) == expect && clamped == (raw != expect) && t.clamp_events() == (clamped ? 1 : 0);
  }, rng));

  const GateGrid grid(GateGridSpec{});
  const GateRelativeFeatureMap gphi(grid);
  const auto gates = grid.task_space();
  results.push_back(property("trajectory return recursion", n, [&](Rng& r) {
    PolicyParams p = PolicyParams::zeros(gphi.dimension());
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = 0.5 * r.normal();
    const Context& c = gates[r.uniform_index(gates.size())];
    Trajectory traj = rollout(grid, SoftmaxPolicy(p, gphi), c, r);
    for (auto& s : traj.steps) s.reward = r.normal();
    const double gamma = r.uniform();
    compute_returns(traj, gamma);
    if (traj.returns.size() != traj.steps.size()) return false;
    double direct = 0.0;
    double disc = 1.0;
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const double next = t + 1 < traj.returns.size() ? traj.returns[t + 1] : 0.0;
      if (std::abs(traj.returns[t] - (traj.steps[t].reward + gamma * next)) > 1e-12) return false;
      direct += disc * traj.steps[t].reward;
      disc *= gamma;
    }
    return std::abs(traj.discounted_return() - direct) <= 1e-9 * (1 + std::abs(direct));
  }, rng));

  int total_failures = 0;
  std::string detail;
  for (const auto& r : results) {
    total_failures += r.failures;
    detail += (detail.empty() ? "" : "; ") + r.name + " " + std::to_string(r.cases - r.failures) + "/" +
              std::to_string(r.cases);
  }
  report(8, total_failures == 0, detail + ", " + fmt(seconds_since(t0), 3) + " s");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    try {
      criteria[k]();
    } catch (const std::exception& e) {
      report(static_cast<int>(k + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
