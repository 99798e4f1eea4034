#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "procurl/envs.hpp"
#include "procurl/learner.hpp"
#include "procurl/teacher.hpp"

namespace procurl {

struct Prop1Result {
  double lhs = 0.0;      // <g(c), g(c_targ)> from exact gradients
  double rhs = 0.0;      // Z(c) * Z(c_targ) * <psi(c), psi(c_targ)>
  double rel_err = 0.0;  // |lhs - rhs| / max(|lhs|, 1e-300)
};

/// Checks the bandit gradient-alignment identity at `params`, with V* = 1.
Prop1Result prop1_check(const PolicyParams& params, const Bandit& bandit, const Context& c, const Context& c_targ);

struct TaylorResult {
  double exact_improvement = 0.0;  // E_xi[V^{theta'}(c_targ)] - V^{theta}(c_targ)
  double linear_prediction = 0.0;  // eta * <g(c), g(c_targ)>

  double gap() const { return exact_improvement - linear_prediction; }
};

TaylorResult taylor_gap(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                        double learning_rate, const Context& c, const Context& c_targ);

struct ProbeConfig {
  int max_steps = 500;
  int n_trials = 100;
  /// theta_0 = -target_bias * psi(c_targ) + init_scale * N(0, I).
  double init_scale = 1.0;
  double target_bias = 0.0;
  /// Apply the expected REINFORCE update eta * g(c_t) instead of a sampled one.
  bool exact_updates = true;
  /// The log-linear fit uses the steps whose mean suboptimality exceeds this.
  double fit_threshold = 0.5;
  std::vector<double> epsilons{0.1, 0.05, 0.01};
};

struct ConvergenceReport {
  /// suboptimality[trial][t] = V*(c_targ) - V^{pi_t}(c_targ), t = 0..max_steps.
  std::vector<std::vector<double>> suboptimality;
  std::vector<double> mean;
  std::vector<double> std_error;
  /// Least-squares fit of log(mean e_t) = intercept + slope * t over the fit region.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int fit_points = 0;
  /// First t with mean e_t <= eps, or -1.
  std::map<double, long> steps_to_epsilon;
  /// Same, per trial.
  std::map<double, std::vector<long>> trial_steps_to_epsilon;
  /// (e_t - e_{t+1}) / e_t of the mean curve.
  std::vector<double> beta_hat;
  /// Offset needed for e_{t+1} <= (1 - beta) e_t + delta with beta = min beta_hat
  /// over the fit region; reported, never asserted.
  std::vector<double> delta_hat;

  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

/// Runs the teacher-student loop on a bandit n_trials times. Strategies:
/// GradientAlign, IID, Target, and ProCuRLTarget (the exact argmax form with
/// known values, V* = 1 and the inner-product kernel).
ConvergenceReport run_convergence_probe(const Bandit& bandit, const Context& c_targ, Strategy strategy,
                                        const LearnerConfig& cfg, const ProbeConfig& probe, Rng& rng);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Random bandit instance i of a sweep: d cycles through {2, 4, 8} and the psi
/// scheme through orthogonal / random-unit / clustered.
Bandit sweep_bandit(int i, Rng& rng);

struct Prop1Sweep {
  std::vector<Prop1Result> results;
  double max_rel_err = 0.0;
};
/// prop1_check on `trials` random (theta ~ N(0, I), bandit, c, c_targ) draws.
Prop1Sweep prop1_sweep(int trials, std::uint64_t seed);

struct TaylorSweep {
  std::vector<double> etas{1e-1, 1e-2, 1e-3};
  /// Per trial: slope of log|gap| against log(eta).
  std::vector<double> slopes;
  /// Trials where exact improvement and linear prediction share a sign at the smallest eta.
  int sign_agreements = 0;
  int trials = 0;
};
TaylorSweep taylor_sweep(int trials, std::uint64_t seed);

/// The ten-context clustered bandit used by the convergence probe, and the
/// probe defaults that make its target hard at the start.
Bandit probe_bandit(Rng& rng);
ProbeConfig default_probe_config();

}  // namespace procurl
