#include "procurl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "procurl/value.hpp"

namespace procurl {

Prop1Result prop1_check(const PolicyParams& params, const Bandit& bandit, const Context& c, const Context& c_targ) {
  const ContextualMdp& mdp = *bandit.mdp;
  const FeatureMap& phi = *bandit.features;
  const Eigen::VectorXd g_c = expected_policy_gradient(params, mdp, phi, c);
  const Eigen::VectorXd g_t = expected_policy_gradient(params, mdp, phi, c_targ);

  const SoftmaxPolicy policy(params, phi);
  constexpr double kOptimalValue = 1.0;
  const double z_c = learning_potential(value_exact(mdp, policy, c), kOptimalValue);
  const double z_t = learning_potential(value_exact(mdp, policy, c_targ), kOptimalValue);
  const double psi_dot = bandit.spec.psi(c.id).dot(bandit.spec.psi(c_targ.id));

  Prop1Result r;
  r.lhs = g_c.dot(g_t);
  r.rhs = z_c * z_t * psi_dot;
  r.rel_err = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), 1e-300);
  if (r.lhs == 0.0 && r.rhs == 0.0) r.rel_err = 0.0;
  return r;
}

TaylorResult taylor_gap(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                        double learning_rate, const Context& c, const Context& c_targ) {
  TaylorResult r;
  r.exact_improvement = expected_improvement(params, mdp, phi, learning_rate, c, {{c_targ, 1.0}});
  r.linear_prediction = learning_rate * expected_policy_gradient(params, mdp, phi, c)
                                            .dot(expected_policy_gradient(params, mdp, phi, c_targ));
  return r;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

namespace {

Context pick_task(Strategy strategy, const Bandit& bandit, const Context& c_targ, const PolicyParams& params,
                  Rng& rng) {
  const auto& contexts = bandit.spec.contexts;
  switch (strategy) {
    case Strategy::GradientAlign:
      return select_gradient_align(params, *bandit.mdp, *bandit.features, contexts, c_targ);
    case Strategy::IID:
      return contexts[rng.uniform_index(contexts.size())];
    case Strategy::Target:
      return c_targ;
    case Strategy::ProCuRLTarget: {
      const SoftmaxPolicy policy(params, *bandit.features);
      const SimilarityKernel kernel{SimilarityKernel::Kind::InnerProduct};
      const double z_t = learning_potential(value_exact(*bandit.mdp, policy, c_targ), 1.0);
      std::vector<double> scores(contexts.size());
      for (std::size_t i = 0; i < contexts.size(); ++i) {
        const double z_c = learning_potential(value_exact(*bandit.mdp, policy, contexts[i]), 1.0);
        scores[i] = procurl_score(z_c, z_t, kernel(contexts[i], c_targ));
      }
      return contexts[argmax_lowest_id(scores, contexts)];
    }
    default:
      throw std::invalid_argument("run_convergence_probe: unsupported strategy " + to_string(strategy));
  }
}

}  // namespace

ConvergenceReport run_convergence_probe(const Bandit& bandit, const Context& c_targ, Strategy strategy,
                                        const LearnerConfig& cfg, const ProbeConfig& probe, Rng& rng) {
  if (probe.n_trials < 1 || probe.max_steps < 1) throw std::invalid_argument("probe needs trials and steps");
  const ContextualMdp& mdp = *bandit.mdp;
  const FeatureMap& phi = *bandit.features;
  const Eigen::VectorXd psi_targ = bandit.spec.psi(c_targ.id);
  const std::uint64_t base = rng.engine()();
  const auto T = static_cast<std::size_t>(probe.max_steps);

  ConvergenceReport report;
  report.suboptimality.assign(static_cast<std::size_t>(probe.n_trials), std::vector<double>(T + 1, 0.0));
  for (int trial = 0; trial < probe.n_trials; ++trial) {
    Rng init_rng(split_seed(base, 2 * static_cast<std::uint64_t>(trial)));
    Rng run_rng(split_seed(base, 2 * static_cast<std::uint64_t>(trial) + 1));
    PolicyParams params{-probe.target_bias * psi_targ};
    for (Eigen::Index i = 0; i < params.theta.size(); ++i) params.theta[i] += probe.init_scale * init_rng.normal();

    auto& e = report.suboptimality[static_cast<std::size_t>(trial)];
    for (std::size_t t = 0;; ++t) {
      e[t] = 1.0 - value_exact(mdp, SoftmaxPolicy(params, phi), c_targ);
      if (t == T) break;
      const Context task = pick_task(strategy, bandit, c_targ, params, run_rng);
      const double eta = cfg.rate_at(static_cast<long>(t));
      if (probe.exact_updates) {
        params.theta += eta * expected_policy_gradient(params, mdp, phi, task);
      } else {
        const Trajectory traj = rollout(mdp, SoftmaxPolicy(params, phi), task, run_rng);
        params = reinforce_update(params, traj, task, phi, eta);
      }
    }
  }

  const double n = static_cast<double>(probe.n_trials);
  report.mean.assign(T + 1, 0.0);
  report.std_error.assign(T + 1, 0.0);
  for (std::size_t t = 0; t <= T; ++t) {
    double sum = 0.0;
    for (const auto& e : report.suboptimality) sum += e[t];
    const double m = sum / n;
    double ss = 0.0;
    for (const auto& e : report.suboptimality) ss += (e[t] - m) * (e[t] - m);
    report.mean[t] = m;
    report.std_error[t] = probe.n_trials > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }

  std::vector<double> xs, ys;
  for (std::size_t t = 0; t <= T && report.mean[t] > probe.fit_threshold; ++t) {
    xs.push_back(static_cast<double>(t));
    ys.push_back(std::log(report.mean[t]));
  }
  report.fit_points = static_cast<int>(xs.size());
  if (xs.size() >= 2) {
    const LinearFit fit = fit_line(xs, ys);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.r_squared = fit.r_squared;
  }

  for (double eps : probe.epsilons) {
    long first = -1;
    for (std::size_t t = 0; t <= T; ++t) {
      if (report.mean[t] <= eps) {
        first = static_cast<long>(t);
        break;
      }
    }
    report.steps_to_epsilon[eps] = first;
    auto& per_trial = report.trial_steps_to_epsilon[eps];
    for (const auto& e : report.suboptimality) {
      const auto it = std::find_if(e.begin(), e.end(), [eps](double v) { return v <= eps; });
      per_trial.push_back(it == e.end() ? -1 : static_cast<long>(it - e.begin()));
    }
  }

  report.beta_hat.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    report.beta_hat[t] = report.mean[t] > 0.0 ? (report.mean[t] - report.mean[t + 1]) / report.mean[t] : 0.0;
  }
  double beta_floor = std::numeric_limits<double>::infinity();
  for (int t = 0; t < std::max(report.fit_points - 1, 0); ++t) {
    beta_floor = std::min(beta_floor, report.beta_hat[static_cast<std::size_t>(t)]);
  }
  if (!std::isfinite(beta_floor)) beta_floor = 0.0;
  report.delta_hat.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    report.delta_hat[t] = std::max(0.0, report.mean[t + 1] - (1.0 - beta_floor) * report.mean[t]);
  }
  return report;
}

void ConvergenceReport::write_csv(std::ostream& out) const {
  out << "trial,step,suboptimality\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < suboptimality.size(); ++k) {
    for (std::size_t t = 0; t < suboptimality[k].size(); ++t) out << k << ',' << t << ',' << suboptimality[k][t] << '\n';
  }
}

void ConvergenceReport::write_summary(std::ostream& out) const {
  out << std::setprecision(6);
  out << "trials: " << suboptimality.size() << '\n';
  out << "initial mean suboptimality: " << (mean.empty() ? 0.0 : mean.front()) << '\n';
  out << "final mean suboptimality: " << (mean.empty() ? 0.0 : mean.back()) << '\n';
  out << "log-linear fit: slope " << slope << ", R^2 " << r_squared << " over " << fit_points << " steps\n";
  for (const auto& [eps, t] : steps_to_epsilon) out << "steps to mean e_t <= " << eps << ": " << t << '\n';
  if (!beta_hat.empty()) {
    const auto span = static_cast<std::size_t>(std::max(fit_points - 1, 1));
    double lo = beta_hat.front(), hi = beta_hat.front(), dmax = 0.0;
    for (std::size_t t = 0; t < std::min(span, beta_hat.size()); ++t) {
      lo = std::min(lo, beta_hat[t]);
      hi = std::max(hi, beta_hat[t]);
    }
    for (double d : delta_hat) dmax = std::max(dmax, d);
    out << "beta_hat over fit region: [" << lo << ", " << hi << "], max delta_hat: " << dmax << '\n';
  }
}

Bandit sweep_bandit(int i, Rng& rng) {
  static constexpr int kDims[] = {2, 4, 8};
  const int d = kDims[i % 3];
  PsiScheme scheme;
  int n = 6;
  switch ((i / 3) % 3) {
    case 0:
      scheme = PsiScheme::orthogonal();
      n = d;
      break;
    case 1:
      scheme = PsiScheme::random_unit();
      break;
    default:
      scheme = PsiScheme::clustered(2, 0.3);
      break;
  }
  return make_bandit(d, n, scheme, rng);
}

namespace {

PolicyParams gaussian_params(int d, Rng& rng) {
  PolicyParams p = PolicyParams::zeros(d);
  for (int i = 0; i < d; ++i) p.theta[i] = rng.normal();
  return p;
}

}  // namespace

Prop1Sweep prop1_sweep(int trials, std::uint64_t seed) {
  Prop1Sweep out;
  for (int i = 0; i < trials; ++i) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
    const Bandit b = sweep_bandit(i, rng);
    const PolicyParams theta = gaussian_params(b.features->dimension(), rng);
    const auto& ctx = b.spec.contexts;
    const Context& c = ctx[rng.uniform_index(ctx.size())];
    const Context& t = ctx[rng.uniform_index(ctx.size())];
    out.results.push_back(prop1_check(theta, b, c, t));
    out.max_rel_err = std::max(out.max_rel_err, out.results.back().rel_err);
  }
  return out;
}

TaylorSweep taylor_sweep(int trials, std::uint64_t seed) {
  TaylorSweep out;
  out.trials = trials;
  for (int i = 0; i < trials; ++i) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
    const Bandit b = sweep_bandit(i, rng);
    const PolicyParams theta = gaussian_params(b.features->dimension(), rng);
    const auto& ctx = b.spec.contexts;
    const Context& c = ctx[rng.uniform_index(ctx.size())];
    const Context& t = ctx[rng.uniform_index(ctx.size())];
    std::vector<double> lx, ly;
    TaylorResult last;
    for (double eta : out.etas) {
      last = taylor_gap(theta, *b.mdp, *b.features, eta, c, t);
      lx.push_back(std::log(eta));
      ly.push_back(std::log(std::abs(last.gap())));
    }
    // Gaps at rounding level (e.g. orthogonal tasks) carry no slope information.
    if (std::all_of(ly.begin(), ly.end(), [](double v) { return v > std::log(1e-13); })) {
      out.slopes.push_back(fit_line(lx, ly).slope);
    }
    constexpr double kNoise = 1e-14;
    const bool both_zero = std::abs(last.linear_prediction) < kNoise && std::abs(last.exact_improvement) < kNoise;
    if (both_zero || (last.exact_improvement > 0) == (last.linear_prediction > 0)) ++out.sign_agreements;
  }
  return out;
}

Bandit probe_bandit(Rng& rng) { return make_bandit(5, 10, PsiScheme::clustered(2, 0.3), rng); }

ProbeConfig default_probe_config() {
  ProbeConfig p;
  p.target_bias = 3.0;
  p.init_scale = 0.5;
  return p;
}

}  // namespace procurl
