#include "procurl/teacher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "procurl/errors.hpp"

namespace procurl {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::ProCuRLTarget: return "procurl-target";
    case Strategy::ProCuRLUnif: return "procurl-unif";
    case Strategy::IID: return "iid";
    case Strategy::Target: return "target";
    case Strategy::GradientAlign: return "gradient-align";
    case Strategy::GreedyOracle: return "greedy-oracle";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  std::string key;
  for (char ch : name) key.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  for (Strategy s : {Strategy::ProCuRLTarget, Strategy::ProCuRLUnif, Strategy::IID, Strategy::Target,
                     Strategy::GradientAlign, Strategy::GreedyOracle}) {
    if (to_string(s) == key) return s;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

double SimilarityKernel::operator()(const Context& a, const Context& b) const {
  if (kind == Kind::NegExpDistance) return std::exp(-euclidean_distance(a, b));
  if (a.features.size() != b.features.size()) throw std::invalid_argument("similarity: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.features.size(); ++i) acc += a.features[i] * b.features[i];
  return acc;
}

void TeacherConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
}

double learning_potential(double v, double v_max) {
  if (!(v >= 0.0 && v <= v_max)) {
    throw std::logic_error("learning_potential: value " + std::to_string(v) + " outside [0, " +
                           std::to_string(v_max) + "]");
  }
  return (v / v_max) * (v_max - v);
}

double procurl_score(double z_c, double z_targ, double sim) { return z_c * z_targ * sim; }

std::vector<double> softmax_probabilities(std::span<const double> scores, std::span<const double> log_weights,
                                          double beta) {
  if (!log_weights.empty() && log_weights.size() != scores.size()) {
    throw std::invalid_argument("softmax_probabilities: log_weights size mismatch");
  }
  std::vector<double> logits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw NumericalError("non-finite selection score at index " + std::to_string(i));
    logits[i] = beta * scores[i] + (log_weights.empty() ? 0.0 : log_weights[i]);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

std::size_t sample_softmax(std::span<const double> scores, std::span<const double> log_weights, double beta,
                           Rng& rng) {
  const auto probs = softmax_probabilities(scores, log_weights, beta);
  return rng.categorical(probs);
}

namespace {

double potential_of(const ValueTable& table, int id) { return learning_potential(table.get(id), table.v_max()); }

}  // namespace

PairDistribution softmax_pair_distribution(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg) {
  PairDistribution dist;
  dist.targets = dedup_by_id(pools.targ_pool, pools.target_weights);
  dist.candidates = dedup_by_id(pools.unif_pool);
  const std::size_t n_t = dist.targets.size();
  const std::size_t n_c = dist.candidates.size();

  std::vector<double> z_c(n_c);
  for (std::size_t j = 0; j < n_c; ++j) z_c[j] = potential_of(table, dist.candidates[j].context.id);

  dist.scores.resize(n_t * n_c);
  std::vector<double> log_weights(n_t * n_c);
  for (std::size_t i = 0; i < n_t; ++i) {
    const Context& targ = dist.targets[i].context;
    const double z_t = potential_of(table, targ.id);
    const double log_wt = std::log(dist.targets[i].weight);
    for (std::size_t j = 0; j < n_c; ++j) {
      const Context& cand = dist.candidates[j].context;
      dist.scores[i * n_c + j] = procurl_score(z_c[j], z_t, cfg.kernel(cand, targ));
      log_weights[i * n_c + j] = log_wt + std::log(dist.candidates[j].weight);
    }
  }
  dist.probs = softmax_probabilities(dist.scores, log_weights, cfg.beta);
  return dist;
}

PairSelection select_softmax_pair(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg,
                                  Rng& rng) {
  const PairDistribution dist = softmax_pair_distribution(table, pools, cfg);
  const std::size_t k = rng.categorical(dist.probs);
  const std::size_t n_c = dist.candidates.size();
  return {dist.targets[k / n_c].context, dist.candidates[k % n_c].context, dist.scores[k]};
}

UnifSelection select_procurl_unif(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg,
                                  Rng& rng) {
  const auto candidates = dedup_by_id(pools.unif_pool);
  std::vector<double> scores(candidates.size());
  std::vector<double> log_weights(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    scores[j] = potential_of(table, candidates[j].context.id);
    log_weights[j] = std::log(candidates[j].weight);
  }
  const std::size_t k = sample_softmax(scores, log_weights, cfg.beta, rng);
  return {candidates[k].context, scores[k]};
}

Context select_baseline(const TaskPools& pools, const TeacherConfig& cfg, Rng& rng) {
  switch (cfg.strategy) {
    case Strategy::IID: return pools.unif_pool[rng.uniform_index(pools.unif_pool.size())];
    case Strategy::Target: return pools.targ_pool[rng.categorical(pools.target_weights)];
    default: throw std::invalid_argument("select_baseline: strategy must be IID or Target");
  }
}

std::size_t argmax_lowest_id(std::span<const double> values, std::span<const Context> contexts) {
  if (values.empty() || values.size() != contexts.size()) throw std::invalid_argument("argmax_lowest_id: bad input");
  const double best = *std::max_element(values.begin(), values.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::size_t pick = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - tol && (pick == values.size() || contexts[i].id < contexts[pick].id)) pick = i;
  }
  return pick;
}

Context select_gradient_align(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                              const std::vector<Context>& candidates, const Context& c_targ, double budget) {
  if (candidates.empty()) throw std::invalid_argument("select_gradient_align: no candidates");
  const Eigen::VectorXd g_targ = expected_policy_gradient(params, mdp, phi, c_targ, budget);
  std::vector<double> align(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    align[i] = expected_policy_gradient(params, mdp, phi, candidates[i], budget).dot(g_targ);
  }
  return candidates[argmax_lowest_id(align, candidates)];
}

namespace {

double target_value(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                    const std::vector<WeightedContext>& target) {
  const SoftmaxPolicy policy(params, phi);
  double v = 0.0;
  for (const auto& wc : target) v += wc.weight * value_exact(mdp, policy, wc.context);
  return v;
}

}  // namespace

double expected_improvement(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                            double learning_rate, const Context& c, const std::vector<WeightedContext>& target,
                            std::size_t max_trajectories) {
  const SoftmaxPolicy policy(params, phi);
  const auto trajectories = enumerate_trajectories(mdp, policy, c, max_trajectories);
  double expected_after = 0.0;
  for (const auto& wt : trajectories) {
    const PolicyParams next = reinforce_update(params, wt.trajectory, c, phi, learning_rate);
    expected_after += wt.prob * target_value(next, mdp, phi, target);
  }
  return expected_after - target_value(params, mdp, phi, target);
}

Context select_greedy_oracle(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                             const LearnerConfig& cfg, const std::vector<Context>& candidates,
                             const std::vector<WeightedContext>& target, std::size_t max_trajectories) {
  if (candidates.empty()) throw std::invalid_argument("select_greedy_oracle: no candidates");
  std::vector<double> gain(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    gain[i] = expected_improvement(params, mdp, phi, cfg.learning_rate, candidates[i], target, max_trajectories);
  }
  return candidates[argmax_lowest_id(gain, candidates)];
}

}  // namespace procurl
