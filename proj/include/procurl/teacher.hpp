#pragma once

#include <span>
#include <string>
#include <vector>

#include "procurl/context.hpp"
#include "procurl/learner.hpp"
#include "procurl/mdp.hpp"
#include "procurl/random.hpp"
#include "procurl/value.hpp"

namespace procurl {

enum class Strategy { ProCuRLTarget, ProCuRLUnif, IID, Target, GradientAlign, GreedyOracle };

std::string to_string(Strategy s);
/// Accepts the names produced by to_string (case-insensitive, '-' or '_').
Strategy parse_strategy(const std::string& name);

/// Context-to-context similarity on Context::features.
struct SimilarityKernel {
  enum class Kind { NegExpDistance, InnerProduct };
  Kind kind = Kind::NegExpDistance;

  /// exp(-||a - b||_2) or <a, b>.
  double operator()(const Context& a, const Context& b) const;
};

struct TeacherConfig {
  Strategy strategy = Strategy::ProCuRLTarget;
  /// Inverse temperature of the softmax selection.
  double beta = 130.0;
  SimilarityKernel kernel;

  void validate() const;
};

/// Z = (v / v_max) * (v_max - v). Throws std::logic_error outside [0, v_max].
double learning_potential(double v, double v_max);

/// Z(c) * Z(c_targ) * sim(c, c_targ).
double procurl_score(double z_c, double z_targ, double sim);

/// Probabilities proportional to exp(beta * scores[i] + log_weights[i]),
/// normalised with log-sum-exp. `log_weights` may be empty.
std::vector<double> softmax_probabilities(std::span<const double> scores, std::span<const double> log_weights,
                                          double beta);
std::size_t sample_softmax(std::span<const double> scores, std::span<const double> log_weights, double beta,
                           Rng& rng);

/// The joint selection distribution over deduplicated Ĉ_targ x Ĉ_unif.
/// Duplicates are folded in as log-multiplicity terms, so the distribution
/// equals the one over the raw pools.
struct PairDistribution {
  std::vector<WeightedContext> targets;
  std::vector<WeightedContext> candidates;
  std::vector<double> scores;  // [i * candidates.size() + j]
  std::vector<double> probs;   // same layout
};

PairDistribution softmax_pair_distribution(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg);

struct PairSelection {
  Context c_targ;
  Context c;
  double score = 0.0;
};

/// Samples (c_targ, c) with probability proportional to exp(beta * score).
PairSelection select_softmax_pair(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg,
                                  Rng& rng);

struct UnifSelection {
  Context c;
  double potential = 0.0;
};

/// Samples c from Ĉ_unif with probability proportional to exp(beta * Z(c)).
UnifSelection select_procurl_unif(const ValueTable& table, const TaskPools& pools, const TeacherConfig& cfg,
                                  Rng& rng);

/// IID: uniform over unif_pool. Target: targ_pool weighted by target_weights.
Context select_baseline(const TaskPools& pools, const TeacherConfig& cfg, Rng& rng);

/// Index of the maximum of `values`; entries within 1e-12 * max(1, |max|) of
/// the maximum tie, and ties go to the lowest context id.
std::size_t argmax_lowest_id(std::span<const double> values, std::span<const Context> contexts);

/// argmax_c <g(c), g(c_targ)> with exact gradients.
Context select_gradient_align(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                              const std::vector<Context>& candidates, const Context& c_targ,
                              double budget = kDefaultExactBudget);

/// Exact E_xi[V^{theta'}(mu)] - V^{theta}(mu) for one REINFORCE step on `c`,
/// enumerating every trajectory of `c`.
double expected_improvement(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                            double learning_rate, const Context& c, const std::vector<WeightedContext>& target,
                            std::size_t max_trajectories = 100000);

/// argmax_c of expected_improvement over candidates; the reference greedy rule.
Context select_greedy_oracle(const PolicyParams& params, const ContextualMdp& mdp, const FeatureMap& phi,
                             const LearnerConfig& cfg, const std::vector<Context>& candidates,
                             const std::vector<WeightedContext>& target, std::size_t max_trajectories = 100000);

}  // namespace procurl
