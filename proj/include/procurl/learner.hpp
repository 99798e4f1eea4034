#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "procurl/context.hpp"
#include "procurl/mdp.hpp"

namespace procurl {

struct SparseEntry {
  int index = 0;
  double value = 0.0;
};

/// phi(s, c, a) in R^d, returned in sparse form. Dense maps simply list every
/// coordinate.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;
  virtual int dimension() const = 0;
  virtual int num_actions() const = 0;
  /// Writes phi(s,c,a) into `out` (cleared first).
  virtual void features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const = 0;
};

/// One-hot over (s, c, a): index (c.id * S + s) * A + a.
class TabularFeatureMap final : public FeatureMap {
 public:
  TabularFeatureMap(int n_states, int n_contexts, int n_actions);
  int dimension() const override { return n_states_ * n_contexts_ * n_actions_; }
  int num_actions() const override { return n_actions_; }
  void features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const override;

 private:
  int n_states_;
  int n_contexts_;
  int n_actions_;
};

/// Generic dense feature map backed by a callable.
class LinearFeatureMap final : public FeatureMap {
 public:
  using Fn = std::function<Eigen::VectorXd(State, const Context&, Action)>;
  LinearFeatureMap(int dimension, int n_actions, Fn fn);
  int dimension() const override { return dimension_; }
  int num_actions() const override { return n_actions_; }
  void features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const override;

 private:
  int dimension_;
  int n_actions_;
  Fn fn_;
};

/// Parameter vector theta of the softmax policy.
struct PolicyParams {
  Eigen::VectorXd theta;

  static PolicyParams zeros(int d) { return {Eigen::VectorXd::Zero(d)}; }
  bool all_finite() const { return theta.allFinite(); }
};

/// Flat text vector, one coordinate per line at full precision.
void save_params(std::ostream& out, const PolicyParams& params);
/// Reads whitespace-separated values; throws ConfigError on bad tokens.
PolicyParams load_params(std::istream& in);

struct LearnerConfig {
  double learning_rate = 0.1;
  /// Rollouts per teacher step; their updates are averaged.
  int batch_size = 1;
  /// Optional learning-rate schedule eta(t); constant when empty.
  std::function<double(long)> schedule;

  double rate_at(long step) const { return schedule ? schedule(step) : learning_rate; }
  void validate() const;
};

/// Logits <theta, phi(s,c,a)> for every action.
std::vector<double> policy_logits(const PolicyParams& params, const FeatureMap& phi, State s, const Context& c);

/// Softmax of the logits, computed with max-subtraction.
std::vector<double> policy_probs(const PolicyParams& params, const FeatureMap& phi, State s, const Context& c);

/// pi_theta as a Policy. Holds references; both must outlive it.
class SoftmaxPolicy final : public Policy {
 public:
  SoftmaxPolicy(const PolicyParams& params, const FeatureMap& phi) : params_(params), phi_(phi) {}
  int num_actions() const override { return phi_.num_actions(); }
  void probs(State s, const Context& c, std::span<double> out) const override;

 private:
  const PolicyParams& params_;
  const FeatureMap& phi_;
};

/// sum_t G_t * (phi(s_t,c,a_t) - E_{a'~pi}[phi(s_t,c,a')]). The gamma^t factor of
/// the exact gradient is not applied.
Eigen::VectorXd reinforce_direction(const PolicyParams& params, const Trajectory& traj, const Context& c,
                                    const FeatureMap& phi);

/// theta + eta * reinforce_direction. Throws NumericalError naming the first
/// step whose contribution is non-finite.
PolicyParams reinforce_update(const PolicyParams& params, const Trajectory& traj, const Context& c,
                              const FeatureMap& phi, double learning_rate);

/// Averaged update over a batch of trajectories (all on context `c`).
PolicyParams reinforce_update(const PolicyParams& params, std::span<const Trajectory> batch, const Context& c,
                              const FeatureMap& phi, double learning_rate);

/// Default ceiling on states x actions x horizon for exact computations.
inline constexpr double kDefaultExactBudget = 5e7;

/// Exact grad_theta V^{pi_theta}(c) for the horizon-truncated MDP: the sum
/// over time of gamma^t * d_t(s) * pi(a|s) * Q_t(s,a) * grad log pi(a|s),
/// with forward occupancies d_t and backward time-indexed Q_t. Throws
/// CapabilityError when S*A*H exceeds `budget`.
Eigen::VectorXd expected_policy_gradient(const PolicyParams& params, const ContextualMdp& mdp,
                                         const FeatureMap& phi, const Context& c,
                                         double budget = kDefaultExactBudget);

}  // namespace procurl
