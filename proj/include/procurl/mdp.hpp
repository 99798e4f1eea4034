#pragma once

#include <span>
#include <vector>

#include "procurl/context.hpp"
#include "procurl/random.hpp"

namespace procurl {

using State = int;
using Action = int;

/// One entry of a sparse probability vector over states.
struct Outcome {
  State state = 0;
  double prob = 0.0;
};

/// A family of MDPs sharing state space, action space and discount, with
/// context-dependent transitions, rewards and initial distributions.
class ContextualMdp {
 public:
  virtual ~ContextualMdp() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual double discount() const = 0;
  virtual int horizon_cap() const = 0;
  /// Upper bound on |reward|.
  virtual double reward_bound() const = 0;

  /// Sparse distribution over next states, written to `out` (cleared first).
  virtual void transition(const Context& c, State s, Action a, std::vector<Outcome>& out) const = 0;
  virtual double reward(const Context& c, State s, Action a) const = 0;
  virtual void initial_dist(const Context& c, std::vector<Outcome>& out) const = 0;
  virtual bool terminal(State s) const = 0;
};

/// Throws ConfigError if any transition or initial distribution of `c` fails
/// to sum to 1 within 1e-9 or a reward exceeds the bound.
void validate_mdp(const ContextualMdp& mdp, const Context& c);

/// Anything that yields pi(.|s,c).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int num_actions() const = 0;
  /// Writes pi(.|s,c) into `out` (size num_actions()).
  virtual void probs(State s, const Context& c, std::span<double> out) const = 0;
};

/// Explicit per-state action distribution shared by all contexts.
class TabularPolicy final : public Policy {
 public:
  TabularPolicy(int n_states, int n_actions);
  static TabularPolicy uniform(int n_states, int n_actions);
  /// Puts all mass on `actions[s]`.
  static TabularPolicy deterministic(const std::vector<Action>& actions, int n_actions);

  int num_actions() const override { return n_actions_; }
  void probs(State s, const Context& c, std::span<double> out) const override;
  void set(State s, std::span<const double> dist);

 private:
  int n_states_;
  int n_actions_;
  std::vector<double> table_;
};

struct Step {
  State state = 0;
  Action action = 0;
  double reward = 0.0;

  bool operator==(const Step&) const = default;
};

/// A rollout with its per-step discounted returns
/// returns[t] = reward[t] + discount * returns[t+1].
struct Trajectory {
  int context_id = 0;
  std::vector<Step> steps;
  std::vector<double> returns;

  std::size_t length() const { return steps.size(); }
  double discounted_return() const { return returns.empty() ? 0.0 : returns.front(); }
};

/// Fills `traj.returns` from its rewards by the backward recursion.
void compute_returns(Trajectory& traj, double discount);

/// Samples one episode: s0 ~ P0_c, a ~ pi(.|s,c), s' ~ T_c, stopping at a
/// terminal state or after horizon_cap steps.
Trajectory rollout(const ContextualMdp& mdp, const Policy& policy, const Context& c, Rng& rng);

/// Tabular snapshot of one context of an MDP, used by the exact dynamic programs.
struct ContextModel {
  int n_states = 0;
  int n_actions = 0;
  double discount = 0.0;
  int horizon = 0;
  std::vector<char> is_terminal;
  std::vector<double> reward;                  // [s * A + a]
  std::vector<std::size_t> offsets;            // CSR row starts for (s, a)
  std::vector<Outcome> outcomes;               // CSR entries
  std::vector<Outcome> initial;

  static ContextModel build(const ContextualMdp& mdp, const Context& c);

  std::span<const Outcome> next(State s, Action a) const {
    const std::size_t row = static_cast<std::size_t>(s) * n_actions + a;
    return {outcomes.data() + offsets[row], offsets[row + 1] - offsets[row]};
  }
  double r(State s, Action a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
};

/// pi(a|s,c) for every state of a model, flattened as [s * A + a].
std::vector<double> policy_table(const Policy& policy, const Context& c, int n_states);

/// A complete trajectory with its probability under the policy.
struct WeightedTrajectory {
  Trajectory trajectory;
  double prob = 0.0;
};

/// Every trajectory of non-zero probability, up to `max_trajectories`;
/// throws CapabilityError beyond that.
std::vector<WeightedTrajectory> enumerate_trajectories(const ContextualMdp& mdp, const Policy& policy,
                                                       const Context& c, std::size_t max_trajectories);

}  // namespace procurl
