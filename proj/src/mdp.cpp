#include "procurl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "procurl/errors.hpp"

namespace procurl {

namespace {

State sample_outcome(std::span<const Outcome> dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& o : dist) {
    acc += o.prob;
    if (u < acc) return o.state;
  }
  for (auto it = dist.rbegin(); it != dist.rend(); ++it) {
    if (it->prob > 0.0) return it->state;
  }
  throw std::logic_error("sample_outcome: empty distribution");
}

Action sample_action(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<Action>(a);
  }
  for (std::size_t a = probs.size(); a-- > 0;) {
    if (probs[a] > 0.0) return static_cast<Action>(a);
  }
  throw std::logic_error("sample_action: empty distribution");
}

void check_distribution(std::span<const Outcome> dist, int n_states, const std::string& what) {
  double total = 0.0;
  for (const auto& o : dist) {
    if (o.state < 0 || o.state >= n_states) throw ConfigError(what + ": state index out of range");
    if (!(o.prob >= 0.0)) throw ConfigError(what + ": negative probability");
    total += o.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError(what + ": probabilities sum to " + std::to_string(total));
  }
}

}  // namespace

void validate_mdp(const ContextualMdp& mdp, const Context& c) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  if (S < 1 || A < 1) throw ConfigError("mdp must have at least one state and one action");
  if (!(mdp.discount() >= 0.0 && mdp.discount() < 1.0)) throw ConfigError("discount must lie in [0,1)");
  if (mdp.horizon_cap() < 1) throw ConfigError("horizon_cap must be positive");
  std::vector<Outcome> buf;
  mdp.initial_dist(c, buf);
  check_distribution(buf, S, "initial distribution of context " + std::to_string(c.id));
  for (State s = 0; s < S; ++s) {
    if (mdp.terminal(s)) continue;
    for (Action a = 0; a < A; ++a) {
      mdp.transition(c, s, a, buf);
      check_distribution(buf, S, "transition (" + std::to_string(s) + "," + std::to_string(a) + ")");
      const double r = mdp.reward(c, s, a);
      if (!(std::abs(r) <= mdp.reward_bound())) {
        throw ConfigError("reward at (" + std::to_string(s) + "," + std::to_string(a) + ") exceeds R_max");
      }
    }
  }
}

TabularPolicy::TabularPolicy(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions),
      table_(static_cast<std::size_t>(n_states) * n_actions, 0.0) {}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
  TabularPolicy p(n_states, n_actions);
  std::fill(p.table_.begin(), p.table_.end(), 1.0 / n_actions);
  return p;
}

TabularPolicy TabularPolicy::deterministic(const std::vector<Action>& actions, int n_actions) {
  TabularPolicy p(static_cast<int>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    p.table_[s * n_actions + static_cast<std::size_t>(actions[s])] = 1.0;
  }
  return p;
}

void TabularPolicy::probs(State s, const Context&, std::span<double> out) const {
  const auto* row = table_.data() + static_cast<std::size_t>(s) * n_actions_;
  std::copy(row, row + n_actions_, out.begin());
}

void TabularPolicy::set(State s, std::span<const double> dist) {
  std::copy(dist.begin(), dist.end(), table_.begin() + static_cast<std::ptrdiff_t>(s) * n_actions_);
}

void compute_returns(Trajectory& traj, double discount) {
  traj.returns.assign(traj.steps.size(), 0.0);
  double g = 0.0;
  for (std::size_t t = traj.steps.size(); t-- > 0;) {
    g = traj.steps[t].reward + discount * g;
    traj.returns[t] = g;
  }
}

Trajectory rollout(const ContextualMdp& mdp, const Policy& policy, const Context& c, Rng& rng) {
  Trajectory traj;
  traj.context_id = c.id;
  std::vector<Outcome> buf;
  std::vector<double> probs(static_cast<std::size_t>(mdp.num_actions()));

  mdp.initial_dist(c, buf);
  State s = sample_outcome(buf, rng);
  const int horizon = mdp.horizon_cap();
  for (int t = 0; t < horizon && !mdp.terminal(s); ++t) {
    policy.probs(s, c, probs);
    const Action a = sample_action(probs, rng);
    traj.steps.push_back({s, a, mdp.reward(c, s, a)});
    mdp.transition(c, s, a, buf);
    s = sample_outcome(buf, rng);
  }
  compute_returns(traj, mdp.discount());
  return traj;
}

ContextModel ContextModel::build(const ContextualMdp& mdp, const Context& c) {
  ContextModel m;
  m.n_states = mdp.num_states();
  m.n_actions = mdp.num_actions();
  m.discount = mdp.discount();
  m.horizon = mdp.horizon_cap();
  m.is_terminal.resize(static_cast<std::size_t>(m.n_states));
  m.reward.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0);
  m.offsets.reserve(static_cast<std::size_t>(m.n_states) * m.n_actions + 1);
  m.offsets.push_back(0);
  std::vector<Outcome> buf;
  for (State s = 0; s < m.n_states; ++s) {
    m.is_terminal[static_cast<std::size_t>(s)] = mdp.terminal(s) ? 1 : 0;
    for (Action a = 0; a < m.n_actions; ++a) {
      if (!m.is_terminal[static_cast<std::size_t>(s)]) {
        m.reward[static_cast<std::size_t>(s) * m.n_actions + a] = mdp.reward(c, s, a);
        mdp.transition(c, s, a, buf);
        for (const auto& o : buf) {
          if (o.prob > 0.0) m.outcomes.push_back(o);
        }
      }
      m.offsets.push_back(m.outcomes.size());
    }
  }
  mdp.initial_dist(c, buf);
  for (const auto& o : buf) {
    if (o.prob > 0.0) m.initial.push_back(o);
  }
  return m;
}

std::vector<double> policy_table(const Policy& policy, const Context& c, int n_states) {
  const int A = policy.num_actions();
  std::vector<double> table(static_cast<std::size_t>(n_states) * A);
  for (State s = 0; s < n_states; ++s) {
    policy.probs(s, c, std::span<double>(table.data() + static_cast<std::size_t>(s) * A, static_cast<std::size_t>(A)));
  }
  return table;
}

std::vector<WeightedTrajectory> enumerate_trajectories(const ContextualMdp& mdp, const Policy& policy,
                                                       const Context& c, std::size_t max_trajectories) {
  const ContextModel model = ContextModel::build(mdp, c);
  const std::vector<double> pi = policy_table(policy, c, model.n_states);
  const int A = model.n_actions;
  std::vector<WeightedTrajectory> out;
  Trajectory prefix;
  prefix.context_id = c.id;

  std::function<void(State, double)> expand = [&](State s, double prob) {
    if (model.is_terminal[static_cast<std::size_t>(s)] || static_cast<int>(prefix.steps.size()) == model.horizon) {
      if (out.size() >= max_trajectories) {
        throw CapabilityError("trajectory enumeration exceeds budget of " + std::to_string(max_trajectories) +
                              " trajectories; use Monte-Carlo estimates instead");
      }
      WeightedTrajectory wt{prefix, prob};
      compute_returns(wt.trajectory, model.discount);
      out.push_back(std::move(wt));
      return;
    }
    for (Action a = 0; a < A; ++a) {
      const double pa = pi[static_cast<std::size_t>(s) * A + a];
      if (pa <= 0.0) continue;
      prefix.steps.push_back({s, a, model.r(s, a)});
      for (const auto& o : model.next(s, a)) expand(o.state, prob * pa * o.prob);
      prefix.steps.pop_back();
    }
  };
  for (const auto& o : model.initial) expand(o.state, o.prob);
  return out;
}

}  // namespace procurl
