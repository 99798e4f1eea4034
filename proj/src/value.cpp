#include "procurl/value.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "procurl/errors.hpp"

namespace procurl {

double value_exact(const ContextualMdp& mdp, const Policy& policy, const Context& c) {
  const ContextModel m = ContextModel::build(mdp, c);
  const int S = m.n_states;
  const int A = m.n_actions;
  const std::vector<double> pi = policy_table(policy, c, S);
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  std::vector<double> cur(static_cast<std::size_t>(S), 0.0);
  for (int h = m.horizon - 1; h >= 0; --h) {
    for (State s = 0; s < S; ++s) {
      if (m.is_terminal[static_cast<std::size_t>(s)]) {
        cur[static_cast<std::size_t>(s)] = 0.0;
        continue;
      }
      double v = 0.0;
      for (Action a = 0; a < A; ++a) {
        const double pa = pi[static_cast<std::size_t>(s) * A + a];
        if (pa == 0.0) continue;
        double q = m.r(s, a);
        for (const auto& o : m.next(s, a)) q += m.discount * o.prob * next[static_cast<std::size_t>(o.state)];
        v += pa * q;
      }
      cur[static_cast<std::size_t>(s)] = v;
    }
    cur.swap(next);
  }
  double v0 = 0.0;
  for (const auto& o : m.initial) v0 += o.prob * next[static_cast<std::size_t>(o.state)];
  return v0;
}

double value_mc(const ContextualMdp& mdp, const Policy& policy, const Context& c, int n_episodes, Rng& rng) {
  if (n_episodes < 1) throw ConfigError("value_mc needs n_episodes >= 1");
  double total = 0.0;
  for (int i = 0; i < n_episodes; ++i) total += rollout(mdp, policy, c, rng).discounted_return();
  return total / n_episodes;
}

double optimal_value(const ContextualMdp& mdp, const Context& c) {
  const ContextModel m = ContextModel::build(mdp, c);
  const int S = m.n_states;
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  std::vector<double> cur(static_cast<std::size_t>(S), 0.0);
  for (int h = m.horizon - 1; h >= 0; --h) {
    for (State s = 0; s < S; ++s) {
      if (m.is_terminal[static_cast<std::size_t>(s)]) {
        cur[static_cast<std::size_t>(s)] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (Action a = 0; a < m.n_actions; ++a) {
        double q = m.r(s, a);
        for (const auto& o : m.next(s, a)) q += m.discount * o.prob * next[static_cast<std::size_t>(o.state)];
        best = std::max(best, q);
      }
      cur[static_cast<std::size_t>(s)] = best;
    }
    cur.swap(next);
  }
  double v0 = 0.0;
  for (const auto& o : m.initial) v0 += o.prob * next[static_cast<std::size_t>(o.state)];
  return v0;
}

ValueTable::ValueTable(double v_max) : v_max_(v_max) {
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("v_max must be positive and finite");
}

bool ValueTable::set(int context_id, double raw) {
  if (std::isnan(raw)) throw NumericalError("value estimate for context " + std::to_string(context_id) + " is NaN");
  const double stored = std::clamp(raw, 0.0, v_max_);
  values_[context_id] = stored;
  if (stored != raw) {
    ++clamp_events_;
    return true;
  }
  return false;
}

double ValueTable::get(int context_id) const {
  const auto it = values_.find(context_id);
  if (it == values_.end()) {
    throw std::out_of_range("value table has no entry for context " + std::to_string(context_id));
  }
  return it->second;
}

void ValueTable::dump_csv(std::ostream& out) const {
  for (const auto& [id, v] : values_) {
    out << last_update_step_ << ',' << id << ',' << std::setprecision(17) << v << '\n';
  }
}

RefreshResult refresh_values(const ValueTable& table, const ContextualMdp& mdp, const Policy& policy,
                             const TaskPools& pools, const RefreshOptions& options, long step, Rng* rng) {
  if (options.mode == ValueMode::MonteCarlo && rng == nullptr) {
    throw std::invalid_argument("refresh_values: Monte-Carlo mode needs an rng");
  }
  RefreshResult result{table, 0};
  std::set<int> seen;
  const auto evaluate = [&](const Context& c) {
    if (options.dedup && !seen.insert(c.id).second) return;
    const double v = options.mode == ValueMode::Exact ? value_exact(mdp, policy, c)
                                                      : value_mc(mdp, policy, c, options.mc_episodes, *rng);
    result.table.set(c.id, v);
    ++result.evaluations;
  };
  for (const auto& c : pools.targ_pool) evaluate(c);
  for (const auto& c : pools.unif_pool) evaluate(c);
  result.table.set_last_update_step(step);
  return result;
}

}  // namespace procurl
