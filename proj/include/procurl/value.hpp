#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "procurl/context.hpp"
#include "procurl/mdp.hpp"
#include "procurl/random.hpp"

namespace procurl {

/// Exact finite-horizon policy evaluation of V^pi(c) by backward induction
/// over the horizon_cap steps.
double value_exact(const ContextualMdp& mdp, const Policy& policy, const Context& c);

/// Mean discounted return over `n_episodes` rollouts.
double value_mc(const ContextualMdp& mdp, const Policy& policy, const Context& c, int n_episodes, Rng& rng);

/// max over policies of the horizon-truncated value, by finite-horizon value iteration.
double optimal_value(const ContextualMdp& mdp, const Context& c);

enum class ValueMode { Exact, MonteCarlo };

/// Per-context value estimates V^t(.) read by the teacher. Writes are clamped
/// into [0, v_max].
class ValueTable {
 public:
  explicit ValueTable(double v_max = 1.0);

  double v_max() const { return v_max_; }
  long last_update_step() const { return last_update_step_; }
  void set_last_update_step(long step) { last_update_step_ = step; }

  /// Stores clamp(raw, 0, v_max) and returns true when clamping changed the value.
  bool set(int context_id, double raw);
  double get(int context_id) const;
  bool contains(int context_id) const { return values_.count(context_id) != 0; }
  std::size_t size() const { return values_.size(); }
  long clamp_events() const { return clamp_events_; }
  const std::map<int, double>& values() const { return values_; }

  /// CSV rows `step,context_id,value` (no header).
  void dump_csv(std::ostream& out) const;

 private:
  double v_max_;
  long last_update_step_ = 0;
  long clamp_events_ = 0;
  std::map<int, double> values_;
};

struct RefreshOptions {
  ValueMode mode = ValueMode::Exact;
  bool dedup = true;
  int mc_episodes = 20;
};

struct RefreshResult {
  ValueTable table;
  int evaluations = 0;
};

/// Recomputes V^t for every context of both pools under `policy`, stamping the
/// table with `step`. Without dedup every pool entry is evaluated (later
/// entries of the same id overwrite earlier ones).
RefreshResult refresh_values(const ValueTable& table, const ContextualMdp& mdp, const Policy& policy,
                             const TaskPools& pools, const RefreshOptions& options, long step, Rng* rng = nullptr);

}  // namespace procurl
