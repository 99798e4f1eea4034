#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "procurl/context.hpp"
#include "procurl/learner.hpp"
#include "procurl/mdp.hpp"
#include "procurl/random.hpp"

namespace procurl {

// ---------------------------------------------------------------------------
// Contextual bandit: one decision state, two actions, unit reward for the
// context's optimal action. Context::features holds psi(c).

class ContextualBandit final : public ContextualMdp {
 public:
  static constexpr State kDecision = 0;
  static constexpr State kDone = 1;

  explicit ContextualBandit(std::vector<int> optimal_action, double discount = 0.99, int horizon_cap = 100);

  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  double discount() const override { return discount_; }
  int horizon_cap() const override { return horizon_cap_; }
  double reward_bound() const override { return 1.0; }
  void transition(const Context& c, State s, Action a, std::vector<Outcome>& out) const override;
  double reward(const Context& c, State s, Action a) const override;
  void initial_dist(const Context& c, std::vector<Outcome>& out) const override;
  bool terminal(State s) const override { return s == kDone; }

  int optimal_action(int context_id) const { return optimal_action_.at(static_cast<std::size_t>(context_id)); }

 private:
  std::vector<int> optimal_action_;
  double discount_;
  int horizon_cap_;
};

/// phi(s,c,a_opt) = psi(c), phi(s,c,a_non) = 0, so the feature difference is psi(c).
class BanditFeatureMap final : public FeatureMap {
 public:
  BanditFeatureMap(int dimension, std::vector<int> optimal_action);
  int dimension() const override { return dimension_; }
  int num_actions() const override { return 2; }
  void features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const override;

 private:
  int dimension_;
  std::vector<int> optimal_action_;
};

struct PsiScheme {
  enum class Kind { Orthogonal, RandomUnit, Clustered };
  Kind kind = Kind::RandomUnit;
  int clusters = 2;
  double spread = 0.1;

  static PsiScheme orthogonal() { return {Kind::Orthogonal, 0, 0.0}; }
  static PsiScheme random_unit() { return {Kind::RandomUnit, 0, 0.0}; }
  static PsiScheme clustered(int k, double spread) { return {Kind::Clustered, k, spread}; }
};

struct BanditSpec {
  std::vector<Context> contexts;
  std::vector<int> optimal_action;

  Eigen::VectorXd psi(int context_id) const;
};

struct Bandit {
  BanditSpec spec;
  std::shared_ptr<const ContextualBandit> mdp;
  std::shared_ptr<const BanditFeatureMap> features;
};

/// Bandit family with unit-norm psi vectors. Orthogonal uses the first
/// n_contexts basis vectors; clustered puts k random unit centres on the
/// sphere (context i joins cluster i mod k) and perturbs each by
/// spread * N(0, I) before renormalising.
Bandit make_bandit(int dimension, int n_contexts, const PsiScheme& scheme, Rng& rng);

// ---------------------------------------------------------------------------
// Gate gridworld: start top-middle, goal bottom-middle, a wall row with a gate.

struct GateContext {
  int gate_position = 0;  // column of the gate centre
  int gate_width = 1;     // odd, >= 1
};

struct GateGridSpec {
  int grid_size = 11;
  int wall_row = 5;
  double slip = 0.0;
  double discount = 0.99;
  int horizon_cap = 100;
  std::vector<GateContext> contexts;

  /// Every gate (position, odd width) that fits inside the grid, widths ascending.
  static std::vector<GateContext> all_gates(int grid_size);
  void validate() const;
};

class GateGrid final : public ContextualMdp {
 public:
  enum Move : Action { Up = 0, Down = 1, Left = 2, Right = 3 };

  explicit GateGrid(GateGridSpec spec);

  int num_states() const override { return n_ * n_ + 1; }
  int num_actions() const override { return 4; }
  double discount() const override { return spec_.discount; }
  int horizon_cap() const override { return spec_.horizon_cap; }
  double reward_bound() const override { return 1.0; }
  void transition(const Context& c, State s, Action a, std::vector<Outcome>& out) const override;
  /// 1 for any action taken on the goal cell, else 0.
  double reward(const Context& c, State s, Action a) const override;
  void initial_dist(const Context& c, std::vector<Outcome>& out) const override;
  bool terminal(State s) const override { return s == done_state(); }

  const GateGridSpec& spec() const { return spec_; }
  int size() const { return n_; }
  State cell(int row, int col) const { return row * n_ + col; }
  State start_state() const { return cell(0, n_ / 2); }
  State goal_state() const { return cell(n_ - 1, n_ / 2); }
  State done_state() const { return n_ * n_; }
  /// Contexts with features (gate_position - centre column, gate_width).
  std::vector<Context> task_space() const;
  const GateContext& gate(const Context& c) const;
  bool is_wall(const GateContext& g, int row, int col) const;

 private:
  GateGridSpec spec_;
  int n_;
};

/// One-hot over (row, col, a) concatenated with one-hot over
/// (row, col - gate_position, a); the second block is shared by all gates.
class GateRelativeFeatureMap final : public FeatureMap {
 public:
  explicit GateRelativeFeatureMap(const GateGrid& grid);
  int dimension() const override;
  int num_actions() const override { return 4; }
  void features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const override;

 private:
  const GateGrid& grid_;
};

/// Named targets over a gate grid's task space: "point-mass" (right-edge gate
/// of width 1), "two-mode" (left and right edge gates of width 1, equal
/// weight) and "uniform" (every context).
std::map<std::string, TargetSpec> target_spec_library(const GateGrid& grid);

}  // namespace procurl
