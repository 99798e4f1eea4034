#include "procurl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "procurl/errors.hpp"

namespace procurl {

ContextualBandit::ContextualBandit(std::vector<int> optimal_action, double discount, int horizon_cap)
    : optimal_action_(std::move(optimal_action)), discount_(discount), horizon_cap_(horizon_cap) {
  for (int a : optimal_action_) {
    if (a != 0 && a != 1) throw ConfigError("bandit optimal action must be 0 or 1");
  }
}

void ContextualBandit::transition(const Context&, State, Action, std::vector<Outcome>& out) const {
  out.assign(1, Outcome{kDone, 1.0});
}

double ContextualBandit::reward(const Context& c, State s, Action a) const {
  if (s != kDecision) return 0.0;
  return a == optimal_action(c.id) ? 1.0 : 0.0;
}

void ContextualBandit::initial_dist(const Context&, std::vector<Outcome>& out) const {
  out.assign(1, Outcome{kDecision, 1.0});
}

BanditFeatureMap::BanditFeatureMap(int dimension, std::vector<int> optimal_action)
    : dimension_(dimension), optimal_action_(std::move(optimal_action)) {}

void BanditFeatureMap::features(State, const Context& c, Action a, std::vector<SparseEntry>& out) const {
  out.clear();
  if (a != optimal_action_.at(static_cast<std::size_t>(c.id))) return;
  if (static_cast<int>(c.features.size()) != dimension_) throw std::invalid_argument("bandit psi has wrong dimension");
  for (int i = 0; i < dimension_; ++i) {
    if (c.features[static_cast<std::size_t>(i)] != 0.0) out.push_back({i, c.features[static_cast<std::size_t>(i)]});
  }
}

Eigen::VectorXd BanditSpec::psi(int context_id) const {
  const auto& f = contexts.at(static_cast<std::size_t>(context_id)).features;
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

namespace {

Eigen::VectorXd random_unit(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

Bandit make_bandit(int dimension, int n_contexts, const PsiScheme& scheme, Rng& rng) {
  if (dimension < 1) throw ConfigError("bandit dimension must be >= 1");
  if (n_contexts < 1) throw ConfigError("bandit needs n_contexts >= 1");
  if (scheme.kind == PsiScheme::Kind::Orthogonal && dimension < n_contexts) {
    throw ConfigError("orthogonal psi scheme needs dimension >= n_contexts (" + std::to_string(dimension) + " < " +
                      std::to_string(n_contexts) + ")");
  }
  if (scheme.kind == PsiScheme::Kind::Clustered && (scheme.clusters < 1 || !(scheme.spread >= 0.0))) {
    throw ConfigError("clustered psi scheme needs clusters >= 1 and spread >= 0");
  }

  std::vector<Eigen::VectorXd> centres;
  if (scheme.kind == PsiScheme::Kind::Clustered) {
    for (int k = 0; k < scheme.clusters; ++k) centres.push_back(random_unit(dimension, rng));
  }

  Bandit bandit;
  for (int i = 0; i < n_contexts; ++i) {
    Eigen::VectorXd psi;
    switch (scheme.kind) {
      case PsiScheme::Kind::Orthogonal:
        psi = Eigen::VectorXd::Unit(dimension, i);
        break;
      case PsiScheme::Kind::RandomUnit:
        psi = random_unit(dimension, rng);
        break;
      case PsiScheme::Kind::Clustered: {
        psi = centres[static_cast<std::size_t>(i % scheme.clusters)];
        if (scheme.spread > 0.0) {
          Eigen::VectorXd noisy;
          do {
            noisy = psi;
            for (int j = 0; j < dimension; ++j) noisy[j] += scheme.spread * rng.normal();
          } while (noisy.norm() < 1e-12);
          psi = noisy.normalized();
        }
        break;
      }
    }
    bandit.spec.contexts.push_back(Context{i, std::vector<double>(psi.data(), psi.data() + psi.size())});
    bandit.spec.optimal_action.push_back(static_cast<int>(rng.uniform_index(2)));
  }
  bandit.mdp = std::make_shared<ContextualBandit>(bandit.spec.optimal_action);
  bandit.features = std::make_shared<BanditFeatureMap>(dimension, bandit.spec.optimal_action);
  return bandit;
}

std::vector<GateContext> GateGridSpec::all_gates(int grid_size) {
  std::vector<GateContext> out;
  for (int width = 1; width <= grid_size; width += 2) {
    for (int pos = width / 2; pos + width / 2 < grid_size; ++pos) out.push_back({pos, width});
  }
  return out;
}

void GateGridSpec::validate() const {
  if (grid_size < 3) throw ConfigError("grid_size must be >= 3");
  if (wall_row < 1 || wall_row > grid_size - 2) {
    throw ConfigError("wall_row must lie in [1, grid_size - 2], got " + std::to_string(wall_row));
  }
  if (!(slip >= 0.0 && slip < 1.0)) throw ConfigError("slip must lie in [0, 1)");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  if (horizon_cap < 1) throw ConfigError("horizon_cap must be positive");
  if (contexts.empty()) throw ConfigError("gate grid needs at least one context");
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& g = contexts[i];
    if (g.gate_width < 1 || g.gate_width % 2 == 0) {
      throw ConfigError("context " + std::to_string(i) + ": gate_width must be an odd integer >= 1");
    }
    if (g.gate_position - g.gate_width / 2 < 0 || g.gate_position + g.gate_width / 2 >= grid_size) {
      throw ConfigError("context " + std::to_string(i) + ": gate cells fall outside the grid");
    }
  }
}

GateGrid::GateGrid(GateGridSpec spec) : spec_(std::move(spec)), n_(spec_.grid_size) {
  if (spec_.contexts.empty()) spec_.contexts = GateGridSpec::all_gates(spec_.grid_size);
  spec_.validate();
}

const GateContext& GateGrid::gate(const Context& c) const {
  if (c.id < 0 || c.id >= static_cast<int>(spec_.contexts.size())) {
    throw std::out_of_range("gate grid has no context " + std::to_string(c.id));
  }
  return spec_.contexts[static_cast<std::size_t>(c.id)];
}

bool GateGrid::is_wall(const GateContext& g, int row, int col) const {
  return row == spec_.wall_row && std::abs(col - g.gate_position) > g.gate_width / 2;
}

std::vector<Context> GateGrid::task_space() const {
  std::vector<Context> out;
  for (std::size_t i = 0; i < spec_.contexts.size(); ++i) {
    const auto& g = spec_.contexts[i];
    out.push_back(Context{static_cast<int>(i),
                          {static_cast<double>(g.gate_position - n_ / 2), static_cast<double>(g.gate_width)}});
  }
  return out;
}

void GateGrid::transition(const Context& c, State s, Action a, std::vector<Outcome>& out) const {
  out.clear();
  if (s == done_state() || s == goal_state()) {
    out.push_back({done_state(), 1.0});
    return;
  }
  const GateContext& g = gate(c);
  const int row = s / n_;
  const int col = s % n_;
  static constexpr int kDr[4] = {-1, 1, 0, 0};
  static constexpr int kDc[4] = {0, 0, -1, 1};
  const auto add = [&out](State next, double p) {
    if (p <= 0.0) return;
    for (auto& o : out) {
      if (o.state == next) {
        o.prob += p;
        return;
      }
    }
    out.push_back({next, p});
  };
  for (Action m = 0; m < 4; ++m) {
    const double p = (m == a ? 1.0 - spec_.slip : 0.0) + spec_.slip / 4.0;
    const int r2 = row + kDr[m];
    const int c2 = col + kDc[m];
    if (r2 < 0 || r2 >= n_ || c2 < 0 || c2 >= n_) {
      add(s, p);
    } else if (is_wall(g, r2, c2)) {
      add(done_state(), p);
    } else {
      add(cell(r2, c2), p);
    }
  }
}

double GateGrid::reward(const Context&, State s, Action) const { return s == goal_state() ? 1.0 : 0.0; }

void GateGrid::initial_dist(const Context&, std::vector<Outcome>& out) const { out.assign(1, {start_state(), 1.0}); }

GateRelativeFeatureMap::GateRelativeFeatureMap(const GateGrid& grid) : grid_(grid) {}

int GateRelativeFeatureMap::dimension() const {
  const int n = grid_.size();
  return n * n * 4 + n * (2 * n - 1) * 4;
}

void GateRelativeFeatureMap::features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const {
  out.clear();
  const int n = grid_.size();
  if (s >= n * n) return;
  const int row = s / n;
  const int col = s % n;
  const int rel = col - grid_.gate(c).gate_position + (n - 1);
  out.push_back({s * 4 + a, 1.0});
  out.push_back({n * n * 4 + (row * (2 * n - 1) + rel) * 4 + a, 1.0});
}

std::map<std::string, TargetSpec> target_spec_library(const GateGrid& grid) {
  const auto& ctx = grid.spec().contexts;
  const int n = grid.size();
  const auto find = [&](int pos, int width) {
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (ctx[i].gate_position == pos && ctx[i].gate_width == width) return static_cast<int>(i);
    }
    throw ConfigError("gate grid lacks the context (position " + std::to_string(pos) + ", width " +
                      std::to_string(width) + ") required by the target library");
  };
  const int right = find(n - 1, 1);
  const int left = find(0, 1);
  std::vector<int> all(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) all[i] = static_cast<int>(i);

  std::map<std::string, TargetSpec> lib;
  lib.emplace("point-mass", TargetSpec::point_mass(right, "point-mass"));
  lib.emplace("two-mode", TargetSpec::mixture({{left}, {right}}, {0.5, 0.5}, "two-mode"));
  lib.emplace("uniform", TargetSpec::uniform_over(all, "uniform"));
  return lib;
}

}  // namespace procurl
