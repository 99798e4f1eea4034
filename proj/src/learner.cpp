#include "procurl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "procurl/errors.hpp"

namespace procurl {

void save_params(std::ostream& out, const PolicyParams& params) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < params.theta.size(); ++i) out << params.theta[i] << '\n';
}

PolicyParams load_params(std::istream& in) {
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) {
      throw ConfigError("policy params: entry " + std::to_string(values.size() + 1) + " is not a number: " + token);
    }
    values.push_back(v);
  }
  PolicyParams p{Eigen::VectorXd(static_cast<Eigen::Index>(values.size()))};
  for (std::size_t i = 0; i < values.size(); ++i) p.theta[static_cast<Eigen::Index>(i)] = values[i];
  return p;
}

TabularFeatureMap::TabularFeatureMap(int n_states, int n_contexts, int n_actions)
    : n_states_(n_states), n_contexts_(n_contexts), n_actions_(n_actions) {
  if (n_states < 1 || n_contexts < 1 || n_actions < 1) throw ConfigError("TabularFeatureMap: sizes must be positive");
}

void TabularFeatureMap::features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const {
  out.clear();
  if (c.id < 0 || c.id >= n_contexts_) throw std::out_of_range("TabularFeatureMap: context id out of range");
  out.push_back({(c.id * n_states_ + s) * n_actions_ + a, 1.0});
}

LinearFeatureMap::LinearFeatureMap(int dimension, int n_actions, Fn fn)
    : dimension_(dimension), n_actions_(n_actions), fn_(std::move(fn)) {}

void LinearFeatureMap::features(State s, const Context& c, Action a, std::vector<SparseEntry>& out) const {
  out.clear();
  const Eigen::VectorXd v = fn_(s, c, a);
  if (v.size() != dimension_) throw std::logic_error("LinearFeatureMap: callable returned wrong dimension");
  for (int i = 0; i < dimension_; ++i) out.push_back({i, v[i]});
}

void LearnerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

namespace {

double dot(const Eigen::VectorXd& theta, const std::vector<SparseEntry>& f) {
  double acc = 0.0;
  for (const auto& e : f) acc += theta[e.index] * e.value;
  return acc;
}

void softmax_inplace(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : v) x /= total;
}

/// Per-state cache of phi(s,c,a) for every action.
struct StateFeatures {
  std::vector<std::vector<SparseEntry>> per_action;
};

StateFeatures state_features(const FeatureMap& phi, State s, const Context& c) {
  StateFeatures sf;
  sf.per_action.resize(static_cast<std::size_t>(phi.num_actions()));
  for (Action a = 0; a < phi.num_actions(); ++a) phi.features(s, c, a, sf.per_action[static_cast<std::size_t>(a)]);
  return sf;
}

std::vector<double> probs_from(const Eigen::VectorXd& theta, const StateFeatures& sf) {
  std::vector<double> p(sf.per_action.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = dot(theta, sf.per_action[a]);
  softmax_inplace(p);
  return p;
}

/// out += weight * (phi(a) - sum_a' pi(a') phi(a')).
void add_score(Eigen::VectorXd& out, const StateFeatures& sf, const std::vector<double>& pi, std::size_t a,
               double weight) {
  for (const auto& e : sf.per_action[a]) out[e.index] += weight * e.value;
  for (std::size_t b = 0; b < sf.per_action.size(); ++b) {
    const double w = weight * pi[b];
    if (w == 0.0) continue;
    for (const auto& e : sf.per_action[b]) out[e.index] -= w * e.value;
  }
}

}  // namespace

std::vector<double> policy_logits(const PolicyParams& params, const FeatureMap& phi, State s, const Context& c) {
  std::vector<double> logits(static_cast<std::size_t>(phi.num_actions()));
  std::vector<SparseEntry> buf;
  for (Action a = 0; a < phi.num_actions(); ++a) {
    phi.features(s, c, a, buf);
    logits[static_cast<std::size_t>(a)] = dot(params.theta, buf);
  }
  return logits;
}

std::vector<double> policy_probs(const PolicyParams& params, const FeatureMap& phi, State s, const Context& c) {
  std::vector<double> p = policy_logits(params, phi, s, c);
  softmax_inplace(p);
  return p;
}

void SoftmaxPolicy::probs(State s, const Context& c, std::span<double> out) const {
  std::vector<SparseEntry> buf;
  for (Action a = 0; a < phi_.num_actions(); ++a) {
    phi_.features(s, c, a, buf);
    out[static_cast<std::size_t>(a)] = dot(params_.theta, buf);
  }
  softmax_inplace(out);
}

Eigen::VectorXd reinforce_direction(const PolicyParams& params, const Trajectory& traj, const Context& c,
                                    const FeatureMap& phi) {
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(phi.dimension());
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const double g = traj.returns.at(t);
    if (g == 0.0) continue;
    const Step& step = traj.steps[t];
    const StateFeatures sf = state_features(phi, step.state, c);
    const std::vector<double> pi = probs_from(params.theta, sf);
    add_score(dir, sf, pi, static_cast<std::size_t>(step.action), g);
    if (!dir.allFinite()) {
      throw NumericalError("REINFORCE update became non-finite at step " + std::to_string(t) + " of context " +
                           std::to_string(c.id));
    }
  }
  return dir;
}

PolicyParams reinforce_update(const PolicyParams& params, const Trajectory& traj, const Context& c,
                              const FeatureMap& phi, double learning_rate) {
  return reinforce_update(params, std::span<const Trajectory>(&traj, 1), c, phi, learning_rate);
}

PolicyParams reinforce_update(const PolicyParams& params, std::span<const Trajectory> batch, const Context& c,
                              const FeatureMap& phi, double learning_rate) {
  if (batch.empty()) return params;
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(phi.dimension());
  for (const auto& traj : batch) dir += reinforce_direction(params, traj, c, phi);
  PolicyParams next{params.theta + (learning_rate / static_cast<double>(batch.size())) * dir};
  if (!next.all_finite()) throw NumericalError("REINFORCE update produced non-finite parameters");
  return next;
}

Eigen::VectorXd expected_policy_gradient(const PolicyParams& params, const ContextualMdp& mdp,
                                         const FeatureMap& phi, const Context& c, double budget) {
  const double work = static_cast<double>(mdp.num_states()) * mdp.num_actions() * mdp.horizon_cap();
  if (work > budget) {
    throw CapabilityError("exact gradient needs S*A*H = " + std::to_string(work) + " > budget " +
                          std::to_string(budget) + "; use Monte-Carlo REINFORCE estimates instead");
  }
  const ContextModel m = ContextModel::build(mdp, c);
  const int S = m.n_states;
  const int A = m.n_actions;
  const int H = m.horizon;
  const auto idx = [A](State s, Action a) { return static_cast<std::size_t>(s) * A + a; };

  std::vector<StateFeatures> feats(static_cast<std::size_t>(S));
  std::vector<double> pi(static_cast<std::size_t>(S) * A, 0.0);
  for (State s = 0; s < S; ++s) {
    if (m.is_terminal[static_cast<std::size_t>(s)]) continue;
    feats[static_cast<std::size_t>(s)] = state_features(phi, s, c);
    const auto p = probs_from(params.theta, feats[static_cast<std::size_t>(s)]);
    std::copy(p.begin(), p.end(), pi.begin() + static_cast<std::ptrdiff_t>(idx(s, 0)));
  }

  // values[h * S + s] = V_h(s), value-to-go with H - h steps left; V_H = 0.
  std::vector<double> values(static_cast<std::size_t>(H + 1) * S, 0.0);
  const auto q_value = [&](int h, State s, Action a) {
    double q = m.r(s, a);
    const double* next_v = values.data() + static_cast<std::size_t>(h + 1) * S;
    for (const auto& o : m.next(s, a)) q += m.discount * o.prob * next_v[o.state];
    return q;
  };
  for (int h = H - 1; h >= 0; --h) {
    double* v = values.data() + static_cast<std::size_t>(h) * S;
    for (State s = 0; s < S; ++s) {
      if (m.is_terminal[static_cast<std::size_t>(s)]) continue;
      double acc = 0.0;
      for (Action a = 0; a < A; ++a) acc += pi[idx(s, a)] * q_value(h, s, a);
      v[s] = acc;
    }
  }

  // Forward pass: accumulate weight(s,a) = sum_h gamma^h d_h(s) pi(a|s) Q_h(s,a).
  std::vector<double> weight(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<double> occ(static_cast<std::size_t>(S), 0.0);
  std::vector<double> next_occ(static_cast<std::size_t>(S), 0.0);
  for (const auto& o : m.initial) occ[static_cast<std::size_t>(o.state)] += o.prob;
  double discount_pow = 1.0;
  for (int h = 0; h < H; ++h) {
    std::fill(next_occ.begin(), next_occ.end(), 0.0);
    bool any = false;
    for (State s = 0; s < S; ++s) {
      const double d = occ[static_cast<std::size_t>(s)];
      if (d == 0.0 || m.is_terminal[static_cast<std::size_t>(s)]) continue;
      any = true;
      for (Action a = 0; a < A; ++a) {
        const double pa = pi[idx(s, a)];
        if (pa == 0.0) continue;
        weight[idx(s, a)] += discount_pow * d * pa * q_value(h, s, a);
        for (const auto& o : m.next(s, a)) next_occ[static_cast<std::size_t>(o.state)] += d * pa * o.prob;
      }
    }
    if (!any) break;
    occ.swap(next_occ);
    discount_pow *= m.discount;
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(phi.dimension());
  for (State s = 0; s < S; ++s) {
    if (m.is_terminal[static_cast<std::size_t>(s)]) continue;
    const auto& sf = feats[static_cast<std::size_t>(s)];
    const std::vector<double> p(pi.begin() + static_cast<std::ptrdiff_t>(idx(s, 0)),
                                pi.begin() + static_cast<std::ptrdiff_t>(idx(s, 0) + A));
    for (Action a = 0; a < A; ++a) {
      const double w = weight[idx(s, a)];
      if (w != 0.0) add_score(grad, sf, p, static_cast<std::size_t>(a), w);
    }
  }
  if (!grad.allFinite()) throw NumericalError("expected_policy_gradient produced non-finite values");
  return grad;
}

}  // namespace procurl
