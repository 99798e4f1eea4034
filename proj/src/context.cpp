#include "procurl/context.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "procurl/errors.hpp"

namespace procurl {

double euclidean_distance(const Context& a, const Context& b) {
  if (a.features.size() != b.features.size()) {
    throw std::invalid_argument("euclidean_distance: dimension mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    const double d = a.features[i] - b.features[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

void validate_task_space(const std::vector<Context>& task_space) {
  if (task_space.empty()) throw ConfigError("task space is empty");
  const std::size_t dim = task_space.front().features.size();
  if (dim == 0) throw ConfigError("context features must have dimension >= 1");
  for (std::size_t i = 0; i < task_space.size(); ++i) {
    const Context& c = task_space[i];
    if (c.id != static_cast<int>(i)) {
      throw ConfigError("task space context " + std::to_string(i) + " has id " + std::to_string(c.id));
    }
    if (c.features.size() != dim) {
      throw ConfigError("context " + std::to_string(c.id) + " has feature dimension " +
                        std::to_string(c.features.size()) + ", expected " + std::to_string(dim));
    }
    for (double f : c.features) {
      if (!std::isfinite(f)) throw ConfigError("context " + std::to_string(c.id) + " has a non-finite feature");
    }
  }
}

TargetSpec TargetSpec::point_mass(int id, std::string name) {
  return TargetSpec{Kind::PointMass, std::move(name), {{id}}, {1.0}};
}

TargetSpec TargetSpec::mixture(std::vector<std::vector<int>> components, std::vector<double> weights,
                               std::string name) {
  return TargetSpec{Kind::Mixture, std::move(name), std::move(components), std::move(weights)};
}

TargetSpec TargetSpec::uniform_over(std::vector<int> ids, std::string name) {
  return TargetSpec{Kind::UniformSubset, std::move(name), {std::move(ids)}, {1.0}};
}

void TargetSpec::validate(int n_contexts) const {
  if (components.empty()) throw ConfigError("target spec '" + name + "' has no components");
  if (components.size() != weights.size()) {
    throw ConfigError("target spec '" + name + "': components and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k].empty()) throw ConfigError("target spec '" + name + "' has an empty component");
    for (int id : components[k]) {
      if (id < 0 || id >= n_contexts) {
        throw ConfigError("target spec '" + name + "' references context " + std::to_string(id) +
                          " outside the task space");
      }
    }
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      throw ConfigError("target spec '" + name + "' has an invalid weight");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("target spec '" + name + "' weights do not sum to 1");
}

int TargetSpec::sample(Rng& rng) const {
  const std::size_t k = components.size() == 1 ? 0 : rng.categorical(weights);
  const auto& comp = components[k];
  return comp.size() == 1 ? comp.front() : comp[rng.uniform_index(comp.size())];
}

std::vector<double> TargetSpec::probabilities(int n_contexts) const {
  std::vector<double> p(static_cast<std::size_t>(n_contexts), 0.0);
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double share = weights[k] / static_cast<double>(components[k].size());
    for (int id : components[k]) p.at(static_cast<std::size_t>(id)) += share;
  }
  return p;
}

std::vector<Context> TargetSpec::modes(const std::vector<Context>& task_space) const {
  std::vector<Context> out;
  out.reserve(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) {
    Context mode;
    mode.id = -1 - static_cast<int>(k);
    mode.features.assign(task_space.at(0).features.size(), 0.0);
    for (int id : components[k]) {
      const auto& f = task_space.at(static_cast<std::size_t>(id)).features;
      for (std::size_t i = 0; i < f.size(); ++i) mode.features[i] += f[i];
    }
    for (double& v : mode.features) v /= static_cast<double>(components[k].size());
    out.push_back(std::move(mode));
  }
  return out;
}

void TaskPools::validate() const {
  if (unif_pool.empty()) throw ConfigError("unif_pool is empty");
  if (targ_pool.empty()) throw ConfigError("targ_pool is empty");
  if (target_weights.size() != targ_pool.size()) throw ConfigError("target_weights size mismatch");
  double total = 0.0;
  for (double w : target_weights) {
    if (!(w >= 0.0)) throw ConfigError("negative target weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("target_weights do not sum to 1");
}

TaskPools build_pools(const std::vector<Context>& task_space, const TargetSpec& target, int n_unif,
                      int n_targ, Rng& rng) {
  validate_task_space(task_space);
  if (n_unif < 1) throw ConfigError("n_unif must be >= 1, got " + std::to_string(n_unif));
  if (n_targ < 1) throw ConfigError("n_targ must be >= 1, got " + std::to_string(n_targ));
  target.validate(static_cast<int>(task_space.size()));

  TaskPools pools;
  pools.unif_pool.reserve(static_cast<std::size_t>(n_unif));
  for (int i = 0; i < n_unif; ++i) pools.unif_pool.push_back(task_space[rng.uniform_index(task_space.size())]);
  pools.targ_pool.reserve(static_cast<std::size_t>(n_targ));
  for (int i = 0; i < n_targ; ++i) {
    pools.targ_pool.push_back(task_space[static_cast<std::size_t>(target.sample(rng))]);
  }
  pools.target_weights.assign(static_cast<std::size_t>(n_targ), 1.0 / n_targ);
  return pools;
}

std::vector<WeightedContext> dedup_by_id(const std::vector<Context>& pool, const std::vector<double>& weights) {
  std::map<int, WeightedContext> by_id;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights.at(i);
    auto [it, inserted] = by_id.try_emplace(pool[i].id, WeightedContext{pool[i], 0.0});
    it->second.weight += w;
  }
  std::vector<WeightedContext> out;
  out.reserve(by_id.size());
  for (auto& [id, wc] : by_id) out.push_back(std::move(wc));
  return out;
}

void write_contexts(std::ostream& out, const std::vector<Context>& contexts) {
  for (const auto& c : contexts) {
    out << c.id;
    for (double f : c.features) out << ',' << std::setprecision(17) << f;
    out << '\n';
  }
}

std::vector<Context> read_contexts(std::istream& in) {
  std::vector<Context> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::stringstream ss(line);
    std::string field;
    Context c;
    bool first = true;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        if (first) {
          c.id = std::stoi(field, &used);
        } else {
          c.features.push_back(std::stod(field, &used));
        }
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError("contexts line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
      }
      first = false;
    }
    if (c.features.empty()) throw ConfigError("contexts line " + std::to_string(line_no) + ": no features");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace procurl
