#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "procurl/random.hpp"

namespace procurl {

/// One task of a contextual task space. `id` indexes the task space the
/// context was drawn from; pools hold copies that keep the id.
struct Context {
  int id = 0;
  std::vector<double> features;

  bool operator==(const Context&) const = default;
};

double euclidean_distance(const Context& a, const Context& b);

/// Checks that ids are 0..n-1 in order, dimensions agree and entries are finite.
void validate_task_space(const std::vector<Context>& task_space);

/// Target distribution over a task space, expressed as a finite mixture of
/// uniform distributions over context subsets. A point mass is one singleton
/// component; a uniform-over-subset target is one component.
struct TargetSpec {
  enum class Kind { PointMass, Mixture, UniformSubset };

  Kind kind = Kind::PointMass;
  std::string name;
  std::vector<std::vector<int>> components;
  std::vector<double> weights;

  static TargetSpec point_mass(int id, std::string name = "point-mass");
  static TargetSpec mixture(std::vector<std::vector<int>> components, std::vector<double> weights,
                            std::string name = "mixture");
  static TargetSpec uniform_over(std::vector<int> ids, std::string name = "uniform");

  /// Draws a context id.
  int sample(Rng& rng) const;
  /// Exact probability mass of every context id in [0, n_contexts).
  std::vector<double> probabilities(int n_contexts) const;
  /// Mean feature vector of every component, one per mixture mode.
  std::vector<Context> modes(const std::vector<Context>& task_space) const;
  void validate(int n_contexts) const;
};

/// The discretised task pools. `target_weights` is a probability vector over
/// `targ_pool`.
struct TaskPools {
  std::vector<Context> unif_pool;
  std::vector<Context> targ_pool;
  std::vector<double> target_weights;

  void validate() const;
};

/// Draws `n_unif` contexts uniformly with replacement from the task space and
/// `n_targ` contexts from the target spec.
TaskPools build_pools(const std::vector<Context>& task_space, const TargetSpec& target, int n_unif,
                      int n_targ, Rng& rng);

/// Distinct contexts of a pool with their summed weights, ordered by id.
struct WeightedContext {
  Context context;
  double weight = 1.0;
};
std::vector<WeightedContext> dedup_by_id(const std::vector<Context>& pool,
                                         const std::vector<double>& weights = {});

/// Line format: `id,f1,f2,...,fd`, one context per line.
void write_contexts(std::ostream& out, const std::vector<Context>& contexts);
std::vector<Context> read_contexts(std::istream& in);

}  // namespace procurl
