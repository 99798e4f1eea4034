#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "procurl/charts.hpp"
#include "procurl/config.hpp"
#include "procurl/envs.hpp"
#include "procurl/errors.hpp"
#include "procurl/experiment.hpp"
#include "procurl/learner.hpp"
#include "procurl/teacher.hpp"
#include "procurl/value.hpp"
#include "procurl/verify.hpp"

namespace py = pybind11;
using namespace procurl;

namespace {

// Keeps the grid alive for as long as Python holds the feature map.
struct GateFeatures {
  std::shared_ptr<const GateGrid> grid;
  std::shared_ptr<const FeatureMap> phi;
};

PolicyParams to_params(const Eigen::VectorXd& theta) { return PolicyParams{theta}; }

}  // namespace

PYBIND11_MODULE(_procurl, m) {
  m.doc() = "Curriculum task selection for contextual RL: environments, exact gradients, teachers, probes.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_RuntimeError);

  m.def("split_seed", &split_seed, py::arg("master"), py::arg("stream"));

  py::class_<Context>(m, "Context")
      .def(py::init([](int id, std::vector<double> f) { return Context{id, std::move(f)}; }), py::arg("id"),
           py::arg("features"))
      .def_readwrite("id", &Context::id)
      .def_readwrite("features", &Context::features)
      .def("__repr__", [](const Context& c) {
        std::ostringstream os;
        os << "Context(id=" << c.id << ", features=[";
        for (std::size_t i = 0; i < c.features.size(); ++i) os << (i ? ", " : "") << c.features[i];
        os << "])";
        return os.str();
      });

  py::class_<ContextualMdp, std::shared_ptr<ContextualMdp>>(m, "ContextualMdp")
      .def_property_readonly("num_states", &ContextualMdp::num_states)
      .def_property_readonly("num_actions", &ContextualMdp::num_actions)
      .def_property_readonly("discount", &ContextualMdp::discount)
      .def_property_readonly("horizon_cap", &ContextualMdp::horizon_cap);
  py::class_<FeatureMap, std::shared_ptr<FeatureMap>>(m, "FeatureMap")
      .def_property_readonly("dimension", &FeatureMap::dimension);

  py::class_<Bandit>(m, "Bandit")
      .def_property_readonly("contexts", [](const Bandit& b) { return b.spec.contexts; })
      .def_property_readonly("optimal_action", [](const Bandit& b) { return b.spec.optimal_action; })
      .def("psi", [](const Bandit& b, int id) { return b.spec.psi(id); })
      .def_property_readonly("mdp", [](const Bandit& b) { return std::const_pointer_cast<ContextualBandit>(b.mdp); })
      .def_property_readonly("features",
                             [](const Bandit& b) { return std::const_pointer_cast<BanditFeatureMap>(b.features); });
  py::class_<ContextualBandit, ContextualMdp, std::shared_ptr<ContextualBandit>>(m, "ContextualBandit");
  py::class_<BanditFeatureMap, FeatureMap, std::shared_ptr<BanditFeatureMap>>(m, "BanditFeatureMap");

  m.def(
      "make_bandit",
      [](int dimension, int n_contexts, const std::string& scheme, std::uint64_t seed, int clusters, double spread) {
        Rng rng(seed);
        PsiScheme s;
        if (scheme == "orthogonal") {
          s = PsiScheme::orthogonal();
        } else if (scheme == "random_unit") {
          s = PsiScheme::random_unit();
        } else if (scheme == "clustered") {
          s = PsiScheme::clustered(clusters, spread);
        } else {
          throw ConfigError("unknown psi scheme '" + scheme + "'");
        }
        return make_bandit(dimension, n_contexts, s, rng);
      },
      py::arg("dimension"), py::arg("n_contexts"), py::arg("scheme") = "random_unit", py::arg("seed") = 0,
      py::arg("clusters") = 2, py::arg("spread") = 0.1);

  py::class_<GateGrid, ContextualMdp, std::shared_ptr<GateGrid>>(m, "GateGrid")
      .def(py::init([](int grid_size, int wall_row, double slip, double discount, int horizon_cap) {
             GateGridSpec spec;
             spec.grid_size = grid_size;
             spec.wall_row = wall_row;
             spec.slip = slip;
             spec.discount = discount;
             spec.horizon_cap = horizon_cap;
             return std::make_shared<GateGrid>(spec);
           }),
           py::arg("grid_size") = 11, py::arg("wall_row") = 5, py::arg("slip") = 0.0, py::arg("discount") = 0.99,
           py::arg("horizon_cap") = 100)
      .def("task_space", &GateGrid::task_space)
      .def("gate_relative_features",
           [](const std::shared_ptr<GateGrid>& grid) {
             auto* map = new GateRelativeFeatureMap(*grid);
             return std::shared_ptr<FeatureMap>(map, [grid](FeatureMap* p) { delete p; });
           })
      .def("tabular_features", [](const GateGrid& grid) {
        return std::shared_ptr<FeatureMap>(std::make_shared<TabularFeatureMap>(
            grid.num_states(), static_cast<int>(grid.spec().contexts.size()), grid.num_actions()));
      });

  m.def(
      "policy_probs",
      [](const Eigen::VectorXd& theta, const FeatureMap& phi, int s, const Context& c) {
        return policy_probs(to_params(theta), phi, s, c);
      },
      py::arg("theta"), py::arg("phi"), py::arg("state"), py::arg("context"));
  m.def(
      "value_exact",
      [](const ContextualMdp& mdp, const FeatureMap& phi, const Eigen::VectorXd& theta, const Context& c) {
        const PolicyParams p = to_params(theta);
        return value_exact(mdp, SoftmaxPolicy(p, phi), c);
      },
      py::arg("mdp"), py::arg("phi"), py::arg("theta"), py::arg("context"));
  m.def("optimal_value", &optimal_value, py::arg("mdp"), py::arg("context"));
  m.def(
      "expected_policy_gradient",
      [](const ContextualMdp& mdp, const FeatureMap& phi, const Eigen::VectorXd& theta, const Context& c) {
        return expected_policy_gradient(to_params(theta), mdp, phi, c);
      },
      py::arg("mdp"), py::arg("phi"), py::arg("theta"), py::arg("context"));
  m.def(
      "reinforce_step",
      [](const ContextualMdp& mdp, const FeatureMap& phi, const Eigen::VectorXd& theta, const Context& c,
         double learning_rate, std::uint64_t seed) {
        const PolicyParams p = to_params(theta);
        Rng rng(seed);
        const Trajectory traj = rollout(mdp, SoftmaxPolicy(p, phi), c, rng);
        return py::make_tuple(reinforce_update(p, traj, c, phi, learning_rate).theta, traj.length(),
                              traj.discounted_return());
      },
      py::arg("mdp"), py::arg("phi"), py::arg("theta"), py::arg("context"), py::arg("learning_rate"),
      py::arg("seed") = 0);

  m.def("learning_potential", &learning_potential, py::arg("v"), py::arg("v_max") = 1.0);
  m.def("procurl_score", &procurl_score, py::arg("z_c"), py::arg("z_targ"), py::arg("sim"));
  m.def(
      "softmax_probabilities",
      [](const std::vector<double>& scores, double beta) { return softmax_probabilities(scores, {}, beta); },
      py::arg("scores"), py::arg("beta"));

  py::class_<Prop1Result>(m, "Prop1Result")
      .def_readonly("lhs", &Prop1Result::lhs)
      .def_readonly("rhs", &Prop1Result::rhs)
      .def_readonly("rel_err", &Prop1Result::rel_err);
  m.def(
      "prop1_check",
      [](const Eigen::VectorXd& theta, const Bandit& b, const Context& c, const Context& t) {
        return prop1_check(to_params(theta), b, c, t);
      },
      py::arg("theta"), py::arg("bandit"), py::arg("context"), py::arg("target"));
  m.def(
      "prop1_sweep",
      [](int trials, std::uint64_t seed) { return prop1_sweep(trials, seed).max_rel_err; }, py::arg("trials") = 100,
      py::arg("seed") = 0, "Largest relative error over random instances.");
  m.def(
      "taylor_gap",
      [](const ContextualMdp& mdp, const FeatureMap& phi, const Eigen::VectorXd& theta, double eta, const Context& c,
         const Context& t) {
        const TaylorResult r = taylor_gap(to_params(theta), mdp, phi, eta, c, t);
        return py::make_tuple(r.exact_improvement, r.linear_prediction);
      },
      py::arg("mdp"), py::arg("phi"), py::arg("theta"), py::arg("eta"), py::arg("context"), py::arg("target"));

  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("mean", &ConvergenceReport::mean)
      .def_readonly("std_error", &ConvergenceReport::std_error)
      .def_readonly("slope", &ConvergenceReport::slope)
      .def_readonly("r_squared", &ConvergenceReport::r_squared)
      .def_readonly("steps_to_epsilon", &ConvergenceReport::steps_to_epsilon)
      .def("summary", [](const ConvergenceReport& r) {
        std::ostringstream os;
        r.write_summary(os);
        return os.str();
      });
  m.def(
      "convergence_probe",
      [](const std::string& strategy, int trials, double eta, std::uint64_t seed) {
        Rng rng(seed);
        const Bandit b = probe_bandit(rng);
        ProbeConfig probe = default_probe_config();
        probe.n_trials = trials;
        LearnerConfig cfg;
        cfg.learning_rate = eta;
        return run_convergence_probe(b, b.spec.contexts.front(), parse_strategy(strategy), cfg, probe, rng);
      },
      py::arg("strategy") = "gradient-align", py::arg("trials") = 100, py::arg("eta") = 0.5, py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_path, const std::vector<std::string>& overrides) {
        const ExperimentConfig cfg = load_config(config_path, overrides);
        const RunSummary s = run_experiment(cfg);
        if (s.numerical_error) throw NumericalError(s.message);
        return s.files;
      },
      py::arg("config_path"), py::arg("overrides") = std::vector<std::string>{},
      "Runs a config file and returns the written paths.");
  m.def(
      "emit_charts",
      [](const std::vector<std::filesystem::path>& files, const std::filesystem::path& out) {
        return emit_charts(files, out);
      },
      py::arg("metrics_files"), py::arg("out_dir"));
}
