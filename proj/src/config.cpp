#include "procurl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "procurl/errors.hpp"

namespace procurl {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& value, const std::string& why) {
  throw ConfigError(field + " = '" + value + "': " + why);
}

long parse_long(const std::string& field, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) bad_field(field, v, "expected an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& field, const std::string& v) {
  if (v.empty() || v[0] == '-') bad_field(field, v, "expected a non-negative integer");
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) bad_field(field, v, "expected a non-negative integer");
  return out;
}

int parse_int(const std::string& field, const std::string& v) {
  const long x = parse_long(field, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad_field(field, v, "out of range");
  return static_cast<int>(x);
}

double parse_double(const std::string& field, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) bad_field(field, v, "expected a number");
  return out;
}

bool parse_bool(const std::string& field, const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_field(field, v, "expected true or false");
}

ValueMode parse_value_mode(const std::string& field, const std::string& v) {
  const std::string s = lower(v);
  if (s == "exact") return ValueMode::Exact;
  if (s == "mc" || s == "monte_carlo" || s == "monte-carlo") return ValueMode::MonteCarlo;
  bad_field(field, v, "expected exact or mc");
}

std::vector<std::uint64_t> parse_seeds(const std::string& field, const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dash = item.find("..");
    if (dash != std::string::npos) {
      const std::uint64_t lo = parse_u64(field, trim(item.substr(0, dash)));
      const std::uint64_t hi = parse_u64(field, trim(item.substr(dash + 2)));
      if (hi < lo) bad_field(field, v, "empty seed range");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_u64(field, item));
    }
  }
  return out;
}

using Setter = void (*)(ExperimentConfig&, const std::string& field, const std::string& value);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"environment.kind",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         const std::string s = lower(v);
         if (s == "gate_grid" || s == "gate-grid") {
           c.environment.kind = EnvironmentConfig::Kind::GateGrid;
         } else if (s == "bandit") {
           c.environment.kind = EnvironmentConfig::Kind::Bandit;
         } else {
           bad_field(f, v, "expected gate_grid or bandit");
         }
       }},
      {"environment.grid_size",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.grid.grid_size = parse_int(f, v); }},
      {"environment.wall_row",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.grid.wall_row = parse_int(f, v); }},
      {"environment.slip",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.grid.slip = parse_double(f, v); }},
      {"environment.discount",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.grid.discount = parse_double(f, v); }},
      {"environment.horizon_cap",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.grid.horizon_cap = parse_int(f, v); }},
      {"environment.target",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         std::string s = lower(v);
         std::replace(s.begin(), s.end(), '-', '_');
         if (s != "point_mass" && s != "two_mode" && s != "uniform") {
           bad_field(f, v, "expected point_mass, two_mode or uniform");
         }
         c.environment.target = s;
       }},
      {"environment.features",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         const std::string s = lower(v);
         if (s == "gate_relative") {
           c.environment.features = EnvironmentConfig::Features::GateRelative;
         } else if (s == "tabular") {
           c.environment.features = EnvironmentConfig::Features::Tabular;
         } else {
           bad_field(f, v, "expected gate_relative or tabular");
         }
       }},
      {"environment.bandit_dimension",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_dimension = parse_int(f, v); }},
      {"environment.bandit_contexts",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_contexts = parse_int(f, v); }},
      {"environment.bandit_psi",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         const std::string s = lower(v);
         auto& psi = c.environment.bandit_psi;
         if (s == "orthogonal") {
           psi.kind = PsiScheme::Kind::Orthogonal;
         } else if (s == "random_unit") {
           psi.kind = PsiScheme::Kind::RandomUnit;
         } else if (s == "clustered") {
           psi.kind = PsiScheme::Kind::Clustered;
         } else {
           bad_field(f, v, "expected orthogonal, random_unit or clustered");
         }
       }},
      {"environment.bandit_clusters",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_psi.clusters = parse_int(f, v); }},
      {"environment.bandit_spread",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_psi.spread = parse_double(f, v); }},
      {"environment.bandit_seed",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_seed = parse_u64(f, v); }},
      {"environment.bandit_target",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.environment.bandit_target = parse_int(f, v); }},

      {"teacher.strategy",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         try {
           c.teacher.strategy = parse_strategy(v);
         } catch (const std::exception& e) {
           bad_field(f, v, e.what());
         }
       }},
      {"teacher.beta", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.teacher.beta = parse_double(f, v); }},
      {"teacher.v_max", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.v_max = parse_double(f, v); }},
      {"teacher.kernel",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         const std::string s = lower(v);
         if (s == "neg_exp_distance" || s == "exp") {
           c.teacher.kernel.kind = SimilarityKernel::Kind::NegExpDistance;
         } else if (s == "inner_product") {
           c.teacher.kernel.kind = SimilarityKernel::Kind::InnerProduct;
         } else {
           bad_field(f, v, "expected neg_exp_distance or inner_product");
         }
       }},

      {"learner.learning_rate",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.learner.learning_rate = parse_double(f, v); }},
      {"learner.batch_size",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.learner.batch_size = parse_int(f, v); }},

      {"pools.n_unif", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.n_unif = parse_int(f, v); }},
      {"pools.n_targ", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.n_targ = parse_int(f, v); }},
      {"pools.refresh_every",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) {
         c.pool_refresh_every = static_cast<long>(parse_u64(f, v));
       }},

      {"run.seeds", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.seeds = parse_seeds(f, v); }},
      {"run.total_env_steps",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.total_env_steps = parse_long(f, v); }},
      {"run.eval_every", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.eval_every = parse_long(f, v); }},
      {"run.eval_mode",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.eval_mode = parse_value_mode(f, v); }},
      {"run.eval_episodes",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.eval_episodes = parse_int(f, v); }},
      {"run.held_out_size",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.held_out_size = parse_int(f, v); }},
      {"run.held_out_seed",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.held_out_seed = parse_u64(f, v); }},
      {"run.n_pos", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.n_pos = parse_long(f, v); }},
      {"run.value_mode",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.value_mode = parse_value_mode(f, v); }},
      {"run.mc_episodes", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.mc_episodes = parse_int(f, v); }},
      {"run.threads", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.threads = parse_int(f, v); }},
      {"run.output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"run.wall_time", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.wall_time = parse_bool(f, v); }},
      {"run.dump_values",
       [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.dump_values = parse_bool(f, v); }},
      {"run.charts", [](ExperimentConfig& c, const std::string& f, const std::string& v) { c.charts = parse_bool(f, v); }},
  };
  return table;
}

void apply(ExperimentConfig& cfg, const std::string& field, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(field);
  if (it == table.end()) throw ConfigError("unknown config field '" + field + "'");
  it->second(cfg, field, trim(value));
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto positive = [](const char* field, long v) {
    if (v < 1) throw ConfigError(std::string(field) + " must be >= 1, got " + std::to_string(v));
  };
  positive("run.total_env_steps", total_env_steps);
  positive("run.eval_every", eval_every);
  positive("run.n_pos", n_pos);
  positive("run.held_out_size", held_out_size);
  positive("run.eval_episodes", eval_episodes);
  positive("run.mc_episodes", mc_episodes);
  positive("run.threads", threads);
  positive("pools.n_unif", n_unif);
  positive("pools.n_targ", n_targ);
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("run.seeds must be distinct");
  }
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("teacher.v_max must be positive and finite");
  try {
    teacher.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("teacher: ") + e.what());
  }
  try {
    learner.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("learner: ") + e.what());
  }
  if (environment.kind == EnvironmentConfig::Kind::GateGrid) {
    GateGridSpec spec = environment.grid;
    if (spec.contexts.empty()) spec.contexts = GateGridSpec::all_gates(spec.grid_size < 3 ? 3 : spec.grid_size);
    try {
      spec.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment: ") + e.what());
    }
  } else {
    if (environment.bandit_dimension < 1) throw ConfigError("environment.bandit_dimension must be >= 1");
    if (environment.bandit_contexts < 1) throw ConfigError("environment.bandit_contexts must be >= 1");
    if (environment.bandit_target < 0 || environment.bandit_target >= environment.bandit_contexts) {
      throw ConfigError("environment.bandit_target must index a bandit context");
    }
  }
}

ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(source + ": key '" + section + "' appears outside a section");
    }
    for (const auto& [key, node] : body) {
      try {
        apply(cfg, section + "." + key, node.data());
      } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "' is not of the form section.key=value");
    try {
      apply(cfg, trim(ov.substr(0, eq)), ov.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--override: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, overrides, path.string());
}

}  // namespace procurl
