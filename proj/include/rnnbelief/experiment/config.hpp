#pragma once

// Run configuration as JSON. Every section is optional and falls back to
// the defaults below; unknown keys and wrongly typed values are rejected
// with the dotted path of the offending field.
//
// {
//   "environment": {"kind": "tmaze", "length": 10, "stochasticity": 0.0,
//                   "discount": 0.98, "irrelevant_dims": 0},
//   "cell": "gru",
//   "seeds": [0, 1, 2, 3],
//   "drqn": {"episodes": 2000, "buffer_capacity": 8192, "target_period": 10,
//            "gradient_steps": 10, "epsilon": 0.2, "batch_size": 32,
//            "learning_rate": 0.001, "hidden_size": 32, "num_layers": 2},
//   "mine": {"samples": 10000, "hidden_layers": 2, "width": 256, "epochs": 200,
//            "batch_size": 1024, "learning_rate": 0.001, "representation": 16,
//            "ema_rate": 0.01},
//   "evaluation": {"cadence": 50, "return_rollouts": 100, "particles": 256,
//                  "epsilons": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], "save_samples": false},
//   "output_dir": "runs/default"
// }
//
// Mountain Hike environments use {"kind": "mountain_hike", "sigma_obs",
// "sigma_trans", "discount", "varying_orientation", "irrelevant_dims"}.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rnnbelief/drqn/drqn.hpp"
#include "rnnbelief/experiment/environment.hpp"
#include "rnnbelief/mine/mine.hpp"
#include "rnnbelief/nn/cells.hpp"

namespace rnnbelief::experiment {

using Json = nlohmann::json;

struct EvalConfig {
  int cadence = 50;
  int return_rollouts = 100;
  int particles = 256;
  std::vector<double> epsilons{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  bool save_samples = false;  // write each main-protocol SampleSet next to its checkpoint
};

struct RunConfig {
  EnvConfig environment;
  nn::CellKind cell = nn::CellKind::gru;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  drqn::DrqnConfig drqn{.episodes = 2000};
  mine::MineConfig mine;
  EvalConfig evaluation;
  std::string output_dir = "runs/default";

  /// DRQN settings with the environment's horizon and the evaluation cadence filled in.
  drqn::DrqnConfig resolved_drqn() const {
    drqn::DrqnConfig c = drqn;
    c.horizon = make_environment(environment).horizon;
    c.checkpoint_every = evaluation.cadence;
    return c;
  }

  void validate() const {
    make_environment(environment);
    if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
      throw ConfigError("seeds", "must be distinct");
    resolved_drqn().validate();
    mine.validate();
    if (evaluation.cadence < 1) throw ConfigError("evaluation.cadence", "must be positive");
    if (evaluation.return_rollouts < 1) throw ConfigError("evaluation.return_rollouts", "must be positive");
    if (evaluation.particles < 1) throw ConfigError("evaluation.particles", "must be positive");
    if (evaluation.epsilons.empty()) throw ConfigError("evaluation.epsilons", "must not be empty");
    for (std::size_t i = 0; i < evaluation.epsilons.size(); ++i) {
      const double e = evaluation.epsilons[i];
      if (!(e >= 0.0 && e <= 1.0))
        throw ConfigError("evaluation.epsilons[" + std::to_string(i) + "]", "must lie in [0, 1]");
    }
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  }
};

namespace detail {

/// Walks one JSON object, remembering which keys were read.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where(), "must be an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(child(key), "must be an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(child(key), "out of range");
      out = static_cast<int>(x);
    }
  }

  void read(const std::string& key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(child(key), "must be a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(child(key), "must be true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(child(key), "must be a string");
      out = v->get<std::string>();
    }
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

  std::string where() const { return path_.empty() ? "<root>" : path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  detail::Section root(j, "");

  if (const Json* env = root.find("environment")) {
    detail::Section s(*env, "environment");
    std::string kind = "tmaze";
    s.read("kind", kind);
    if (kind == "tmaze") {
      c.environment.kind = EnvKind::tmaze;
      s.read("length", c.environment.tmaze.length);
      s.read("stochasticity", c.environment.tmaze.stochasticity);
      s.read("discount", c.environment.tmaze.discount);
    } else if (kind == "mountain_hike") {
      c.environment.kind = EnvKind::mountain_hike;
      s.read("sigma_obs", c.environment.hike.sigma_obs);
      s.read("sigma_trans", c.environment.hike.sigma_trans);
      s.read("discount", c.environment.hike.discount);
      s.read("varying_orientation", c.environment.hike.varying_orientation);
    } else {
      throw ConfigError("environment.kind", "must be \"tmaze\" or \"mountain_hike\"");
    }
    s.read("irrelevant_dims", c.environment.irrelevant_dims);
    s.finish();
  }

  if (const Json* cell = root.find("cell")) {
    if (!cell->is_string()) throw ConfigError("cell", "must be a string");
    c.cell = nn::parse_cell(cell->get<std::string>());
  }

  if (const Json* seeds = root.find("seeds")) {
    if (!seeds->is_array()) throw ConfigError("seeds", "must be an array of nonnegative integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < seeds->size(); ++i) {
      const Json& v = (*seeds)[i];
      if (!v.is_number_unsigned()) throw ConfigError("seeds[" + std::to_string(i) + "]", "must be a nonnegative integer");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }

  if (const Json* d = root.find("drqn")) {
    detail::Section s(*d, "drqn");
    s.read("episodes", c.drqn.episodes);
    s.read("buffer_capacity", c.drqn.buffer_capacity);
    s.read("target_period", c.drqn.target_period);
    s.read("gradient_steps", c.drqn.gradient_steps);
    s.read("epsilon", c.drqn.epsilon);
    s.read("batch_size", c.drqn.batch_size);
    s.read("learning_rate", c.drqn.learning_rate);
    s.read("hidden_size", c.drqn.hidden_size);
    s.read("num_layers", c.drqn.num_layers);
    s.finish();
  }

  if (const Json* m = root.find("mine")) {
    detail::Section s(*m, "mine");
    s.read("samples", c.mine.samples);
    s.read("hidden_layers", c.mine.hidden_layers);
    s.read("width", c.mine.width);
    s.read("epochs", c.mine.epochs);
    s.read("batch_size", c.mine.batch_size);
    s.read("learning_rate", c.mine.learning_rate);
    s.read("representation", c.mine.representation);
    s.read("ema_rate", c.mine.ema_rate);
    s.finish();
  }

  if (const Json* e = root.find("evaluation")) {
    detail::Section s(*e, "evaluation");
    s.read("cadence", c.evaluation.cadence);
    s.read("return_rollouts", c.evaluation.return_rollouts);
    s.read("particles", c.evaluation.particles);
    s.read("save_samples", c.evaluation.save_samples);
    if (const Json* eps = s.find("epsilons")) {
      if (!eps->is_array()) throw ConfigError("evaluation.epsilons", "must be an array of numbers");
      c.evaluation.epsilons.clear();
      for (std::size_t i = 0; i < eps->size(); ++i) {
        if (!(*eps)[i].is_number())
          throw ConfigError("evaluation.epsilons[" + std::to_string(i) + "]", "must be a number");
        c.evaluation.epsilons.push_back((*eps)[i].get<double>());
      }
    }
    s.finish();
  }

  root.read("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

inline Json config_to_json(const RunConfig& c) {
  Json env;
  if (c.environment.kind == EnvKind::tmaze) {
    env = {{"kind", "tmaze"},
           {"length", c.environment.tmaze.length},
           {"stochasticity", c.environment.tmaze.stochasticity},
           {"discount", c.environment.tmaze.discount}};
  } else {
    env = {{"kind", "mountain_hike"},
           {"sigma_obs", c.environment.hike.sigma_obs},
           {"sigma_trans", c.environment.hike.sigma_trans},
           {"discount", c.environment.hike.discount},
           {"varying_orientation", c.environment.hike.varying_orientation}};
  }
  env["irrelevant_dims"] = c.environment.irrelevant_dims;
  return Json{{"environment", env},
              {"cell", nn::to_string(c.cell)},
              {"seeds", c.seeds},
              {"drqn",
               {{"episodes", c.drqn.episodes},
                {"buffer_capacity", c.drqn.buffer_capacity},
                {"target_period", c.drqn.target_period},
                {"gradient_steps", c.drqn.gradient_steps},
                {"epsilon", c.drqn.epsilon},
                {"batch_size", c.drqn.batch_size},
                {"learning_rate", c.drqn.learning_rate},
                {"hidden_size", c.drqn.hidden_size},
                {"num_layers", c.drqn.num_layers}}},
              {"mine",
               {{"samples", c.mine.samples},
                {"hidden_layers", c.mine.hidden_layers},
                {"width", c.mine.width},
                {"epochs", c.mine.epochs},
                {"batch_size", c.mine.batch_size},
                {"learning_rate", c.mine.learning_rate},
                {"representation", c.mine.representation},
                {"ema_rate", c.mine.ema_rate}}},
              {"evaluation",
               {{"cadence", c.evaluation.cadence},
                {"return_rollouts", c.evaluation.return_rollouts},
                {"particles", c.evaluation.particles},
                {"epsilons", c.evaluation.epsilons},
                {"save_samples", c.evaluation.save_samples}}},
              {"output_dir", c.output_dir}};
}

/// Resolved form with derived values (horizon) for the metadata sidecar.
inline Json resolved_config_json(const RunConfig& c) {
  Json j = config_to_json(c);
  j["derived"] = {{"horizon", c.resolved_drqn().horizon},
                  {"environment_id", make_environment(c.environment).name()}};
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace rnnbelief::experiment
