#pragma once

// Environment factory for the experiment protocol: the model the agent acts
// in, the inner model whose belief is "relevant", the exploration policy
// and the truncation horizon.

#include <memory>
#include <string>

#include "rnnbelief/belief/discrete.hpp"
#include "rnnbelief/belief/kalman.hpp"
#include "rnnbelief/belief/particle.hpp"
#include "rnnbelief/envs/irrelevant.hpp"
#include "rnnbelief/envs/mountain_hike.hpp"
#include "rnnbelief/envs/tmaze.hpp"
#include "rnnbelief/nn/params.hpp"

namespace rnnbelief::experiment {

enum class EnvKind { tmaze, mountain_hike };

struct EnvConfig {
  EnvKind kind = EnvKind::tmaze;
  envs::TMazeParams tmaze;
  envs::HikeParams hike;
  int irrelevant_dims = 0;
};

struct Environment {
  std::shared_ptr<const Pomdp> model;  // what the agent interacts with
  std::shared_ptr<const Pomdp> inner;  // model without irrelevant variables
  std::shared_ptr<const DiscretePomdp> discrete;  // inner, when its state space is finite
  std::shared_ptr<const envs::IrrelevantAugmentation> augmentation;
  int horizon = 1;
  ActionDistribution exploration;
  int particle_levels = 0;  // levels of the discrete state part in particle features

  std::string name() const { return model->id(); }
  int irrelevant_dims() const { return augmentation ? augmentation->dims() : 0; }
  bool exact_belief() const { return discrete != nullptr; }

  History inner_history(const History& h) const {
    return augmentation ? augmentation->inner_history(h) : h;
  }
};

inline Environment make_environment(const EnvConfig& cfg) {
  if (cfg.irrelevant_dims < 0) throw ConfigError("environment.irrelevant_dims", "must be >= 0");
  Environment env;
  if (cfg.kind == EnvKind::tmaze) {
    try {
      cfg.tmaze.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("environment." + e.path(), e.what());
    }
    auto maze = std::make_shared<const envs::TMaze>(cfg.tmaze);
    env.inner = maze;
    env.discrete = maze;
    env.horizon = envs::tmaze_horizon(cfg.tmaze.length, cfg.tmaze.stochasticity, 0.5, 1.0 / 6.0);
    env.exploration = envs::tmaze_exploration_policy();
  } else {
    try {
      cfg.hike.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("environment." + e.path(), e.what());
    }
    env.inner = std::make_shared<const envs::MountainHike>(cfg.hike);
    env.horizon = cfg.hike.horizon();
    env.exploration = ActionDistribution::uniform(env.inner->num_actions());
    env.particle_levels = 4;  // orientation
  }
  if (cfg.irrelevant_dims > 0) {
    env.augmentation = envs::augment_irrelevant(env.inner, cfg.irrelevant_dims);
    env.model = env.augmentation;
  } else {
    env.model = env.inner;
  }
  return env;
}

/// Particle features: state values, one-hot of the discrete state part
/// (e.g. orientation) when the model has one, and M times the weight.
inline nn::Matrix particle_features(const belief::ParticleSet& set, int discrete_levels) {
  const auto m = static_cast<Eigen::Index>(set.size());
  const auto nv = static_cast<Eigen::Index>(set.particles.front().values.size());
  nn::Matrix f = nn::Matrix::Zero(nv + discrete_levels + 1, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const State& s = set.particles[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < nv; ++k) f(k, i) = s.values[static_cast<std::size_t>(k)];
    if (discrete_levels > 0) f(nv + s.discrete, i) = 1.0;
    f(nv + discrete_levels, i) = static_cast<double>(m) * set.weights[static_cast<std::size_t>(i)];
  }
  return f;
}

}  // namespace rnnbelief::experiment
