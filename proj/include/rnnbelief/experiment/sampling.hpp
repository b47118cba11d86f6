#pragma once

// Joint samples (h_t, b_t) under a behavior policy: roll out an episode,
// draw t uniformly over its non-terminal steps, and record the network's
// recurrent state and the belief for the same history prefix.

#include <vector>

#include "rnnbelief/drqn/drqn.hpp"
#include "rnnbelief/experiment/environment.hpp"
#include "rnnbelief/mine/mine.hpp"

namespace rnnbelief::experiment {

using nn::Matrix;

struct SampleSet {
  int episode = 0;                 // checkpoint episode index e
  std::vector<int> steps;          // t per record
  Matrix hidden;                   // state_size x N
  Matrix relevant;                 // belief vector per column, or set_size columns per record
  Eigen::Index set_size = 0;       // 0 when relevant beliefs are vectors
  Matrix irrelevant;               // 2d x N Gaussian posterior (mean; variance), 0 rows if d = 0

  Eigen::Index size() const { return hidden.cols(); }

  mine::Dataset relevant_dataset() const { return {hidden, relevant, set_size}; }
  mine::Dataset irrelevant_dataset() const { return {hidden, irrelevant, 0}; }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// Exact belief vector, or particle features of the relevant variables.
inline Matrix relevant_belief(const Environment& env, const History& inner, int particles, Rng& rng) {
  if (env.exact_belief()) {
    const auto b = belief::filter_history(*env.discrete, inner).back();
    return Eigen::Map<const nn::Vector>(b.probs.data(), static_cast<Eigen::Index>(b.size()));
  }
  const auto sets = belief::particle_filter(*env.inner, inner, particles, rng);
  return particle_features(sets.back(), env.particle_levels);
}

/// Posterior mean and variance of the irrelevant random walk.
inline nn::Vector irrelevant_belief(const Environment& env, const History& h) {
  std::vector<Eigen::VectorXd> obs;
  for (const Observation& o : h.observations()) {
    const auto v = env.augmentation->irrelevant_observation(o);
    obs.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  const belief::GaussianBelief g = belief::kalman_irrelevant(obs).back();
  nn::Vector out(2 * g.mean.size());
  out << g.mean, g.variance;
  return out;
}

/// N joint samples from the epsilon-greedy behavior policy of `net`.
inline SampleSet sample_joint(const Environment& env, const drqn::Checkpoint& cp, double epsilon, int n,
                              int particles, Rng& rng, std::vector<History>* histories = nullptr) {
  if (n < 1) throw ConfigError("samples", "must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in [0, 1]");
  const Pomdp& model = *env.model;
  SampleSet out;
  out.episode = cp.episode;
  out.hidden.resize(cp.net.state_size(), n);
  if (env.irrelevant_dims() > 0) out.irrelevant.resize(2 * env.irrelevant_dims(), n);
  if (histories) histories->clear();

  for (int i = 0; i < n; ++i) {
    drqn::NetworkPolicy policy(model, cp.net, epsilon, env.exploration);
    const Episode ep = rollout(model, policy, env.horizon, rng);
    const int steps = static_cast<int>(ep.history.length());
    const int t = steps > 0 ? uniform_index(rng, steps) : 0;
    const History prefix = ep.history.prefix(static_cast<std::size_t>(t));

    drqn::RecurrentActor actor(model, cp.net);
    actor.reset(prefix.observation(0));
    for (std::size_t k = 0; k < prefix.length(); ++k) actor.observe(prefix.action(k), prefix.observation(k + 1));
    out.hidden.col(i) = actor.hidden();

    const Matrix b = relevant_belief(env, env.inner_history(prefix), particles, rng);
    if (i == 0) {
      out.set_size = env.exact_belief() ? 0 : b.cols();
      out.relevant.resize(b.rows(), static_cast<Eigen::Index>(n) * b.cols());
    }
    out.relevant.middleCols(static_cast<Eigen::Index>(i) * b.cols(), b.cols()) = b;
    if (env.irrelevant_dims() > 0) out.irrelevant.col(i) = irrelevant_belief(env, prefix);
    out.steps.push_back(t);
    if (histories) histories->push_back(prefix);
  }
  return out;
}

}  // namespace rnnbelief::experiment
