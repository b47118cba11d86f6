#pragma once

// Sequential importance resampling exactly as the procedure is usually
// written for belief tracking: weight the prior draws by O(o_0|s), then at
// every step resample multinomially, propagate through T with the recorded
// action, and reweight by O(o_t|s).

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::belief {

struct ParticleSet {
  std::vector<State> particles;
  std::vector<double> weights;

  std::size_t size() const { return particles.size(); }
};

namespace detail {
inline void normalize_weights(std::vector<double>& w, std::size_t step) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateParticlesError("all particle weights are zero at step " +
                                   std::to_string(step));
  for (double& v : w) v /= total;
}
}  // namespace detail

inline std::vector<ParticleSet> particle_filter(const Pomdp& model, const History& history,
                                                int num_particles, Rng& rng) {
  if (num_particles < 1) throw Error("particle count must be >= 1");
  const auto m = static_cast<std::size_t>(num_particles);
  std::vector<ParticleSet> sets;
  sets.reserve(history.length() + 1);

  ParticleSet s0;
  s0.particles.reserve(m);
  s0.weights.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    s0.particles.push_back(model.sample_initial(rng));
    s0.weights.push_back(model.observation_likelihood(history.observation(0), s0.particles.back()));
  }
  detail::normalize_weights(s0.weights, 0);
  sets.push_back(std::move(s0));

  for (std::size_t t = 1; t <= history.length(); ++t) {
    const ParticleSet& prev = sets.back();
    const int action = history.action(t - 1);
    const Observation& o = history.observation(t);
    std::discrete_distribution<std::size_t> pick(prev.weights.begin(), prev.weights.end());
    ParticleSet next;
    next.particles.reserve(m);
    next.weights.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      const State& ancestor = prev.particles[pick(rng)];
      State s = model.is_terminal(ancestor) ? ancestor
                                            : model.sample_transition(ancestor, action, rng);
      next.weights.push_back(model.observation_likelihood(o, s));
      next.particles.push_back(std::move(s));
    }
    detail::normalize_weights(next.weights, t);
    sets.push_back(std::move(next));
  }
  return sets;
}

/// Histogram of a particle set over an enumerated state space.
inline std::vector<double> particle_histogram(const ParticleSet& set, const DiscretePomdp& model) {
  std::vector<double> hist(static_cast<std::size_t>(model.num_states()), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i)
    hist[static_cast<std::size_t>(model.index_of(set.particles[i]))] += set.weights[i];
  return hist;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ShapeError("total_variation: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

}  // namespace rnnbelief::belief
