#pragma once

// Fully observable chain MDP written as a degenerate POMDP (observation =
// state). Actions: 0 = Left, 1 = Right (only action 0 when actions == 1).
// Reward 1 whenever the next state is the rightmost one. Uniform start.

#include <algorithm>
#include <string>

#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::envs {

class ChainMdp final : public DiscretePomdp {
 public:
  ChainMdp(int states, int actions, double discount, double goal_reward = 1.0)
      : n_(states), a_(actions), gamma_(discount), goal_reward_(goal_reward) {
    if (n_ < 1) throw ConfigError("states", "must be >= 1");
    if (a_ < 1 || a_ > 2) throw ConfigError("actions", "must be 1 or 2");
  }

  std::string id() const override { return "chain-" + std::to_string(n_); }
  int num_actions() const override { return a_; }
  int num_observation_symbols() const override { return n_; }
  int num_observation_values() const override { return 0; }
  int num_state_values() const override { return 0; }
  double discount() const override { return gamma_; }
  int num_states() const override { return n_; }
  State state_at(int index) const override { return State{index, {}}; }
  int index_of(const State& s) const override { return s.discrete; }
  bool is_terminal(const State&) const override { return false; }

  int next_index(int s, int action) const {
    if (a_ == 1) return std::min(s + 1, n_ - 1);
    return action == 1 ? std::min(s + 1, n_ - 1) : std::max(s - 1, 0);
  }

  double initial_probability(int) const override { return 1.0 / n_; }
  std::vector<std::pair<int, double>> transition_distribution(int index,
                                                              int action) const override {
    return {{next_index(index, action), 1.0}};
  }
  State sample_initial(Rng& rng) const override { return State{uniform_index(rng, n_), {}}; }
  State sample_transition(const State& s, int action, Rng&) const override {
    return State{next_index(s.discrete, action), {}};
  }
  double reward(const State&, int, const State& next) const override {
    return next.discrete == n_ - 1 ? goal_reward_ : 0.0;
  }
  Observation sample_observation(const State& s, Rng&) const override {
    return Observation{s.discrete, {}, false};
  }
  double observation_likelihood(const Observation& o, const State& s) const override {
    return o.symbol == s.discrete && !o.terminal ? 1.0 : 0.0;
  }

 private:
  int n_;
  int a_;
  double gamma_;
  double goal_reward_;
};

}  // namespace rnnbelief::envs
