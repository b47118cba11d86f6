#pragma once

// POMDP abstraction shared by environments, filters, training and probing.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/random.hpp"

namespace rnnbelief {

/// A simulator state: an enumerated/discrete component plus real coordinates.
struct State {
  int discrete = 0;
  std::vector<double> values;

  friend bool operator==(const State&, const State&) = default;
};

/// An observation: optional discrete symbol (-1 when absent), real channels,
/// and the terminal indicator every environment here exposes.
struct Observation {
  int symbol = -1;
  std::vector<double> values;
  bool terminal = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Immutable POMDP with sampling handles. Terminal states self-loop with zero reward.
class Pomdp {
 public:
  virtual ~Pomdp() = default;

  virtual std::string id() const = 0;
  virtual int num_actions() const = 0;
  /// Size of the discrete observation alphabet, 0 if observations carry no symbol.
  virtual int num_observation_symbols() const = 0;
  virtual int num_observation_values() const = 0;
  /// Number of real coordinates in State::values.
  virtual int num_state_values() const = 0;
  virtual double discount() const = 0;

  virtual State sample_initial(Rng& rng) const = 0;
  /// Only called on non-terminal states.
  virtual State sample_transition(const State& s, int action, Rng& rng) const = 0;
  virtual double reward(const State& s, int action, const State& next) const = 0;
  virtual Observation sample_observation(const State& s, Rng& rng) const = 0;
  /// Probability (discrete) or density (continuous) of o given s.
  virtual double observation_likelihood(const Observation& o, const State& s) const = 0;
  virtual bool is_terminal(const State& s) const = 0;

  int input_size() const {
    return num_actions() + num_observation_symbols() + num_observation_values();
  }

  void check_action(int action) const {
    if (action < 0 || action >= num_actions())
      throw InvalidActionError("action " + std::to_string(action) + " outside [0, " +
                               std::to_string(num_actions()) + ")");
  }
};

/// Finite-state POMDP exposing exact distributions for the Bayes filter.
class DiscretePomdp : public Pomdp {
 public:
  virtual int num_states() const = 0;
  virtual State state_at(int index) const = 0;
  virtual int index_of(const State& s) const = 0;
  virtual double initial_probability(int index) const = 0;
  /// Sparse next-state distribution as (index, probability) pairs.
  virtual std::vector<std::pair<int, double>> transition_distribution(int index,
                                                                      int action) const = 0;
};

struct StepResult {
  State next;
  double reward = 0.0;
  Observation observation;
};

/// One environment step. Terminal states self-loop with reward 0.
inline StepResult step(const Pomdp& model, const State& s, int action, Rng& rng) {
  model.check_action(action);
  if (model.is_terminal(s)) {
    return {s, 0.0, model.sample_observation(s, rng)};
  }
  State next = model.sample_transition(s, action, rng);
  double r = model.reward(s, action, next);
  Observation o = model.sample_observation(next, rng);
  return {std::move(next), r, std::move(o)};
}

/// Interleaved history o_0, a_0, o_1, ..., o_t.
class History {
 public:
  History() = default;
  explicit History(Observation o0) { observations_.push_back(std::move(o0)); }

  void append(int action, Observation o) {
    actions_.push_back(action);
    observations_.push_back(std::move(o));
  }

  /// Number of actions t (the history holds t + 1 observations).
  std::size_t length() const { return actions_.size(); }
  bool empty() const { return observations_.empty(); }

  const std::vector<Observation>& observations() const { return observations_; }
  const std::vector<int>& actions() const { return actions_; }
  const Observation& observation(std::size_t k) const { return observations_.at(k); }
  int action(std::size_t k) const { return actions_.at(k); }
  const Observation& last_observation() const { return observations_.back(); }

  /// The prefix eta_{0:t}.
  History prefix(std::size_t t) const {
    if (t > length()) throw Error("history prefix longer than history");
    History h(observations_.at(0));
    for (std::size_t k = 0; k < t; ++k) h.append(actions_[k], observations_[k + 1]);
    return h;
  }

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<Observation> observations_;
  std::vector<int> actions_;
};

struct Episode {
  History history;
  std::vector<double> rewards;
  /// Simulator-side ground truth; not part of what a learner sees.
  std::vector<State> true_states;
  bool terminated = false;

  std::size_t num_actions() const { return history.length(); }
};

/// Behaviour policy over histories. Calls arrive with histories growing by one
/// step at a time within an episode, which stateful policies may exploit.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(const History& history, Rng& rng) = 0;
};

class FunctionPolicy : public Policy {
 public:
  explicit FunctionPolicy(std::function<int(const History&, Rng&)> fn) : fn_(std::move(fn)) {}
  int act(const History& history, Rng& rng) override { return fn_(history, rng); }

 private:
  std::function<int(const History&, Rng&)> fn_;
};

/// Generates one episode of at most `horizon` actions, stopping at the first
/// terminal observation.
inline Episode rollout(const Pomdp& model, Policy& policy, int horizon, Rng& rng) {
  if (horizon < 1) throw Error("rollout horizon must be >= 1");
  Episode ep;
  State s = model.sample_initial(rng);
  Observation o = model.sample_observation(s, rng);
  ep.true_states.push_back(s);
  bool terminal = o.terminal;
  ep.history = History(std::move(o));
  for (int t = 0; t < horizon && !terminal; ++t) {
    int a = policy.act(ep.history, rng);
    model.check_action(a);
    StepResult r = step(model, s, a, rng);
    terminal = r.observation.terminal;
    ep.rewards.push_back(r.reward);
    ep.history.append(a, std::move(r.observation));
    s = std::move(r.next);
    ep.true_states.push_back(s);
  }
  ep.terminated = terminal;
  return ep;
}

inline Episode rollout(const Pomdp& model, const std::function<int(const History&, Rng&)>& fn,
                       int horizon, Rng& rng) {
  FunctionPolicy p(fn);
  return rollout(model, p, horizon, rng);
}

/// Network input x_k = [one-hot(a_{k-1}) | one-hot(symbol) | real channels];
/// a missing previous action gives a zero action block.
inline Eigen::VectorXd encode_input(std::optional<int> prev_action, const Observation& obs,
                                    const Pomdp& model) {
  const int na = model.num_actions();
  const int ns = model.num_observation_symbols();
  const int nv = model.num_observation_values();
  if (static_cast<int>(obs.values.size()) != nv)
    throw ShapeError("observation has " + std::to_string(obs.values.size()) +
                     " real channels, model expects " + std::to_string(nv));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(na + ns + nv);
  if (prev_action) {
    model.check_action(*prev_action);
    x(*prev_action) = 1.0;
  }
  if (ns > 0) {
    if (obs.symbol < 0 || obs.symbol >= ns) throw ShapeError("observation symbol out of range");
    x(na + obs.symbol) = 1.0;
  }
  for (int i = 0; i < nv; ++i) x(na + ns + i) = obs.values[static_cast<std::size_t>(i)];
  return x;
}

/// All inputs x_0..x_t of a history as columns.
inline Eigen::MatrixXd encode_history(const History& h, const Pomdp& model) {
  Eigen::MatrixXd xs(model.input_size(), static_cast<Eigen::Index>(h.length() + 1));
  xs.col(0) = encode_input(std::nullopt, h.observation(0), model);
  for (std::size_t k = 1; k <= h.length(); ++k)
    xs.col(static_cast<Eigen::Index>(k)) = encode_input(h.action(k - 1), h.observation(k), model);
  return xs;
}

inline double discounted_sum(const std::vector<double>& rewards, double discount) {
  double total = 0.0;
  double g = 1.0;
  for (double r : rewards) {
    total += g * r;
    g *= discount;
  }
  return total;
}

/// Mean over episodes of sum_t discount^t r_t.
inline double empirical_return(const std::vector<Episode>& episodes, double discount) {
  if (episodes.empty()) throw Error("empirical_return needs at least one episode");
  double total = 0.0;
  for (const Episode& ep : episodes) total += discounted_sum(ep.rewards, discount);
  return total / static_cast<double>(episodes.size());
}

/// Fixed action distribution used for exploration.
struct ActionDistribution {
  std::vector<double> probs;

  int sample(Rng& rng) const { return sample_categorical(rng, probs); }
  double operator[](int a) const { return probs.at(static_cast<std::size_t>(a)); }

  static ActionDistribution uniform(int n) {
    return {std::vector<double>(static_cast<std::size_t>(n), 1.0 / n)};
  }
};

}  // namespace rnnbelief
