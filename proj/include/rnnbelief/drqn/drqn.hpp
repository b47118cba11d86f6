#pragma once

// Deep recurrent Q-learning: epsilon-greedy episodes stored as history
// transitions, a periodically frozen target network, and Adam steps on the
// summed squared TD error.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "rnnbelief/drqn/replay_buffer.hpp"
#include "rnnbelief/nn/adam.hpp"
#include "rnnbelief/nn/rnn.hpp"
#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::drqn {

using nn::Matrix;
using nn::RnnStack;

struct DrqnConfig {
  int buffer_capacity = 8192;
  int target_period = 10;
  int gradient_steps = 10;
  double epsilon = 0.2;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int horizon = 1;
  int episodes = 0;
  int checkpoint_every = 50;
  int hidden_size = 32;
  int num_layers = 2;

  void validate() const {
    auto positive = [](int v, const char* path) {
      if (v < 1) throw ConfigError(path, "must be positive");
    };
    positive(buffer_capacity, "drqn.buffer_capacity");
    positive(target_period, "drqn.target_period");
    positive(gradient_steps, "drqn.gradient_steps");
    positive(batch_size, "drqn.batch_size");
    positive(horizon, "drqn.horizon");
    positive(checkpoint_every, "drqn.checkpoint_every");
    positive(hidden_size, "drqn.hidden_size");
    positive(num_layers, "drqn.num_layers");
    if (episodes < 0) throw ConfigError("drqn.episodes", "must be nonnegative");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("drqn.epsilon", "must lie in [0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("drqn.learning_rate", "must be positive");
  }
};

/// Epsilon-greedy choice given the network's q-values for the current history.
inline int epsilon_greedy(const nn::Vector& q, double epsilon, const ActionDistribution& explore,
                          Rng& rng) {
  if (uniform01(rng) < epsilon) return explore.sample(rng);
  return nn::argmax_lowest(q);
}

/// Stateless form: unrolls the whole history.
inline int select_action(const History& h, const Pomdp& model, const RnnStack& net, double epsilon,
                         const ActionDistribution& explore, Rng& rng) {
  return epsilon_greedy(net.unroll(encode_history(h, model)).q, epsilon, explore, rng);
}

/// Carries the recurrent state along an episode so each step costs one cell
/// update instead of a full unroll.
class RecurrentActor {
 public:
  RecurrentActor(const Pomdp& model, const RnnStack& net) : model_(&model), net_(&net) {}

  void reset(const Observation& o0) {
    state_ = net_->initial_state(1);
    net_->advance(state_, encode_input(std::nullopt, o0, *model_));
  }

  void observe(int action, const Observation& o) {
    net_->advance(state_, encode_input(action, o, *model_));
  }

  nn::Vector q() const { return net_->q_values(state_).col(0); }
  nn::Vector hidden() const { return RnnStack::flatten(state_); }
  const nn::RecurrentState& state() const { return state_; }

  int act(double epsilon, const ActionDistribution& explore, Rng& rng) const {
    return epsilon_greedy(q(), epsilon, explore, rng);
  }

 private:
  const Pomdp* model_;
  const RnnStack* net_;
  nn::RecurrentState state_;
};

/// Greedy (or epsilon-greedy) policy of a fixed network.
class NetworkPolicy final : public Policy {
 public:
  NetworkPolicy(const Pomdp& model, const RnnStack& net, double epsilon, ActionDistribution explore)
      : actor_(model, net), epsilon_(epsilon), explore_(std::move(explore)) {}

  int act(const History& h, Rng& rng) override {
    if (h.length() == 0) {
      actor_.reset(h.observation(0));
    } else if (h.length() == seen_ + 1) {
      actor_.observe(h.action(seen_), h.observation(seen_ + 1));
    } else {
      actor_.reset(h.observation(0));
      for (std::size_t k = 0; k < h.length(); ++k) actor_.observe(h.action(k), h.observation(k + 1));
    }
    seen_ = h.length();
    return actor_.act(epsilon_, explore_, rng);
  }

 private:
  RecurrentActor actor_;
  double epsilon_;
  ActionDistribution explore_;
  std::size_t seen_ = 0;
};

/// Input columns 0..steps-1 of every transition's episode, zero past its end.
inline std::vector<Matrix> batch_inputs(const std::vector<Transition>& batch, int extra) {
  int longest = 0;
  for (const Transition& tr : batch) longest = std::max(longest, tr.history_steps() + extra);
  const Eigen::Index rows = batch.front().episode->inputs.rows();
  const auto B = static_cast<Eigen::Index>(batch.size());
  std::vector<Matrix> steps(static_cast<std::size_t>(longest), Matrix::Zero(rows, B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const Transition& tr = batch[static_cast<std::size_t>(b)];
    const int n = tr.history_steps() + extra;
    for (int k = 0; k < n; ++k) steps[static_cast<std::size_t>(k)].col(b) = tr.episode->inputs.col(k);
  }
  return steps;
}

/// y_b = r_b + gamma max_a Q_target(eta_{0:t+1}, a), or r_b after a terminal observation.
inline nn::Vector compute_targets(const std::vector<Transition>& batch, const RnnStack& target,
                                  double gamma) {
  if (batch.empty()) throw Error("compute_targets: empty batch");
  nn::Vector y(static_cast<Eigen::Index>(batch.size()));
  std::vector<int> readout;
  for (const Transition& tr : batch) readout.push_back(tr.history_steps());
  const Matrix q = target.forward(batch_inputs(batch, 1), readout, nullptr);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    y(bi) = batch[b].reward();
    if (!batch[b].next_terminal()) y(bi) += gamma * q.col(bi).maxCoeff();
  }
  return y;
}

/// Squared-error loss of the online network against fixed targets, and its gradient.
inline double td_loss_and_gradient(const std::vector<Transition>& batch, const nn::Vector& targets,
                                   const RnnStack& net, nn::Parameters& grads) {
  std::vector<int> readout;
  for (const Transition& tr : batch) readout.push_back(tr.history_steps() - 1);
  nn::RnnTape tape;
  const Matrix q = net.forward(batch_inputs(batch, 0), readout, &tape);
  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    const double err = targets(bi) - q(batch[b].action(), bi);
    loss += err * err;
    dq(batch[b].action(), bi) = -2.0 * err;
  }
  grads.set_zero();
  net.backward(tape, dq, grads);
  return loss;
}

/// One uniform minibatch update. Returns nullopt (and logs) when the buffer
/// holds fewer than batch_size transitions.
inline std::optional<double> train_step(const ReplayBuffer& buffer, RnnStack& net, nn::Adam& adam,
                                        const RnnStack& target, double gamma, int batch_size,
                                        Rng& rng) {
  if (buffer.size() < static_cast<std::size_t>(batch_size)) {
    spdlog::debug("drqn: buffer holds {} < {} transitions, skipping update", buffer.size(),
                  batch_size);
    return std::nullopt;
  }
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i)
    batch.push_back(buffer.at(static_cast<std::size_t>(uniform_index(rng, static_cast<int>(buffer.size())))));
  const nn::Vector y = compute_targets(batch, target, gamma);
  nn::Parameters grads = net.params().zeros_like();
  const double loss = td_loss_and_gradient(batch, y, net, grads);
  if (!std::isfinite(loss)) throw NumericalError("drqn: non-finite loss");
  adam.step(net.params(), grads);
  return loss;
}

/// Plays one epsilon-greedy episode of at most `horizon` actions.
inline std::shared_ptr<EpisodeRecord> play_episode(const Pomdp& model, const RnnStack& net,
                                                   double epsilon, const ActionDistribution& explore,
                                                   int horizon, Rng& rng,
                                                   std::vector<State>* true_states = nullptr) {
  auto ep = std::make_shared<EpisodeRecord>();
  State s = model.sample_initial(rng);
  Observation o = model.sample_observation(s, rng);
  if (true_states) true_states->assign(1, s);
  std::vector<nn::Vector> cols{encode_input(std::nullopt, o, model)};
  ep->terminal.push_back(o.terminal ? 1 : 0);
  RecurrentActor actor(model, net);
  actor.reset(o);
  for (int t = 0; t < horizon && !o.terminal; ++t) {
    const int a = actor.act(epsilon, explore, rng);
    StepResult r = step(model, s, a, rng);
    s = r.next;
    o = r.observation;
    ep->actions.push_back(a);
    ep->rewards.push_back(r.reward);
    ep->terminal.push_back(o.terminal ? 1 : 0);
    cols.push_back(encode_input(a, o, model));
    if (true_states) true_states->push_back(s);
    actor.observe(a, o);
  }
  ep->inputs.resize(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) ep->inputs.col(static_cast<Eigen::Index>(k)) = cols[k];
  return ep;
}

struct Checkpoint {
  int episode = 0;
  RnnStack net;
};

struct RunStats {
  std::vector<double> losses;  // mean loss per episode with at least one update
  std::vector<double> episode_returns;
};

using CheckpointSink = std::function<void(const Checkpoint&)>;

/// Trains for cfg.episodes episodes and hands theta_e to `sink` after e
/// episodes for e = 0, cadence, 2 cadence, ... and e = E.
inline RunStats drqn_train(const Pomdp& model, const DrqnConfig& cfg, nn::CellKind cell,
                           const ActionDistribution& explore, std::uint64_t seed,
                           const CheckpointSink& sink) {
  cfg.validate();
  if (static_cast<int>(explore.probs.size()) != model.num_actions())
    throw ConfigError("drqn.exploration", "size differs from the action count");
  Rng init_rng(derive_seed(seed, {1}));
  Rng rng(derive_seed(seed, {2}));
  RnnStack net({cell, model.input_size(), cfg.hidden_size, cfg.num_layers, model.num_actions()},
               init_rng);
  nn::Adam adam(net.params(), {cfg.learning_rate});
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  RnnStack target = net;
  RunStats stats;

  sink({0, net});
  for (int e = 0; e < cfg.episodes; ++e) {
    if (e % cfg.target_period == 0) target = net;
    auto ep = play_episode(model, net, cfg.epsilon, explore, cfg.horizon, rng);
    stats.episode_returns.push_back(discounted_sum(ep->rewards, model.discount()));
    buffer.push_episode(ep);
    double total = 0.0;
    int updates = 0;
    for (int i = 0; i < cfg.gradient_steps; ++i) {
      if (auto loss = train_step(buffer, net, adam, target, model.discount(), cfg.batch_size, rng)) {
        total += *loss;
        ++updates;
      }
    }
    if (updates) stats.losses.push_back(total / updates);
    const int done = e + 1;
    if (done % cfg.checkpoint_every == 0 || done == cfg.episodes) sink({done, net});
  }
  return stats;
}

inline std::vector<Checkpoint> drqn_run(const Pomdp& model, const DrqnConfig& cfg, nn::CellKind cell,
                                        const ActionDistribution& explore, std::uint64_t seed) {
  std::vector<Checkpoint> out;
  drqn_train(model, cfg, cell, explore, seed, [&](const Checkpoint& c) { out.push_back(c); });
  return out;
}

}  // namespace rnnbelief::drqn
