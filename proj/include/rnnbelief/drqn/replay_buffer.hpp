#pragma once

// Replay storage for recurrent Q-learning. Every transition of an episode
// points into one shared record of the episode's encoded inputs, so a
// transition (eta_{0:t}, a_t, r_t, o_{t+1}, eta_{0:t+1}) costs O(1) memory.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rnnbelief/errors.hpp"

namespace rnnbelief::drqn {

struct EpisodeRecord {
  Eigen::MatrixXd inputs;       // input_size x (T + 1), column k encodes (a_{k-1}, o_k)
  std::vector<int> actions;     // T
  std::vector<double> rewards;  // T
  std::vector<char> terminal;   // T + 1, terminal flag of o_k
};

struct Transition {
  std::shared_ptr<const EpisodeRecord> episode;
  int t = 0;

  int action() const { return episode->actions[static_cast<std::size_t>(t)]; }
  double reward() const { return episode->rewards[static_cast<std::size_t>(t)]; }
  bool next_terminal() const { return episode->terminal[static_cast<std::size_t>(t) + 1] != 0; }
  /// Number of inputs in eta_{0:t}.
  int history_steps() const { return t + 1; }
};

/// Fixed-capacity FIFO ring.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("drqn.buffer_capacity", "must be positive");
    items_.reserve(capacity);
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  void push(Transition tr) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(tr));
    } else {
      items_[head_] = std::move(tr);
      head_ = (head_ + 1) % capacity_;
    }
  }

  /// i-th oldest transition.
  const Transition& at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay buffer index");
    return items_[(head_ + i) % items_.size()];
  }

  void push_episode(const std::shared_ptr<const EpisodeRecord>& ep) {
    for (std::size_t t = 0; t < ep->actions.size(); ++t) push({ep, static_cast<int>(t)});
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // oldest element once full
};

}  // namespace rnnbelief::drqn
