#pragma once

// T-Maze: a corridor of length L whose start cell reveals which arm (Up or
// Down) hides the treasure. Canonical orderings (the network input layout):
//   actions      Right, Up, Left, Down
//   observations Up, Down, Corridor, Junction
// State index = layout * (L + 3) + cell, with cells (0,0)..(L,0), (L,1), (L,-1).

#include <array>
#include <cmath>
#include <string>
#include <tuple>

#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::envs {

enum class TMazeAction : int { right = 0, up = 1, left = 2, down = 3 };
enum class TMazeObservation : int { up = 0, down = 1, corridor = 2, junction = 3 };
enum class Layout : int { up = 0, down = 1 };

struct TMazeParams {
  int length = 10;
  double stochasticity = 0.0;
  double discount = 0.98;

  void validate() const {
    if (length < 1) throw ConfigError("length", "must be >= 1");
    if (!(stochasticity >= 0.0 && stochasticity <= 1.0))
      throw ConfigError("stochasticity", "must lie in [0, 1]");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount", "must lie in [0, 1)");
  }
};

struct TMazeState {
  Layout layout = Layout::up;
  int x = 0;
  int y = 0;

  friend bool operator==(const TMazeState&, const TMazeState&) = default;
};

class TMaze final : public DiscretePomdp {
 public:
  static constexpr double kTreasureReward = 4.0;
  static constexpr double kPenalty = -0.1;

  explicit TMaze(TMazeParams params) : p_(params) { p_.validate(); }

  const TMazeParams& params() const { return p_; }
  int length() const { return p_.length; }

  std::string id() const override {
    return p_.stochasticity == 0.0 ? "tmaze-L" + std::to_string(p_.length)
                                   : "stochastic-tmaze-L" + std::to_string(p_.length);
  }
  int num_actions() const override { return 4; }
  int num_observation_symbols() const override { return 4; }
  int num_observation_values() const override { return 0; }
  int num_state_values() const override { return 0; }
  double discount() const override { return p_.discount; }

  int cells_per_layout() const { return p_.length + 3; }
  int num_states() const override { return 2 * cells_per_layout(); }

  TMazeState decode(int index) const {
    const int layout = index / cells_per_layout();
    const int cell = index % cells_per_layout();
    TMazeState s{static_cast<Layout>(layout), cell, 0};
    if (cell == p_.length + 1) s = {s.layout, p_.length, 1};
    if (cell == p_.length + 2) s = {s.layout, p_.length, -1};
    return s;
  }

  int encode(const TMazeState& s) const {
    int cell = s.x;
    if (s.y == 1) cell = p_.length + 1;
    if (s.y == -1) cell = p_.length + 2;
    return static_cast<int>(s.layout) * cells_per_layout() + cell;
  }

  State state_at(int index) const override { return State{index, {}}; }
  int index_of(const State& s) const override { return s.discrete; }

  bool in_maze(int x, int y) const {
    if (y == 0) return x >= 0 && x <= p_.length;
    return x == p_.length && (y == 1 || y == -1);
  }

  bool is_terminal(const TMazeState& s) const { return s.y != 0; }
  bool is_terminal(const State& s) const override { return is_terminal(decode(s.discrete)); }

  /// Deterministic move; moves leaving the maze keep the position.
  TMazeState move(const TMazeState& s, int action) const {
    if (is_terminal(s)) return s;
    static constexpr std::array<std::array<int, 2>, 4> kDeltas{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    const auto& d = kDeltas[static_cast<std::size_t>(action)];
    const int nx = s.x + d[0];
    const int ny = s.y + d[1];
    if (!in_maze(nx, ny)) return s;
    return {s.layout, nx, ny};
  }

  double initial_probability(int index) const override {
    const TMazeState s = decode(index);
    return (s.x == 0 && s.y == 0) ? 0.5 : 0.0;
  }

  std::vector<std::pair<int, double>> transition_distribution(int index,
                                                              int action) const override {
    check_action(action);
    const TMazeState s = decode(index);
    if (is_terminal(s)) return {{index, 1.0}};
    std::vector<std::pair<int, double>> out;
    auto add = [&](int j, double p) {
      if (p == 0.0) return;
      for (auto& [k, q] : out) {
        if (k == j) {
          q += p;
          return;
        }
      }
      out.emplace_back(j, p);
    };
    const double lambda = p_.stochasticity;
    add(encode(move(s, action)), 1.0 - lambda);
    for (int a = 0; a < 4; ++a) add(encode(move(s, a)), lambda / 4.0);
    return out;
  }

  State sample_initial(Rng& rng) const override {
    const Layout m = uniform01(rng) < 0.5 ? Layout::up : Layout::down;
    return State{encode({m, 0, 0}), {}};
  }

  State sample_transition(const State& s, int action, Rng& rng) const override {
    check_action(action);
    int a = action;
    if (p_.stochasticity > 0.0 && uniform01(rng) < p_.stochasticity) a = uniform_index(rng, 4);
    return State{encode(move(decode(s.discrete), a)), {}};
  }

  double reward(const TMazeState& s, const TMazeState& next) const {
    if (is_terminal(s)) return 0.0;
    if (!is_terminal(next)) return s == next ? kPenalty : 0.0;
    const int treasure_y = next.layout == Layout::up ? 1 : -1;
    return next.y == treasure_y ? kTreasureReward : kPenalty;
  }

  double reward(const State& s, int /*action*/, const State& next) const override {
    return reward(decode(s.discrete), decode(next.discrete));
  }

  TMazeObservation observe(const TMazeState& s) const {
    if (s.x == 0 && s.y == 0)
      return s.layout == Layout::up ? TMazeObservation::up : TMazeObservation::down;
    if (s.x < p_.length) return TMazeObservation::corridor;
    return TMazeObservation::junction;
  }

  Observation observation_of(const TMazeState& s) const {
    return Observation{static_cast<int>(observe(s)), {}, is_terminal(s)};
  }

  Observation sample_observation(const State& s, Rng& /*rng*/) const override {
    return observation_of(decode(s.discrete));
  }

  double observation_likelihood(const Observation& o, const State& s) const override {
    return o == observation_of(decode(s.discrete)) ? 1.0 : 0.0;
  }

 private:
  TMazeParams p_;
};

struct TMazeStepResult {
  TMazeState next;
  double reward = 0.0;
  TMazeObservation observation = TMazeObservation::corridor;
};

inline TMazeStepResult tmaze_step(const TMazeState& s, TMazeAction action,
                                  const TMazeParams& params, Rng& rng) {
  const TMaze maze(params);
  StepResult r = step(maze, State{maze.encode(s), {}}, static_cast<int>(action), rng);
  return {maze.decode(r.next.discrete), r.reward,
          static_cast<TMazeObservation>(r.observation.symbol)};
}

/// Horizon whose expected exploration displacement reaches the junction:
/// ceil(L / ((1 - lambda)(r - l))).
inline int tmaze_horizon(int length, double stochasticity, double explore_right,
                         double explore_left) {
  if (!(explore_right > explore_left))
    throw UndefinedHorizonError("exploration must favour Right over Left");
  if (!(stochasticity < 1.0)) throw UndefinedHorizonError("stochasticity must be < 1");
  const double drift = (1.0 - stochasticity) * (explore_right - explore_left);
  const double ratio = static_cast<double>(length) / drift;
  // absorb representation error in r - l such as 1/2 - 1/6
  return static_cast<int>(std::ceil(ratio * (1.0 - 1e-12)));
}

/// Right with probability 1/2, each other move 1/6.
inline ActionDistribution tmaze_exploration_policy() {
  return {{1.0 / 2.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
}

}  // namespace rnnbelief::envs
