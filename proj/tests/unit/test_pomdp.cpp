#include <gtest/gtest.h>

#include <cmath>

#include "rnnbelief/envs/mountain_hike.hpp"
#include "rnnbelief/envs/tmaze.hpp"
#include "rnnbelief/pomdp.hpp"

using namespace rnnbelief;
using namespace rnnbelief::envs;

namespace {

constexpr int kRight = static_cast<int>(TMazeAction::right);
constexpr int kUp = static_cast<int>(TMazeAction::up);

// Right along the corridor, Up at the junction.
int right_then_up(const History& h, Rng&) {
  return h.last_observation().symbol == static_cast<int>(TMazeObservation::junction) ? kUp : kRight;
}

Episode rollout_with_layout(const TMaze& maze, Layout layout, int horizon) {
  for (std::uint64_t seed = 0;; ++seed) {
    Rng rng(seed);
    Episode ep = rollout(maze, right_then_up, horizon, rng);
    if (maze.decode(ep.true_states.front().discrete).layout == layout) return ep;
  }
}

}  // namespace

TEST(Rollout, TMazeRightThenUpReachesTreasure) {
  TMaze maze({2, 0.0, 0.98});
  Episode ep = rollout_with_layout(maze, Layout::up, 10);
  ASSERT_EQ(ep.num_actions(), 3u);
  EXPECT_EQ(ep.rewards, (std::vector<double>{0.0, 0.0, 4.0}));
  EXPECT_TRUE(ep.terminated);
  EXPECT_EQ(ep.history.observations().size(), ep.history.actions().size() + 1);
}

TEST(Rollout, HorizonOneTakesExactlyOneAction) {
  TMaze maze({10, 0.0, 0.98});
  Rng rng(3);
  Episode ep = rollout(maze, right_then_up, 1, rng);
  EXPECT_EQ(ep.num_actions(), 1u);
  EXPECT_EQ(ep.rewards.size(), 1u);
}

TEST(Rollout, WallBounceIsPenalized) {
  TMaze maze({10, 0.0, 0.98});
  Rng rng(1);
  Episode ep = rollout(maze, [](const History&, Rng&) { return kUp; }, 5, rng);
  ASSERT_FALSE(ep.rewards.empty());
  EXPECT_DOUBLE_EQ(ep.rewards.front(), -0.1);
}

TEST(Rollout, InvalidActionThrows) {
  TMaze maze({3, 0.0, 0.98});
  Rng rng(0);
  EXPECT_THROW(rollout(maze, [](const History&, Rng&) { return 4; }, 5, rng), InvalidActionError);
  EXPECT_THROW(rollout(maze, [](const History&, Rng&) { return -1; }, 5, rng), InvalidActionError);
}

TEST(Rollout, ZeroHorizonRejected) {
  TMaze maze({3, 0.0, 0.98});
  Rng rng(0);
  EXPECT_THROW(rollout(maze, right_then_up, 0, rng), Error);
}

TEST(Rollout, NoActionAfterTerminalAndLengthsAgree) {
  TMaze maze({4, 0.3, 0.98});
  const ActionDistribution explore = tmaze_exploration_policy();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Episode ep = rollout(
        maze, [&](const History&, Rng& r) { return explore.sample(r); }, 40, rng);
    ASSERT_EQ(ep.rewards.size(), ep.history.length());
    ASSERT_EQ(ep.true_states.size(), ep.history.length() + 1);
    for (std::size_t k = 0; k + 1 < ep.history.observations().size(); ++k)
      ASSERT_FALSE(ep.history.observation(k).terminal) << "action taken after a terminal observation";
  }
}

TEST(Rollout, SeededRolloutIsReproducible) {
  MountainHike hike({});
  auto policy = [](const History& h, Rng&) { return static_cast<int>(h.length() % 4); };
  Rng a(42);
  Rng b(42);
  Episode e1 = rollout(hike, policy, 30, a);
  Episode e2 = rollout(hike, policy, 30, b);
  EXPECT_EQ(e1.history, e2.history);
  EXPECT_EQ(e1.rewards, e2.rewards);
  EXPECT_EQ(e1.true_states, e2.true_states);
}

TEST(History, PrefixReconstructsNextHistory) {
  History h(Observation{0, {}, false});
  h.append(1, Observation{2, {}, false});
  h.append(3, Observation{3, {}, true});
  History p = h.prefix(1);
  EXPECT_EQ(p.length(), 1u);
  p.append(h.action(1), h.observation(2));
  EXPECT_EQ(p, h);
  EXPECT_EQ(h.prefix(0).observations().size(), 1u);
  EXPECT_THROW(h.prefix(3), Error);
}

TEST(EncodeInput, TMazeLayout) {
  TMaze maze({10, 0.0, 0.98});
  Observation corridor{static_cast<int>(TMazeObservation::corridor), {}, false};
  Observation up{static_cast<int>(TMazeObservation::up), {}, false};
  Eigen::VectorXd a = encode_input(std::nullopt, corridor, maze);
  Eigen::VectorXd b = encode_input(kRight, up, maze);
  Eigen::VectorXd ea(8), eb(8);
  ea << 0, 0, 0, 0, 0, 0, 1, 0;
  eb << 1, 0, 0, 0, 1, 0, 0, 0;
  EXPECT_EQ(a, ea);
  EXPECT_EQ(b, eb);
}

TEST(EncodeInput, ScalarObservationPassesThrough) {
  MountainHike hike({});
  Observation o{-1, {-0.37}, false};
  Eigen::VectorXd x = encode_input(static_cast<int>(HikeAction::forward), o, hike);
  Eigen::VectorXd e(5);
  e << 1, 0, 0, 0, -0.37;
  EXPECT_EQ(x, e);
}

TEST(EncodeInput, RejectsMalformedObservation) {
  MountainHike hike({});
  EXPECT_THROW(encode_input(std::nullopt, Observation{-1, {}, false}, hike), ShapeError);
}

TEST(EmpiricalReturn, OptimalTMazeTrajectory) {
  Episode ep;
  ep.rewards.assign(11, 0.0);
  ep.rewards[10] = 4.0;
  EXPECT_NEAR(empirical_return({ep}, 0.98), 4.0 * std::pow(0.98, 10), 1e-12);
  EXPECT_NEAR(empirical_return({ep}, 0.98), 3.2683, 1e-4);
}

TEST(EmpiricalReturn, ZeroAndUndiscountedCases) {
  Episode zero;
  zero.rewards.assign(5, 0.0);
  EXPECT_EQ(empirical_return({zero}, 0.9), 0.0);
  Episode a;
  a.rewards = {2.0, 5.0, 7.0};
  Episode b;
  b.rewards = {-1.0, 3.0};
  EXPECT_DOUBLE_EQ(empirical_return({a, b}, 0.0), 0.5);
  EXPECT_THROW(empirical_return({}, 0.9), Error);
}

TEST(EmpiricalReturn, LinearAndMonotoneInRewards) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Episode> eps(3), scaled(3), raised(3);
    for (int i = 0; i < 3; ++i) {
      const int n = 1 + uniform_index(rng, 12);
      for (int t = 0; t < n; ++t) {
        const double r = standard_normal(rng);
        eps[i].rewards.push_back(r);
        scaled[i].rewards.push_back(2.5 * r);
        raised[i].rewards.push_back(r + uniform01(rng));
      }
    }
    const double j = empirical_return(eps, 0.95);
    EXPECT_NEAR(empirical_return(scaled, 0.95), 2.5 * j, 1e-12);
    EXPECT_GE(empirical_return(raised, 0.95), j);
  }
}
