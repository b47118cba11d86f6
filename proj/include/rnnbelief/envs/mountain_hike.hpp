#pragma once

// Mountain Hike: a noisy 2-D walk on [-1, 1]^2 towards the summit at
// (0.8, 0.8), observing only a noisy altitude. Actions are relative to the
// hiker's orientation (East, North, West, South = 0, 1, 2, 3 quarter turns):
//   Forward (0, 0.1), Left (-0.1, 0), Backward (0, -0.1), Right (0.1, 0).
//
// Altitude surface (fixed stand-in for the published plot):
//   h(x) = -[ A (1 - exp(-q1(x - p*))) + B exp(-q2(x - v)) (1 - exp(-|x - p*|^2 / tau)) ]
// with p* = (0.8, 0.8), q1 an axis-aligned quadratic (sigmas 1.0, 0.7), and q2
// a valley centred at v = (0, 0), long along (1, -1) (sigma 0.5) and thin
// along (1, 1) (sigma 0.2). h <= 0 everywhere and h(p*) = 0 exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::envs {

enum class HikeAction : int { forward = 0, left = 1, backward = 2, right = 3 };

struct HikeParams {
  double sigma_obs = 0.1;
  double sigma_trans = 0.05;
  double discount = 0.99;
  bool varying_orientation = false;

  int horizon() const { return varying_orientation ? 160 : 80; }

  void validate() const {
    if (!(sigma_obs > 0.0)) throw ConfigError("sigma_obs", "must be > 0");
    if (!(sigma_trans > 0.0)) throw ConfigError("sigma_trans", "must be > 0");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount", "must lie in [0, 1)");
  }
};

struct HikeState {
  double x = -0.8;
  double y = -0.8;
  int orientation = 1;  // quarter turns from East

  friend bool operator==(const HikeState&, const HikeState&) = default;
};

namespace hike_surface {
inline constexpr double kSummitX = 0.8;
inline constexpr double kSummitY = 0.8;
inline constexpr double kBowlDepth = 1.0;
inline constexpr double kBowlSigmaX = 1.0;
inline constexpr double kBowlSigmaY = 0.7;
inline constexpr double kValleyDepth = 0.6;
inline constexpr double kValleySigmaAlong = 0.5;  // along (1, -1)
inline constexpr double kValleySigmaAcross = 0.2;  // along (1, 1)
inline constexpr double kValleyFade = 0.05;
inline constexpr double kTerminalRadius = 0.1;
}  // namespace hike_surface

inline double altitude(double x, double y) {
  using namespace hike_surface;
  const double dx = x - kSummitX;
  const double dy = y - kSummitY;
  const double bowl = kBowlDepth * (1.0 - std::exp(-0.5 * (dx * dx / (kBowlSigmaX * kBowlSigmaX) +
                                                         dy * dy / (kBowlSigmaY * kBowlSigmaY))));
  const double along = (x - y) / std::numbers::sqrt2;
  const double across = (x + y) / std::numbers::sqrt2;
  const double valley =
      kValleyDepth *
      std::exp(-0.5 * (along * along / (kValleySigmaAlong * kValleySigmaAlong) +
                       across * across / (kValleySigmaAcross * kValleySigmaAcross))) *
      (1.0 - std::exp(-(dx * dx + dy * dy) / kValleyFade));
  return -(bowl + valley);
}

/// Rotation by a multiple of 90 degrees, exact in floating point.
inline std::array<double, 2> rotate(int quarter_turns, double ax, double ay) {
  static constexpr std::array<std::array<int, 2>, 4> kCosSin{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  const auto& cs = kCosSin[static_cast<std::size_t>(((quarter_turns % 4) + 4) % 4)];
  const double c = cs[0];
  const double s = cs[1];
  return {c * ax - s * ay, s * ax + c * ay};
}

class MountainHike final : public Pomdp {
 public:
  explicit MountainHike(HikeParams params) : p_(params) { p_.validate(); }

  const HikeParams& params() const { return p_; }

  std::string id() const override {
    return p_.varying_orientation ? "varying-mountain-hike" : "mountain-hike";
  }
  int num_actions() const override { return 4; }
  int num_observation_symbols() const override { return 0; }
  int num_observation_values() const override { return 1; }
  int num_state_values() const override { return 2; }
  double discount() const override { return p_.discount; }

  static HikeState decode(const State& s) { return {s.values.at(0), s.values.at(1), s.discrete}; }
  static State encode(const HikeState& h) { return State{h.orientation, {h.x, h.y}}; }

  static bool is_terminal(const HikeState& h) {
    using namespace hike_surface;
    return std::hypot(h.x - kSummitX, h.y - kSummitY) < kTerminalRadius;
  }
  bool is_terminal(const State& s) const override { return is_terminal(decode(s)); }

  HikeState initial(Rng& rng) const {
    HikeState h;
    h.orientation = p_.varying_orientation ? uniform_index(rng, 4) : 1;
    return h;
  }

  State sample_initial(Rng& rng) const override { return encode(initial(rng)); }

  /// Noise-free part of the move followed by clamping to the box.
  static HikeState displace(const HikeState& h, int action, double nx, double ny) {
    static constexpr std::array<std::array<double, 2>, 4> kMoves{
        {{0.0, 0.1}, {-0.1, 0.0}, {0.0, -0.1}, {0.1, 0.0}}};
    const auto& m = kMoves[static_cast<std::size_t>(action)];
    const auto d = rotate(h.orientation, m[0], m[1]);
    return {std::clamp(h.x + d[0] + nx, -1.0, 1.0), std::clamp(h.y + d[1] + ny, -1.0, 1.0),
            h.orientation};
  }

  State sample_transition(const State& s, int action, Rng& rng) const override {
    check_action(action);
    const HikeState h = decode(s);
    const double nx = p_.sigma_trans * standard_normal(rng);
    const double ny = p_.sigma_trans * standard_normal(rng);
    return encode(displace(h, action, nx, ny));
  }

  double reward(const State& s, int /*action*/, const State& next) const override {
    if (is_terminal(s)) return 0.0;
    const HikeState n = decode(next);
    return altitude(n.x, n.y);
  }

  Observation sample_observation(const State& s, Rng& rng) const override {
    const HikeState h = decode(s);
    return Observation{-1, {altitude(h.x, h.y) + p_.sigma_obs * standard_normal(rng)},
                       is_terminal(h)};
  }

  double observation_likelihood(const Observation& o, const State& s) const override {
    const HikeState h = decode(s);
    if (o.terminal != is_terminal(h)) return 0.0;
    const double z = (o.values.at(0) - altitude(h.x, h.y)) / p_.sigma_obs;
    return std::exp(-0.5 * z * z) / (p_.sigma_obs * std::sqrt(2.0 * std::numbers::pi));
  }

 private:
  HikeParams p_;
};

struct HikeStepResult {
  HikeState next;
  double reward = 0.0;
  double observation = 0.0;
};

inline HikeStepResult hike_step(const HikeState& s, HikeAction action, const HikeParams& params,
                                Rng& rng) {
  const MountainHike hike(params);
  StepResult r = step(hike, MountainHike::encode(s), static_cast<int>(action), rng);
  return {MountainHike::decode(r.next), r.reward, r.observation.values.at(0)};
}

inline HikeState hike_initial(const HikeParams& params, Rng& rng) {
  return MountainHike(params).initial(rng);
}

}  // namespace rnnbelief::envs
