#pragma once

// Product POMDP adding d action-independent Gaussian random-walk coordinates:
//   s^I_0 ~ N(0, I),  s^I_{t+1} ~ N(s^I_t, I),  o^I_t ~ N(s^I_t, I).
// The irrelevant coordinates are appended after the inner state's values and
// after the inner observation's real channels.

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::envs {

class IrrelevantAugmentation final : public Pomdp {
 public:
  IrrelevantAugmentation(std::shared_ptr<const Pomdp> inner, int dims)
      : inner_(std::move(inner)), d_(dims) {
    if (!inner_) throw Error("augmentation needs an inner model");
    if (d_ < 1) throw ConfigError("irrelevant_dims", "must be >= 1");
  }

  const Pomdp& inner() const { return *inner_; }
  std::shared_ptr<const Pomdp> inner_ptr() const { return inner_; }
  int dims() const { return d_; }

  std::string id() const override { return inner_->id() + "+irrelevant" + std::to_string(d_); }
  int num_actions() const override { return inner_->num_actions(); }
  int num_observation_symbols() const override { return inner_->num_observation_symbols(); }
  int num_observation_values() const override { return inner_->num_observation_values() + d_; }
  int num_state_values() const override { return inner_->num_state_values() + d_; }
  double discount() const override { return inner_->discount(); }

  State inner_state(const State& s) const {
    const auto n = static_cast<std::size_t>(inner_->num_state_values());
    return State{s.discrete, {s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(n)}};
  }
  std::vector<double> irrelevant_state(const State& s) const {
    const auto n = static_cast<std::ptrdiff_t>(inner_->num_state_values());
    return {s.values.begin() + n, s.values.end()};
  }
  Observation inner_observation(const Observation& o) const {
    const auto n = static_cast<std::ptrdiff_t>(inner_->num_observation_values());
    return Observation{o.symbol, {o.values.begin(), o.values.begin() + n}, o.terminal};
  }
  std::vector<double> irrelevant_observation(const Observation& o) const {
    const auto n = static_cast<std::ptrdiff_t>(inner_->num_observation_values());
    return {o.values.begin() + n, o.values.end()};
  }

  /// Strips the irrelevant channels, leaving a history of the inner model.
  History inner_history(const History& h) const {
    History out(inner_observation(h.observation(0)));
    for (std::size_t k = 0; k < h.length(); ++k)
      out.append(h.action(k), inner_observation(h.observation(k + 1)));
    return out;
  }

  bool is_terminal(const State& s) const override { return inner_->is_terminal(inner_state(s)); }

  State sample_initial(Rng& rng) const override {
    State s = inner_->sample_initial(rng);
    for (int i = 0; i < d_; ++i) s.values.push_back(standard_normal(rng));
    return s;
  }

  State sample_transition(const State& s, int action, Rng& rng) const override {
    State next = inner_->sample_transition(inner_state(s), action, rng);
    for (double v : irrelevant_state(s)) next.values.push_back(v + standard_normal(rng));
    return next;
  }

  double reward(const State& s, int action, const State& next) const override {
    return inner_->reward(inner_state(s), action, inner_state(next));
  }

  Observation sample_observation(const State& s, Rng& rng) const override {
    Observation o = inner_->sample_observation(inner_state(s), rng);
    for (double v : irrelevant_state(s)) o.values.push_back(v + standard_normal(rng));
    return o;
  }

  double observation_likelihood(const Observation& o, const State& s) const override {
    double lik = inner_->observation_likelihood(inner_observation(o), inner_state(s));
    if (lik == 0.0) return 0.0;
    const auto so = irrelevant_state(s);
    const auto oo = irrelevant_observation(o);
    for (std::size_t i = 0; i < so.size(); ++i) {
      const double z = oo[i] - so[i];
      lik *= std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    }
    return lik;
  }

 private:
  std::shared_ptr<const Pomdp> inner_;
  int d_;
};

inline std::shared_ptr<const IrrelevantAugmentation> augment_irrelevant(
    std::shared_ptr<const Pomdp> inner, int dims) {
  return std::make_shared<const IrrelevantAugmentation>(std::move(inner), dims);
}

}  // namespace rnnbelief::envs
