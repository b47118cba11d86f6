#pragma once

// Exact Bayes filter over an enumerated state space:
//   b_0(s)   ∝ p0(s) O(o_0 | s)
//   b'(s')   ∝ O(o' | s') sum_s T(s' | s, a) b(s)

#include <cmath>
#include <vector>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/pomdp.hpp"

namespace rnnbelief::belief {

struct DiscreteBelief {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  bool is_valid(double tol = 1e-12) const {
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) return false;
      total += p;
    }
    return std::abs(total - 1.0) <= tol;
  }
};

namespace detail {
inline void normalize_or_throw(std::vector<double>& w, const char* where) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0) || !std::isfinite(total))
    throw ImpossibleObservationError(std::string(where) + ": observation has zero likelihood");
  for (double& v : w) v /= total;
}
}  // namespace detail

inline DiscreteBelief initial_belief(const DiscretePomdp& model, const Observation& o0) {
  const int n = model.num_states();
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const double prior = model.initial_probability(s);
    b[static_cast<std::size_t>(s)] =
        prior == 0.0 ? 0.0 : prior * model.observation_likelihood(o0, model.state_at(s));
  }
  detail::normalize_or_throw(b, "initial_belief");
  return {std::move(b)};
}

inline DiscreteBelief belief_step(const DiscreteBelief& b, int action, const Observation& o,
                                  const DiscretePomdp& model) {
  const int n = model.num_states();
  if (static_cast<int>(b.size()) != n) throw ShapeError("belief size does not match model");
  std::vector<double> predicted(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    const double p = b.probs[static_cast<std::size_t>(s)];
    if (p == 0.0) continue;
    for (const auto& [next, q] : model.transition_distribution(s, action))
      predicted[static_cast<std::size_t>(next)] += q * p;
  }
  for (int s = 0; s < n; ++s) {
    double& v = predicted[static_cast<std::size_t>(s)];
    if (v != 0.0) v *= model.observation_likelihood(o, model.state_at(s));
  }
  detail::normalize_or_throw(predicted, "belief_step");
  return {std::move(predicted)};
}

/// Beliefs b_0..b_t along a whole history.
inline std::vector<DiscreteBelief> filter_history(const DiscretePomdp& model, const History& h) {
  std::vector<DiscreteBelief> out;
  out.reserve(h.length() + 1);
  out.push_back(initial_belief(model, h.observation(0)));
  for (std::size_t k = 0; k < h.length(); ++k)
    out.push_back(belief_step(out.back(), h.action(k), h.observation(k + 1), model));
  return out;
}

/// Shannon entropy in bits, with 0 log 0 = 0.
inline double belief_entropy(const DiscreteBelief& b) {
  double h = 0.0;
  for (double p : b.probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

}  // namespace rnnbelief::belief
