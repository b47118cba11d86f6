#pragma once

// Closed-form posterior of the irrelevant random walk, per coordinate:
// prior N(0, 1), process noise 1, observation noise 1.

#include <vector>

#include <Eigen/Dense>

namespace rnnbelief::belief {

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal of the covariance

  static GaussianBelief prior(int dims) {
    return {Eigen::VectorXd::Zero(dims), Eigen::VectorXd::Ones(dims)};
  }
};

class RandomWalkKalman {
 public:
  explicit RandomWalkKalman(int dims) : belief_(GaussianBelief::prior(dims)) {}

  const GaussianBelief& belief() const { return belief_; }

  void predict() { belief_.variance.array() += 1.0; }

  void update(const Eigen::VectorXd& obs) {
    const Eigen::ArrayXd gain = belief_.variance.array() / (belief_.variance.array() + 1.0);
    belief_.mean.array() += gain * (obs.array() - belief_.mean.array());
    belief_.variance.array() *= (1.0 - gain);
  }

  /// Incorporate the observation of step t (predict first when t > 0).
  void observe(const Eigen::VectorXd& obs, bool first) {
    if (!first) predict();
    update(obs);
  }

 private:
  GaussianBelief belief_;
};

/// Posterior after each observation o_0..o_t.
inline std::vector<GaussianBelief> kalman_irrelevant(const std::vector<Eigen::VectorXd>& obs) {
  std::vector<GaussianBelief> out;
  if (obs.empty()) return out;
  RandomWalkKalman kf(static_cast<int>(obs.front().size()));
  for (std::size_t t = 0; t < obs.size(); ++t) {
    kf.observe(obs[t], t == 0);
    out.push_back(kf.belief());
  }
  return out;
}

}  // namespace rnnbelief::belief
