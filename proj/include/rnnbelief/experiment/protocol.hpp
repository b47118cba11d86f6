#pragma once

// Checkpoint evaluation: greedy empirical return plus MINE estimates between
// recurrent states and beliefs, and the epsilon sweep over behavior policies.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "rnnbelief/experiment/config.hpp"
#include "rnnbelief/experiment/sampling.hpp"

namespace rnnbelief::experiment {

struct MetricsRow {
  std::string env;
  std::string cell;
  std::uint64_t seed = 0;
  int episode = 0;
  std::string metric;  // return | mi
  std::string tag;     // main | relevant | irrelevant
  std::optional<double> epsilon;  // set for sweep rows only
  double value = 0.0;

  bool failed() const { return std::isnan(value); }

  friend bool operator==(const MetricsRow& a, const MetricsRow& b) {
    const bool same_value = a.value == b.value || (std::isnan(a.value) && std::isnan(b.value));
    return a.env == b.env && a.cell == b.cell && a.seed == b.seed && a.episode == b.episode &&
           a.metric == b.metric && a.tag == b.tag && a.epsilon == b.epsilon && same_value;
  }
};

// Stream tags for derive_seed. Sampling and MINE seeds do not depend on
// epsilon, so the epsilon = 0 sweep row reproduces the main-protocol row.
enum : std::uint64_t { kReturnStream = 0x7e7, kSampleStream = 0x5a3, kMineStream = 0x313 };

/// Mean discounted return of `rollouts` greedy episodes.
inline double estimate_return(const Environment& env, const nn::RnnStack& net, int rollouts, Rng& rng) {
  std::vector<Episode> eps;
  eps.reserve(static_cast<std::size_t>(rollouts));
  for (int i = 0; i < rollouts; ++i) {
    drqn::NetworkPolicy greedy(*env.model, net, 0.0, env.exploration);
    eps.push_back(rollout(*env.model, greedy, env.horizon, rng));
  }
  return empirical_return(eps, env.model->discount());
}

struct EvalContext {
  const RunConfig& cfg;
  const Environment& env;
  std::uint64_t seed;
  SampleSet* samples = nullptr;  // receives the main-protocol sample set when set
};

namespace detail {

inline MetricsRow make_row(const EvalContext& ctx, int episode, const char* metric, const char* tag,
                           std::optional<double> eps) {
  return {ctx.env.name(), nn::to_string(ctx.cfg.cell), ctx.seed, episode, metric, tag, eps, 0.0};
}

template <class F>
double guarded(const char* what, int episode, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    spdlog::warn("{} at episode {} failed: {}", what, episode, e.what());
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// MI rows for one behavior policy: one row (tag main) without irrelevant
/// variables, two rows (relevant, irrelevant) with them.
inline std::vector<MetricsRow> mi_rows(const EvalContext& ctx, const drqn::Checkpoint& cp, double epsilon,
                                       std::optional<double> eps_column, SampleSet* keep) {
  const int e = cp.episode;
  const bool split = ctx.env.irrelevant_dims() > 0;
  std::optional<SampleSet> set;
  try {
    Rng rng(derive_seed(ctx.seed, {kSampleStream, static_cast<std::uint64_t>(e)}));
    set = sample_joint(ctx.env, cp, epsilon, ctx.cfg.mine.samples, ctx.cfg.evaluation.particles, rng);
  } catch (const std::exception& ex) {
    spdlog::warn("sampling at episode {} failed: {}", e, ex.what());
  }
  const auto mine_seed = [&](std::uint64_t tag) {
    return derive_seed(ctx.seed, {kMineStream, static_cast<std::uint64_t>(e), tag});
  };
  const auto job = [&](const mine::Dataset& d, std::uint64_t tag) {
    return guarded("MINE", e, [&] {
      if (!set) throw Error("no samples");
      return mine::estimate_mi(d, ctx.cfg.mine, mine_seed(tag));
    });
  };
  std::vector<MetricsRow> rows;
  MetricsRow rel = make_row(ctx, e, "mi", split ? "relevant" : "main", eps_column);
  rel.value = set ? job(set->relevant_dataset(), 0) : std::numeric_limits<double>::quiet_NaN();
  rows.push_back(rel);
  if (split) {
    MetricsRow irr = make_row(ctx, e, "mi", "irrelevant", eps_column);
    irr.value = set ? job(set->irrelevant_dataset(), 1) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(irr);
  }
  if (keep && set) *keep = std::move(*set);
  return rows;
}

}  // namespace detail

/// Return row followed by the MI row(s) for one checkpoint. A failing
/// sub-job yields NaN in its row; the others still run.
inline std::vector<MetricsRow> evaluate_checkpoint(const EvalContext& ctx, const drqn::Checkpoint& cp,
                                                   bool with_return = true) {
  std::vector<MetricsRow> rows;
  if (with_return) {
    MetricsRow r = detail::make_row(ctx, cp.episode, "return", "main", std::nullopt);
    r.value = detail::guarded("return estimate", cp.episode, [&] {
      Rng rng(derive_seed(ctx.seed, {kReturnStream, static_cast<std::uint64_t>(cp.episode)}));
      return estimate_return(ctx.env, cp.net, ctx.cfg.evaluation.return_rollouts, rng);
    });
    rows.push_back(r);
  }
  for (MetricsRow& m : detail::mi_rows(ctx, cp, 0.0, std::nullopt, ctx.samples)) rows.push_back(std::move(m));
  return rows;
}

/// MI rows under the epsilon-greedy behavior policy for every epsilon in
/// the config's list, in list order.
inline std::vector<MetricsRow> generalization_sweep(const EvalContext& ctx, const drqn::Checkpoint& cp) {
  std::vector<MetricsRow> rows;
  for (double eps : ctx.cfg.evaluation.epsilons) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("evaluation.epsilons", "must lie in [0, 1]");
    for (MetricsRow& m : detail::mi_rows(ctx, cp, eps, eps, nullptr)) rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace rnnbelief::experiment
