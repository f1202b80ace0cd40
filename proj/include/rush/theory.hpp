#pragma once

// Problem quantities of a non-stochastic BAI instance and the RUSH
// correctness budget.
//
//   nu_a      limit of arm a (final tabulated loss)
//   gamma_a   tightest non-increasing envelope with |l_{a,t} - nu_a| <= gamma_a(t)
//   delta_a   nu_a - nu_best
//   tau_a     min t with gamma_a(t) + gamma_best(t) < delta_a (undefined if delta_a = 0)
//   z         max tau over the incumbents
//
// With B > ceil(log_eta n) * max(2n + sum_{a != best} gamma_bar_inv(delta_a / 2), z * n),
// where gamma_bar_inv(alpha) = max_a gamma_a^{-1}(alpha), RUSH returns the best arm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rush/core.hpp"
#include "rush/errors.hpp"
#include "rush/schedulers.hpp"

namespace rush {

// gamma(t) = max_{t' >= t} |l_{t'} - nu|, returned 0-based (gamma[t-1]).
inline std::vector<double> envelope(const LossCurve& curve) {
  if (curve.losses.empty()) throw InvalidArgument("envelope of an empty curve");
  const double nu = curve.limit();
  std::vector<double> gamma(curve.losses.size());
  double running = 0.0;
  for (std::size_t i = curve.losses.size(); i-- > 0;) {
    running = std::max(running, std::abs(curve.losses[i] - nu));
    gamma[i] = running;
  }
  return gamma;
}

// min{t >= 1 : gamma(t) <= alpha}. gamma must be non-increasing and end at 0.
inline std::int64_t gamma_inverse(std::span<const double> gamma, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("gamma_inverse needs alpha >= 0");
  auto it = std::partition_point(gamma.begin(), gamma.end(), [alpha](double g) { return g > alpha; });
  return static_cast<std::int64_t>(it - gamma.begin()) + 1;
}

struct TheoryQuantities {
  ArmId best;
  std::map<ArmId, double> nu;
  std::map<ArmId, double> delta;
  std::map<ArmId, std::vector<double>> gamma;
  std::map<ArmId, std::optional<std::int64_t>> tau;
  std::int64_t z = 0;
};

inline TheoryQuantities compute_quantities(const TaskBench& task, std::span<const ArmId> arms,
                                           const ArmSet& incumbent_arms) {
  if (arms.empty()) throw InvalidArgument("compute_quantities needs at least one arm");
  std::vector<ArmId> ids(arms.begin(), arms.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  TheoryQuantities q{ids.front(), {}, {}, {}, {}, 0};
  for (const auto& a : ids) {
    const auto& curve = task.curves(a).loss;
    q.nu.emplace(a, curve.limit());
    q.gamma.emplace(a, envelope(curve));
    if (curve.limit() < q.nu.at(q.best)) q.best = a;
  }
  const double nu_best = q.nu.at(q.best);
  const auto& gamma_best = q.gamma.at(q.best);
  for (const auto& a : ids) {
    const double d = q.nu.at(a) - nu_best;
    q.delta.emplace(a, d);
    std::optional<std::int64_t> tau;
    if (d > 0.0) {
      const auto& g = q.gamma.at(a);
      for (std::size_t t = 0; t < g.size(); ++t) {
        if (g[t] + gamma_best[t] < d) {
          tau = static_cast<std::int64_t>(t) + 1;
          break;
        }
      }
    }
    q.tau.emplace(a, tau);
  }
  for (const auto& inc : incumbent_arms) {
    auto it = q.tau.find(inc);
    if (it == q.tau.end()) {
      throw InvalidArgument("incumbent " + inc.str() + " is not among the instance's arms");
    }
    if (it->second) q.z = std::max(q.z, *it->second);
  }
  return q;
}

inline TheoryQuantities compute_quantities(const TaskBench& task, const ArmSet& incumbent_arms) {
  const auto ids = task.arm_ids();
  return compute_quantities(task, ids, incumbent_arms);
}

inline std::int64_t gamma_bar_inverse(const TheoryQuantities& q, double alpha) {
  std::int64_t worst = 1;
  for (const auto& [_, g] : q.gamma) worst = std::max(worst, gamma_inverse(g, alpha));
  return worst;
}

// Smallest integer budget strictly larger than the correctness bound for n
// arms (log base eta, matching the number of rounds RUSH executes).
inline std::int64_t theorem1_min_budget(const TheoryQuantities& q, std::int64_t n, std::int64_t eta) {
  if (n < 1) throw InvalidArgument("theorem1_min_budget needs n >= 1");
  std::int64_t gap_sum = 0;
  for (const auto& [a, d] : q.delta) {
    if (a == q.best) continue;
    if (d <= 0.0) throw TiedBestArm("arm " + a.str() + " ties the best arm " + q.best.str());
    gap_sum += gamma_bar_inverse(q, d / 2.0);
  }
  const std::int64_t inner = std::max(2 * n + gap_sum, q.z * n);
  return ceil_log(n, eta) * inner + 1;
}

}  // namespace rush
