#pragma once

// Randomized check that RUSH at the correctness budget returns the best arm.
//
// Instance i draws from stream (seed, i): n in [2, max_arms] arms, each with
//   nu ~ U(0.05, 0.65), c ~ U(0.05, 0.4), rate ~ U(0.3, 0.85)
//   l_t = clamp(nu + sign * c * rate^t + noise_t, 0, 1),  sign = -1 w.p. 0.25
//   noise_t = a * (2U - 1) for t <= W, 0 after;  a ~ U(0, 0.05), W ~ {1..16}
// Limits are redrawn until the best arm leads by at least 1e-3. The horizon
// starts at 64 and doubles until it covers the largest budget over the
// incumbent regimes; the final entry is the limit.
//
// Each case runs RUSH twice: at theorem1_min_budget and at separation_budget,
// the smallest B whose rung schedule provably keeps the best arm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rush/benchgen.hpp"
#include "rush/core.hpp"
#include "rush/random.hpp"
#include "rush/schedulers.hpp"
#include "rush/theory.hpp"

namespace rush {

enum class StoreRegime { empty, best, worst, random };

inline std::string to_string(StoreRegime r) {
  switch (r) {
    case StoreRegime::empty: return "empty";
    case StoreRegime::best: return "best";
    case StoreRegime::worst: return "worst";
    case StoreRegime::random: return "random";
  }
  return "?";
}

struct VerifyOptions {
  std::int64_t instances = 200;
  std::int64_t max_arms = 12;
  std::int64_t eta = 3;
  std::uint64_t seed = 0;
};

struct VerifyCase {
  std::int64_t instance = 0;
  StoreRegime regime = StoreRegime::empty;
  std::int64_t n = 0;
  std::int64_t horizon = 0;
  std::int64_t budget = 0;
  std::int64_t separation_budget = 0;
  std::vector<ArmId> store;
  ArmId best{"?"};
  ArmId selected{"?"};
  ArmId selected_separated{"?"};

  bool correct() const { return selected == best; }
  bool correct_separated() const { return selected_separated == best; }
};

struct VerifyReport {
  VerifyOptions options;
  std::vector<VerifyCase> cases;

  std::int64_t correct(StoreRegime r) const {
    std::int64_t c = 0;
    for (const auto& v : cases) c += (v.regime == r && v.correct()) ? 1 : 0;
    return c;
  }
  std::int64_t correct_separated(StoreRegime r) const {
    std::int64_t c = 0;
    for (const auto& v : cases) c += (v.regime == r && v.correct_separated()) ? 1 : 0;
    return c;
  }
  std::int64_t total(StoreRegime r) const {
    std::int64_t c = 0;
    for (const auto& v : cases) c += v.regime == r ? 1 : 0;
    return c;
  }
};

inline constexpr StoreRegime kRegimes[] = {StoreRegime::empty, StoreRegime::best, StoreRegime::worst,
                                           StoreRegime::random};

struct ArmDraw {
  double nu, c, rate, sign, amp;
  std::int64_t window;
  std::vector<double> noise;  // one value per t <= window
};

inline TaskBench tabulate_instance(const std::string& id, const std::vector<ArmDraw>& draws, std::int64_t T) {
  std::map<ArmId, ArmCurves> arms;
  for (std::size_t a = 0; a < draws.size(); ++a) {
    const auto& d = draws[a];
    std::vector<double> losses(static_cast<std::size_t>(T));
    for (std::int64_t t = 1; t < T; ++t) {
      double l = d.nu + d.sign * d.c * std::pow(d.rate, static_cast<double>(t));
      if (t <= d.window) l += d.noise[static_cast<std::size_t>(t - 1)];
      losses[static_cast<std::size_t>(t - 1)] = snap_loss(std::clamp(l, 0.0, 1.0));
    }
    losses.back() = d.nu;
    arms.emplace(ArmId("a" + padded(static_cast<std::int64_t>(a), static_cast<std::int64_t>(draws.size()))),
                 ArmCurves{LossCurve{std::move(losses)}, CostCurve{std::vector<double>(static_cast<std::size_t>(T), 1.0)}});
  }
  return TaskBench(id, T, std::move(arms));
}

inline std::vector<ArmDraw> draw_instance(Rng& rng, std::int64_t n) {
  std::vector<ArmDraw> draws(static_cast<std::size_t>(n));
  for (;;) {
    for (auto& d : draws) d.nu = snap_loss(rng.uniform(0.05, 0.65));
    std::vector<double> nus;
    for (const auto& d : draws) nus.push_back(d.nu);
    std::sort(nus.begin(), nus.end());
    if (nus[1] - nus[0] >= 1e-3) break;
  }
  for (auto& d : draws) {
    d.c = rng.uniform(0.05, 0.4);
    d.rate = rng.uniform(0.3, 0.85);
    d.sign = rng.uniform() < 0.25 ? -1.0 : 1.0;
    d.amp = rng.uniform(0.0, 0.05);
    d.window = 1 + static_cast<std::int64_t>(rng.below(16));
    for (std::int64_t t = 0; t < d.window; ++t) d.noise.push_back(d.amp * (2.0 * rng.uniform() - 1.0));
  }
  return draws;
}

inline ArmSet regime_store(const TaskBench& task, StoreRegime regime, Rng& rng) {
  switch (regime) {
    case StoreRegime::empty: return {};
    case StoreRegime::best: return {true_best_arm(task)};
    case StoreRegime::worst: {
      const auto& arms = task.arms();
      auto worst = arms.begin();
      for (auto it = arms.begin(); it != arms.end(); ++it) {
        if (it->second.loss.limit() > worst->second.loss.limit()) worst = it;
      }
      return {worst->first};
    }
    case StoreRegime::random: {
      ArmSet s;
      for (const auto& id : task.arm_ids()) {
        if (rng.uniform() < 0.5) s.insert(id);
      }
      return s;
    }
  }
  return {};
}

// Smallest B such that, with R_k the cumulative pulls after round k and
// m_k = max(1, floor(n / eta^(k+1))):
//   fewer than m_k arms a != best have tau_a > R_k, for every round k;
//   R_0 >= tau_a for every incumbent a != best;
//   R_0 >= max_a tau_a when the best arm is an incumbent (it must rank 0).
// Under these conditions the best arm is never cut, whatever the curves do
// before tau. Requires a strict best arm.
inline std::int64_t separation_budget(const TaskBench& task, const ArmSet& incumbents, std::int64_t eta) {
  const auto q = compute_quantities(task, incumbents);
  const auto n = static_cast<std::int64_t>(task.size());
  if (n < 2) return 1;
  std::vector<std::int64_t> taus;
  std::int64_t all_tau = 0;
  for (const auto& [a, t] : q.tau) {
    if (a == q.best) continue;
    if (!t) throw TiedBestArm("arm " + a.str() + " ties the best arm " + q.best.str());
    taus.push_back(*t);
    all_tau = std::max(all_tau, *t);
  }
  const std::int64_t first_rung_min = incumbents.contains(q.best) ? all_tau : q.z;
  const auto holds = [&](std::int64_t B) {
    std::int64_t done = 0;
    std::int64_t k = 0;
    for (const auto& p : rush_plan(n, SchedulerConfig{eta, B, std::nullopt})) {
      done += p.pulls;
      if (k == 0 && done < first_rung_min) return false;
      const auto open = std::count_if(taus.begin(), taus.end(), [&](auto t) { return t > done; });
      if (open >= std::max<std::int64_t>(1, p.promote)) return false;
      ++k;
    }
    return true;
  };
  std::int64_t B = n * ceil_log(n, eta);
  while (!holds(B)) ++B;
  return B;
}

inline VerifyReport verify_theorem(const VerifyOptions& opt) {
  if (opt.instances < 0) throw InvalidArgument("instances must be >= 0");
  if (opt.max_arms < 2) throw InvalidArgument("max_arms must be >= 2");
  if (opt.eta < 2) throw InvalidArgument("eta must be >= 2");
  VerifyReport report{opt, {}};
  for (std::int64_t i = 0; i < opt.instances; ++i) {
    Rng rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(i)}));
    const auto n = 2 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(opt.max_arms - 1)));
    const auto draws = draw_instance(rng, n);
    Rng store_rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(i), 1}));

    std::int64_t T = 64;
    TaskBench task = tabulate_instance("instance-" + std::to_string(i), draws, T);
    std::vector<std::pair<StoreRegime, ArmSet>> stores;
    std::vector<std::int64_t> budgets;
    std::vector<std::int64_t> separated;
    for (;;) {
      Rng pick(store_rng);
      stores.clear();
      budgets.clear();
      separated.clear();
      std::int64_t need = 0;
      for (auto regime : kRegimes) {
        auto store = regime_store(task, regime, pick);
        const auto q = compute_quantities(task, store);
        const auto B = theorem1_min_budget(q, n, opt.eta);
        const auto Bs = separation_budget(task, store, opt.eta);
        need = std::max(need, required_horizon(n, SchedulerConfig{opt.eta, std::max(B, Bs), std::nullopt}));
        stores.emplace_back(regime, std::move(store));
        budgets.push_back(B);
        separated.push_back(Bs);
      }
      if (need <= T) break;
      while (T < need) T *= 2;
      task = tabulate_instance("instance-" + std::to_string(i), draws, T);
    }

    const auto best = true_best_arm(task);
    for (std::size_t k = 0; k < stores.size(); ++k) {
      const auto& [regime, store] = stores[k];
      IncumbentStore inc(std::nullopt, std::vector<ArmId>(store.begin(), store.end()));
      const auto res = run_rush(task, task.arm_ids(), inc, SchedulerConfig{opt.eta, budgets[k], std::nullopt});
      const auto sep = run_rush(task, task.arm_ids(), inc, SchedulerConfig{opt.eta, separated[k], std::nullopt});
      report.cases.push_back(VerifyCase{i, regime, n, T, budgets[k], separated[k],
                                        std::vector<ArmId>(store.begin(), store.end()), best, res.selected,
                                        sep.selected});
    }
  }
  return report;
}

inline nlohmann::json verify_to_json(const VerifyReport& r) {
  nlohmann::json j;
  j["config"] = {{"instances", r.options.instances},
                 {"max_arms", r.options.max_arms},
                 {"eta", r.options.eta},
                 {"seed", r.options.seed}};
  for (auto regime : kRegimes) {
    j["regimes"][to_string(regime)] = {{"correct", r.correct(regime)},
                                       {"correct_at_separation_budget", r.correct_separated(regime)},
                                       {"total", r.total(regime)}};
  }
  auto& fails = j["failures"] = nlohmann::json::array();
  for (const auto& c : r.cases) {
    if (c.correct() && c.correct_separated()) continue;
    std::vector<std::string> store;
    for (const auto& a : c.store) store.push_back(a.str());
    fails.push_back({{"instance", c.instance},
                     {"regime", to_string(c.regime)},
                     {"n", c.n},
                     {"horizon", c.horizon},
                     {"budget", c.budget},
                     {"separation_budget", c.separation_budget},
                     {"store", store},
                     {"best", c.best.str()},
                     {"selected", c.selected.str()},
                     {"selected_at_separation_budget", c.selected_separated.str()}});
  }
  return j;
}

}  // namespace rush
