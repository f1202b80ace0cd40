#pragma once

// Rung-based schedulers: Successive Halving, RUSH, Hyperband and HB-RUSH.
//
// All four share one round engine. A round pulls every active arm the same
// number of times, ranks the active arms by their latest loss and keeps the
// ranks strictly below
//
//     max(min(r*, promote), 1)
//
// where promote = floor(n / eta^(k+1)) is the SH cut for the round and r* is
// the best rank of an incumbent that is still active (+inf when none is).
// With no incumbents this is plain SH. With an incumbent at rank 0 only the
// incumbent survives; with an incumbent at rank r > 0 only the r arms beating
// it survive. Budget saved by early pruning is never redistributed.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "json.hpp"
#include "rush/core.hpp"
#include "rush/errors.hpp"

namespace rush {

// ---------------------------------------------------------------------------
// integer helpers

// Smallest L >= 0 with eta^L >= n.
inline std::int64_t ceil_log(std::int64_t n, std::int64_t eta) {
  if (n < 1 || eta < 2) throw InvalidArgument("ceil_log needs n >= 1 and eta >= 2");
  std::int64_t levels = 0;
  std::int64_t power = 1;
  while (power < n) {
    power *= eta;
    ++levels;
  }
  return levels;
}

// Largest s >= 0 with eta^s <= n.
inline std::int64_t floor_log(std::int64_t n, std::int64_t eta) {
  if (n < 1 || eta < 2) throw InvalidArgument("floor_log needs n >= 1 and eta >= 2");
  std::int64_t levels = 0;
  while (n >= eta) {
    n /= eta;
    ++levels;
  }
  return levels;
}

// floor(n / eta^k) without forming eta^k.
inline std::int64_t div_pow(std::int64_t n, std::int64_t eta, std::int64_t k) {
  for (std::int64_t i = 0; i < k && n > 0; ++i) n /= eta;
  return n;
}

inline std::int64_t int_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t out = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (out > std::numeric_limits<std::int64_t>::max() / base) {
      throw InvalidArgument("integer power overflows");
    }
    out *= base;
  }
  return out;
}

// ---------------------------------------------------------------------------
// configuration and incumbent store

struct SchedulerConfig {
  std::int64_t eta = 3;
  std::int64_t budget = 1;                      // pulls per BAI problem
  std::optional<std::size_t> incumbent_cap;     // nullopt = unlimited

  void validate() const {
    if (eta < 2) throw InvalidArgument("eta must be >= 2");
    if (budget < 1) throw InvalidArgument("budget must be >= 1");
    if (incumbent_cap && *incumbent_cap == 0) throw InvalidArgument("incumbent cap must be positive");
  }

  friend bool operator==(const SchedulerConfig&, const SchedulerConfig&) = default;
};

// Winners of previous tasks, oldest first. Over capacity, the oldest entry
// is evicted.
class IncumbentStore {
 public:
  IncumbentStore() = default;
  explicit IncumbentStore(std::optional<std::size_t> cap) : cap_(cap) {
    if (cap_ && *cap_ == 0) throw InvalidArgument("incumbent cap must be positive");
  }
  IncumbentStore(std::optional<std::size_t> cap, std::vector<ArmId> entries) : IncumbentStore(cap) {
    for (auto& e : entries) {
      if (contains(e)) throw InvalidArgument("duplicate incumbent " + e.str());
      entries_.push_back(std::move(e));
    }
    if (cap_ && entries_.size() > *cap_) throw InvalidArgument("incumbent store over capacity");
  }

  const std::vector<ArmId>& entries() const noexcept { return entries_; }
  std::optional<std::size_t> cap() const noexcept { return cap_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  bool contains(const ArmId& arm) const {
    return std::find(entries_.begin(), entries_.end(), arm) != entries_.end();
  }

  // Appends `arm` unless already present; returns whether it was added.
  bool insert(const ArmId& arm) {
    if (contains(arm)) return false;
    entries_.push_back(arm);
    if (cap_ && entries_.size() > *cap_) entries_.erase(entries_.begin());
    return true;
  }

  friend bool operator==(const IncumbentStore&, const IncumbentStore&) = default;

 private:
  std::optional<std::size_t> cap_;
  std::vector<ArmId> entries_;
};

inline IncumbentStore update_store(IncumbentStore store, const ArmId& selected) {
  store.insert(selected);
  return store;
}

inline nlohmann::json store_to_json(const IncumbentStore& store) {
  nlohmann::json j;
  j["cap"] = store.cap() ? nlohmann::json(*store.cap()) : nlohmann::json(nullptr);
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : store.entries()) entries.push_back(e.str());
  return j;
}

inline IncumbentStore store_from_json(const nlohmann::json& j) {
  try {
    std::optional<std::size_t> cap;
    if (!j.at("cap").is_null()) {
      const auto c = j.at("cap").get<std::int64_t>();
      if (c <= 0) throw FormatError("incumbent store cap must be positive or null");
      cap = static_cast<std::size_t>(c);
    }
    std::vector<ArmId> entries;
    for (const auto& e : j.at("entries")) entries.emplace_back(e.get<std::string>());
    return IncumbentStore(cap, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("incumbent store: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("incumbent store: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// round arithmetic

// Pulls each active arm receives in round k of RUSH/SH on n arms with
// budget B: floor(B / (max(1, floor(n / eta^k)) * ceil(log_eta n))).
// Zero means the budget cannot fund the round.
inline std::int64_t pulls_per_arm(std::int64_t budget, std::int64_t n, std::int64_t k, std::int64_t eta) {
  if (n < 2) throw InvalidArgument("pulls_per_arm needs n >= 2");
  if (k < 0 || eta < 2 || budget < 1) throw InvalidArgument("pulls_per_arm needs k >= 0, eta >= 2, B >= 1");
  const std::int64_t active = std::max<std::int64_t>(1, div_pow(n, eta, k));
  return budget / (active * ceil_log(n, eta));
}

// Number of ranks kept: max(min(r*, promote), 1).
inline std::int64_t keep_threshold(std::optional<std::size_t> best_incumbent_rank, std::int64_t promote) {
  std::int64_t t = promote;
  if (best_incumbent_rank) t = std::min<std::int64_t>(t, static_cast<std::int64_t>(*best_incumbent_rank));
  return std::max<std::int64_t>(t, 1);
}

inline std::optional<std::size_t> best_incumbent_rank(const Ranking& ranking, const ArmSet& incumbents) {
  std::optional<std::size_t> best;
  for (const auto& inc : incumbents) {
    auto it = ranking.ranks.find(inc);
    if (it == ranking.ranks.end()) continue;
    if (!best || it->second < *best) best = it->second;
  }
  return best;
}

// Survivors of round k, in rank order.
inline std::vector<ArmId> keep_set(const Ranking& ranking, const ArmSet& incumbents_active, std::int64_t n,
                                   std::int64_t k, std::int64_t eta) {
  const auto threshold = keep_threshold(best_incumbent_rank(ranking, incumbents_active), div_pow(n, eta, k + 1));
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(threshold), ranking.size());
  return {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(keep)};
}

// ---------------------------------------------------------------------------
// the round engine

struct RoundPlan {
  std::int64_t pulls;    // additional pulls per active arm this round
  std::int64_t promote;  // SH cut: floor(n / eta^(k+1))

  friend bool operator==(const RoundPlan&, const RoundPlan&) = default;
};

struct RungRecord {
  std::vector<ArmId> ranking;  // active arms, best first
  std::int64_t pulls_per_arm = 0;
  std::optional<std::size_t> best_incumbent_rank;
  std::int64_t threshold = 0;
  std::vector<ArmId> survivors;

  friend bool operator==(const RungRecord&, const RungRecord&) = default;
};

struct BaiResult {
  ArmId selected;
  PullLedger ledger;
  std::vector<RungRecord> rungs;
  std::vector<ArmId> skipped_incumbents;  // store entries absent from the task

  friend bool operator==(const BaiResult&, const BaiResult&) = default;
};

namespace detail {

inline BaiResult run_rounds(const TaskBench& task, std::vector<ArmId> pool, const ArmSet& incumbents,
                            const std::vector<RoundPlan>& plans, std::vector<ArmId> skipped) {
  if (pool.empty()) throw InvalidArgument("scheduler needs at least one arm");
  std::sort(pool.begin(), pool.end());
  PullLedger ledger;
  std::vector<RungRecord> rungs;
  std::vector<ArmId> active = pool;
  for (const auto& plan : plans) {
    std::map<ArmId, double> losses;
    for (const auto& arm : active) {
      pull(task, ledger, arm, plan.pulls);
      if (auto l = ledger.current_loss(arm)) losses.emplace(arm, *l);
    }
    const Ranking ranking = rank_by_current_loss(active, losses, incumbents);
    RungRecord rec;
    rec.ranking = ranking.order;
    rec.pulls_per_arm = plan.pulls;
    rec.best_incumbent_rank = best_incumbent_rank(ranking, incumbents);
    rec.threshold = keep_threshold(rec.best_incumbent_rank, plan.promote);
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(rec.threshold), ranking.size());
    rec.survivors.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(keep));
    active = rec.survivors;
    std::sort(active.begin(), active.end());
    rungs.push_back(std::move(rec));
  }
  ArmId selected = rungs.empty() ? pool.front() : rungs.back().ranking.front();
  return BaiResult{std::move(selected), std::move(ledger), std::move(rungs), std::move(skipped)};
}

}  // namespace detail

// Rounds RUSH/SH execute on n arms.
inline std::vector<RoundPlan> rush_plan(std::int64_t n, const SchedulerConfig& cfg) {
  std::vector<RoundPlan> plans;
  if (n < 2) return plans;
  const auto rounds = ceil_log(n, cfg.eta);
  for (std::int64_t k = 0; k < rounds; ++k) {
    plans.push_back(RoundPlan{pulls_per_arm(cfg.budget, n, k, cfg.eta), div_pow(n, cfg.eta, k + 1)});
  }
  if (plans.front().pulls == 0) {
    throw BudgetTooSmall("budget " + std::to_string(cfg.budget) + " cannot fund one pull per arm for " +
                         std::to_string(n) + " arms over " + std::to_string(rounds) + " rounds");
  }
  return plans;
}

// Most pulls any single arm can receive: the per-arm horizon a task needs.
inline std::int64_t required_horizon(std::int64_t n, const SchedulerConfig& cfg) {
  std::int64_t total = 0;
  for (const auto& p : rush_plan(n, cfg)) total += p.pulls;
  return total;
}

// RUSH on new_arms plus the store's incumbents present in the task. The
// store itself is not modified; see update_store.
inline BaiResult run_rush(const TaskBench& task, const std::vector<ArmId>& new_arms, const IncumbentStore& store,
                          const SchedulerConfig& cfg) {
  cfg.validate();
  ArmSet pool_set;
  for (const auto& a : new_arms) {
    if (!task.contains(a)) throw UnknownArm("task " + task.task_id() + " has no arm " + a.str());
    pool_set.insert(a);
  }
  ArmSet incumbents;
  std::vector<ArmId> skipped;
  for (const auto& inc : store.entries()) {
    if (task.contains(inc)) {
      incumbents.insert(inc);
      pool_set.insert(inc);
    } else {
      skipped.push_back(inc);
    }
  }
  std::vector<ArmId> pool(pool_set.begin(), pool_set.end());
  const auto plans = rush_plan(static_cast<std::int64_t>(pool.size()), cfg);
  return detail::run_rounds(task, std::move(pool), incumbents, plans, std::move(skipped));
}

inline BaiResult run_sh(const TaskBench& task, const std::vector<ArmId>& arms, const SchedulerConfig& cfg) {
  return run_rush(task, arms, IncumbentStore{}, cfg);
}

// ---------------------------------------------------------------------------
// incumbent injection

enum class Injection {
  append,    // merged pool = candidates + incumbents (pool grows)
  displace,  // incumbents take the slots of the last fresh candidates (pool size fixed)
};

inline std::string to_string(Injection i) { return i == Injection::append ? "append" : "displace"; }

inline Injection injection_from_string(const std::string& s) {
  if (s == "append") return Injection::append;
  if (s == "displace") return Injection::displace;
  throw InvalidArgument("unknown injection policy '" + s + "'");
}

struct InjectedPool {
  std::vector<ArmId> new_arms;
  IncumbentStore incumbents;  // uncapped view, store order
};

// Splits `candidates` into the new arms and incumbents handed to RUSH.
// With Injection::displace the merged pool has exactly candidates.size()
// arms, so RUSH and SH on `candidates` run identical round plans; at least
// one fresh candidate is always kept.
inline InjectedPool inject_incumbents(const TaskBench& task, const std::vector<ArmId>& candidates,
                                      const IncumbentStore& store, Injection policy) {
  if (policy == Injection::append) return InjectedPool{candidates, store};
  const ArmSet cand(candidates.begin(), candidates.end());
  std::vector<ArmId> inside;
  std::vector<ArmId> outside;  // most recent first
  for (auto it = store.entries().rbegin(); it != store.entries().rend(); ++it) {
    if (!task.contains(*it)) continue;
    (cand.contains(*it) ? inside : outside).push_back(*it);
  }
  std::vector<ArmId> fresh;
  for (const auto& c : candidates) {
    if (!store.contains(c)) fresh.push_back(c);
  }
  const std::size_t room = fresh.empty() ? 0 : fresh.size() - 1;
  const std::size_t displaced = std::min(outside.size(), room);
  const ArmSet dropped(fresh.end() - static_cast<std::ptrdiff_t>(displaced), fresh.end());
  std::vector<ArmId> new_arms;
  for (const auto& c : candidates) {
    if (!dropped.contains(c)) new_arms.push_back(c);
  }
  ArmSet used(inside.begin(), inside.end());
  used.insert(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(displaced));
  std::vector<ArmId> ordered;
  for (const auto& e : store.entries()) {
    if (used.contains(e)) ordered.push_back(e);
  }
  return InjectedPool{std::move(new_arms), IncumbentStore(std::nullopt, std::move(ordered))};
}

// ---------------------------------------------------------------------------
// Hyperband

struct Bracket {
  std::int64_t s;  // number of halvings
  std::int64_t n;  // arms drawn
  std::int64_t r;  // initial pulls per arm

  friend bool operator==(const Bracket&, const Bracket&) = default;
};

// s_max = floor(log_eta R); for s = s_max..0:
//   n_s = ceil((s_max + 1) * eta^s / (s + 1)),  r_s = floor(R / eta^s).
inline std::vector<Bracket> hyperband_brackets(std::int64_t max_pulls, std::int64_t eta) {
  if (max_pulls < 1 || eta < 2) throw InvalidArgument("hyperband needs R >= 1 and eta >= 2");
  const auto s_max = floor_log(max_pulls, eta);
  std::vector<Bracket> out;
  for (std::int64_t s = s_max; s >= 0; --s) {
    const auto num = (s_max + 1) * int_pow(eta, s);
    out.push_back(Bracket{s, (num + s) / (s + 1), div_pow(max_pulls, eta, s)});
  }
  return out;
}

// Rounds of bracket `b` on n arms. Cumulative pulls per surviving arm are
// r_s * eta^i for i < s and R at the last round.
inline std::vector<RoundPlan> bracket_plan(const Bracket& b, std::int64_t n, std::int64_t max_pulls,
                                           std::int64_t eta) {
  std::vector<RoundPlan> plans;
  std::int64_t done = 0;
  for (std::int64_t i = 0; i <= b.s; ++i) {
    const std::int64_t target = (i == b.s) ? max_pulls : b.r * int_pow(eta, i);
    plans.push_back(RoundPlan{target - done, div_pow(n, eta, i + 1)});
    done = target;
  }
  return plans;
}

// Pull total of bracket `b` when it runs as plain SH on b.n arms.
inline std::int64_t bracket_budget(const Bracket& b, std::int64_t max_pulls, std::int64_t eta) {
  std::int64_t total = 0;
  std::int64_t active = b.n;
  for (const auto& p : bracket_plan(b, b.n, max_pulls, eta)) {
    total += active * p.pulls;
    active = std::max<std::int64_t>(1, p.promote);
  }
  return total;
}

// Supplies the arms of bracket `index`: `count` distinct arms of the task.
using ArmSampler = std::function<std::vector<ArmId>(std::size_t index, std::size_t count)>;

struct BracketRun {
  Bracket bracket;
  BaiResult result;

  friend bool operator==(const BracketRun&, const BracketRun&) = default;
};

struct HyperbandResult {
  ArmId selected;
  std::size_t selected_bracket = 0;
  std::vector<BracketRun> brackets;

  std::int64_t total_pulls() const {
    std::int64_t n = 0;
    for (const auto& b : brackets) n += b.result.ledger.total_pulls();
    return n;
  }
  double total_time() const {
    double t = 0.0;
    for (const auto& b : brackets) t += b.result.ledger.total_time();
    return t;
  }

  friend bool operator==(const HyperbandResult&, const HyperbandResult&) = default;
};

// Hyperband over `task`; with a non-empty store every bracket runs as RUSH
// (HB-RUSH). Brackets are independent training runs, so each bracket keeps
// its own ledger. The winner is the bracket winner with the lowest latest
// loss (then incumbent, then id).
inline HyperbandResult run_hyperband(const TaskBench& task, const ArmSampler& sampler, const IncumbentStore& store,
                                     const SchedulerConfig& cfg, std::int64_t max_pulls,
                                     Injection policy = Injection::displace) {
  cfg.validate();
  if (max_pulls > task.horizon()) {
    throw HorizonExceeded("hyperband R=" + std::to_string(max_pulls) + " exceeds horizon " +
                          std::to_string(task.horizon()) + " of task " + task.task_id());
  }
  std::vector<ArmId> skipped;
  for (const auto& inc : store.entries()) {
    if (!task.contains(inc)) skipped.push_back(inc);
  }
  std::vector<BracketRun> runs;
  std::optional<std::tuple<double, bool, ArmId>> best;
  std::size_t best_bracket = 0;
  const auto brackets = hyperband_brackets(max_pulls, cfg.eta);
  for (std::size_t i = 0; i < brackets.size(); ++i) {
    const auto& b = brackets[i];
    const auto pool = inject_incumbents(task, sampler(i, static_cast<std::size_t>(b.n)), store, policy);
    ArmSet merged;
    for (const auto& a : pool.new_arms) {
      if (!task.contains(a)) throw UnknownArm("task " + task.task_id() + " has no arm " + a.str());
      merged.insert(a);
    }
    ArmSet incumbents;
    for (const auto& inc : pool.incumbents.entries()) {
      if (!task.contains(inc)) continue;
      incumbents.insert(inc);
      merged.insert(inc);
    }
    std::vector<ArmId> arms(merged.begin(), merged.end());
    const auto plans = bracket_plan(b, static_cast<std::int64_t>(arms.size()), max_pulls, cfg.eta);
    auto result = detail::run_rounds(task, std::move(arms), incumbents, plans, skipped);
    const double loss = result.ledger.current_loss(result.selected).value();
    std::tuple<double, bool, ArmId> key{loss, !incumbents.contains(result.selected), result.selected};
    if (!best || key < *best) {
      best = std::move(key);
      best_bracket = i;
    }
    runs.push_back(BracketRun{b, std::move(result)});
  }
  return HyperbandResult{std::get<2>(*best), best_bracket, std::move(runs)};
}

}  // namespace rush
