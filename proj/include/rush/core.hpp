#pragma once

// Non-stochastic best-arm-identification environment over tabulated curves.
//
// A TaskBench holds, for every arm, the loss it reveals on its t-th pull and
// what that pull costs. Schedulers never see the tables directly: they go
// through pull(), which reads strictly at the arm's next cumulative index and
// records the observation in a PullLedger.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rush/errors.hpp"

namespace rush {

class ArmId {
 public:
  explicit ArmId(std::string id) : id_(std::move(id)) {
    if (id_.empty()) throw InvalidArgument("arm id must be non-empty");
  }
  ArmId(const char* id) : ArmId(std::string(id)) {}  // NOLINT: literal convenience

  const std::string& str() const noexcept { return id_; }

  friend auto operator<=>(const ArmId&, const ArmId&) = default;
  friend bool operator==(const ArmId&, const ArmId&) = default;

 private:
  std::string id_;
};

using ArmSet = std::set<ArmId>;

// losses[t-1] is the loss revealed by the t-th pull; the final entry is the
// arm's limit.
struct LossCurve {
  std::vector<double> losses;

  std::size_t horizon() const noexcept { return losses.size(); }
  double limit() const { return losses.back(); }
  double at(std::int64_t t) const { return losses.at(static_cast<std::size_t>(t - 1)); }

  friend bool operator==(const LossCurve&, const LossCurve&) = default;
};

// costs[t-1] is the simulated time charged for the t-th pull.
struct CostCurve {
  std::vector<double> costs;

  std::size_t horizon() const noexcept { return costs.size(); }
  double at(std::int64_t t) const { return costs.at(static_cast<std::size_t>(t - 1)); }

  friend bool operator==(const CostCurve&, const CostCurve&) = default;
};

struct ArmCurves {
  LossCurve loss;
  CostCurve cost;

  friend bool operator==(const ArmCurves&, const ArmCurves&) = default;
};

// One tuning task. Immutable once constructed; share it freely across runs.
class TaskBench {
 public:
  TaskBench(std::string task_id, std::int64_t horizon, std::map<ArmId, ArmCurves> arms)
      : task_id_(std::move(task_id)), horizon_(horizon), arms_(std::move(arms)) {
    if (horizon_ < 1) throw InvalidArgument("task " + task_id_ + ": horizon must be >= 1");
    if (arms_.empty()) throw InvalidArgument("task " + task_id_ + ": needs at least one arm");
    for (const auto& [id, curves] : arms_) {
      const auto where = "task " + task_id_ + ", arm " + id.str();
      if (static_cast<std::int64_t>(curves.loss.horizon()) != horizon_ ||
          static_cast<std::int64_t>(curves.cost.horizon()) != horizon_) {
        throw InvalidArgument(where + ": curve length differs from horizon " +
                              std::to_string(horizon_));
      }
      for (double l : curves.loss.losses) {
        if (!std::isfinite(l)) throw InvalidArgument(where + ": non-finite loss");
      }
      for (double c : curves.cost.costs) {
        if (!std::isfinite(c) || c < 0.0) throw InvalidArgument(where + ": cost must be finite and >= 0");
      }
    }
  }

  const std::string& task_id() const noexcept { return task_id_; }
  std::int64_t horizon() const noexcept { return horizon_; }
  const std::map<ArmId, ArmCurves>& arms() const noexcept { return arms_; }
  std::size_t size() const noexcept { return arms_.size(); }

  bool contains(const ArmId& arm) const { return arms_.contains(arm); }

  const ArmCurves& curves(const ArmId& arm) const {
    auto it = arms_.find(arm);
    if (it == arms_.end()) throw UnknownArm("task " + task_id_ + " has no arm " + arm.str());
    return it->second;
  }

  double limit(const ArmId& arm) const { return curves(arm).loss.limit(); }

  std::vector<ArmId> arm_ids() const {
    std::vector<ArmId> ids;
    ids.reserve(arms_.size());
    for (const auto& [id, _] : arms_) ids.push_back(id);
    return ids;
  }

  friend bool operator==(const TaskBench&, const TaskBench&) = default;

 private:
  std::string task_id_;
  std::int64_t horizon_;
  std::map<ArmId, ArmCurves> arms_;
};

struct PullEntry {
  ArmId arm;
  std::int64_t index;  // cumulative pull count of `arm` after this pull, 1-based
  double loss;
  double cost;

  friend bool operator==(const PullEntry&, const PullEntry&) = default;
};

// Append-only record of every pull in one scheduler run.
class PullLedger {
 public:
  void record(const ArmId& arm, double loss, double cost) {
    auto& n = pulls_[arm];
    ++n;
    entries_.push_back(PullEntry{arm, n, loss, cost});
    latest_loss_.insert_or_assign(arm, loss);
    ++total_pulls_;
    total_time_ += cost;
  }

  std::int64_t pulls(const ArmId& arm) const {
    auto it = pulls_.find(arm);
    return it == pulls_.end() ? 0 : it->second;
  }

  std::optional<double> current_loss(const ArmId& arm) const {
    auto it = latest_loss_.find(arm);
    if (it == latest_loss_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<PullEntry>& entries() const noexcept { return entries_; }
  const std::map<ArmId, std::int64_t>& pulls_per_arm() const noexcept { return pulls_; }
  std::int64_t total_pulls() const noexcept { return total_pulls_; }
  double total_time() const noexcept { return total_time_; }

  friend bool operator==(const PullLedger& a, const PullLedger& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<PullEntry> entries_;
  std::map<ArmId, std::int64_t> pulls_;
  std::map<ArmId, double> latest_loss_;
  std::int64_t total_pulls_ = 0;
  double total_time_ = 0.0;
};

// Pulls `arm` `count` more times and returns the revealed losses. The
// arm's current loss afterwards is the last returned value.
inline std::vector<double> pull(const TaskBench& task, PullLedger& ledger, const ArmId& arm,
                                std::int64_t count) {
  if (count < 0) throw InvalidArgument("pull count must be >= 0");
  const ArmCurves& curves = task.curves(arm);
  const std::int64_t done = ledger.pulls(arm);
  if (done + count > task.horizon()) {
    throw HorizonExceeded("task " + task.task_id() + ", arm " + arm.str() + ": " +
                          std::to_string(done + count) + " pulls requested, horizon is " +
                          std::to_string(task.horizon()));
  }
  std::vector<double> observed;
  observed.reserve(static_cast<std::size_t>(count));
  for (std::int64_t t = done + 1; t <= done + count; ++t) {
    const double loss = curves.loss.at(t);
    ledger.record(arm, loss, curves.cost.at(t));
    observed.push_back(loss);
  }
  return observed;
}

struct Ranking {
  std::vector<ArmId> order;          // order[r] holds rank r, 0 = lowest loss
  std::map<ArmId, std::size_t> ranks;

  std::size_t size() const noexcept { return order.size(); }
  std::size_t rank(const ArmId& arm) const { return ranks.at(arm); }

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

// Ascending by loss; ties go to incumbents first, then to the smaller id.
inline Ranking rank_by_current_loss(std::span<const ArmId> arms,
                                    const std::map<ArmId, double>& current_losses,
                                    const ArmSet& incumbents) {
  struct Key {
    double loss;
    bool incumbent;
    const ArmId* id;
  };
  std::vector<Key> keys;
  keys.reserve(arms.size());
  for (const ArmId& a : arms) {
    auto it = current_losses.find(a);
    if (it == current_losses.end()) throw MissingLoss("arm " + a.str() + " has no current loss");
    keys.push_back(Key{it->second, incumbents.contains(a), &a});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& x, const Key& y) {
    if (x.loss != y.loss) return x.loss < y.loss;
    if (x.incumbent != y.incumbent) return x.incumbent;
    return *x.id < *y.id;
  });
  Ranking r;
  r.order.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!r.ranks.emplace(*keys[i].id, i).second) {
      throw InvalidArgument("duplicate arm " + keys[i].id->str() + " in ranking");
    }
    r.order.push_back(*keys[i].id);
  }
  return r;
}

// Ground truth: argmin of the final loss, smallest id on ties. Oracles and
// metrics only; schedulers must not call this.
inline ArmId true_best_arm(const TaskBench& task) {
  const auto& arms = task.arms();
  auto best = arms.begin();
  for (auto it = std::next(arms.begin()); it != arms.end(); ++it) {
    if (it->second.loss.limit() < best->second.loss.limit()) best = it;
  }
  return best->first;
}

}  // namespace rush
