#pragma once

// Sequences of tasks through one scheduler, paired comparisons, budget
// sweeps, and their CSV/JSON reports.
//
// Randomness for repetition r comes from three streams of permutation_seed:
//   (0, r)            task order
//   (1, r, pos)       arms sampled for the task at position pos
//   (2, r, pos, i)    arms drawn for Hyperband bracket i
// so two specs that differ only in scheduler see identical tasks and arms.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rush/core.hpp"
#include "rush/errors.hpp"
#include "rush/random.hpp"
#include "rush/schedulers.hpp"

namespace rush {

enum class SchedulerKind { sh, rush, hb, hb_rush };

inline std::string to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::sh: return "sh";
    case SchedulerKind::rush: return "rush";
    case SchedulerKind::hb: return "hb";
    case SchedulerKind::hb_rush: return "hb_rush";
  }
  return "?";
}

inline SchedulerKind scheduler_from_string(const std::string& s) {
  if (s == "sh") return SchedulerKind::sh;
  if (s == "rush") return SchedulerKind::rush;
  if (s == "hb") return SchedulerKind::hb;
  if (s == "hb_rush") return SchedulerKind::hb_rush;
  throw InvalidArgument("unknown scheduler '" + s + "'");
}

inline bool is_hyperband(SchedulerKind k) { return k == SchedulerKind::hb || k == SchedulerKind::hb_rush; }

// The scheduler without transfer that `k` is measured against.
inline SchedulerKind baseline_of(SchedulerKind k) {
  if (k == SchedulerKind::rush) return SchedulerKind::sh;
  if (k == SchedulerKind::hb_rush) return SchedulerKind::hb;
  return k;
}

using Bench = std::shared_ptr<const std::vector<TaskBench>>;

inline Bench make_bench(std::vector<TaskBench> tasks) {
  return std::make_shared<const std::vector<TaskBench>>(std::move(tasks));
}

struct SequenceSpec {
  Bench bench;
  std::int64_t sequence_length = 20;
  std::int64_t repetitions = 25;
  std::uint64_t permutation_seed = 0;
  SchedulerKind scheduler = SchedulerKind::rush;
  SchedulerConfig cfg;
  std::int64_t arms_per_task = 0;  // 0 = every arm of the task
  std::int64_t max_pulls = 0;      // R, Hyperband variants only
  Injection injection = Injection::displace;
  std::vector<std::int64_t> levels;  // empty = rung levels of the scheduler

  void validate() const {
    if (!bench || bench->empty()) throw InvalidArgument("sequence needs a non-empty bench");
    if (sequence_length < 1) throw InvalidArgument("sequence length must be >= 1");
    if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    if (arms_per_task < 0) throw InvalidArgument("arms_per_task must be >= 0");
    for (const auto& t : *bench) {
      if (arms_per_task > static_cast<std::int64_t>(t.size())) {
        throw InvalidArgument("arms_per_task " + std::to_string(arms_per_task) + " exceeds the " +
                              std::to_string(t.size()) + " arms of task " + t.task_id());
      }
    }
    if (is_hyperband(scheduler) && max_pulls < 1) throw InvalidArgument("Hyperband needs R >= 1");
    cfg.validate();
    std::int64_t prev = 0;
    for (auto l : levels) {
      if (l < 1 || l <= prev) throw InvalidArgument("levels must be ascending and >= 1");
      prev = l;
    }
  }
};

// Pull total of the largest Hyperband bracket for R: the budget that makes
// one SH/RUSH run cost the same as one Hyperband bracket.
inline std::int64_t single_bracket_budget(std::int64_t max_pulls, std::int64_t eta) {
  const auto brackets = hyperband_brackets(max_pulls, eta);
  return bracket_budget(brackets.front(), max_pulls, eta);
}

// Largest SH/RUSH budget for n arms whose surviving arm needs at most R
// pulls. A single arm needs no budget; R is returned.
inline std::int64_t max_feasible_budget(std::int64_t n, std::int64_t eta, std::int64_t max_pulls) {
  if (n < 1 || eta < 2 || max_pulls < 1) throw InvalidArgument("max_feasible_budget: n, R >= 1 and eta >= 2 required");
  if (n == 1) return max_pulls;
  auto fits = [&](std::int64_t b) { return required_horizon(n, SchedulerConfig{eta, b, std::nullopt}) <= max_pulls; };
  std::int64_t lo = n * ceil_log(n, eta);  // smallest budget with one pull per arm
  if (!fits(lo)) {
    throw BudgetTooSmall("no budget fits " + std::to_string(n) + " arms into " + std::to_string(max_pulls) +
                         " pulls per arm");
  }
  std::int64_t hi = lo * (max_pulls + 1);  // rung 0 alone exceeds R
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// candidates per resource level

// levels[i] -> number of arms with at least levels[i] cumulative pulls.
inline std::map<std::int64_t, std::int64_t> candidates_per_level(const PullLedger& ledger,
                                                                 const std::vector<std::int64_t>& levels) {
  std::map<std::int64_t, std::int64_t> out;
  for (auto l : levels) {
    std::int64_t count = 0;
    for (const auto& [_, n] : ledger.pulls_per_arm()) count += n >= l ? 1 : 0;
    out[l] = count;
  }
  return out;
}

// Cumulative per-arm pulls after each rung, for the scheduler's default levels.
inline std::vector<std::int64_t> default_levels(const SequenceSpec& spec) {
  std::vector<std::int64_t> levels;
  if (is_hyperband(spec.scheduler)) {
    for (const auto& b : hyperband_brackets(spec.max_pulls, spec.cfg.eta)) {
      std::int64_t done = 0;
      for (const auto& p : bracket_plan(b, b.n, spec.max_pulls, spec.cfg.eta)) {
        done += p.pulls;
        levels.push_back(done);
      }
    }
  } else {
    std::int64_t n = spec.arms_per_task;
    if (n == 0) {
      n = static_cast<std::int64_t>(spec.bench->front().size());
      for (const auto& t : *spec.bench) n = std::min<std::int64_t>(n, static_cast<std::int64_t>(t.size()));
    }
    // an unfundable budget is reported by the run itself, with task context
    try {
      std::int64_t done = 0;
      for (const auto& p : rush_plan(n, spec.cfg)) {
        done += p.pulls;
        levels.push_back(done);
      }
    } catch (const BudgetTooSmall&) {
    }
  }
  levels.push_back(1);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  levels.erase(std::remove_if(levels.begin(), levels.end(), [](auto l) { return l < 1; }), levels.end());
  return levels;
}

// ---------------------------------------------------------------------------
// running a sequence

struct TaskRecord {
  std::int64_t repetition = 0;
  std::int64_t position = 0;
  std::string task_id;
  SchedulerKind scheduler = SchedulerKind::sh;
  ArmId selected{"?"};
  double regret = 0.0;
  std::int64_t pulls = 0;
  double sim_time = 0.0;
  std::int64_t incumbents_in_pool = 0;
  std::int64_t first_rung_pulls = 0;    // per arm, first bracket for Hyperband
  std::vector<std::int64_t> candidates;  // aligned with the report's levels

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

struct RepetitionResult {
  std::vector<TaskRecord> tasks;
  double cumulative_regret = 0.0;
  std::int64_t pulls = 0;
  double sim_time = 0.0;
  IncumbentStore final_store;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

// Sums in index order, then mean = sum / n.
inline Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct SequenceReport {
  SequenceSpec spec;
  std::vector<std::int64_t> levels;
  std::vector<RepetitionResult> repetitions;

  Stat cumulative_regret;
  Stat pulls;
  Stat sim_time;
  std::vector<double> candidates_per_task_mean;      // per level
  std::vector<double> candidates_per_sequence_total;  // per level, mean over repetitions

  std::vector<TaskRecord> records() const {
    std::vector<TaskRecord> out;
    for (const auto& r : repetitions) out.insert(out.end(), r.tasks.begin(), r.tasks.end());
    return out;
  }
};

// Task indices for one repetition: without replacement when the bench has at
// least S tasks, with replacement otherwise.
inline std::vector<std::size_t> task_order(std::size_t bench_size, std::int64_t sequence_length, std::uint64_t seed,
                                           std::int64_t repetition) {
  Rng rng(derive_seed(seed, {0, static_cast<std::uint64_t>(repetition)}));
  const auto S = static_cast<std::size_t>(sequence_length);
  if (bench_size >= S) {
    std::vector<std::size_t> idx(bench_size);
    for (std::size_t i = 0; i < bench_size; ++i) idx[i] = i;
    return rng.sample(std::move(idx), S);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < S; ++i) out.push_back(static_cast<std::size_t>(rng.below(bench_size)));
  return out;
}

inline std::vector<ArmId> sample_arms(const TaskBench& task, std::int64_t count, std::uint64_t seed,
                                      std::int64_t repetition, std::int64_t position) {
  Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(repetition), static_cast<std::uint64_t>(position)}));
  const auto k = count == 0 ? task.size() : static_cast<std::size_t>(count);
  return rng.sample(task.arm_ids(), k);
}

namespace detail {

template <typename E>
void rethrow_if(const Error& e, const std::string& context) {
  if (dynamic_cast<const E*>(&e) != nullptr) throw E(context + e.what());
}

// Re-raises the in-flight rush::Error as the same type, prefixed with context.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const Error& e) {
    rethrow_if<InvalidArgument>(e, context);
    rethrow_if<UnknownArm>(e, context);
    rethrow_if<HorizonExceeded>(e, context);
    rethrow_if<MissingLoss>(e, context);
    rethrow_if<BudgetTooSmall>(e, context);
    rethrow_if<TiedBestArm>(e, context);
    rethrow_if<InvalidSpec>(e, context);
    rethrow_if<LossOutOfRange>(e, context);
    rethrow_if<IoError>(e, context);
    rethrow_if<FormatError>(e, context);
    rethrow_if<SpecMismatch>(e, context);
    throw Error(context + e.what());
  }
}

inline std::vector<std::int64_t> level_counts(const std::vector<const PullLedger*>& ledgers,
                                              const std::vector<std::int64_t>& levels) {
  std::vector<std::int64_t> out(levels.size(), 0);
  for (const auto* l : ledgers) {
    const auto c = candidates_per_level(*l, levels);
    for (std::size_t i = 0; i < levels.size(); ++i) out[i] += c.at(levels[i]);
  }
  return out;
}

}  // namespace detail

inline RepetitionResult run_repetition(const SequenceSpec& spec, const std::vector<std::int64_t>& levels,
                                       std::int64_t rep) {
  RepetitionResult out;
  out.final_store = IncumbentStore(spec.cfg.incumbent_cap);
  const auto& bench = *spec.bench;
  const auto order = task_order(bench.size(), spec.sequence_length, spec.permutation_seed, rep);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const TaskBench& task = bench[order[pos]];
    const auto position = static_cast<std::int64_t>(pos);
    TaskRecord rec;
    rec.repetition = rep;
    rec.position = position;
    rec.task_id = task.task_id();
    rec.scheduler = spec.scheduler;
    try {
      const auto candidates = sample_arms(task, spec.arms_per_task, spec.permutation_seed, rep, position);
      if (!is_hyperband(spec.scheduler)) {
        BaiResult res = [&] {
          if (spec.scheduler == SchedulerKind::sh) return run_sh(task, candidates, spec.cfg);
          const auto pool = inject_incumbents(task, candidates, out.final_store, spec.injection);
          return run_rush(task, pool.new_arms, pool.incumbents, spec.cfg);
        }();
        rec.selected = res.selected;
        rec.pulls = res.ledger.total_pulls();
        rec.sim_time = res.ledger.total_time();
        rec.first_rung_pulls = res.rungs.empty() ? 0 : res.rungs.front().pulls_per_arm;
        if (spec.scheduler == SchedulerKind::rush) {
          for (const auto& a : res.ledger.pulls_per_arm()) {
            rec.incumbents_in_pool += out.final_store.contains(a.first) ? 1 : 0;
          }
        }
        rec.candidates = detail::level_counts({&res.ledger}, levels);
      } else {
        const ArmSampler sampler = [&](std::size_t index, std::size_t count) {
          Rng rng(derive_seed(spec.permutation_seed, {2, static_cast<std::uint64_t>(rep),
                                                      static_cast<std::uint64_t>(position), index}));
          return rng.sample(candidates, count);
        };
        const IncumbentStore empty(spec.cfg.incumbent_cap);
        const auto& store = spec.scheduler == SchedulerKind::hb_rush ? out.final_store : empty;
        const auto res = run_hyperband(task, sampler, store, spec.cfg, spec.max_pulls, spec.injection);
        rec.selected = res.selected;
        rec.pulls = res.total_pulls();
        rec.sim_time = res.total_time();
        const auto& first = res.brackets.front().result;
        rec.first_rung_pulls = first.rungs.empty() ? 0 : first.rungs.front().pulls_per_arm;
        std::vector<const PullLedger*> ledgers;
        for (const auto& b : res.brackets) {
          ledgers.push_back(&b.result.ledger);
          if (spec.scheduler == SchedulerKind::hb_rush) {
            for (const auto& a : b.result.ledger.pulls_per_arm()) {
              rec.incumbents_in_pool += out.final_store.contains(a.first) ? 1 : 0;
            }
          }
        }
        rec.candidates = detail::level_counts(ledgers, levels);
      }
    } catch (const Error&) {
      detail::rethrow_with_context("repetition " + std::to_string(rep) + ", position " + std::to_string(pos) +
                                   " (task " + task.task_id() + "): ");
    }
    rec.regret = task.limit(rec.selected) - task.limit(true_best_arm(task));
    if (spec.scheduler == SchedulerKind::rush || spec.scheduler == SchedulerKind::hb_rush) {
      out.final_store.insert(rec.selected);
    }
    out.cumulative_regret += rec.regret;
    out.pulls += rec.pulls;
    out.sim_time += rec.sim_time;
    out.tasks.push_back(std::move(rec));
  }
  return out;
}

// Runs every repetition (up to `jobs` at a time) and merges them in
// repetition order, so the report does not depend on `jobs`.
inline SequenceReport run_sequence(const SequenceSpec& spec, std::size_t jobs = 1) {
  spec.validate();
  SequenceReport report;
  report.spec = spec;
  report.levels = spec.levels.empty() ? default_levels(spec) : spec.levels;

  const auto reps = static_cast<std::size_t>(spec.repetitions);
  std::vector<RepetitionResult> results(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        results[r] = run_repetition(spec, report.levels, static_cast<std::int64_t>(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, reps));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  report.repetitions = std::move(results);

  std::vector<double> regret;
  std::vector<double> pulls;
  std::vector<double> time;
  const auto L = report.levels.size();
  std::vector<double> level_sum(L, 0.0);
  std::vector<double> level_seq(L, 0.0);
  double task_count = 0.0;
  for (const auto& r : report.repetitions) {
    regret.push_back(r.cumulative_regret);
    pulls.push_back(static_cast<double>(r.pulls));
    time.push_back(r.sim_time);
    for (const auto& t : r.tasks) {
      for (std::size_t i = 0; i < L; ++i) level_sum[i] += static_cast<double>(t.candidates[i]);
      task_count += 1.0;
    }
  }
  for (std::size_t i = 0; i < L; ++i) {
    report.candidates_per_task_mean.push_back(level_sum[i] / task_count);
    level_seq[i] = level_sum[i] / static_cast<double>(reps);
  }
  report.candidates_per_sequence_total = level_seq;
  report.cumulative_regret = summarize(regret);
  report.pulls = summarize(pulls);
  report.sim_time = summarize(time);
  return report;
}

// ---------------------------------------------------------------------------
// paired comparison

struct ComparisonReport {
  SequenceReport baseline;
  SequenceReport candidate;
  double time_reduction_pct = 0.0;  // 100 * (time_base - time_cand) / time_base over all tasks
  double pull_reduction_pct = 0.0;
  double regret_delta = 0.0;        // mean cumulative regret, candidate - baseline
  std::int64_t dominance_violations = 0;  // tasks where the candidate pulled more
  std::int64_t selection_mismatches = 0;  // tasks where the two picked different arms
  double max_extra_time = 0.0;            // max over tasks of time_cand - time_base (0 if never positive)
};

inline bool same_except_scheduler(const SequenceSpec& a, const SequenceSpec& b) {
  const bool bench_same = a.bench == b.bench || (a.bench && b.bench && *a.bench == *b.bench);
  return bench_same && a.sequence_length == b.sequence_length && a.repetitions == b.repetitions &&
         a.permutation_seed == b.permutation_seed && a.cfg == b.cfg && a.arms_per_task == b.arms_per_task &&
         a.max_pulls == b.max_pulls && a.injection == b.injection && a.levels == b.levels;
}

inline double reduction_pct(double base, double cand) { return base == 0.0 ? 0.0 : 100.0 * (base - cand) / base; }

inline ComparisonReport compare(const SequenceSpec& baseline, const SequenceSpec& candidate, std::size_t jobs = 1) {
  if (!same_except_scheduler(baseline, candidate)) {
    throw SpecMismatch("compared specs must differ only in scheduler");
  }
  ComparisonReport out;
  out.baseline = run_sequence(baseline, jobs);
  out.candidate = run_sequence(candidate, jobs);
  double base_time = 0.0;
  double cand_time = 0.0;
  double base_pulls = 0.0;
  double cand_pulls = 0.0;
  for (std::size_t r = 0; r < out.baseline.repetitions.size(); ++r) {
    const auto& b = out.baseline.repetitions[r];
    const auto& c = out.candidate.repetitions[r];
    base_time += b.sim_time;
    cand_time += c.sim_time;
    base_pulls += static_cast<double>(b.pulls);
    cand_pulls += static_cast<double>(c.pulls);
    for (std::size_t i = 0; i < b.tasks.size(); ++i) {
      const auto& tb = b.tasks[i];
      const auto& tc = c.tasks[i];
      if (tc.pulls > tb.pulls) ++out.dominance_violations;
      if (!(tc.selected == tb.selected)) ++out.selection_mismatches;
      out.max_extra_time = std::max(out.max_extra_time, tc.sim_time - tb.sim_time);
    }
  }
  out.time_reduction_pct = reduction_pct(base_time, cand_time);
  out.pull_reduction_pct = reduction_pct(base_pulls, cand_pulls);
  out.regret_delta = out.candidate.cumulative_regret.mean - out.baseline.cumulative_regret.mean;
  return out;
}

// ---------------------------------------------------------------------------
// budget sweep

struct SweepPoint {
  std::int64_t budget = 0;
  std::optional<std::string> error;
  double candidate_mean_regret = 0.0;  // mean per-task regret
  double baseline_mean_regret = 0.0;
  double candidate_mean_pulls = 0.0;   // mean per-task pulls
  double baseline_mean_pulls = 0.0;
  double time_reduction_pct = 0.0;
  double pull_reduction_pct = 0.0;
};

inline double mean_task_regret(const SequenceReport& r) {
  double sum = 0.0;
  double n = 0.0;
  for (const auto& rep : r.repetitions) {
    for (const auto& t : rep.tasks) {
      sum += t.regret;
      n += 1.0;
    }
  }
  return n == 0.0 ? 0.0 : sum / n;
}

inline double mean_task_pulls(const SequenceReport& r) {
  double sum = 0.0;
  double n = 0.0;
  for (const auto& rep : r.repetitions) {
    for (const auto& t : rep.tasks) {
      sum += static_cast<double>(t.pulls);
      n += 1.0;
    }
  }
  return n == 0.0 ? 0.0 : sum / n;
}

// One paired run (spec.scheduler against its baseline) per budget. The
// budget is B for SH/RUSH and R for the Hyperband variants. A failing budget
// yields an error entry and the sweep continues.
inline std::vector<SweepPoint> budget_sweep(const SequenceSpec& spec, const std::vector<std::int64_t>& budgets,
                                            std::size_t jobs = 1) {
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) throw InvalidArgument("sweep budgets must be strictly ascending");
  }
  std::vector<SweepPoint> out;
  for (auto b : budgets) {
    SweepPoint p;
    p.budget = b;
    try {
      SequenceSpec cand = spec;
      if (is_hyperband(spec.scheduler)) {
        cand.max_pulls = b;
      } else {
        cand.cfg.budget = b;
      }
      SequenceSpec base = cand;
      base.scheduler = baseline_of(spec.scheduler);
      const auto cmp = compare(base, cand, jobs);
      p.candidate_mean_regret = mean_task_regret(cmp.candidate);
      p.baseline_mean_regret = mean_task_regret(cmp.baseline);
      p.candidate_mean_pulls = mean_task_pulls(cmp.candidate);
      p.baseline_mean_pulls = mean_task_pulls(cmp.baseline);
      p.time_reduction_pct = cmp.time_reduction_pct;
      p.pull_reduction_pct = cmp.pull_reduction_pct;
    } catch (const Error& e) {
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// output

// Shortest representation that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader = "repetition,position,task_id,scheduler,selected_arm,regret,pulls,sim_time";

inline void write_csv_rows(std::ostream& out, const SequenceReport& report) {
  for (const auto& t : report.records()) {
    out << t.repetition << ',' << t.position << ',' << t.task_id << ',' << to_string(t.scheduler) << ','
        << t.selected.str() << ',' << format_double(t.regret) << ',' << t.pulls << ',' << format_double(t.sim_time)
        << '\n';
  }
}

inline void write_csv(std::ostream& out, const SequenceReport& report) {
  out << kCsvHeader << '\n';
  write_csv_rows(out, report);
}

inline nlohmann::json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::json spec_to_json(const SequenceSpec& spec) {
  nlohmann::json j;
  j["scheduler"] = to_string(spec.scheduler);
  j["sequence_length"] = spec.sequence_length;
  j["repetitions"] = spec.repetitions;
  j["permutation_seed"] = spec.permutation_seed;
  j["eta"] = spec.cfg.eta;
  j["budget"] = spec.cfg.budget;
  j["incumbent_cap"] = spec.cfg.incumbent_cap ? nlohmann::json(*spec.cfg.incumbent_cap) : nlohmann::json(nullptr);
  j["arms_per_task"] = spec.arms_per_task;
  j["max_pulls"] = spec.max_pulls;
  j["injection"] = to_string(spec.injection);
  j["levels"] = spec.levels;
  if (spec.bench) j["bench_tasks"] = spec.bench->size();
  return j;
}

inline nlohmann::json report_to_json(const SequenceReport& r) {
  nlohmann::json j;
  j["scheduler"] = to_string(r.spec.scheduler);
  j["cumulative_regret"] = stat_json(r.cumulative_regret);
  j["pulls"] = stat_json(r.pulls);
  j["sim_time"] = stat_json(r.sim_time);
  j["candidates_per_level"] = {{"levels", r.levels},
                               {"per_task_mean", r.candidates_per_task_mean},
                               {"per_sequence_total", r.candidates_per_sequence_total}};
  auto& reps = j["per_repetition"] = nlohmann::json::array();
  for (const auto& rep : r.repetitions) {
    reps.push_back({{"cumulative_regret", rep.cumulative_regret}, {"pulls", rep.pulls}, {"sim_time", rep.sim_time}});
  }
  return j;
}

inline nlohmann::json comparison_to_json(const ComparisonReport& c) {
  nlohmann::json j;
  j["baseline"] = report_to_json(c.baseline);
  j["candidate"] = report_to_json(c.candidate);
  j["time_reduction_pct"] = c.time_reduction_pct;
  j["pull_reduction_pct"] = c.pull_reduction_pct;
  j["regret_delta"] = c.regret_delta;
  j["dominance_violations"] = c.dominance_violations;
  j["selection_mismatches"] = c.selection_mismatches;
  j["max_extra_time"] = c.max_extra_time;
  return j;
}

inline constexpr const char* kSweepCsvHeader =
    "budget,candidate_mean_regret,baseline_mean_regret,candidate_mean_pulls,baseline_mean_pulls,time_reduction_pct,"
    "pull_reduction_pct,error";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << kSweepCsvHeader << '\n';
  for (const auto& p : points) {
    out << p.budget << ',';
    if (p.error) {
      std::string msg = *p.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      out << ",,,,,,\"" << msg << "\"\n";
      continue;
    }
    out << format_double(p.candidate_mean_regret) << ',' << format_double(p.baseline_mean_regret) << ','
        << format_double(p.candidate_mean_pulls) << ',' << format_double(p.baseline_mean_pulls) << ','
        << format_double(p.time_reduction_pct) << ',' << format_double(p.pull_reduction_pct) << ",\n";
  }
}

inline nlohmann::json sweep_to_json(const std::vector<SweepPoint>& points) {
  auto j = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json e{{"budget", p.budget}};
    if (p.error) {
      e["error"] = *p.error;
    } else {
      e["candidate_mean_regret"] = p.candidate_mean_regret;
      e["baseline_mean_regret"] = p.baseline_mean_regret;
      e["candidate_mean_pulls"] = p.candidate_mean_pulls;
      e["baseline_mean_pulls"] = p.baseline_mean_pulls;
      e["time_reduction_pct"] = p.time_reduction_pct;
      e["pull_reduction_pct"] = p.pull_reduction_pct;
    }
    j.push_back(std::move(e));
  }
  return j;
}

// ---------------------------------------------------------------------------
// re-reading a report CSV

struct CsvRow {
  std::int64_t repetition = 0;
  std::int64_t position = 0;
  std::string task_id;
  std::string scheduler;
  std::string selected_arm;
  double regret = 0.0;
  std::int64_t pulls = 0;
  double sim_time = 0.0;
};

inline std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("report CSV: unexpected header");
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw FormatError("report CSV line " + std::to_string(lineno) + ": expected 8 fields");
    try {
      rows.push_back(CsvRow{std::stoll(f[0]), std::stoll(f[1]), f[2], f[3], f[4], std::stod(f[5]), std::stoll(f[6]),
                            std::stod(f[7])});
    } catch (const std::exception&) {
      throw FormatError("report CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

// Per scheduler: mean/std over repetitions of cumulative regret, pulls and
// time, plus the pairwise time reduction against its baseline when present.
inline nlohmann::json summarize_csv(const std::vector<CsvRow>& rows) {
  struct Totals {
    double regret = 0.0;
    double pulls = 0.0;
    double time = 0.0;
    std::int64_t tasks = 0;
  };
  std::map<std::string, std::map<std::int64_t, Totals>> by_sched;
  for (const auto& r : rows) {
    auto& t = by_sched[r.scheduler][r.repetition];
    t.regret += r.regret;
    t.pulls += static_cast<double>(r.pulls);
    t.time += r.sim_time;
    ++t.tasks;
  }
  nlohmann::json j = nlohmann::json::object();
  std::map<std::string, double> total_time;
  for (const auto& [sched, reps] : by_sched) {
    std::vector<double> regret;
    std::vector<double> pulls;
    std::vector<double> time;
    std::int64_t tasks = 0;
    for (const auto& [_, t] : reps) {
      regret.push_back(t.regret);
      pulls.push_back(t.pulls);
      time.push_back(t.time);
      tasks += t.tasks;
      total_time[sched] += t.time;
    }
    j["schedulers"][sched] = {{"repetitions", reps.size()},
                              {"tasks", tasks},
                              {"cumulative_regret", stat_json(summarize(regret))},
                              {"pulls", stat_json(summarize(pulls))},
                              {"sim_time", stat_json(summarize(time))}};
  }
  for (const auto& [cand, base] : {std::pair{"rush", "sh"}, std::pair{"hb_rush", "hb"}}) {
    if (total_time.contains(cand) && total_time.contains(base)) {
      j["time_reduction_pct"][cand] = reduction_pct(total_time[base], total_time[cand]);
    }
  }
  return j;
}

}  // namespace rush
