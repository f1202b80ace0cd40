#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rush/benchgen.hpp"
#include "rush/harness.hpp"

using namespace rush;

namespace {

// Shared best arm ranking first at every pull count: rho = 1, one decay per
// task, no noise.
Bench aligned_family(std::int64_t n_tasks = 6, std::int64_t n_arms = 27, std::int64_t T = 64) {
  FamilySpec s;
  s.n_arms = n_arms;
  s.n_tasks = n_tasks;
  s.horizon = T;
  s.rho = 1.0;
  s.noise = 0.0;
  s.shape_spread = 0.0;
  s.seed = 5;
  return make_bench(generate_family(s, {}));
}

SequenceSpec base_spec(Bench bench, SchedulerKind k, std::int64_t budget) {
  SequenceSpec spec;
  spec.bench = std::move(bench);
  spec.sequence_length = 5;
  spec.repetitions = 3;
  spec.permutation_seed = 11;
  spec.scheduler = k;
  spec.cfg.budget = budget;
  return spec;
}

// One slow starter with the lowest limit among quick-settling arms: SH finds
// it only once rung 0 gives every arm at least 20 pulls (0.8 * 0.9^t < 0.1).
Bench slow_starter_bench() {
  std::vector<TaskBench> tasks;
  for (int s = 0; s < 2; ++s) {
    std::map<ArmId, ArmCurves> arms;
    for (int i = 0; i < 9; ++i) {
      std::vector<double> l;
      for (int t = 1; t <= 200; ++t) {
        l.push_back(i == 0 ? 0.1 + 0.8 * std::pow(0.9, t) : 0.2 + 0.01 * i + 0.05 * std::pow(0.5, t));
      }
      l.back() = i == 0 ? 0.1 : 0.2 + 0.01 * i;
      arms.emplace(ArmId("c" + std::to_string(i)), ArmCurves{LossCurve{l}, CostCurve{std::vector<double>(200, 1.0)}});
    }
    tasks.emplace_back("slow-" + std::to_string(s), 200, std::move(arms));
  }
  return make_bench(std::move(tasks));
}

std::string csv_of(const SequenceReport& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

}  // namespace

TEST(CandidatesPerLevel, Examples) {
  std::map<ArmId, ArmCurves> arms;
  for (int i = 0; i < 9; ++i) {
    arms.emplace(ArmId("a" + std::to_string(i)), ArmCurves{LossCurve{std::vector<double>(20, 0.5)}, CostCurve{std::vector<double>(20, 1.0)}});
  }
  const TaskBench task("t", 20, arms);
  PullLedger ledger;
  for (int i = 0; i < 9; ++i) pull(task, ledger, ArmId("a" + std::to_string(i)), 5);
  for (int i = 0; i < 3; ++i) pull(task, ledger, ArmId("a" + std::to_string(i)), 15);
  const auto c = candidates_per_level(ledger, {1, 10});
  EXPECT_EQ(c.at(1), 9);
  EXPECT_EQ(c.at(10), 3);
  EXPECT_EQ(candidates_per_level(PullLedger{}, {1, 5}), (std::map<std::int64_t, std::int64_t>{{1, 0}, {5, 0}}));
  EXPECT_EQ(candidates_per_level(ledger, {1}).at(1), 9);
}

TEST(RunSequence, SingleTaskRushEqualsSh) {
  const auto bench = aligned_family();
  auto spec = base_spec(bench, SchedulerKind::rush, 200);
  spec.sequence_length = 1;
  spec.repetitions = 1;
  const auto rep = run_sequence(spec);
  const auto& rec = rep.repetitions[0].tasks[0];
  const auto& task = *std::find_if(bench->begin(), bench->end(), [&](const auto& t) { return t.task_id() == rec.task_id; });
  const auto sh = run_sh(task, sample_arms(task, 0, spec.permutation_seed, 0, 0), spec.cfg);
  EXPECT_EQ(rec.selected, sh.selected);
  EXPECT_EQ(rec.pulls, sh.ledger.total_pulls());
  EXPECT_EQ(rec.sim_time, sh.ledger.total_time());
}

TEST(RunSequence, LaterTasksPullLessOnAlignedFamily) {
  auto spec = base_spec(aligned_family(), SchedulerKind::rush, 200);
  const auto rep = run_sequence(spec);
  for (const auto& r : rep.repetitions) {
    ASSERT_EQ(r.tasks.size(), 5u);
    for (std::size_t i = 1; i < r.tasks.size(); ++i) EXPECT_LT(r.tasks[i].pulls, r.tasks[0].pulls);
    for (const auto& t : r.tasks) EXPECT_EQ(t.regret, 0.0);
  }
}

TEST(RunSequence, DeterministicAcrossRunsAndJobs) {
  for (auto k : {SchedulerKind::sh, SchedulerKind::rush, SchedulerKind::hb, SchedulerKind::hb_rush}) {
    auto spec = base_spec(aligned_family(), k, 200);
    spec.max_pulls = 27;
    spec.repetitions = 6;
    const auto a = run_sequence(spec, 1);
    const auto b = run_sequence(spec, 4);
    EXPECT_EQ(csv_of(a), csv_of(b));
    EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
    EXPECT_EQ(csv_of(a), csv_of(run_sequence(spec, 1)));
  }
}

TEST(RunSequence, AggregatesAreExactSums) {
  FamilySpec fs;
  fs.n_arms = 30;
  fs.n_tasks = 8;
  fs.horizon = 64;
  fs.rho = 0.5;
  auto spec = base_spec(make_bench(generate_family(fs, CostModel{CostKind::lognormal, 1.0, 0.5})), SchedulerKind::rush, 150);
  spec.arms_per_task = 20;
  const auto rep = run_sequence(spec);
  double sum = 0.0;
  for (const auto& r : rep.repetitions) {
    double regret = 0.0, time = 0.0;
    std::int64_t pulls = 0;
    for (const auto& t : r.tasks) {
      regret += t.regret;
      time += t.sim_time;
      pulls += t.pulls;
      for (std::size_t i = 1; i < t.candidates.size(); ++i) EXPECT_LE(t.candidates[i], t.candidates[i - 1]);
    }
    EXPECT_EQ(r.cumulative_regret, regret);
    EXPECT_EQ(r.sim_time, time);
    EXPECT_EQ(r.pulls, pulls);
    sum += r.cumulative_regret;
  }
  EXPECT_EQ(rep.cumulative_regret.mean, sum / 3.0);
}

TEST(RunSequence, OrderDependsOnlyOnSeedAndRepetition) {
  EXPECT_EQ(task_order(10, 5, 3, 2), task_order(10, 5, 3, 2));
  EXPECT_NE(task_order(10, 5, 3, 2), task_order(10, 5, 3, 1));
  const auto distinct = task_order(10, 10, 3, 0);
  EXPECT_EQ(std::set<std::size_t>(distinct.begin(), distinct.end()).size(), 10u);
  const auto repeated = task_order(3, 20, 3, 0);
  EXPECT_EQ(repeated.size(), 20u);
  for (auto i : repeated) EXPECT_LT(i, 3u);
}

TEST(RunSequence, ErrorsCarryPosition) {
  auto spec = base_spec(aligned_family(), SchedulerKind::sh, 10);
  try {
    run_sequence(spec);
    FAIL() << "expected BudgetTooSmall";
  } catch (const BudgetTooSmall& e) {
    EXPECT_NE(std::string(e.what()).find("position 0"), std::string::npos);
  }
  spec.arms_per_task = 1000;
  EXPECT_THROW(run_sequence(spec), InvalidArgument);
}

TEST(Compare, SelfComparisonIsZero) {
  const auto spec = base_spec(aligned_family(), SchedulerKind::sh, 200);
  const auto c = compare(spec, spec);
  EXPECT_EQ(c.time_reduction_pct, 0.0);
  EXPECT_EQ(c.regret_delta, 0.0);
  EXPECT_EQ(c.dominance_violations, 0);
}

TEST(Compare, RushSavesTimeOnAlignedFamily) {
  const auto sh = base_spec(aligned_family(), SchedulerKind::sh, 200);
  auto rush = sh;
  rush.scheduler = SchedulerKind::rush;
  const auto c = compare(sh, rush);
  EXPECT_GT(c.time_reduction_pct, 0.0);
  EXPECT_EQ(c.dominance_violations, 0);
  EXPECT_EQ(c.regret_delta, 0.0);
}

TEST(Compare, DominanceOnMixedFamiliesAndHyperband) {
  FamilySpec fs;
  fs.n_arms = 40;
  fs.n_tasks = 10;
  fs.horizon = 81;
  fs.rho = 0.7;
  fs.noise = 0.05;
  const auto bench = make_bench(generate_family(fs, CostModel{CostKind::lognormal, 1.0, 0.8}));
  for (auto [base, cand] : {std::pair{SchedulerKind::sh, SchedulerKind::rush}, std::pair{SchedulerKind::hb, SchedulerKind::hb_rush}}) {
    auto a = base_spec(bench, base, 300);
    a.arms_per_task = 27;
    a.max_pulls = 27;
    a.sequence_length = 8;
    auto b = a;
    b.scheduler = cand;
    const auto c = compare(a, b);
    EXPECT_EQ(c.dominance_violations, 0);
    EXPECT_GE(c.pull_reduction_pct, 0.0);
  }
}

TEST(Compare, MismatchedSpecs) {
  const auto a = base_spec(aligned_family(), SchedulerKind::sh, 200);
  auto b = a;
  b.scheduler = SchedulerKind::rush;
  b.cfg.budget = 201;
  EXPECT_THROW(compare(a, b), SpecMismatch);
  b = a;
  b.repetitions = 2;
  EXPECT_THROW(compare(a, b), SpecMismatch);
}

TEST(BudgetSweep, RegretNonIncreasingOnConstructedInstance) {
  auto spec = base_spec(slow_starter_bench(), SchedulerKind::rush, 1);
  spec.sequence_length = 2;
  spec.repetitions = 2;
  const auto pts = budget_sweep(spec, {18, 90, 180, 360, 720});
  ASSERT_EQ(pts.size(), 5u);
  for (const auto& p : pts) ASSERT_FALSE(p.error) << *p.error;
  // rung 0 gives B/18 pulls; the slow arm leads once it has 20
  EXPECT_NEAR(pts[0].baseline_mean_regret, 0.11, 1e-12);
  EXPECT_EQ(pts[3].baseline_mean_regret, 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i].candidate_mean_regret, pts[i - 1].candidate_mean_regret);
    EXPECT_LE(pts[i].baseline_mean_regret, pts[i - 1].baseline_mean_regret);
  }
}

TEST(BudgetSweep, RegretNonIncreasingOnNoiseFreeFamily) {
  auto spec = base_spec(aligned_family(), SchedulerKind::rush, 1);
  const auto pts = budget_sweep(spec, {90, 180, 360});
  for (const auto& p : pts) ASSERT_FALSE(p.error) << *p.error;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i].candidate_mean_regret, pts[i - 1].candidate_mean_regret);
  }
}

TEST(BudgetSweep, InfeasibleBudgetIsIsolated) {
  auto spec = base_spec(aligned_family(), SchedulerKind::rush, 1);
  const auto pts = budget_sweep(spec, {10, 200});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_TRUE(pts[0].error.has_value());
  EXPECT_FALSE(pts[1].error.has_value());
  EXPECT_THROW(budget_sweep(spec, {200, 100}), InvalidArgument);
}

TEST(BudgetSweep, SingleBudgetEqualsCompare) {
  auto spec = base_spec(aligned_family(), SchedulerKind::rush, 200);
  const auto pts = budget_sweep(spec, {200});
  auto base = spec;
  base.scheduler = SchedulerKind::sh;
  const auto c = compare(base, spec);
  EXPECT_EQ(pts[0].time_reduction_pct, c.time_reduction_pct);
  EXPECT_EQ(pts[0].candidate_mean_regret, mean_task_regret(c.candidate));
}

TEST(Reports, CsvShapeAndReread) {
  const auto spec = base_spec(aligned_family(), SchedulerKind::rush, 200);
  const auto rep = run_sequence(spec);
  std::istringstream in(csv_of(rep));
  const auto rows = read_csv(in);
  EXPECT_EQ(rows.size(), 15u);
  const auto j = summarize_csv(rows);
  EXPECT_EQ(j["schedulers"]["rush"]["cumulative_regret"]["mean"].get<double>(), rep.cumulative_regret.mean);
  EXPECT_EQ(j["schedulers"]["rush"]["sim_time"]["mean"].get<double>(), rep.sim_time.mean);
  std::istringstream bad("nope\n");
  EXPECT_THROW(read_csv(bad), FormatError);
}

TEST(Budget, SingleBracketTotal) {
  EXPECT_EQ(single_bracket_budget(9, 3), 21);
  EXPECT_EQ(single_bracket_budget(27, 3), bracket_budget(hyperband_brackets(27, 3).front(), 27, 3));
}

TEST(Budget, MaxFeasibleMatchesScan) {
  for (std::int64_t n : {2, 5, 9, 27, 40, 100}) {
    for (std::int64_t eta : {2, 3}) {
      for (std::int64_t R : {8, 32, 64}) {
        // scan upward from one pull per arm while the plan still fits
        std::int64_t best = 0;
        for (std::int64_t b = n * ceil_log(n, eta); b <= n * ceil_log(n, eta) * (R + 1); ++b) {
          if (required_horizon(n, SchedulerConfig{eta, b, std::nullopt}) <= R) best = b;
        }
        if (best == 0) {
          EXPECT_THROW(max_feasible_budget(n, eta, R), BudgetTooSmall) << n << " " << eta << " " << R;
        } else {
          EXPECT_EQ(max_feasible_budget(n, eta, R), best) << n << " " << eta << " " << R;
        }
      }
    }
  }
  EXPECT_EQ(max_feasible_budget(1, 3, 7), 7);
}
