#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "rush/random.hpp"
#include "rush/schedulers.hpp"

using namespace rush;

namespace {

struct Row {
  std::int64_t n, r;
};

// Published schedule evaluated in floating point, independent of the
// integer helpers under test.
std::vector<Row> bracket_table(std::int64_t R, std::int64_t eta) {
  const auto s_max = static_cast<std::int64_t>(std::floor(std::log(static_cast<double>(R)) / std::log(eta) + 1e-9));
  std::vector<Row> out;
  for (std::int64_t s = s_max; s >= 0; --s) {
    const double pw = std::pow(static_cast<double>(eta), static_cast<double>(s));
    out.push_back({static_cast<std::int64_t>(std::ceil(static_cast<double>(s_max + 1) / static_cast<double>(s + 1) * pw - 1e-9)),
                   static_cast<std::int64_t>(std::floor(static_cast<double>(R) / pw + 1e-9))});
  }
  return out;
}

TaskBench random_task(Rng& rng, int n, std::int64_t T) {
  std::map<ArmId, ArmCurves> arms;
  for (int i = 0; i < n; ++i) {
    std::vector<double> l, c;
    const double nu = rng.uniform(0.1, 0.6);
    const double amp = rng.uniform(-0.2, 0.4);
    const double rate = rng.uniform(0.5, 0.95);
    for (std::int64_t t = 1; t <= T; ++t) {
      l.push_back(nu + amp * std::pow(rate, static_cast<double>(t)));
      c.push_back(rng.uniform(0.5, 2.0));
    }
    arms.emplace(ArmId("a" + std::to_string(100 + i)), ArmCurves{LossCurve{l}, CostCurve{c}});
  }
  return TaskBench("rnd", T, std::move(arms));
}

ArmSampler seeded_sampler(const TaskBench& task, std::uint64_t seed) {
  return [ids = task.arm_ids(), seed](std::size_t index, std::size_t count) {
    Rng rng(derive_seed(seed, {index}));
    return rng.sample(ids, count);
  };
}

}  // namespace

TEST(Brackets, NineAndTwentySevenMatchTable) {
  for (std::int64_t R : {1, 2, 3, 8, 9, 10, 26, 27, 28, 81, 100}) {
    for (std::int64_t eta : {2, 3, 4}) {
      const auto got = hyperband_brackets(R, eta);
      const auto want = bracket_table(R, eta);
      ASSERT_EQ(got.size(), want.size()) << R << " " << eta;
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].n, want[i].n) << R << " " << eta << " " << i;
        EXPECT_EQ(got[i].r, want[i].r) << R << " " << eta << " " << i;
        EXPECT_EQ(got[i].s, static_cast<std::int64_t>(got.size() - 1 - i));
      }
    }
  }
  const auto b9 = hyperband_brackets(9, 3);
  ASSERT_EQ(b9.size(), 3u);
  EXPECT_EQ((std::pair{b9[0].n, b9[0].r}), (std::pair<std::int64_t, std::int64_t>{9, 1}));
  EXPECT_EQ((std::pair{b9[1].n, b9[1].r}), (std::pair<std::int64_t, std::int64_t>{5, 3}));
  EXPECT_EQ((std::pair{b9[2].n, b9[2].r}), (std::pair<std::int64_t, std::int64_t>{3, 9}));
  const auto b27 = hyperband_brackets(27, 3);
  ASSERT_EQ(b27.size(), 4u);
  std::vector<std::int64_t> rs;
  for (const auto& b : b27) rs.push_back(b.r);
  EXPECT_EQ(rs, (std::vector<std::int64_t>{1, 3, 9, 27}));
  const auto b1 = hyperband_brackets(1, 3);
  ASSERT_EQ(b1.size(), 1u);
  EXPECT_EQ(b1[0].n, 1);
  EXPECT_EQ(b1[0].r, 1);
}

TEST(Brackets, PullTotalsForNine) {
  // hand table: (9,1): 9*1 + 3*2 + 1*6; (5,3): 5*3 + 1*6; (3,9): 3*9
  const auto b = hyperband_brackets(9, 3);
  EXPECT_EQ(bracket_budget(b[0], 9, 3), 21);
  EXPECT_EQ(bracket_budget(b[1], 9, 3), 21);
  EXPECT_EQ(bracket_budget(b[2], 9, 3), 27);
}

TEST(RunHyperband, PerBracketPullsMatchTable) {
  Rng rng(4);
  const auto task = random_task(rng, 30, 16);
  const auto res = run_hyperband(task, seeded_sampler(task, 1), IncumbentStore{}, SchedulerConfig{3, 1, std::nullopt}, 9);
  ASSERT_EQ(res.brackets.size(), 3u);
  EXPECT_EQ(res.brackets[0].result.ledger.total_pulls(), 21);
  EXPECT_EQ(res.brackets[1].result.ledger.total_pulls(), 21);
  EXPECT_EQ(res.brackets[2].result.ledger.total_pulls(), 27);
  EXPECT_EQ(res.total_pulls(), 69);
  for (const auto& b : res.brackets) {
    for (const auto& [arm, n] : b.result.ledger.pulls_per_arm()) EXPECT_LE(n, 9) << arm.str();
    EXPECT_EQ(b.result.ledger.pulls(b.result.selected), 9);
  }
}

TEST(RunHyperband, SingleBracketSelectsLikeSh) {
  Rng rng(5);
  const auto task = random_task(rng, 5, 4);
  const auto sampler = seeded_sampler(task, 2);
  const auto res = run_hyperband(task, sampler, IncumbentStore{}, SchedulerConfig{3, 1, std::nullopt}, 2);
  ASSERT_EQ(res.brackets.size(), 1u);
  const auto arms = sampler(0, 1);
  EXPECT_EQ(res.selected, run_sh(task, arms, SchedulerConfig{3, 1, std::nullopt}).selected);
}

TEST(RunHyperband, EmptyStoreEqualsPlainHyperband) {
  Rng rng(6);
  const auto task = random_task(rng, 40, 27);
  const auto sampler = seeded_sampler(task, 3);
  const SchedulerConfig cfg{3, 1, std::nullopt};
  const auto a = run_hyperband(task, sampler, IncumbentStore{}, cfg, 27, Injection::displace);
  const auto b = run_hyperband(task, sampler, IncumbentStore{}, cfg, 27, Injection::append);
  EXPECT_EQ(a, b);
}

TEST(RunHyperband, DominanceWithDisplacedIncumbents) {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const auto task = random_task(rng, 12 + static_cast<int>(rng.below(30)), 27);
    const auto sampler = seeded_sampler(task, static_cast<std::uint64_t>(trial));
    std::vector<ArmId> store;
    for (const auto& a : task.arm_ids()) {
      if (rng.uniform() < 0.1) store.push_back(a);
    }
    const std::int64_t R = trial % 2 == 0 ? 9 : 27;
    const SchedulerConfig cfg{3, 1, std::nullopt};
    const auto hb = run_hyperband(task, sampler, IncumbentStore{}, cfg, R);
    const auto hbr = run_hyperband(task, sampler, IncumbentStore(std::nullopt, store), cfg, R);
    EXPECT_LE(hbr.total_pulls(), hb.total_pulls());
    for (std::size_t i = 0; i < hb.brackets.size(); ++i) {
      EXPECT_LE(hbr.brackets[i].result.ledger.total_pulls(), hb.brackets[i].result.ledger.total_pulls());
    }
  }
}

TEST(RunHyperband, RejectsRPastHorizon) {
  Rng rng(8);
  const auto task = random_task(rng, 10, 8);
  EXPECT_THROW(run_hyperband(task, seeded_sampler(task, 0), IncumbentStore{}, SchedulerConfig{}, 9), HorizonExceeded);
}
