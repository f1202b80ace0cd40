// Runs SH and RUSH over the same sequence of related tasks and prints what
// each task cost.

#include <iostream>

#include "rush/rush.hpp"

int main() {
  rush::FamilySpec fam;
  fam.n_arms = 81;
  fam.horizon = 64;
  fam.n_tasks = 8;
  fam.rho = 0.9;
  fam.seed = 3;
  const auto bench = rush::make_bench(rush::generate_family(fam, rush::CostModel{rush::CostKind::lognormal, 1.0, 0.5}));

  rush::SequenceSpec sh;
  sh.bench = bench;
  sh.sequence_length = 8;
  sh.repetitions = 1;
  sh.scheduler = rush::SchedulerKind::sh;
  sh.cfg.budget = rush::max_feasible_budget(81, 3, 64);
  auto rs = sh;
  rs.scheduler = rush::SchedulerKind::rush;

  const auto cmp = rush::compare(sh, rs);
  const auto& a = cmp.baseline.repetitions[0].tasks;
  const auto& b = cmp.candidate.repetitions[0].tasks;
  std::cout << "task       sh pulls  rush pulls  sh pick   rush pick  rush regret\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::cout << a[i].task_id << "     " << a[i].pulls << "       " << b[i].pulls << "        " << a[i].selected.str()
              << "    " << b[i].selected.str() << "     " << b[i].regret << '\n';
  }
  std::cout << "time reduction: " << cmp.time_reduction_pct << "%\n";
}
