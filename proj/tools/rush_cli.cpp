// rush: generate benches, run schedulers over task sequences, compare them,
// sweep budgets, check the correctness budget and summarize CSV reports.
//
// RUSH_LOG=trace|debug|info|warn|error|off sets stderr verbosity (default
// warn). It never changes any output file.

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rush/rush.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("rush");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("RUSH_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rush::IoError("cannot write " + path);
  return out;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  spdlog::info("wrote {}", path);
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  rush::FamilySpec family;
  std::string curve = "geometric";
  std::string cost_kind = "constant";
  double cost_location = 1.0;
  double cost_scale = 0.5;
  bool invert = false;
  std::string out;
};

void add_gen(CLI::App& app, GenArgs& a) {
  auto* cmd = app.add_subcommand("gen", "generate a synthetic task family and write it as a bench file");
  cmd->add_option("--arms", a.family.n_arms, "arms per task")->capture_default_str();
  cmd->add_option("--horizon", a.family.horizon, "pulls tabulated per arm (T)")->capture_default_str();
  cmd->add_option("--tasks", a.family.n_tasks, "tasks in the family")->capture_default_str();
  cmd->add_option("--rho", a.family.rho, "relatedness in [0, 1]")->capture_default_str();
  cmd->add_option("--seed", a.family.seed, "generator seed")->capture_default_str();
  cmd->add_option("--noise", a.family.noise, "noise amplitude")->capture_default_str();
  cmd->add_option("--shape-spread", a.family.shape_spread, "per-arm variation of curve shape in [0, 1]")
      ->capture_default_str();
  cmd->add_option("--limit-spread", a.family.limit_spread, "width of the final-loss range")->capture_default_str();
  cmd->add_option("--curve", a.curve, "geometric | power_law")->capture_default_str();
  cmd->add_option("--cost", a.cost_kind, "constant | lognormal | heavy_tailed")->capture_default_str();
  cmd->add_option("--cost-location", a.cost_location, "cost location")->capture_default_str();
  cmd->add_option("--cost-scale", a.cost_scale, "lognormal sigma or Pareto shape")->capture_default_str();
  cmd->add_flag("--invert", a.invert, "follow every task with its inverted twin");
  cmd->add_option("-o,--out", a.out, "bench file to write")->required();
  cmd->callback([&a] {
    a.family.curve_model = rush::curve_model_from_string(a.curve);
    const rush::CostModel cost{rush::cost_kind_from_string(a.cost_kind), a.cost_location, a.cost_scale};
    auto tasks = rush::generate_family(a.family, cost);
    if (a.invert) {
      std::vector<rush::TaskBench> paired;
      for (const auto& t : tasks) {
        paired.push_back(t);
        paired.push_back(rush::invert_task(t));
      }
      tasks = std::move(paired);
    }
    rush::save_bench(tasks, a.out);
    spdlog::info("wrote {} tasks to {}", tasks.size(), a.out);
  });
}

// ---------------------------------------------------------------------------
// shared sequence flags for run / compare / sweep

struct SeqArgs {
  std::string bench;
  std::string scheduler = "rush";
  std::optional<std::int64_t> budget;
  std::optional<std::int64_t> max_pulls;
  std::int64_t eta = 3;
  std::int64_t sequence_length = 20;
  std::int64_t repetitions = 25;
  std::uint64_t seed = 0;
  std::int64_t arms_per_task = 0;
  std::optional<std::size_t> cap;
  std::string injection = "displace";
  std::vector<std::int64_t> levels;
  std::size_t jobs = 1;
  std::string csv;
  std::string json_out;
};

void add_seq_flags(CLI::App* cmd, SeqArgs& a, bool with_budget) {
  cmd->add_option("--bench", a.bench, "bench file")->required();
  cmd->add_option("--scheduler", a.scheduler, "sh | rush | hb | hb_rush")->capture_default_str();
  if (with_budget) cmd->add_option("--budget", a.budget, "pulls per task for sh/rush (default: largest budget fitting R pulls per arm)");
  cmd->add_option("--max-pulls", a.max_pulls, "R, most pulls one arm gets (default: smallest task horizon)");
  cmd->add_option("--eta", a.eta, "reduction factor")->capture_default_str();
  cmd->add_option("--sequence-length", a.sequence_length, "tasks per sequence (S)")->capture_default_str();
  cmd->add_option("--repetitions", a.repetitions, "sequences to run")->capture_default_str();
  cmd->add_option("--seed", a.seed, "permutation seed")->capture_default_str();
  cmd->add_option("--arms-per-task", a.arms_per_task, "arms sampled per task, 0 = all")->capture_default_str();
  cmd->add_option("--cap", a.cap, "incumbent store capacity (default unlimited)");
  cmd->add_option("--injection", a.injection, "displace | append")->capture_default_str();
  cmd->add_option("--levels", a.levels, "resource levels for candidate counts");
  cmd->add_option("--jobs", a.jobs, "parallel repetitions")->capture_default_str();
  cmd->add_option("--csv", a.csv, "CSV output path");
  cmd->add_option("--json", a.json_out, "JSON output path (default stdout)");
}

rush::SequenceSpec resolve(const SeqArgs& a) {
  rush::SequenceSpec spec;
  spec.bench = rush::make_bench(rush::load_bench(a.bench));
  if (spec.bench->empty()) throw rush::InvalidArgument("bench " + a.bench + " has no tasks");
  spec.sequence_length = a.sequence_length;
  spec.repetitions = a.repetitions;
  spec.permutation_seed = a.seed;
  spec.scheduler = rush::scheduler_from_string(a.scheduler);
  spec.cfg.eta = a.eta;
  spec.cfg.incumbent_cap = a.cap;
  spec.arms_per_task = a.arms_per_task;
  spec.injection = rush::injection_from_string(a.injection);
  spec.levels = a.levels;
  if (a.eta < 2) throw rush::InvalidArgument("eta must be >= 2");
  std::int64_t horizon = spec.bench->front().horizon();
  for (const auto& t : *spec.bench) horizon = std::min(horizon, t.horizon());
  spec.max_pulls = a.max_pulls.value_or(horizon);
  if (spec.max_pulls < 1) throw rush::InvalidArgument("max pulls must be >= 1");
  if (a.budget) {
    spec.cfg.budget = *a.budget;
  } else if (rush::is_hyperband(spec.scheduler)) {
    // unused by Hyperband; recorded as the pull total of its largest bracket
    spec.cfg.budget = rush::single_bracket_budget(spec.max_pulls, spec.cfg.eta);
  } else {
    std::int64_t n = a.arms_per_task;
    if (n == 0) {
      n = static_cast<std::int64_t>(spec.bench->front().size());
      for (const auto& t : *spec.bench) n = std::min<std::int64_t>(n, static_cast<std::int64_t>(t.size()));
    }
    spec.cfg.budget = rush::max_feasible_budget(n, spec.cfg.eta, spec.max_pulls);
  }
  spdlog::info("resolved: scheduler {}, budget {}, R {}, eta {}", a.scheduler, spec.cfg.budget, spec.max_pulls,
               spec.cfg.eta);
  return spec;
}

json config_json(const SeqArgs& a, const rush::SequenceSpec& spec) {
  auto j = rush::spec_to_json(spec);
  j["bench"] = a.bench;
  return j;
}

// ---------------------------------------------------------------------------
// run / compare / sweep

void add_run(CLI::App& app, SeqArgs& a) {
  auto* cmd = app.add_subcommand("run", "run one scheduler over task sequences");
  add_seq_flags(cmd, a, true);
  cmd->callback([&a] {
    const auto spec = resolve(a);
    const auto report = rush::run_sequence(spec, a.jobs);
    if (!a.csv.empty()) {
      auto out = open_out(a.csv);
      rush::write_csv(out, report);
    }
    emit_json({{"command", "run"}, {"config", config_json(a, spec)}, {"report", rush::report_to_json(report)}},
              a.json_out);
  });
}

struct CompareArgs {
  SeqArgs seq;
  std::string baseline;
};

void add_compare(CLI::App& app, CompareArgs& a) {
  auto* cmd = app.add_subcommand("compare", "paired run of a scheduler against its baseline");
  add_seq_flags(cmd, a.seq, true);
  cmd->add_option("--baseline", a.baseline, "baseline scheduler (default: sh for rush, hb for hb_rush)");
  cmd->callback([&a] {
    const auto cand = resolve(a.seq);
    auto base = cand;
    base.scheduler = a.baseline.empty() ? rush::baseline_of(cand.scheduler) : rush::scheduler_from_string(a.baseline);
    const auto cmp = rush::compare(base, cand, a.seq.jobs);
    if (!a.seq.csv.empty()) {
      auto out = open_out(a.seq.csv);
      out << rush::kCsvHeader << '\n';
      rush::write_csv_rows(out, cmp.baseline);
      rush::write_csv_rows(out, cmp.candidate);
    }
    auto config = config_json(a.seq, cand);
    config["baseline"] = rush::to_string(base.scheduler);
    emit_json({{"command", "compare"}, {"config", config}, {"comparison", rush::comparison_to_json(cmp)}},
              a.seq.json_out);
  });
}

struct SweepArgs {
  SeqArgs seq;
  std::vector<std::int64_t> budgets;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* cmd = app.add_subcommand("sweep", "paired comparisons over ascending budgets (B, or R for Hyperband)");
  add_seq_flags(cmd, a.seq, false);
  cmd->add_option("--budgets", a.budgets, "strictly ascending budgets")->required()->delimiter(',');
  cmd->callback([&a] {
    const auto spec = resolve(a.seq);
    const auto points = rush::budget_sweep(spec, a.budgets, a.seq.jobs);
    for (const auto& p : points) {
      if (p.error) spdlog::warn("budget {}: {}", p.budget, *p.error);
    }
    if (!a.seq.csv.empty()) {
      auto out = open_out(a.seq.csv);
      rush::write_sweep_csv(out, points);
    }
    auto config = config_json(a.seq, spec);
    config.erase("budget");
    config["budgets"] = a.budgets;
    config["baseline"] = rush::to_string(rush::baseline_of(spec.scheduler));
    emit_json({{"command", "sweep"}, {"config", config}, {"points", rush::sweep_to_json(points)}}, a.seq.json_out);
  });
}

// ---------------------------------------------------------------------------
// verify-theorem / report

struct VerifyArgs {
  rush::VerifyOptions opt;
  std::string json_out;
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  auto* cmd = app.add_subcommand("verify-theorem", "run RUSH at the correctness budget on random small instances");
  cmd->add_option("--instances", a.opt.instances, "random instances")->capture_default_str();
  cmd->add_option("--max-arms", a.opt.max_arms, "largest arm count (>= 2)")->capture_default_str();
  cmd->add_option("--eta", a.opt.eta, "reduction factor")->capture_default_str();
  cmd->add_option("--seed", a.opt.seed, "instance seed")->capture_default_str();
  cmd->add_option("--json", a.json_out, "JSON report path");
  cmd->callback([&a] {
    const auto report = rush::verify_theorem(a.opt);
    for (auto regime : rush::kRegimes) {
      std::cout << rush::to_string(regime) << ": " << report.correct(regime) << "/" << report.total(regime)
                << " correct (" << report.correct_separated(regime) << "/" << report.total(regime)
                << " at separation budget)\n";
    }
    if (!a.json_out.empty()) {
      auto j = rush::verify_to_json(report);
      j["command"] = "verify-theorem";
      emit_json(j, a.json_out);
    }
  });
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string json_out;
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* cmd = app.add_subcommand("report", "summarize one or more run/compare CSV files");
  cmd->add_option("inputs", a.inputs, "CSV files")->required();
  cmd->add_option("--json", a.json_out, "JSON output path (default stdout)");
  cmd->callback([&a] {
    std::vector<rush::CsvRow> rows;
    for (const auto& p : a.inputs) {
      std::ifstream in(p, std::ios::binary);
      if (!in) throw rush::IoError("cannot read " + p);
      try {
        const auto part = rush::read_csv(in);
        rows.insert(rows.end(), part.begin(), part.end());
      } catch (const rush::FormatError& e) {
        throw rush::FormatError(p + ": " + e.what());
      }
    }
    auto j = rush::summarize_csv(rows);
    j["command"] = "report";
    j["config"] = {{"inputs", a.inputs}};
    emit_json(j, a.json_out);
  });
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"rush: successive halving with incumbent transfer"};
  app.require_subcommand(1);
  GenArgs gen;
  SeqArgs run;
  CompareArgs cmp;
  SweepArgs sweep;
  VerifyArgs verify;
  ReportArgs report;
  add_gen(app, gen);
  add_run(app, run);
  add_compare(app, cmp);
  add_sweep(app, sweep);
  add_verify(app, verify);
  add_report(app, report);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const rush::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
