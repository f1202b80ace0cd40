#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rush/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "rush_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

int cli(const std::string& args) {
  const std::string cmd = std::string(RUSH_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& p) { return json::parse(slurp(p)); }

std::vector<rush::CsvRow> read_rows(const std::string& p) {
  std::ifstream in(p);
  return rush::read_csv(in);
}

// Small aligned family shared by most tests.
const std::string& aligned_bench() {
  static const std::string p = [] {
    const auto out = path("aligned.json");
    EXPECT_EQ(cli("gen --arms 27 --horizon 32 --tasks 6 --rho 1 --noise 0 --shape-spread 0 --seed 1 -o " + out), 0);
    return out;
  }();
  return p;
}

const std::string kSmall = " --sequence-length 4 --repetitions 3 --budget 120";

}  // namespace

TEST(Cli, GenWritesRequestedTasksDeterministically) {
  ASSERT_EQ(cli("gen --arms 20 --horizon 16 --tasks 5 --rho 0.9 --seed 7 -o " + path("g1.json")), 0);
  ASSERT_EQ(cli("gen --arms 20 --horizon 16 --tasks 5 --rho 0.9 --seed 7 -o " + path("g2.json")), 0);
  EXPECT_EQ(slurp(path("g1.json")), slurp(path("g2.json")));
  const auto j = read_json(path("g1.json"));
  EXPECT_EQ(j["tasks"].size(), 5u);
}

TEST(Cli, GenInvertPairsTwins) {
  ASSERT_EQ(cli("gen --arms 10 --horizon 8 --tasks 3 --invert -o " + path("inv.json")), 0);
  const auto j = read_json(path("inv.json"));
  ASSERT_EQ(j["tasks"].size(), 6u);
  for (std::size_t i = 0; i < 6; i += 2) {
    EXPECT_EQ(j["tasks"][i + 1]["task_id"].get<std::string>(), j["tasks"][i]["task_id"].get<std::string>() + "-inv");
  }
}

TEST(Cli, GenRejectsBadFlags) {
  EXPECT_NE(cli("gen --arms 1 -o " + path("bad.json")), 0);
  EXPECT_NE(cli("gen --rho 2 -o " + path("bad.json")), 0);
  EXPECT_NE(cli("gen --cost pareto -o " + path("bad.json")), 0);
  EXPECT_NE(cli("gen --arms 10"), 0);
  EXPECT_NE(cli("frobnicate"), 0);
  EXPECT_NE(cli(""), 0);
}

TEST(Cli, RunShapeAndRowwiseDominance) {
  const auto& bench = aligned_bench();
  ASSERT_EQ(cli("run --scheduler sh --bench " + bench + kSmall + " --csv " + path("sh.csv") + " --json " + path("sh.json")), 0);
  ASSERT_EQ(cli("run --scheduler rush --bench " + bench + kSmall + " --csv " + path("rush.csv") + " --json " + path("rush.json")), 0);
  const auto sh = read_rows(path("sh.csv"));
  const auto rs = read_rows(path("rush.csv"));
  ASSERT_EQ(sh.size(), 12u);
  ASSERT_EQ(rs.size(), 12u);
  for (std::size_t i = 0; i < sh.size(); ++i) {
    EXPECT_EQ(sh[i].task_id, rs[i].task_id);
    EXPECT_LE(rs[i].pulls, sh[i].pulls);
  }
  const auto j = read_json(path("rush.json"));
  EXPECT_EQ(j["config"]["budget"], 120);
  EXPECT_EQ(j["config"]["eta"], 3);
  EXPECT_EQ(j["config"]["bench"], bench);
  EXPECT_EQ(j["report"]["per_repetition"].size(), 3u);
}

TEST(Cli, RunDefaultsFollowProtocol) {
  ASSERT_EQ(cli("run --bench " + aligned_bench() + " --json " + path("def.json")), 0);
  const auto c = read_json(path("def.json"))["config"];
  EXPECT_EQ(c["eta"], 3);
  EXPECT_EQ(c["sequence_length"], 20);
  EXPECT_EQ(c["repetitions"], 25);
  EXPECT_EQ(c["scheduler"], "rush");
  EXPECT_EQ(c["max_pulls"], 32);
  EXPECT_EQ(c["budget"], rush::max_feasible_budget(27, 3, 32));
}

TEST(Cli, RunErrorsExitNonzero) {
  EXPECT_NE(cli("run --bench " + path("missing.json")), 0);
  EXPECT_NE(slurp(path("stderr.txt")).find("missing.json"), std::string::npos);
  EXPECT_NE(cli("run --bench " + aligned_bench() + " --budget 5"), 0);
  EXPECT_NE(slurp(path("stderr.txt")).find("position 0"), std::string::npos);
  EXPECT_NE(cli("run --bench " + aligned_bench() + " --scheduler nope"), 0);
}

TEST(Cli, CompareReportsSavingsAndZeros) {
  const auto& bench = aligned_bench();
  ASSERT_EQ(cli("compare --scheduler rush --bench " + bench + kSmall + " --json " + path("cmp.json") + " --csv " + path("cmp.csv")), 0);
  const auto j = read_json(path("cmp.json"));
  EXPECT_GT(j["comparison"]["time_reduction_pct"].get<double>(), 0.0);
  EXPECT_EQ(j["comparison"]["dominance_violations"], 0);
  EXPECT_EQ(j["config"]["baseline"], "sh");
  EXPECT_EQ(read_rows(path("cmp.csv")).size(), 24u);

  ASSERT_EQ(cli("compare --scheduler sh --bench " + bench + kSmall + " --json " + path("self.json")), 0);
  const auto s = read_json(path("self.json"))["comparison"];
  EXPECT_EQ(s["time_reduction_pct"].get<double>(), 0.0);
  EXPECT_EQ(s["pull_reduction_pct"].get<double>(), 0.0);
  EXPECT_EQ(s["regret_delta"].get<double>(), 0.0);
}

TEST(Cli, SweepWritesOneRowPerBudget) {
  ASSERT_EQ(cli("sweep --scheduler rush --bench " + aligned_bench() +
                " --sequence-length 4 --repetitions 2 --budgets 90,120,150,180,210 --csv " + path("sweep.csv") +
                " --json " + path("sweep.json")),
            0);
  std::istringstream in(slurp(path("sweep.csv")));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
  const auto pts = read_json(path("sweep.json"))["points"];
  ASSERT_EQ(pts.size(), 5u);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i]["candidate_mean_regret"].get<double>(), pts[i - 1]["candidate_mean_regret"].get<double>());
  }
  EXPECT_NE(cli("sweep --bench " + aligned_bench() + " --budgets 300,90"), 0);
}

TEST(Cli, VerifyTheorem) {
  ASSERT_EQ(cli("verify-theorem --instances 0 --json " + path("v0.json")), 0);
  const auto j = read_json(path("v0.json"));
  EXPECT_EQ(j["regimes"]["empty"]["total"], 0);
  ASSERT_EQ(cli("verify-theorem --instances 5 --seed 3 --json " + path("v1.json")), 0);
  ASSERT_EQ(cli("verify-theorem --instances 5 --seed 3 --json " + path("v2.json")), 0);
  EXPECT_EQ(slurp(path("v1.json")), slurp(path("v2.json")));
  EXPECT_EQ(read_json(path("v1.json"))["regimes"]["best"]["total"], 5);
  EXPECT_NE(cli("verify-theorem --max-arms 1"), 0);
}

TEST(Cli, ReportSummarizesCsv) {
  const auto& bench = aligned_bench();
  ASSERT_EQ(cli("compare --scheduler rush --bench " + bench + kSmall + " --json " + path("c2.json") + " --csv " + path("c2.csv")), 0);
  ASSERT_EQ(cli("report " + path("c2.csv") + " --json " + path("rep.json")), 0);
  const auto rep = read_json(path("rep.json"));
  const auto cmp = read_json(path("c2.json"))["comparison"];
  EXPECT_EQ(rep["schedulers"]["rush"]["sim_time"]["mean"], cmp["candidate"]["sim_time"]["mean"]);
  EXPECT_EQ(rep["time_reduction_pct"]["rush"], cmp["time_reduction_pct"]);
  std::ofstream(path("junk.csv")) << "a,b\n";
  EXPECT_NE(cli("report " + path("junk.csv")), 0);
}

TEST(Cli, LogLevelDoesNotChangeOutputs) {
  const auto args = "run --bench " + aligned_bench() + kSmall + " --json ";
  ASSERT_EQ(cli(args + path("quiet.json")), 0);
  ASSERT_EQ(std::system(("RUSH_LOG=debug " + std::string(RUSH_CLI_PATH) + " " + args + path("loud.json") + " 2>/dev/null").c_str()), 0);
  EXPECT_EQ(slurp(path("quiet.json")), slurp(path("loud.json")));
}
