#pragma once

// Synthetic tabular benchmarks with known ground truth, and the bench file.
//
// Generation (all draws through rush::Rng, so files are byte-identical for a
// given spec on every platform):
//
//   base quality      q_a ~ U(0,1)                         stream (seed, 0)
//   per task s                                             stream (seed, 1, s)
//     offset          lo_s ~ U(0.02, 0.08)
//     shape           c_s ~ U(0.3, 0.5); rate_s ~ U(0.55, 0.75) (geometric)
//                                         or alpha_s ~ U(0.8, 1.6) (power law)
//     per arm a, in id order: e, u1, u2 ~ U(0,1), then T-1 noise draws
//       blend         b = rho * q_a + (1 - rho) * e
//       limit         nu = lo_s + limit_spread * b
//       scale         c = (1 - nu) * c_s * (1 + 0.8 * shape_spread * (2 u1 - 1))
//       decay         geometric: f(t) = rate^t, rate = rate_s^(1 + 0.5 * shape_spread * (2 u2 - 1))
//                     power law: f(t) = t^-alpha, alpha = alpha_s * (1 + 0.5 * shape_spread * (2 u2 - 1))
//       loss          l_t = clamp(nu + c f(t) + noise * w_t * (2 U_t - 1), 0, 1),  t < T
//                     l_T = nu,  w_t = (T - t) / (T - 1)
//   costs                                                  stream (seed, 2, s)
//
// Since c < 0.7 (1 - nu), the noise-free curve stays inside (0, 1) and the
// clamp only matters for large noise. Losses are snapped to multiples of 2^-53 so that 1 - l is exact and
// inversion is an exact involution. With rho = 1 every task ranks the limits
// identically; with shape_spread = 0 and noise = 0 all arms of a task share
// one decay, so the limit ranking holds at every pull count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rush/core.hpp"
#include "rush/errors.hpp"
#include "rush/random.hpp"

namespace rush {

enum class CurveModel { geometric, power_law };
enum class CostKind { constant, lognormal, heavy_tailed };

inline std::string to_string(CurveModel m) { return m == CurveModel::geometric ? "geometric" : "power_law"; }

inline CurveModel curve_model_from_string(const std::string& s) {
  if (s == "geometric") return CurveModel::geometric;
  if (s == "power_law") return CurveModel::power_law;
  throw InvalidSpec("unknown curve model '" + s + "'");
}

inline std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::constant: return "constant";
    case CostKind::lognormal: return "lognormal";
    case CostKind::heavy_tailed: return "heavy_tailed";
  }
  return "?";
}

inline CostKind cost_kind_from_string(const std::string& s) {
  if (s == "constant") return CostKind::constant;
  if (s == "lognormal") return CostKind::lognormal;
  if (s == "heavy_tailed") return CostKind::heavy_tailed;
  throw InvalidSpec("unknown cost model '" + s + "'");
}

struct FamilySpec {
  std::int64_t n_arms = 100;
  std::int64_t horizon = 64;
  std::int64_t n_tasks = 20;
  CurveModel curve_model = CurveModel::geometric;
  double limit_spread = 0.5;
  double rho = 0.9;
  std::uint64_t seed = 0;
  double noise = 0.02;
  double shape_spread = 0.5;

  void validate() const {
    if (n_arms < 2) throw InvalidSpec("n_arms must be >= 2");
    if (horizon < 2) throw InvalidSpec("horizon must be >= 2");
    if (n_tasks < 1) throw InvalidSpec("n_tasks must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidSpec("rho must be in [0, 1]");
    if (!(limit_spread > 0.0 && limit_spread <= 0.9)) throw InvalidSpec("limit_spread must be in (0, 0.9]");
    if (!(noise >= 0.0 && noise <= 0.5)) throw InvalidSpec("noise must be in [0, 0.5]");
    if (!(shape_spread >= 0.0 && shape_spread <= 1.0)) throw InvalidSpec("shape_spread must be in [0, 1]");
  }
};

// constant:     every pull costs `location`.
// lognormal:    arm a costs location * exp(scale * N(0,1)) per pull.
// heavy_tailed: every pull costs `location`; an arm's first pull also pays a
//               one-off location * X, X ~ Pareto(x_m = 1, shape = scale).
//               Small shapes (< 1) give the rare 50x-median outliers that
//               make the first rung dominate total time.
struct CostModel {
  CostKind kind = CostKind::constant;
  double location = 1.0;
  double scale = 0.5;

  void validate() const {
    if (!(location > 0.0) || !std::isfinite(location)) throw InvalidSpec("cost location must be > 0");
    if (kind != CostKind::constant && (!(scale > 0.0) || !std::isfinite(scale))) {
      throw InvalidSpec("cost scale must be > 0");
    }
  }
};

// Parameters behind one generated curve, kept for oracles.
struct CurveParams {
  double limit;
  double scale;
  double decay;  // rate (geometric) or exponent (power law)
};

struct GeneratedTask {
  TaskBench bench;
  std::map<ArmId, CurveParams> params;
};

inline std::string padded(std::int64_t i, std::int64_t count) {
  const auto width = std::to_string(std::max<std::int64_t>(count - 1, 0)).size();
  auto s = std::to_string(i);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

inline std::vector<ArmId> family_arm_ids(std::int64_t n_arms) {
  std::vector<ArmId> ids;
  ids.reserve(static_cast<std::size_t>(n_arms));
  for (std::int64_t i = 0; i < n_arms; ++i) ids.emplace_back("arm-" + padded(i, n_arms));
  return ids;
}

inline double snap_loss(double l) { return std::round(l * 0x1.0p53) * 0x1.0p-53; }

inline std::vector<GeneratedTask> generate_family_detailed(const FamilySpec& spec, const CostModel& cost) {
  spec.validate();
  cost.validate();
  const auto ids = family_arm_ids(spec.n_arms);
  const auto T = spec.horizon;

  std::vector<double> quality;
  {
    Rng rng(derive_seed(spec.seed, {0}));
    for (std::size_t a = 0; a < ids.size(); ++a) quality.push_back(rng.uniform());
  }

  std::vector<GeneratedTask> tasks;
  for (std::int64_t s = 0; s < spec.n_tasks; ++s) {
    Rng rng(derive_seed(spec.seed, {1, static_cast<std::uint64_t>(s)}));
    Rng cost_rng(derive_seed(spec.seed, {2, static_cast<std::uint64_t>(s)}));
    const double lo = rng.uniform(0.02, 0.08);
    const double c_base = rng.uniform(0.3, 0.5);
    const double d_base =
        spec.curve_model == CurveModel::geometric ? rng.uniform(0.55, 0.75) : rng.uniform(0.8, 1.6);

    std::map<ArmId, ArmCurves> arms;
    std::map<ArmId, CurveParams> params;
    for (std::size_t a = 0; a < ids.size(); ++a) {
      const double e = rng.uniform();
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      const double blend = spec.rho * quality[a] + (1.0 - spec.rho) * e;
      const double nu = snap_loss(lo + spec.limit_spread * blend);
      const double c = (1.0 - nu) * c_base * (1.0 + 0.8 * spec.shape_spread * (2.0 * u1 - 1.0));
      const double stretch = 1.0 + 0.5 * spec.shape_spread * (2.0 * u2 - 1.0);
      const double decay = spec.curve_model == CurveModel::geometric ? std::pow(d_base, stretch) : d_base * stretch;

      std::vector<double> losses(static_cast<std::size_t>(T));
      for (std::int64_t t = 1; t < T; ++t) {
        const double f = spec.curve_model == CurveModel::geometric ? std::pow(decay, static_cast<double>(t))
                                                                   : std::pow(static_cast<double>(t), -decay);
        const double w = static_cast<double>(T - t) / static_cast<double>(T - 1);
        const double eps = spec.noise * w * (2.0 * rng.uniform() - 1.0);
        losses[static_cast<std::size_t>(t - 1)] = snap_loss(std::clamp(nu + c * f + eps, 0.0, 1.0));
      }
      losses.back() = nu;

      std::vector<double> costs(static_cast<std::size_t>(T), cost.location);
      switch (cost.kind) {
        case CostKind::constant: break;
        case CostKind::lognormal: {
          const double per_pull = cost.location * std::exp(cost.scale * cost_rng.normal());
          std::fill(costs.begin(), costs.end(), per_pull);
          break;
        }
        case CostKind::heavy_tailed: {
          double u = cost_rng.uniform();
          while (u <= 0.0) u = cost_rng.uniform();
          costs.front() += cost.location * std::pow(u, -1.0 / cost.scale);
          break;
        }
      }
      arms.emplace(ids[a], ArmCurves{LossCurve{std::move(losses)}, CostCurve{std::move(costs)}});
      params.emplace(ids[a], CurveParams{nu, c, decay});
    }
    tasks.push_back(GeneratedTask{TaskBench("task-" + padded(s, spec.n_tasks), T, std::move(arms)), std::move(params)});
  }
  return tasks;
}

inline std::vector<TaskBench> generate_family(const FamilySpec& spec, const CostModel& cost) {
  std::vector<TaskBench> out;
  for (auto& g : generate_family_detailed(spec, cost)) out.push_back(std::move(g.bench));
  return out;
}

// Every loss l becomes 1 - l; costs are untouched. The id gains "-inv", or
// loses it when already present, so inverting twice restores the task.
inline TaskBench invert_task(const TaskBench& task) {
  std::map<ArmId, ArmCurves> arms;
  for (const auto& [id, curves] : task.arms()) {
    ArmCurves out = curves;
    for (double& l : out.loss.losses) {
      if (!(l >= 0.0 && l <= 1.0)) {
        throw LossOutOfRange("task " + task.task_id() + ", arm " + id.str() + ": loss outside [0, 1]");
      }
      l = 1.0 - l;
    }
    arms.emplace(id, std::move(out));
  }
  const std::string& tid = task.task_id();
  const std::string suffix = "-inv";
  const bool inverted = tid.size() > suffix.size() && tid.compare(tid.size() - suffix.size(), suffix.size(), suffix) == 0;
  return TaskBench(inverted ? tid.substr(0, tid.size() - suffix.size()) : tid + suffix, task.horizon(), std::move(arms));
}

// ---------------------------------------------------------------------------
// bench file: {"version": 1, "tasks": [{"task_id", "horizon", "arms": [{"arm_id", "losses", "costs"}]}]}

inline constexpr int kBenchVersion = 1;

inline nlohmann::json bench_to_json(const std::vector<TaskBench>& tasks) {
  nlohmann::json root;
  root["version"] = kBenchVersion;
  auto& jt = root["tasks"] = nlohmann::json::array();
  for (const auto& task : tasks) {
    nlohmann::json t;
    t["task_id"] = task.task_id();
    t["horizon"] = task.horizon();
    auto& ja = t["arms"] = nlohmann::json::array();
    for (const auto& [id, curves] : task.arms()) {
      ja.push_back({{"arm_id", id.str()}, {"losses", curves.loss.losses}, {"costs", curves.cost.costs}});
    }
    jt.push_back(std::move(t));
  }
  return root;
}

inline std::vector<TaskBench> bench_from_json(const nlohmann::json& root) {
  std::vector<TaskBench> tasks;
  try {
    if (!root.is_object() || !root.contains("version")) throw FormatError("bench file: missing version");
    const auto version = root.at("version").get<int>();
    if (version != kBenchVersion) {
      throw FormatError("bench file: unsupported version " + std::to_string(version));
    }
    for (const auto& t : root.at("tasks")) {
      const auto task_id = t.at("task_id").get<std::string>();
      const auto horizon = t.at("horizon").get<std::int64_t>();
      if (horizon < 1) throw FormatError("task " + task_id + ": horizon must be >= 1");
      std::map<ArmId, ArmCurves> arms;
      for (const auto& a : t.at("arms")) {
        const auto arm_id = a.at("arm_id").get<std::string>();
        const auto where = "task " + task_id + ", arm " + arm_id;
        if (arm_id.empty()) throw FormatError("task " + task_id + ": empty arm id");
        const auto& jl = a.at("losses");
        const auto& jc = a.at("costs");
        if (!jl.is_array() || !jc.is_array()) throw FormatError(where + ": losses/costs must be arrays");
        if (static_cast<std::int64_t>(jl.size()) != horizon || static_cast<std::int64_t>(jc.size()) != horizon) {
          throw FormatError(where + ": curve length mismatch (losses " + std::to_string(jl.size()) + ", costs " +
                            std::to_string(jc.size()) + ", horizon " + std::to_string(horizon) + ")");
        }
        ArmCurves curves;
        curves.loss.losses.reserve(jl.size());
        curves.cost.costs.reserve(jc.size());
        for (const auto& v : jl) {
          if (!v.is_number()) throw FormatError(where + ": non-numeric loss (NaN?)");
          const double x = v.get<double>();
          if (!std::isfinite(x)) throw FormatError(where + ": non-finite loss");
          curves.loss.losses.push_back(x);
        }
        for (const auto& v : jc) {
          if (!v.is_number()) throw FormatError(where + ": non-numeric cost (NaN?)");
          const double x = v.get<double>();
          if (!std::isfinite(x) || x < 0.0) throw FormatError(where + ": cost must be finite and >= 0");
          curves.cost.costs.push_back(x);
        }
        if (!arms.emplace(ArmId(arm_id), std::move(curves)).second) {
          throw FormatError("task " + task_id + ": duplicate arm " + arm_id);
        }
      }
      if (arms.empty()) throw FormatError("task " + task_id + ": no arms");
      tasks.emplace_back(task_id, horizon, std::move(arms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bench file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bench file: ") + e.what());
  }
  return tasks;
}

inline void save_bench(const std::vector<TaskBench>& tasks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << bench_to_json(tasks).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<TaskBench> load_bench(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return bench_from_json(root);
}

}  // namespace rush
