#include "twostep/harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "twostep/io.hpp"

namespace twostep {

namespace {

constexpr double kOracleTolerance = 1e-10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

PlantModel make_plant(const ExperimentConfig& config) {
  if (config.plant == PlantPreset::kLinear) {
    const LinearModel lin = linearize_pendulum(config.pendulum);
    return make_linear_plant(lin.a, lin.b);
  }
  return make_pendulum_plant(config.pendulum);
}

Step1Result run_step1(const ExperimentConfig& config) {
  config.validate();
  const PlantModel plant = make_plant(config);
  const DataWindowSet data =
      collect_data(plant, config.step1.k0, config.seed, config.step1.collection);
  Step1Result result;
  result.report = policy_iteration(data, config.step1.k0, config.step1.weights, config.step1.eps,
                                   config.step1.max_iter);
  const LinearModel lin = linearize_pendulum(config.pendulum);
  result.oracle =
      kleinman_iteration(lin.a, lin.b, config.step1.weights, config.step1.k0, kOracleTolerance);
  return result;
}

void write_step1_outputs(const ExperimentConfig& config, const Step1Result& result,
                         const std::filesystem::path& out) {
  GainFile gain;
  gain.k = result.report.k_final;
  gain.k0 = config.step1.k0;
  gain.k_star = result.oracle.k_star;
  gain.p = result.report.p_final;
  gain.p_star = result.oracle.p_star;
  gain.iterations = result.report.iterations;
  gain.converged = result.report.converged;
  const auto& hist = result.report.p_history;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    gain.p_history_norms.push_back(hist[i].norm());
    if (i > 0) gain.p_change_norms.push_back((hist[i] - hist[i - 1]).norm());
  }
  write_text(out / "gain.json", serialize_gain(gain));

  const PlantModel plant = make_plant(config);
  const BasisGrid grid = config.basis.build();
  const Rollout r0 = deterministic_rollout(plant, config.step1.k0, std::nullopt, grid, config.step2);
  const Rollout rk =
      deterministic_rollout(plant, result.report.k_final, std::nullopt, grid, config.step2);
  const Rollout rs =
      deterministic_rollout(plant, result.oracle.k_star, std::nullopt, grid, config.step2);
  CsvTable table({"time", "psi_K0", "psi_K", "psi_Kstar"});
  for (std::size_t i = 0; i < r0.time.size(); ++i) {
    table.row({format_double(r0.time[i]), format_double(r0.states[i](0)),
               format_double(rk.states[i](0)), format_double(rs.states[i](0))});
  }
  table.save(out / "trajectory.csv");
  write_text(out / "config.json", serialize_config(config));
}

std::optional<GainMatrix> linear_gain_for(ControllerMode mode, const ExperimentConfig& config,
                                          const GainMatrix& k) {
  switch (mode) {
    case ControllerMode::kKPlusRl:
    case ControllerMode::kKAlone:
      return k;
    case ControllerMode::kK0PlusRl:
    case ControllerMode::kK0Alone:
      return config.step1.k0;
    case ControllerMode::kRlAlone:
      return std::nullopt;
  }
  return std::nullopt;
}

Rollout evaluate_policy(const PlantModel& plant, ControllerMode mode,
                        const std::optional<GainMatrix>& k, const std::optional<Mat>& w,
                        const ExperimentConfig& config) {
  std::optional<GainMatrix> gain;
  if (mode != ControllerMode::kRlAlone) {
    if (mode == ControllerMode::kK0PlusRl || mode == ControllerMode::kK0Alone) {
      gain = config.step1.k0;
    } else if (!k) {
      throw PreconditionViolation("evaluate_policy: mode " + std::string(to_string(mode)) +
                                  " needs the Step-1 gain");
    } else {
      gain = *k;
    }
  }
  std::optional<Mat> residual;
  if (uses_rl(mode)) {
    if (!w) {
      throw PreconditionViolation("evaluate_policy: mode " + std::string(to_string(mode)) +
                                  " needs trained policy weights");
    }
    residual = *w;
  }
  return deterministic_rollout(plant, gain, residual, config.basis.build(), config.step2);
}

Step2Result run_step2(const ExperimentConfig& config, const GainMatrix& k, std::uint64_t seed) {
  if (!uses_rl(config.mode)) {
    throw ConfigError("step2 needs an RL mode (K+RL, K0+RL or RL-alone), got " +
                      std::string(to_string(config.mode)));
  }
  const PlantModel plant = make_plant(config);
  const BasisGrid grid = config.basis.build();
  Step2Result result;
  result.training = train(plant, linear_gain_for(config.mode, config, k), grid, config.step2, seed);
  result.evaluation = evaluate_policy(plant, config.mode, k, result.training.w, config);
  return result;
}

void write_step2_outputs(const ExperimentConfig& config, const Step2Result& result,
                         const std::filesystem::path& out) {
  write_cost_curve(out / "costs.csv", result.training.curve);
  write_text(out / "weights.json", serialize_weights(result.training.theta, result.training.w));
  nlohmann::json eval;
  eval["mode"] = std::string(to_string(config.mode));
  eval["cost"] = result.evaluation.cost;
  eval["crossed_boundary"] = result.evaluation.crossed_boundary;
  eval["success"] = is_success(result.evaluation);
  write_text(out / "evaluation.json", eval.dump(2) + "\n");
  write_text(out / "config.json", serialize_config(config));
}

std::vector<ComparisonRow> compare_controllers(const ExperimentConfig& config,
                                               const GainMatrix& k, std::uint64_t seed) {
  const PlantModel plant = make_plant(config);
  std::vector<ComparisonRow> rows;
  for (ControllerMode mode : {ControllerMode::kK0Alone, ControllerMode::kKAlone,
                              ControllerMode::kKPlusRl, ControllerMode::kRlAlone}) {
    if (!uses_rl(mode)) {
      rows.push_back({mode, evaluate_policy(plant, mode, k, std::nullopt, config).cost});
      continue;
    }
    ExperimentConfig cfg = config;
    cfg.mode = mode;
    try {
      rows.push_back({mode, run_step2(cfg, k, seed).evaluation.cost});
    } catch (const NumericalBlowup&) {
      rows.push_back({mode, std::numeric_limits<double>::infinity()});
    }
  }
  return rows;
}

void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  CsvTable table({"mode", "cost"});
  for (const auto& row : rows) table.row({std::string(to_string(row.mode)), format_double(row.cost)});
  table.save(path);
}

bool is_success(const Rollout& rollout, const SuccessCriterion& criterion) {
  if (rollout.crossed_boundary || rollout.states.empty()) return false;
  const Vec& last = rollout.states.back();
  return std::abs(last(0)) < criterion.final_angle && std::abs(last(1)) < criterion.final_rate;
}

std::uint64_t derive_seed(std::uint64_t base, int mode_index, int beta_index, int sigma2_index,
                          int run) {
  std::uint64_t h = splitmix64(base);
  for (int part : {mode_index, beta_index, sigma2_index, run}) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(part));
  }
  return h;
}

double percentage(int count, int n_sim) {
  if (n_sim < 1) throw PreconditionViolation("percentage: n_sim must be >= 1");
  return static_cast<double>(count) / n_sim * 100.0;
}

SweepReport robustness_sweep(const ExperimentConfig& config, const GainMatrix& k) {
  config.validate();
  const auto& sw = config.sweep;
  const PlantModel plant = make_plant(config);
  const BasisGrid grid = config.basis.build();

  SweepReport report;
  report.baseline_cost =
      evaluate_policy(plant, ControllerMode::kKAlone, k, std::nullopt, config).cost;

  for (std::size_t mi = 0; mi < sw.modes.size(); ++mi) {
    for (std::size_t bi = 0; bi < sw.betas.size(); ++bi) {
      for (std::size_t si = 0; si < sw.sigma2s.size(); ++si) {
        SweepCell cell{sw.modes[mi], sw.betas[bi], sw.sigma2s[si], 0.0, 0.0, {}};
        for (int r = 0; r < sw.n_sim; ++r) {
          SweepRun run;
          run.mode = sw.modes[mi];
          run.beta_index = static_cast<int>(bi);
          run.sigma2_index = static_cast<int>(si);
          run.run = r;
          run.seed = derive_seed(config.seed, static_cast<int>(mi), static_cast<int>(bi),
                                 static_cast<int>(si), r);
          cell.runs.push_back(run);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  std::vector<SweepRun*> jobs;
  for (auto& cell : report.cells) {
    for (auto& run : cell.runs) jobs.push_back(&run);
  }

  const auto execute = [&](SweepRun& run, const SweepCell& cell) {
    ActorCriticParams params = config.step2;
    params.beta = cell.beta;
    params.sigma2 = cell.sigma2;
    try {
      const auto gain = linear_gain_for(run.mode, config, k);
      const TrainResult trained = train(plant, gain, grid, params, run.seed);
      const Rollout eval = deterministic_rollout(plant, gain, trained.w, grid, params);
      run.final_cost = eval.cost;
      run.success = is_success(eval);
      run.improved = eval.cost < report.baseline_cost;
    } catch (const Error&) {
      run.failed = true;
      run.final_cost = std::numeric_limits<double>::quiet_NaN();
    }
  };

  // Each job knows its cell through the index of the cell it belongs to.
  std::vector<const SweepCell*> owner;
  for (const auto& cell : report.cells) {
    for (std::size_t r = 0; r < cell.runs.size(); ++r) owner.push_back(&cell);
  }

  unsigned threads = sw.threads > 0 ? static_cast<unsigned>(sw.threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          execute(*jobs[i], *owner[i]);
        }
      });
    }
  }

  for (auto& cell : report.cells) {
    int q = 0;
    int p = 0;
    for (const auto& run : cell.runs) {
      q += run.success ? 1 : 0;
      p += run.improved ? 1 : 0;
    }
    cell.success_pct = percentage(q, sw.n_sim);
    cell.improvement_pct = percentage(p, sw.n_sim);
  }
  return report;
}

void write_sweep(const SweepReport& report, const std::filesystem::path& out) {
  CsvTable summary({"mode", "beta", "sigma2", "success_pct", "improvement_pct"});
  CsvTable runs({"mode", "beta", "sigma2", "run", "seed", "cost", "success", "improved", "failed"});
  for (const auto& cell : report.cells) {
    const std::string mode(to_string(cell.mode));
    summary.row({mode, format_double(cell.beta), format_double(cell.sigma2),
                 format_double(cell.success_pct), format_double(cell.improvement_pct)});
    for (const auto& run : cell.runs) {
      runs.row({mode, format_double(cell.beta), format_double(cell.sigma2),
                std::to_string(run.run), std::to_string(run.seed), format_double(run.final_cost),
                run.success ? "1" : "0", run.improved ? "1" : "0", run.failed ? "1" : "0"});
    }
  }
  summary.save(out / "sweep.csv");
  runs.save(out / "sweep_runs.csv");
}

}  // namespace twostep
