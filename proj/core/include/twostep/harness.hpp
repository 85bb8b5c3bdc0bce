#pragma once

// Orchestration of the two-step design: Step 1 (offline gain), Step 2
// (actor-critic training), deterministic evaluation, the controller
// comparison table and the hyperparameter robustness sweep.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "twostep/actor_critic.hpp"
#include "twostep/config.hpp"
#include "twostep/lqr_offline.hpp"

namespace twostep {

/// Plant selected by the config preset. The "linear" preset is the exact
/// linearization of the configured pendulum.
PlantModel make_plant(const ExperimentConfig& config);

struct Step1Result {
  PolicyIterationReport report;
  KleinmanResult oracle;  // model-based reference on the analytic linearization
};

/// Collects exploration data with K0 and runs model-free policy iteration.
/// Uses config.seed for the exploration signal.
Step1Result run_step1(const ExperimentConfig& config);

/// Writes gain.json, trajectory.csv (K0 / K / K* angle rollouts) and
/// config.json under `out`.
void write_step1_outputs(const ExperimentConfig& config, const Step1Result& result,
                         const std::filesystem::path& out);

/// Linear part of the controller for a mode: K for K+RL and K-alone, K0 for
/// K0+RL and K0-alone, none for RL-alone.
std::optional<GainMatrix> linear_gain_for(ControllerMode mode, const ExperimentConfig& config,
                                          const GainMatrix& k);

/// Deterministic single-episode rollout from step2.x0 without exploration.
Rollout evaluate_policy(const PlantModel& plant, ControllerMode mode,
                        const std::optional<GainMatrix>& k, const std::optional<Mat>& w,
                        const ExperimentConfig& config);

struct Step2Result {
  TrainResult training;
  Rollout evaluation;
};

/// Trains the residual policy for config.mode with the given Step-1 gain.
Step2Result run_step2(const ExperimentConfig& config, const GainMatrix& k, std::uint64_t seed);

/// Writes costs.csv, weights.json, evaluation.json and config.json under `out`.
void write_step2_outputs(const ExperimentConfig& config, const Step2Result& result,
                         const std::filesystem::path& out);

struct ComparisonRow {
  ControllerMode mode;
  double cost = 0.0;
};

/// Post-training costs of every controller combination (K0-alone, K-alone,
/// K+RL, RL-alone).
std::vector<ComparisonRow> compare_controllers(const ExperimentConfig& config,
                                               const GainMatrix& k, std::uint64_t seed);
void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path);

/// Stabilization test for a trained deterministic controller.
struct SuccessCriterion {
  double final_angle = 0.05;
  double final_rate = 0.1;
};

bool is_success(const Rollout& rollout, const SuccessCriterion& criterion = {});

struct SweepRun {
  ControllerMode mode;
  int beta_index = 0;
  int sigma2_index = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double final_cost = 0.0;
  bool success = false;
  bool improved = false;
  bool failed = false;  // training threw; counted as neither success nor improvement
};

struct SweepCell {
  ControllerMode mode;
  double beta = 0.0;
  double sigma2 = 0.0;
  double success_pct = 0.0;
  double improvement_pct = 0.0;
  std::vector<SweepRun> runs;
};

struct SweepReport {
  double baseline_cost = 0.0;  // K-alone cost every run is compared against
  std::vector<SweepCell> cells;
};

/// Per-run seed as a fixed function of the cell coordinates.
std::uint64_t derive_seed(std::uint64_t base, int mode_index, int beta_index, int sigma2_index,
                          int run);

/// Percentage q / n_sim * 100 as used for both sweep metrics.
double percentage(int count, int n_sim);

/// Runs config.sweep over its (mode, beta, sigma2) grid with the Step-1 gain
/// k. Runs execute on config.sweep.threads worker threads; aggregation is
/// keyed by run identity.
SweepReport robustness_sweep(const ExperimentConfig& config, const GainMatrix& k);

/// sweep.csv (mode,beta,sigma2,success_pct,improvement_pct) and
/// sweep_runs.csv (one row per run).
void write_sweep(const SweepReport& report, const std::filesystem::path& out);

}  // namespace twostep
