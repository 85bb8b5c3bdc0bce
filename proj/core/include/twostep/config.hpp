#pragma once

// Experiment configuration. Every field defaults to the reference pendulum
// study; a JSON file overrides any subset. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/actor_critic.hpp"
#include "twostep/environment.hpp"
#include "twostep/lqr_offline.hpp"

namespace twostep {

enum class ControllerMode { kKPlusRl, kK0PlusRl, kRlAlone, kKAlone, kK0Alone };

std::string_view to_string(ControllerMode mode);
ControllerMode parse_mode(std::string_view name);
bool uses_rl(ControllerMode mode);

enum class PlantPreset { kPendulum, kLinear };

std::string_view to_string(PlantPreset preset);
PlantPreset parse_plant(std::string_view name);

struct Step1Config {
  CostWeights weights = CostWeights::pendulum_defaults();
  GainMatrix k0 = (Mat(1, 2) << -2.87, -2.00).finished();
  CollectionOptions collection;
  double eps = 1e-3;
  int max_iter = kDefaultMaxIterations;
};

struct BasisConfig {
  Vec lower = (Vec(2) << -0.5, -2.0).finished();
  Vec upper = (Vec(2) << 0.5, 2.0).finished();
  std::vector<int> points = {11, 11};
  Vec widths;  // empty: grid spacing

  int size() const;
  BasisGrid build() const;
};

struct SweepConfig {
  std::vector<double> betas = {1e-4, 1e-3, 1e-2};
  std::vector<double> sigma2s = {2.5e-2};
  int n_sim = 20;
  std::vector<ControllerMode> modes = {ControllerMode::kKPlusRl, ControllerMode::kK0PlusRl,
                                       ControllerMode::kRlAlone};
  int threads = 0;  // 0: hardware concurrency
};

struct ExperimentConfig {
  PlantPreset plant = PlantPreset::kPendulum;
  PendulumParams pendulum;
  Step1Config step1;
  ActorCriticParams step2;
  BasisConfig basis;
  SweepConfig sweep;
  ControllerMode mode = ControllerMode::kKPlusRl;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Parses JSON text; empty or whitespace-only input yields the defaults.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace twostep
