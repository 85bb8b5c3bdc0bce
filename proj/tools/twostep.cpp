// Command-line driver for the two-step controller design.
//
//   twostep step1   --config cfg.json --out run/
//   twostep step2   --gain run/gain.json --mode K+RL --out run/
//   twostep eval    --gain run/gain.json --weights run/weights.json --mode K+RL
//   twostep compare --gain run/gain.json --out run/
//   twostep sweep   --gain run/gain.json --n-sim 20 --out run/

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twostep/config.hpp"
#include "twostep/errors.hpp"
#include "twostep/harness.hpp"
#include "twostep/io.hpp"

namespace fs = std::filesystem;
using namespace twostep;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
  std::optional<int> n_sim;
  std::optional<int> episodes;
  std::optional<int> threads;
  std::string gain;
  std::string weights;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON experiment config (defaults when omitted)");
  cmd->add_option("--seed", o.seed, "Base random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--mode", o.mode, "Controller: K+RL, K0+RL, RL-alone, K-alone, K0-alone");
  cmd->add_option("--n-sim", o.n_sim, "Runs per sweep cell");
  cmd->add_option("--episodes", o.episodes, "Override the number of training episodes");
  cmd->add_option("--threads", o.threads, "Sweep worker threads (0 = all cores)");
  cmd->add_option("--gain", o.gain, "gain.json from step1; computed on the fly when omitted");
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? parse_config_text("") : parse_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.mode.empty()) cfg.mode = parse_mode(o.mode);
  if (o.n_sim) cfg.sweep.n_sim = *o.n_sim;
  if (o.episodes) cfg.step2.n_episodes = *o.episodes;
  if (o.threads) cfg.sweep.threads = *o.threads;
  cfg.validate();
  return cfg;
}

GainMatrix resolve_gain(const CommonOptions& o, const ExperimentConfig& cfg) {
  if (!o.gain.empty()) return parse_gain(read_text(o.gain)).k;
  std::cerr << "no --gain given; running step1 first\n";
  return run_step1(cfg).report.k_final;
}

void print_row(const std::string& label, double value) {
  std::cout << label << ' ' << format_double(value) << '\n';
}

int cmd_step1(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const Step1Result result = run_step1(cfg);
  write_step1_outputs(cfg, result, cfg.output_dir);
  std::cout << "iterations " << result.report.iterations << '\n';
  for (Eigen::Index j = 0; j < result.report.k_final.cols(); ++j) {
    print_row("K[" + std::to_string(j) + "]", result.report.k_final(0, j));
  }
  for (Eigen::Index j = 0; j < result.oracle.k_star.cols(); ++j) {
    print_row("K*[" + std::to_string(j) + "]", result.oracle.k_star(0, j));
  }
  return 0;
}

int cmd_step2(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const GainMatrix k = resolve_gain(o, cfg);
  const Step2Result result = run_step2(cfg, k, cfg.seed);
  write_step2_outputs(cfg, result, cfg.output_dir);
  int penalized = 0;
  for (const auto& ep : result.training.curve) penalized += ep.penalized ? 1 : 0;
  std::cout << "mode " << to_string(cfg.mode) << '\n'
            << "episodes " << result.training.curve.size() << '\n'
            << "penalized_episodes " << penalized << '\n';
  print_row("final_cost", result.evaluation.cost);
  return 0;
}

int cmd_eval(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  std::optional<GainMatrix> k;
  if (cfg.mode == ControllerMode::kKAlone || cfg.mode == ControllerMode::kKPlusRl) {
    k = resolve_gain(o, cfg);
  }
  std::optional<Mat> w;
  if (uses_rl(cfg.mode)) {
    if (o.weights.empty()) throw ConfigError("mode " + std::string(to_string(cfg.mode)) +
                                             " needs --weights");
    Vec theta;
    Mat wm;
    parse_weights(read_text(o.weights), theta, wm);
    w = wm;
  }
  const Rollout r = evaluate_policy(make_plant(cfg), cfg.mode, k, w, cfg);
  std::cout << "mode " << to_string(cfg.mode) << '\n';
  print_row("cost", r.cost);
  std::cout << "success " << (is_success(r) ? 1 : 0) << '\n';
  return 0;
}

int cmd_compare(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const GainMatrix k = resolve_gain(o, cfg);
  const auto rows = compare_controllers(cfg, k, cfg.seed);
  write_comparison(rows, fs::path(cfg.output_dir) / "table3.csv");
  for (const auto& row : rows) print_row(std::string(to_string(row.mode)), row.cost);
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const GainMatrix k = resolve_gain(o, cfg);
  const SweepReport report = robustness_sweep(cfg, k);
  write_sweep(report, cfg.output_dir);
  write_text(fs::path(cfg.output_dir) / "config.json", serialize_config(cfg));
  print_row("baseline_cost", report.baseline_cost);
  for (const auto& cell : report.cells) {
    std::cout << to_string(cell.mode) << " beta=" << format_double(cell.beta)
              << " sigma2=" << format_double(cell.sigma2)
              << " success_pct=" << format_double(cell.success_pct)
              << " improvement_pct=" << format_double(cell.improvement_pct) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step linear + actor-critic controller design"};
  app.require_subcommand(1);

  CommonOptions o;
  auto* step1 = app.add_subcommand("step1", "Learn K offline from exploration data");
  auto* step2 = app.add_subcommand("step2", "Train the residual actor-critic policy");
  auto* eval = app.add_subcommand("eval", "Deterministic evaluation of one controller");
  auto* compare = app.add_subcommand("compare", "Cost of every controller combination");
  auto* sweep = app.add_subcommand("sweep", "Success and improvement rates over beta and sigma2");
  for (auto* cmd : {step1, step2, eval, compare, sweep}) add_common(cmd, o);
  eval->add_option("--weights", o.weights, "weights.json from step2");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*step1) return cmd_step1(o);
    if (*step2) return cmd_step2(o);
    if (*eval) return cmd_eval(o);
    if (*compare) return cmd_compare(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
