#pragma once

// Step 2: one-step actor-critic with eligibility traces over a Gaussian RBF
// feature map, run in parallel with a fixed linear gain (u = K x + u_RL).

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "twostep/environment.hpp"
#include "twostep/lqr_offline.hpp"
#include "twostep/numerics.hpp"

namespace twostep {

/// Gaussian radial basis functions centred on a tensor-product grid.
/// Feature j = exp(-sum_d (x_d - c_{j,d})^2 / (2 w_d^2)); the first state
/// coordinate varies slowest in the feature ordering.
class BasisGrid {
 public:
  BasisGrid(Vec lower, Vec upper, std::vector<int> points_per_dim);
  /// Width per dimension defaults to the grid spacing.
  BasisGrid(Vec lower, Vec upper, std::vector<int> points_per_dim, Vec widths);

  /// 11 x 11 grid over [-0.5, 0.5] rad x [-2, 2] rad/s.
  static BasisGrid pendulum_default();

  int size() const { return size_; }
  int dims() const { return static_cast<int>(axes_.size()); }
  Vec center(int j) const;
  const Vec& widths() const { return widths_; }

  Vec features(const Vec& x) const;
  /// Allocation-free variant; `out` must already have size().
  void features_into(const Vec& x, Vec& out) const;

 private:
  std::vector<Vec> axes_;
  Vec widths_;
  int size_ = 0;
};

struct CriticState {
  Vec theta;
  Vec trace_z;
  double alpha = 0.05;
  double lambda = 0.99;
};

struct ActorState {
  Mat w;        // N x m
  Mat trace_z;  // N x m
  double beta = 0.001;
  double lambda = 0.99;
  double sigma2_initial = 0.05;
  Mat sigma;  // m x m covariance for the current episode
};

struct EpisodeResult {
  double cost = 0.0;
  int steps = 0;
  bool penalized = false;
};

Vec features(const Vec& x, const BasisGrid& grid);
double value(const Vec& x, const Vec& theta, const BasisGrid& grid);
Vec policy_mean(const Vec& x, const Mat& w, const BasisGrid& grid);

using Rng = std::mt19937_64;

/// u_RL ~ Normal(mean(x; W), Sigma).
Vec sample_action(const Vec& x, const ActorState& actor, const BasisGrid& grid, Rng& rng);
double log_policy_density(const Vec& u, const Vec& x, const ActorState& actor,
                          const BasisGrid& grid);
/// d/dW log pi(u | x; W) = phi(x) (Sigma^-1 (u - mean))'.
Mat log_policy_grad(const Vec& u, const Vec& x, const ActorState& actor, const BasisGrid& grid);

/// sigma2 * (1e-4)^(E / N_epi).
double variance_schedule(int episode, double sigma2, int n_episodes);

/// Weight magnitude beyond which learning is declared divergent.
inline constexpr double kWeightBlowupLimit = 1e8;

/// Trace decay-and-accumulate followed by the TD-driven weight step:
/// z <- gamma lambda z + zeta phi, Z <- gamma lambda Z + zeta grad, then
/// theta += alpha delta z, W += beta delta Z. The caller advances zeta.
void actor_critic_update(CriticState& critic, ActorState& actor, double delta, const Vec& phi,
                         const Mat& grad, double zeta, double gamma);

/// Which feature vector the critic trace accumulates at each update.
enum class CriticTrace {
  kPreviousState,  // phi(x_k): classical TD(lambda)
  kCurrentState,   // phi(x_{k+1}); diverges on the pendulum preset
};

/// Direction fed into the actor trace.
enum class ActorGradient {
  kVarianceScaled,  // Sigma * grad log pi = phi (u - mean)'
  kScore,           // grad log pi = phi (Sigma^-1 (u - mean))'
};

struct ActorCriticParams {
  double ts = 0.03;
  double t_epi = 3.0;
  Vec x0 = (Vec(2) << 0.4, 0.0).finished();
  double gamma = 0.9;
  double lambda_theta = 0.99;
  double lambda_w = 0.99;
  double alpha = 0.05;
  double beta = 0.001;
  double sigma2 = 0.05;
  int n_episodes = 5000;
  double penalty_angle = 0.5;
  double penalty_reward = -100.0;
  CostWeights weights = CostWeights::pendulum_defaults();
  CriticTrace critic_trace = CriticTrace::kPreviousState;
  ActorGradient actor_gradient = ActorGradient::kVarianceScaled;

  int steps_per_episode() const;
  void validate() const;
};

ActorState initial_actor(const ActorCriticParams& params, int n_features, int inputs);
CriticState initial_critic(const ActorCriticParams& params, int n_features);

/// One learning episode from params.x0. `gain` is the parallel linear law
/// (absent for the RL-alone controller). Traces and zeta restart each episode.
EpisodeResult run_episode(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                          CriticState& critic, ActorState& actor, const BasisGrid& grid,
                          const ActorCriticParams& params, Rng& rng);

struct TrainResult {
  Vec theta;
  Mat w;
  std::vector<EpisodeResult> curve;
};

/// Runs params.n_episodes episodes from zero weights, carrying theta and W
/// across episodes and refreshing Sigma from variance_schedule each episode.
TrainResult train(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                  const BasisGrid& grid, const ActorCriticParams& params, std::uint64_t seed);

struct Rollout {
  double cost = 0.0;
  bool crossed_boundary = false;  // |angle| reached penalty_angle at some step
  std::vector<double> time;
  std::vector<Vec> states;  // states[0] == x0
  std::vector<Vec> inputs;
};

/// Deterministic closed loop u = K x + mean(x; W) over the full episode
/// horizon; never terminates early. Either part may be absent.
Rollout deterministic_rollout(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                              const std::optional<Mat>& w, const BasisGrid& grid,
                              const ActorCriticParams& params);

}  // namespace twostep
