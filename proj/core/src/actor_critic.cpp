#include "twostep/actor_critic.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace twostep {

BasisGrid::BasisGrid(Vec lower, Vec upper, std::vector<int> points_per_dim)
    : BasisGrid(lower, upper, points_per_dim, Vec()) {}

BasisGrid::BasisGrid(Vec lower, Vec upper, std::vector<int> points_per_dim, Vec widths) {
  const auto dims = static_cast<Eigen::Index>(points_per_dim.size());
  if (lower.size() != dims || upper.size() != dims || dims == 0) {
    throw PreconditionViolation("BasisGrid: bounds and point counts disagree in dimension");
  }
  widths_ = widths.size() == 0 ? Vec(dims) : widths;
  if (widths_.size() != dims) throw PreconditionViolation("BasisGrid: widths has wrong dimension");
  size_ = 1;
  for (Eigen::Index d = 0; d < dims; ++d) {
    const int k = points_per_dim[d];
    if (k < 1 || !(upper(d) >= lower(d))) {
      throw PreconditionViolation("BasisGrid: each axis needs >= 1 point and upper >= lower");
    }
    axes_.push_back(k == 1 ? Vec(Vec::Constant(1, 0.5 * (lower(d) + upper(d))))
                           : Vec(Vec::LinSpaced(k, lower(d), upper(d))));
    if (widths.size() == 0) {
      widths_(d) = k == 1 ? 1.0 : (upper(d) - lower(d)) / (k - 1);
    }
    if (!(widths_(d) > 0.0)) throw PreconditionViolation("BasisGrid: widths must be > 0");
    size_ *= k;
  }
}

BasisGrid BasisGrid::pendulum_default() {
  return BasisGrid((Vec(2) << -0.5, -2.0).finished(), (Vec(2) << 0.5, 2.0).finished(), {11, 11});
}

Vec BasisGrid::center(int j) const {
  Vec c(dims());
  for (int d = dims() - 1; d >= 0; --d) {
    const auto k = axes_[d].size();
    c(d) = axes_[d](j % k);
    j /= static_cast<int>(k);
  }
  return c;
}

Vec BasisGrid::features(const Vec& x) const {
  Vec out(size_);
  features_into(x, out);
  return out;
}

void BasisGrid::features_into(const Vec& x, Vec& out) const {
  if (x.size() != dims()) throw PreconditionViolation("BasisGrid: state has the wrong dimension");
  // Separable: one exp per axis point, then products across axes.
  out.resize(size_);
  out(0) = 1.0;
  Eigen::Index filled = 1;
  for (int d = 0; d < dims(); ++d) {
    const Vec& axis = axes_[d];
    const double inv = 1.0 / (2.0 * widths_(d) * widths_(d));
    const auto k = axis.size();
    // Expand in place from the back so earlier dims stay slowest.
    for (Eigen::Index i = filled - 1; i >= 0; --i) {
      const double base = out(i);
      for (Eigen::Index a = k - 1; a >= 0; --a) {
        const double diff = x(d) - axis(a);
        out(i * k + a) = base * std::exp(-diff * diff * inv);
      }
    }
    filled *= k;
  }
}

Vec features(const Vec& x, const BasisGrid& grid) { return grid.features(x); }

double value(const Vec& x, const Vec& theta, const BasisGrid& grid) {
  return theta.dot(grid.features(x));
}

Vec policy_mean(const Vec& x, const Mat& w, const BasisGrid& grid) {
  return w.transpose() * grid.features(x);
}

Vec sample_action(const Vec& x, const ActorState& actor, const BasisGrid& grid, Rng& rng) {
  const Vec mean = policy_mean(x, actor.w, grid);
  const Eigen::LLT<Mat> chol(actor.sigma);
  if (chol.info() != Eigen::Success) {
    throw PreconditionViolation("sample_action: covariance is not positive definite");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return mean + chol.matrixL() * z;
}

double log_policy_density(const Vec& u, const Vec& x, const ActorState& actor,
                          const BasisGrid& grid) {
  const Vec diff = u - policy_mean(x, actor.w, grid);
  const Eigen::LLT<Mat> chol(actor.sigma);
  if (chol.info() != Eigen::Success) {
    throw PreconditionViolation("log_policy_density: covariance is not positive definite");
  }
  const Vec white = chol.matrixL().solve(diff);
  const double log_det = 2.0 * chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const auto m = static_cast<double>(u.size());
  return -0.5 * (m * std::log(2.0 * std::numbers::pi) + log_det + white.squaredNorm());
}

Mat log_policy_grad(const Vec& u, const Vec& x, const ActorState& actor, const BasisGrid& grid) {
  const Vec phi = grid.features(x);
  const Vec diff = u - actor.w.transpose() * phi;
  const Eigen::LLT<Mat> chol(actor.sigma);
  if (chol.info() != Eigen::Success) {
    throw PreconditionViolation("log_policy_grad: covariance is not positive definite");
  }
  return phi * chol.solve(diff).transpose();
}

double variance_schedule(int episode, double sigma2, int n_episodes) {
  if (n_episodes <= 0 || episode <= 0) return sigma2;
  if (episode >= n_episodes) return sigma2 * 1e-4;
  return sigma2 * std::pow(1e-4, static_cast<double>(episode) / n_episodes);
}

void actor_critic_update(CriticState& critic, ActorState& actor, double delta, const Vec& phi,
                         const Mat& grad, double zeta, double gamma) {
  if (!std::isfinite(delta)) throw NumericalBlowup("actor_critic_update: non-finite TD error");
  critic.trace_z = gamma * critic.lambda * critic.trace_z + zeta * phi;
  actor.trace_z = gamma * actor.lambda * actor.trace_z + zeta * grad;
  critic.theta += critic.alpha * delta * critic.trace_z;
  actor.w += actor.beta * delta * actor.trace_z;
  if (!(critic.theta.cwiseAbs().maxCoeff() <= kWeightBlowupLimit) ||
      !(actor.w.cwiseAbs().maxCoeff() <= kWeightBlowupLimit)) {
    throw NumericalBlowup("actor_critic_update: weights exceeded 1e8 in magnitude");
  }
}

int ActorCriticParams::steps_per_episode() const {
  return static_cast<int>(std::lround(t_epi / ts));
}

void ActorCriticParams::validate() const {
  if (!(ts > 0.0)) throw ConfigError("sampling period Ts must be > 0");
  if (!(t_epi >= ts)) throw ConfigError("episode length T_epi must be >= Ts");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(lambda_theta >= 0.0 && lambda_theta < 1.0)) {
    throw ConfigError("lambda_theta must lie in [0, 1)");
  }
  if (!(lambda_w >= 0.0 && lambda_w < 1.0)) throw ConfigError("lambda_w must lie in [0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be > 0");
  if (n_episodes < 0) throw ConfigError("n_episodes must be >= 0");
  if (!(penalty_angle > 0.0)) throw ConfigError("penalty angle must be > 0");
  if (!x0.allFinite()) throw ConfigError("x0 must be finite");
  weights.validate();
}

ActorState initial_actor(const ActorCriticParams& params, int n_features, int inputs) {
  ActorState actor;
  actor.w = Mat::Zero(n_features, inputs);
  actor.trace_z = Mat::Zero(n_features, inputs);
  actor.beta = params.beta;
  actor.lambda = params.lambda_w;
  actor.sigma2_initial = params.sigma2;
  actor.sigma = params.sigma2 * Mat::Identity(inputs, inputs);
  return actor;
}

CriticState initial_critic(const ActorCriticParams& params, int n_features) {
  return {Vec::Zero(n_features), Vec::Zero(n_features), params.alpha, params.lambda_theta};
}

namespace {

Vec linear_part(const std::optional<GainMatrix>& gain, const Vec& x, int inputs) {
  return gain ? Vec(*gain * x) : Vec::Zero(inputs);
}

}  // namespace

EpisodeResult run_episode(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                          CriticState& critic, ActorState& actor, const BasisGrid& grid,
                          const ActorCriticParams& params, Rng& rng) {
  const int horizon = params.steps_per_episode();
  critic.trace_z.setZero(grid.size());
  actor.trace_z.setZero(grid.size(), plant.m);
  double zeta = 1.0;

  const Eigen::LLT<Mat> sigma_chol(actor.sigma);
  if (sigma_chol.info() != Eigen::Success) {
    throw PreconditionViolation("run_episode: covariance is not positive definite");
  }
  const Mat sigma_l = sigma_chol.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);

  EpisodeResult result;
  Vec x = params.x0;
  Vec phi = grid.features(x);
  Vec phi_next(grid.size());
  Vec noise(plant.m);
  Mat grad(grid.size(), plant.m);
  for (int k = 0; k < horizon; ++k) {
    const Vec mean = actor.w.transpose() * phi;
    for (int i = 0; i < plant.m; ++i) noise(i) = normal(rng);
    const Vec u_rl = mean + sigma_l * noise;
    const Vec u = linear_part(gain, x, plant.m) + u_rl;
    const Vec x_next = step(plant, x, u, params.ts);
    const double stage = -reward(x_next, u, params.weights);
    result.cost += stage;
    result.steps = k + 1;

    // Actor direction for the action just taken at x.
    if (params.actor_gradient == ActorGradient::kScore) {
      grad.noalias() = phi * sigma_chol.solve(u_rl - mean).transpose();
    } else {
      grad.noalias() = phi * (u_rl - mean).transpose();
    }

    grid.features_into(x_next, phi_next);
    const bool fell = std::abs(x_next(0)) >= params.penalty_angle;
    // Terminal state value is zero on a fall.
    const double bootstrap = fell ? 0.0 : params.gamma * critic.theta.dot(phi_next);
    const double r = fell ? params.penalty_reward : -stage;
    const double delta = r + bootstrap - critic.theta.dot(phi);
    const Vec& critic_features =
        params.critic_trace == CriticTrace::kPreviousState ? phi : phi_next;
    actor_critic_update(critic, actor, delta, critic_features, grad, zeta, params.gamma);
    zeta *= params.gamma;

    if (fell) {
      result.penalized = true;
      break;
    }
    x = x_next;
    phi.swap(phi_next);
  }
  return result;
}

TrainResult train(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                  const BasisGrid& grid, const ActorCriticParams& params, std::uint64_t seed) {
  params.validate();
  if (gain && (gain->rows() != plant.m || gain->cols() != plant.n)) {
    throw PreconditionViolation("train: gain must be m x n");
  }
  CriticState critic = initial_critic(params, grid.size());
  ActorState actor = initial_actor(params, grid.size(), plant.m);
  Rng rng(seed);

  TrainResult out;
  out.curve.reserve(params.n_episodes);
  for (int e = 0; e < params.n_episodes; ++e) {
    actor.sigma = variance_schedule(e, params.sigma2, params.n_episodes) *
                  Mat::Identity(plant.m, plant.m);
    try {
      out.curve.push_back(run_episode(plant, gain, critic, actor, grid, params, rng));
    } catch (const NumericalBlowup& err) {
      throw NumericalBlowup("episode " + std::to_string(e) + ": " + err.what());
    }
  }
  out.theta = critic.theta;
  out.w = actor.w;
  return out;
}

Rollout deterministic_rollout(const PlantModel& plant, const std::optional<GainMatrix>& gain,
                              const std::optional<Mat>& w, const BasisGrid& grid,
                              const ActorCriticParams& params) {
  const int horizon = params.steps_per_episode();
  Rollout out;
  Vec x = params.x0;
  out.time.push_back(0.0);
  out.states.push_back(x);
  for (int k = 0; k < horizon; ++k) {
    Vec u = linear_part(gain, x, plant.m);
    if (w) u += w->transpose() * grid.features(x);
    const Vec x_next = step(plant, x, u, params.ts);
    out.cost += -reward(x_next, u, params.weights);
    if (std::abs(x_next(0)) >= params.penalty_angle) out.crossed_boundary = true;
    out.inputs.push_back(u);
    out.states.push_back(x_next);
    out.time.push_back((k + 1) * params.ts);
    x = x_next;
  }
  return out;
}

}  // namespace twostep
