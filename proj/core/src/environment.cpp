#include "twostep/environment.hpp"

#include <cmath>
#include <numbers>

namespace twostep {

void PendulumParams::validate() const {
  if (!(length > 0.0)) throw ConfigError("pendulum length must be > 0");
  if (!(mass > 0.0)) throw ConfigError("pendulum mass must be > 0");
  if (!(gravity > 0.0)) throw ConfigError("gravitational constant must be > 0");
  if (!(friction >= 0.0)) throw ConfigError("friction coefficient must be >= 0");
}

void CostWeights::validate() const {
  if (q.rows() != q.cols() || r.rows() != r.cols()) {
    throw ConfigError("cost weights must be square");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      (r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("cost weights must be symmetric");
  }
  if (min_eigenvalue_symmetric(q) < -1e-12) throw ConfigError("Q must be positive semi-definite");
  if (min_eigenvalue_symmetric(r) <= 0.0) throw ConfigError("R must be positive definite");
}

CostWeights CostWeights::pendulum_defaults() {
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 100.0;
  q(1, 1) = 1.0;
  return {q, Mat::Identity(1, 1)};
}

Vec pendulum_dynamics(const Vec& x, const Vec& u, const PendulumParams& p) {
  const double inertia = p.inertia();
  Vec dx(2);
  dx(0) = x(1);
  dx(1) = (p.gravity / p.length) * std::sin(x(0)) - (p.friction / inertia) * x(1) + u(0) / inertia;
  return dx;
}

LinearModel linearize_pendulum(const PendulumParams& p) {
  const double inertia = p.inertia();
  Mat a(2, 2);
  a << 0.0, 1.0, p.gravity / p.length, -p.friction / inertia;
  Mat b(2, 1);
  b << 0.0, 1.0 / inertia;
  return {a, b};
}

void wrap_angle(Vec& x) {
  constexpr double pi = std::numbers::pi;
  if (x(0) > pi || x(0) < -pi) {
    x(0) = std::remainder(x(0), 2.0 * pi);
  }
}

PlantModel make_pendulum_plant(const PendulumParams& p, bool wrap) {
  p.validate();
  PlantModel plant;
  plant.name = "pendulum";
  plant.n = 2;
  plant.m = 1;
  plant.dynamics = [p](const Vec& x, const Vec& u) { return pendulum_dynamics(x, u, p); };
  if (wrap) plant.state_clamp = wrap_angle;
  return plant;
}

PlantModel make_linear_plant(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw PreconditionViolation("make_linear_plant: A must be n x n and B n x m");
  }
  PlantModel plant;
  plant.name = "linear";
  plant.n = static_cast<int>(a.rows());
  plant.m = static_cast<int>(b.cols());
  plant.dynamics = [a, b](const Vec& x, const Vec& u) -> Vec { return a * x + b * u; };
  return plant;
}

Vec step(const PlantModel& plant, const Vec& x, const Vec& u, double ts) {
  Vec next = rk4_step(plant.dynamics, x, u, ts);
  if (plant.state_clamp) plant.state_clamp(next);
  return next;
}

double reward(const Vec& x_next, const Vec& u, const CostWeights& w) {
  if (x_next.size() != w.q.rows() || u.size() != w.r.rows()) {
    throw PreconditionViolation("reward: dimensions do not match the cost weights");
  }
  return -(x_next.dot(w.q * x_next) + u.dot(w.r * u));
}

}  // namespace twostep
