#pragma once

#include <functional>
#include <string>

#include "twostep/numerics.hpp"

namespace twostep {

/// Physical constants of the torque-driven inverted pendulum. Defaults are
/// the reference experiment's values.
struct PendulumParams {
  double length = 0.5;    // m
  double mass = 0.15;     // kg
  double gravity = 9.8;   // m/s^2
  double friction = 0.05;

  void validate() const;
  double inertia() const { return mass * length * length; }
};

/// Quadratic weights of the regulator cost. Q must be PSD, R PD.
struct CostWeights {
  Mat q;
  Mat r;

  void validate() const;
  static CostWeights pendulum_defaults();
};

using DynamicsFn = std::function<Vec(const Vec& x, const Vec& u)>;
using StateClamp = std::function<void(Vec& x)>;

/// Continuous-time plant x' = f(x, u) with the origin as equilibrium.
struct PlantModel {
  std::string name;
  int n = 0;
  int m = 0;
  DynamicsFn dynamics;
  StateClamp state_clamp;  // empty: no clamping
};

Vec pendulum_dynamics(const Vec& x, const Vec& u, const PendulumParams& p);

struct LinearModel {
  Mat a;
  Mat b;
};

/// Analytic Jacobians of the pendulum at the upright equilibrium. Test and
/// reporting oracle only; the learners never see it.
LinearModel linearize_pendulum(const PendulumParams& p);

/// Wraps the first coordinate (angle) into [-pi, pi].
void wrap_angle(Vec& x);

PlantModel make_pendulum_plant(const PendulumParams& p, bool wrap = true);
PlantModel make_linear_plant(const Mat& a, const Mat& b);

/// One zero-order-hold RK4 step followed by the plant's state clamp.
Vec step(const PlantModel& plant, const Vec& x, const Vec& u, double ts);

/// -(x_next' Q x_next + u' R u).
double reward(const Vec& x_next, const Vec& u, const CostWeights& w);

}  // namespace twostep
