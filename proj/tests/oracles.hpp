#pragma once

// Reference computations that share no code with the library under test.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Stabilizing CARE solution from the stable invariant subspace of the
// Hamiltonian matrix.
inline Mat care(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
  const auto n = a.rows();
  Mat h(2 * n, 2 * n);
  h << a, -b * r.inverse() * b.transpose(), -q, -a.transpose();
  Eigen::ComplexEigenSolver<Mat> es(h);
  Eigen::MatrixXcd stable(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) {
      if (k == n) throw std::runtime_error("care: too many stable eigenvalues");
      stable.col(k++) = es.eigenvectors().col(i);
    }
  }
  if (k != n) throw std::runtime_error("care: Hamiltonian has imaginary-axis eigenvalues");
  const Eigen::MatrixXcd u1 = stable.topRows(n);
  const Eigen::MatrixXcd u2 = stable.bottomRows(n);
  Mat p = (u2 * u1.inverse()).real();
  return 0.5 * (p + p.transpose());
}

inline Mat lqr_gain(const Mat& b, const Mat& r, const Mat& p) {
  return -r.inverse() * b.transpose() * p;
}

// Solves A'P + PA + M = 0 for 2x2 A by writing out the three scalar
// equations in (p11, p12, p22).
inline Mat lyapunov_2x2(const Mat& a, const Mat& m) {
  const double a11 = a(0, 0), a12 = a(0, 1), a21 = a(1, 0), a22 = a(1, 1);
  Eigen::Matrix3d lhs;
  lhs << 2 * a11, 2 * a21, 0,
         a12, a11 + a22, a21,
         0, 2 * a12, 2 * a22;
  const Eigen::Vector3d rhs(-m(0, 0), -m(0, 1), -m(1, 1));
  const Eigen::Vector3d p = lhs.fullPivLu().solve(rhs);
  Mat out(2, 2);
  out << p(0), p(1), p(1), p(2);
  return out;
}

// Closed-form upright-pendulum linearization.
inline void pendulum_ab(double length, double mass, double gravity, double friction, Mat& a,
                        Mat& b) {
  const double inertia = mass * length * length;
  a.resize(2, 2);
  a << 0.0, 1.0, gravity / length, -friction / inertia;
  b.resize(2, 1);
  b << 0.0, 1.0 / inertia;
}

// Mechanical energy of the frictionless upright pendulum (angle from vertical).
inline double pendulum_energy(const Vec& x, double length, double mass, double gravity) {
  return 0.5 * mass * length * length * x(1) * x(1) + mass * gravity * length * std::cos(x(0));
}

// Discrete quadratic episode cost J = sum_k x_{k+1}'Q x_{k+1} + u_k'R u_k for a
// linear gain, integrating the nonlinear pendulum with a plain RK4 loop.
inline double pendulum_lqr_cost(const Mat& k, const Vec& x0, double ts, int steps, double length,
                                double mass, double gravity, double friction, const Mat& q,
                                const Mat& r) {
  const double inertia = mass * length * length;
  auto f = [&](const Eigen::Vector2d& x, double u) {
    return Eigen::Vector2d(x(1), gravity / length * std::sin(x(0)) - friction / inertia * x(1) +
                                     u / inertia);
  };
  Eigen::Vector2d x = x0;
  double cost = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double u = (k * x)(0);
    const Eigen::Vector2d k1 = f(x, u);
    const Eigen::Vector2d k2 = f(x + 0.5 * ts * k1, u);
    const Eigen::Vector2d k3 = f(x + 0.5 * ts * k2, u);
    const Eigen::Vector2d k4 = f(x + ts * k3, u);
    x += ts / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    cost += x.dot(q * x) + u * r(0, 0) * u;
  }
  return cost;
}

}  // namespace oracle
