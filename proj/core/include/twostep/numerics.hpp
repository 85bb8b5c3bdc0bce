#pragma once

// Dense linear algebra and fixed-step integration shared by the Step-1 and
// Step-2 learners. Everything here is a pure function of its arguments.

#include <Eigen/Dense>

#include <span>

#include "twostep/errors.hpp"

namespace twostep {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Solution of an overdetermined least-squares problem plus the numerical
/// rank the orthogonal factorization settled on.
struct LeastSquaresResult {
  Vec solution;
  int rank = 0;
};

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-8;

/// Minimum-residual solution of `regressor * z = rhs`. Throws RankDeficient
/// when the regressor does not have full column rank.
LeastSquaresResult solve_least_squares(const Mat& regressor, const Vec& rhs);

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// One classical RK4 step of `x' = f(x, u)` with `u` held over the step.
template <typename Dynamics>
Vec rk4_step(Dynamics&& f, const Vec& x, const Vec& u, double dt) {
  if (!(dt > 0.0)) throw PreconditionViolation("rk4_step: dt must be > 0");
  const Vec k1 = f(x, u);
  const Vec k2 = f(x + 0.5 * dt * k1, u);
  const Vec k3 = f(x + 0.5 * dt * k2, u);
  const Vec k4 = f(x + dt * k3, u);
  Vec next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(next)) throw NumericalBlowup("rk4_step produced a non-finite state");
  return next;
}

/// Number of free entries of a symmetric n x n matrix.
constexpr int svec_size(int n) { return n * (n + 1) / 2; }

/// Upper-triangular row-major stacking (M11, M12, ..., M1n, M22, ...).
Vec svec(const Mat& symmetric);
Mat smat(const Vec& packed, int n);
/// Regressor for quadratic forms: svec_quad(x).dot(svec(P)) == x' P x.
Vec svec_quad(const Vec& x);
/// Inverse of the quadratic-regressor packing: recovers the symmetric matrix
/// S with svec_quad(x) == packed  <=>  S == x x'.
Mat unpack_quad(const Vec& packed, int n);

/// Unique symmetric P with A' P + P A + M = 0 via the n^2 x n^2 Kronecker system.
Mat solve_lyapunov(const Mat& a_cl, const Mat& m);

/// True when every eigenvalue of `a` has a strictly negative real part.
bool is_hurwitz(const Mat& a);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue_symmetric(const Mat& s);

struct Sample {
  Vec x;
  Vec u;
};

/// Iteration-independent moments of one data window.
struct WindowMoments {
  Vec x_start;
  Vec x_end;
  Vec ixx;  // integral of svec_quad(x)
  Mat ixu;  // integral of x u'
};

/// Trapezoid moments over uniformly spaced samples covering one window.
WindowMoments window_integrals(std::span<const Sample> samples, double dt_sample);

}  // namespace twostep
