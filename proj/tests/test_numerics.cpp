#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "twostep/numerics.hpp"

using namespace twostep;

namespace {

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec vec1(double a) { return (Vec(1) << a).finished(); }

}  // namespace

TEST(LeastSquares, IdentityReturnsRhs) {
  const auto r = solve_least_squares(Mat::Identity(2, 2), vec2(3, 4));
  EXPECT_NEAR(r.solution(0), 3.0, 1e-14);
  EXPECT_NEAR(r.solution(1), 4.0, 1e-14);
  EXPECT_EQ(r.rank, 2);
}

TEST(LeastSquares, OverdeterminedColumnGivesMean) {
  const Mat a = Mat::Ones(2, 1);
  EXPECT_NEAR(solve_least_squares(a, vec2(1, 3)).solution(0), 2.0, 1e-14);
}

TEST(LeastSquares, RankOneThrows) {
  Mat a(3, 2);
  a << 1, 1, 2, 2, 3, 3;
  EXPECT_THROW(solve_least_squares(a, Vec::Ones(3)), RankDeficient);
  try {
    solve_least_squares(a, Vec::Ones(3));
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.rank(), 1);
    EXPECT_EQ(e.cols(), 2);
  }
}

TEST(Rk4, ZeroDynamicsKeepsState) {
  auto f = [](const Vec& x, const Vec&) { return Vec::Zero(x.size()).eval(); };
  const Vec s = vec2(0.3, -1.7);
  EXPECT_EQ(rk4_step(f, s, vec1(0), 0.03), s);
}

TEST(Rk4, ExponentialMatchesTaylorPolynomial) {
  auto f = [](const Vec& x, const Vec&) { return x; };
  const double h = 0.1;
  const double expected = 1 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
  EXPECT_NEAR(rk4_step(f, vec1(1), vec1(0), h)(0), expected, 1e-15);
  EXPECT_NEAR(expected, std::exp(0.1), 1e-6);
}

TEST(Rk4, ConstantInputIntegratesExactly) {
  auto f = [](const Vec&, const Vec& u) { return u; };
  EXPECT_DOUBLE_EQ(rk4_step(f, vec1(0), vec1(2), 0.5)(0), 1.0);
}

TEST(Rk4, RejectsNonPositiveStepAndBlowup) {
  auto f = [](const Vec& x, const Vec&) { return x; };
  EXPECT_THROW(rk4_step(f, vec1(1), vec1(0), 0.0), PreconditionViolation);
  auto g = [](const Vec& x, const Vec&) { return (x.array() * 1e300).matrix().eval(); };
  EXPECT_THROW(rk4_step(g, vec1(1e10), vec1(0), 1.0), NumericalBlowup);
}

TEST(Svec, IdentityAndRoundTrip) {
  const Vec s = svec(Mat::Identity(2, 2));
  ASSERT_EQ(s.size(), 3);
  EXPECT_EQ(s, (Vec(3) << 1, 0, 1).finished());
  EXPECT_EQ(smat((Vec(3) << 1, 0, 1).finished(), 2), Mat::Identity(2, 2));
  Mat m(3, 3);
  m << 4, 1, 2, 1, 5, 3, 2, 3, 6;
  EXPECT_EQ(smat(svec(m), 3), m);
}

TEST(Svec, AsymmetricInputThrows) {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(svec(m), Asymmetric);
}

TEST(Svec, QuadraticRegressorExample) {
  const Vec d = svec_quad(vec2(1, 2));
  EXPECT_EQ(d, (Vec(3) << 1, 4, 4).finished());
  EXPECT_DOUBLE_EQ(d.dot(svec(Mat::Identity(2, 2))), 5.0);
}

TEST(Svec, QuadraticFormIdentityRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    Vec x(n);
    Mat a(n, n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    for (int i = 0; i < n * n; ++i) a.data()[i] = u(rng);
    const Mat p = a + a.transpose();
    const double direct = x.dot(p * x);
    EXPECT_NEAR(svec_quad(x).dot(svec(p)), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    EXPECT_TRUE(unpack_quad(svec_quad(x), n).isApprox(x * x.transpose(), 1e-14));
  }
}

TEST(Lyapunov, ScalarCase) {
  EXPECT_NEAR(solve_lyapunov(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 2.0))(0, 0), 1.0,
              1e-14);
}

TEST(Lyapunov, DiagonalCase) {
  const Mat q = Vec(vec2(100, 1)).asDiagonal();
  const Mat p = solve_lyapunov(-Mat::Identity(2, 2), q);
  EXPECT_TRUE(p.isApprox(Mat(Vec(vec2(50, 0.5)).asDiagonal()), 1e-14));
}

TEST(Lyapunov, CoupledCaseMatchesHandSolution) {
  Mat a(2, 2);
  a << 0, 1, -1, -1;
  const Mat p = solve_lyapunov(a, Mat::Identity(2, 2));
  Mat expected(2, 2);
  expected << 1.5, 0.5, 0.5, 1.0;
  EXPECT_LT((p - expected).norm(), 1e-12);
  EXPECT_LT((a.transpose() * p + p * a + Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT((p - oracle::lyapunov_2x2(a, Mat::Identity(2, 2))).norm(), 1e-12);
}

TEST(Lyapunov, RandomResidualSmall) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    Mat a(n, n);
    for (int i = 0; i < n * n; ++i) a.data()[i] = g(rng);
    // Shift to make A Hurwitz.
    const double shift = a.eigenvalues().real().maxCoeff() + 0.5;
    a -= shift * Mat::Identity(n, n);
    Mat l(n, n);
    for (int i = 0; i < n * n; ++i) l.data()[i] = g(rng);
    const Mat m = l * l.transpose() + Mat::Identity(n, n);
    const Mat p = solve_lyapunov(a, m);
    EXPECT_LT((a.transpose() * p + p * a + m).norm(), 1e-9 * (1.0 + p.norm()));
    EXPECT_EQ((p - p.transpose()).norm(), 0.0);
  }
}

TEST(Lyapunov, SingularOperatorThrows) {
  Mat a(2, 2);
  a << 0, 1, -1, 0;  // eigenvalues +-i: lambda_i + lambda_j = 0
  EXPECT_THROW(solve_lyapunov(a, Mat::Identity(2, 2)), SingularLyapunov);
}

TEST(Hurwitz, Classification) {
  Mat a(2, 2);
  a << 0, 1, -1, -1;
  EXPECT_TRUE(is_hurwitz(a));
  a << 0, 1, 1, -1;
  EXPECT_FALSE(is_hurwitz(a));
  EXPECT_TRUE(is_hurwitz(-Mat::Identity(3, 3)));
  EXPECT_FALSE(is_hurwitz(Mat::Identity(3, 3)));
}

TEST(WindowIntegrals, ConstantIntegrand) {
  std::vector<Sample> s;
  for (int i = 0; i <= 30; ++i) s.push_back({vec2(1, 0), vec1(0)});
  const WindowMoments w = window_integrals(s, 0.001);
  EXPECT_NEAR(w.ixx(0), 0.03, 1e-15);
  EXPECT_EQ(w.ixx(1), 0.0);
  EXPECT_EQ(w.ixx(2), 0.0);
  EXPECT_EQ(w.ixu.norm(), 0.0);
  EXPECT_EQ(w.x_start, vec2(1, 0));
  EXPECT_EQ(w.x_end, vec2(1, 0));
}

TEST(WindowIntegrals, RampMatchesAnalytic) {
  std::vector<Sample> s;
  for (int i = 0; i <= 1000; ++i) s.push_back({vec2(i * 0.001, 0), vec1(1)});
  const WindowMoments w = window_integrals(s, 0.001);
  EXPECT_NEAR(w.ixx(0), 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(w.ixu(0, 0), 0.5, 1e-6);
  EXPECT_NEAR(w.ixu(1, 0), 0.0, 1e-15);
}

TEST(WindowIntegrals, SecondOrderConvergence) {
  auto err = [](int steps) {
    std::vector<Sample> s;
    const double dt = 1.0 / steps;
    for (int i = 0; i <= steps; ++i) s.push_back({vec1(std::sin(i * dt)), vec1(0)});
    const double exact = 0.5 - std::sin(2.0) / 4.0;
    return std::abs(window_integrals(s, dt).ixx(0) - exact);
  };
  const double ratio = err(100) / err(200);
  EXPECT_NEAR(ratio, 4.0, 0.05);
}

TEST(WindowIntegrals, SingleSampleThrows) {
  std::vector<Sample> s{{vec2(1, 0), vec1(0)}};
  EXPECT_THROW(window_integrals(s, 0.001), EmptyWindow);
}
