#include <gtest/gtest.h>

#include "oracles.hpp"
#include "twostep/environment.hpp"
#include "twostep/lqr_offline.hpp"

using namespace twostep;

namespace {

const Mat kK0 = (Mat(1, 2) << -2.87, -2.00).finished();

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

CostWeights scalar_weights(double q, double r) { return {scalar(q), scalar(r)}; }

PlantModel linear_pendulum() {
  const LinearModel lin = linearize_pendulum(PendulumParams{});
  return make_linear_plant(lin.a, lin.b);
}

}  // namespace

TEST(Exploration, ZeroAtOriginBoundedAndDeterministic) {
  const ExplorationSignal nu(42, 1);
  EXPECT_EQ(nu(0.0)(0), 0.0);
  EXPECT_DOUBLE_EQ(nu.bound(), 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = 0.0137 * i;
    const double v = nu(t)(0);
    EXPECT_LE(std::abs(v), 50.0);
    EXPECT_EQ(v, exploration_signal(t, 42)(0));
  }
  EXPECT_LE(nu.frequencies().cwiseAbs().maxCoeff(), 500.0);
  EXPECT_EQ(nu.frequencies().cols(), 100);
  EXPECT_NE(ExplorationSignal(43, 1)(0.1)(0), nu(0.1)(0));
}

TEST(CollectData, WindowShapes) {
  const DataWindowSet data =
      collect_data(make_pendulum_plant(PendulumParams{}), kK0, 1, CollectionOptions{});
  ASSERT_EQ(data.l(), 10);
  for (const auto& w : data.windows) {
    EXPECT_EQ(w.ixx.size(), 3);
    EXPECT_EQ(w.ixu.rows(), 2);
    EXPECT_EQ(w.ixu.cols(), 1);
  }
  for (int i = 1; i < data.l(); ++i) {
    EXPECT_EQ(data.windows[i].x_start, data.windows[i - 1].x_end);
  }
}

TEST(CollectData, TooFewWindowsRejected) {
  CollectionOptions opt;
  opt.l = 4;
  EXPECT_THROW(collect_data(linear_pendulum(), kK0, 1, opt), PreconditionViolation);
}

TEST(CollectData, UnexcitedEquilibriumIsRankDeficient) {
  const Excitation none = [](double) { return Vec::Zero(1).eval(); };
  const DataWindowSet data = collect_data(linear_pendulum(), kK0, none, CollectionOptions{});
  for (const auto& w : data.windows) {
    EXPECT_EQ(w.ixx.norm(), 0.0);
    EXPECT_EQ(w.ixu.norm(), 0.0);
  }
  const auto eq = assemble_learning_equations(data, kK0, CostWeights::pendulum_defaults());
  EXPECT_EQ(eq.regressor.rows(), 10);
  EXPECT_EQ(eq.regressor.cols(), 5);
  EXPECT_EQ(eq.regressor.norm(), 0.0);
  EXPECT_EQ(eq.rhs.norm(), 0.0);
  EXPECT_THROW(policy_iteration(data, kK0, CostWeights::pendulum_defaults(), 1e-3), RankDeficient);
}

TEST(CollectData, QuadraturesAgree) {
  CollectionOptions fine;
  CollectionOptions trap = fine;
  trap.quadrature = Quadrature::kTrapezoid;
  trap.dt_sample = 1e-5;
  const auto a = collect_data(linear_pendulum(), kK0, 3, fine);
  const auto b = collect_data(linear_pendulum(), kK0, 3, trap);
  for (int i = 0; i < a.l(); ++i) {
    EXPECT_LT((a.windows[i].ixx - b.windows[i].ixx).norm(),
              1e-3 * (1e-6 + a.windows[i].ixx.norm()));
  }
}

// Substitutes the model-based (P_i, K_{i+1}) into every learning-equation row.
TEST(LearningEquations, OracleSubstitutionResidual) {
  const PendulumParams p;
  Mat a, b;
  oracle::pendulum_ab(p.length, p.mass, p.gravity, p.friction, a, b);
  const CostWeights w = CostWeights::pendulum_defaults();
  const DataWindowSet data = collect_data(make_linear_plant(a, b), kK0, 5, CollectionOptions{});

  Mat k = kK0;
  for (int i = 0; i < 3; ++i) {
    const Mat acl = a + b * k;
    const Mat pi = oracle::lyapunov_2x2(acl, w.q + k.transpose() * w.r * k);
    const Mat k_next = oracle::lqr_gain(b, w.r, pi);
    const auto eq = assemble_learning_equations(data, k, w);
    Vec z(5);
    z << pi(0, 0), pi(0, 1), pi(1, 1), k_next(0, 0), k_next(0, 1);
    const Vec residual = eq.regressor * z - eq.rhs;
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-6) << "iteration " << i;
    k = k_next;
  }
}

TEST(PolicyIteration, LinearPlantRecoversRiccatiGain) {
  const PendulumParams p;
  Mat a, b;
  oracle::pendulum_ab(p.length, p.mass, p.gravity, p.friction, a, b);
  const CostWeights w = CostWeights::pendulum_defaults();
  const Mat k_star = oracle::lqr_gain(b, w.r, oracle::care(a, b, w.q, w.r));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto data = collect_data(make_linear_plant(a, b), kK0, seed, CollectionOptions{});
    const auto report = policy_iteration(data, kK0, w, 1e-3);
    EXPECT_TRUE(report.converged);
    EXPECT_LT((report.k_final - k_star).cwiseAbs().maxCoeff(), 1e-3) << "seed " << seed;
    EXPECT_EQ(static_cast<int>(report.p_history.size()), report.iterations);
  }
}

TEST(PolicyIteration, NotConvergedWhenCapped) {
  const auto data = collect_data(linear_pendulum(), kK0, 0, CollectionOptions{});
  EXPECT_THROW(policy_iteration(data, kK0, CostWeights::pendulum_defaults(), 1e-12, 2),
               NotConverged);
}

TEST(Kleinman, ScalarIntegrator) {
  const auto r = kleinman_iteration(scalar(0), scalar(1), scalar_weights(1, 1), scalar(-1), 1e-12);
  EXPECT_NEAR(r.k_star(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(r.p_star(0, 0), 1.0, 1e-12);
}

TEST(Kleinman, ZeroCostOnStablePlant) {
  const auto r = kleinman_iteration(scalar(-1), scalar(1), scalar_weights(0, 1), scalar(0), 1e-12);
  EXPECT_NEAR(r.k_star(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(r.p_star(0, 0), 0.0, 1e-14);
}

TEST(Kleinman, PendulumMatchesHamiltonianOracle) {
  const LinearModel lin = linearize_pendulum(PendulumParams{});
  const CostWeights w = CostWeights::pendulum_defaults();
  const auto r = kleinman_iteration(lin.a, lin.b, w, kK0, 1e-12);
  const Mat p_ref = oracle::care(lin.a, lin.b, w.q, w.r);
  EXPECT_LT((r.p_star - p_ref).norm(), 1e-8 * p_ref.norm());
  EXPECT_NEAR(r.k_star(0, 0), -10.7620, 5e-4);
  EXPECT_NEAR(r.k_star(0, 1), -1.2952, 5e-4);
}

TEST(Kleinman, MonotoneDecreasingCostMatrices) {
  const LinearModel lin = linearize_pendulum(PendulumParams{});
  const auto r =
      kleinman_iteration(lin.a, lin.b, CostWeights::pendulum_defaults(), kK0, 1e-12);
  ASSERT_GE(r.p_history.size(), 2u);
  for (std::size_t i = 1; i < r.p_history.size(); ++i) {
    EXPECT_GE(min_eigenvalue_symmetric(r.p_history[i - 1] - r.p_history[i]), -1e-9);
  }
}

TEST(Kleinman, RejectsDestabilizingInitialGain) {
  const LinearModel lin = linearize_pendulum(PendulumParams{});
  EXPECT_THROW(kleinman_iteration(lin.a, lin.b, CostWeights::pendulum_defaults(),
                                  Mat::Zero(1, 2), 1e-6),
               NotHurwitz);
}
