#pragma once

// Step 1: model-free policy iteration for the continuous-time LQR problem.
//
// A stabilizing gain K0 plus a sum-of-sines probe drives the plant once;
// each window of length T_dc is reduced to its endpoint states and the
// moments int svec_quad(x) and int x u'. Every policy-iteration sweep then
// rebuilds the learning equations from those moments alone, so the plant is
// never touched again. The model-based Kleinman iteration lives here too and
// serves as ground truth in tests and reports.

#include <cstdint>
#include <functional>
#include <vector>

#include "twostep/environment.hpp"
#include "twostep/numerics.hpp"

namespace twostep {

/// m x n state-feedback gain, u = K x.
using GainMatrix = Mat;

/// nu(t) = amplitude * sum_i sin(omega_i t), one independent frequency set
/// per input channel, omega_i ~ U[-max_frequency, max_frequency] drawn once.
class ExplorationSignal {
 public:
  static constexpr int kDefaultTerms = 100;
  static constexpr double kDefaultAmplitude = 0.5;
  static constexpr double kDefaultMaxFrequency = 500.0;

  ExplorationSignal(std::uint64_t seed, int inputs, int terms = kDefaultTerms,
                    double amplitude = kDefaultAmplitude,
                    double max_frequency = kDefaultMaxFrequency);

  Vec operator()(double t) const;
  double bound() const { return amplitude_ * terms_; }
  const Mat& frequencies() const { return omega_; }

 private:
  Mat omega_;  // inputs x terms
  int terms_;
  double amplitude_;
};

/// Single-input convenience form of ExplorationSignal.
Vec exploration_signal(double t, std::uint64_t seed, int inputs = 1);

enum class Quadrature {
  kAugmentedRk4,  // moments integrated as extra RK4 states
  kTrapezoid,     // moments from sampled (x, u) via window_integrals
};

struct DataWindowSet {
  std::vector<WindowMoments> windows;
  double t_dc = 0.0;
  int n = 0;
  int m = 0;

  int l() const { return static_cast<int>(windows.size()); }
};

struct CollectionOptions {
  int l = 10;
  double t_dc = 0.03;
  double dt_sample = 1e-4;
  Vec x0;  // empty: origin
  Quadrature quadrature = Quadrature::kAugmentedRk4;
};

/// Minimum window count for an overdetermined learning equation.
constexpr int min_windows(int n, int m) { return n * (n + 1) / 2 + m * n; }

using Excitation = std::function<Vec(double t)>;

/// Drives u(t) = K0 x(t) + nu(t) for l * T_dc seconds and reduces each window
/// to its moments. Throws PreconditionViolation when l is too small.
DataWindowSet collect_data(const PlantModel& plant, const GainMatrix& k0, const Excitation& nu,
                           const CollectionOptions& options);
DataWindowSet collect_data(const PlantModel& plant, const GainMatrix& k0, std::uint64_t seed,
                           const CollectionOptions& options);

struct LearningEquations {
  Mat regressor;  // l x (n(n+1)/2 + m n), unknowns (svec(P_i), vec_rows(K_{i+1}))
  Vec rhs;
};

LearningEquations assemble_learning_equations(const DataWindowSet& data, const GainMatrix& k_i,
                                              const CostWeights& w);

struct PolicyIterationReport {
  GainMatrix k_final;
  Mat p_final;
  int iterations = 0;
  std::vector<Mat> p_history;
  std::vector<GainMatrix> k_history;
  bool converged = false;
};

inline constexpr int kDefaultMaxIterations = 50;

/// Model-free policy iteration on one shared data set. Stops when the
/// Frobenius change in P drops below eps; throws NotConverged after max_iter
/// sweeps and RankDeficient when the data are not exciting enough.
PolicyIterationReport policy_iteration(const DataWindowSet& data, const GainMatrix& k0,
                                       const CostWeights& w, double eps,
                                       int max_iter = kDefaultMaxIterations);

struct KleinmanResult {
  GainMatrix k_star;
  Mat p_star;
  int iterations = 0;
  std::vector<Mat> p_history;
};

/// Model-based Newton-Kleinman iteration: Lyapunov solve, then K = -R^-1 B' P.
KleinmanResult kleinman_iteration(const Mat& a, const Mat& b, const CostWeights& w,
                                  const GainMatrix& k0, double eps,
                                  int max_iter = kDefaultMaxIterations);

}  // namespace twostep
