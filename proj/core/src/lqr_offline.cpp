#include "twostep/lqr_offline.hpp"

#include <cmath>
#include <random>
#include <string>

namespace twostep {

ExplorationSignal::ExplorationSignal(std::uint64_t seed, int inputs, int terms, double amplitude,
                                     double max_frequency)
    : omega_(inputs, terms), terms_(terms), amplitude_(amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(-max_frequency, max_frequency);
  for (int i = 0; i < inputs; ++i) {
    for (int j = 0; j < terms; ++j) omega_(i, j) = draw(rng);
  }
}

Vec ExplorationSignal::operator()(double t) const {
  Vec out(omega_.rows());
  for (Eigen::Index i = 0; i < omega_.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < omega_.cols(); ++j) acc += std::sin(omega_(i, j) * t);
    out(i) = amplitude_ * acc;
  }
  return out;
}

Vec exploration_signal(double t, std::uint64_t seed, int inputs) {
  return ExplorationSignal(seed, inputs)(t);
}

namespace {

int steps_per_window(const CollectionOptions& o) {
  if (!(o.t_dc > 0.0) || !(o.dt_sample > 0.0)) {
    throw PreconditionViolation("collect_data: T_dc and dt_sample must be > 0");
  }
  const double ratio = o.t_dc / o.dt_sample;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
    throw PreconditionViolation("collect_data: T_dc must be an integer multiple of dt_sample");
  }
  return static_cast<int>(steps);
}

// Layout of the augmented state: [x (n) | svec_quad(x) (n(n+1)/2) | x u' row-major (n m)].
struct AugmentedLayout {
  int n;
  int m;
  int quad() const { return svec_size(n); }
  int size() const { return n + quad() + n * m; }
};

}  // namespace

DataWindowSet collect_data(const PlantModel& plant, const GainMatrix& k0, const Excitation& nu,
                           const CollectionOptions& options) {
  const int n = plant.n;
  const int m = plant.m;
  if (k0.rows() != m || k0.cols() != n) {
    throw PreconditionViolation("collect_data: K0 must be m x n");
  }
  if (options.l < min_windows(n, m)) {
    throw PreconditionViolation("collect_data: l = " + std::to_string(options.l) +
                                " is below n(n+1)/2 + mn = " + std::to_string(min_windows(n, m)));
  }
  const int steps = steps_per_window(options);
  const double dt = options.dt_sample;

  const auto control = [&](const Vec& x, double t) -> Vec { return k0 * x + nu(t); };

  DataWindowSet out;
  out.t_dc = options.t_dc;
  out.n = n;
  out.m = m;
  out.windows.reserve(options.l);

  Vec x = options.x0.size() == 0 ? Vec::Zero(n) : options.x0;
  if (x.size() != n) throw PreconditionViolation("collect_data: x0 has the wrong dimension");
  double t = 0.0;

  if (options.quadrature == Quadrature::kAugmentedRk4) {
    const AugmentedLayout layout{n, m};
    const auto rhs = [&](double tau, const Vec& y) -> Vec {
      const Vec xs = y.head(n);
      const Vec u = control(xs, tau);
      Vec dy(layout.size());
      dy.head(n) = plant.dynamics(xs, u);
      dy.segment(n, layout.quad()) = svec_quad(xs);
      const Mat xu = xs * u.transpose();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) dy(n + layout.quad() + i * m + j) = xu(i, j);
      }
      return dy;
    };

    for (int w = 0; w < options.l; ++w) {
      Vec y = Vec::Zero(layout.size());
      y.head(n) = x;
      for (int s = 0; s < steps; ++s) {
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
        const Vec k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
        const Vec k4 = rhs(t + dt, y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Index-based time avoids drift from repeated addition.
        t = (static_cast<double>(w) * steps + s + 1) * dt;
        if (!y.allFinite()) throw NumericalBlowup("collect_data: excited trajectory diverged");
      }
      WindowMoments mom;
      mom.x_start = x;
      mom.x_end = y.head(n);
      mom.ixx = y.segment(n, layout.quad());
      mom.ixu = Mat(n, m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) mom.ixu(i, j) = y(n + layout.quad() + i * m + j);
      }
      out.windows.push_back(std::move(mom));
      x = y.head(n);
    }
    return out;
  }

  // Trapezoid path: same continuous-time closed loop, moments from samples.
  const auto closed_loop = [&](double tau, const Vec& xs) -> Vec {
    return plant.dynamics(xs, control(xs, tau));
  };
  std::vector<Sample> samples;
  samples.reserve(steps + 1);
  for (int w = 0; w < options.l; ++w) {
    samples.clear();
    samples.push_back({x, control(x, t)});
    for (int s = 0; s < steps; ++s) {
      // Time-varying RK4: evaluate the excitation at each stage time.
      const Vec k1 = closed_loop(t, x);
      const Vec k2 = closed_loop(t + 0.5 * dt, x + 0.5 * dt * k1);
      const Vec k3 = closed_loop(t + 0.5 * dt, x + 0.5 * dt * k2);
      const Vec k4 = closed_loop(t + dt, x + dt * k3);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (static_cast<double>(w) * steps + s + 1) * dt;
      if (!x.allFinite()) throw NumericalBlowup("collect_data: excited trajectory diverged");
      samples.push_back({x, control(x, t)});
    }
    out.windows.push_back(window_integrals(samples, dt));
  }
  return out;
}

DataWindowSet collect_data(const PlantModel& plant, const GainMatrix& k0, std::uint64_t seed,
                           const CollectionOptions& options) {
  const ExplorationSignal nu(seed, plant.m);
  return collect_data(plant, k0, [&nu](double t) { return nu(t); }, options);
}

LearningEquations assemble_learning_equations(const DataWindowSet& data, const GainMatrix& k_i,
                                              const CostWeights& w) {
  const int n = data.n;
  const int m = data.m;
  if (k_i.rows() != m || k_i.cols() != n || w.q.rows() != n || w.r.rows() != m) {
    throw PreconditionViolation("assemble_learning_equations: dimension mismatch");
  }
  const int np = svec_size(n);
  const Mat qk = w.q + k_i.transpose() * w.r * k_i;
  const Vec cost_weights = svec(0.5 * (qk + qk.transpose()));

  LearningEquations eq{Mat::Zero(data.l(), np + m * n), Vec::Zero(data.l())};
  for (int row = 0; row < data.l(); ++row) {
    const WindowMoments& win = data.windows[row];
    eq.regressor.row(row).head(np) = (svec_quad(win.x_end) - svec_quad(win.x_start)).transpose();
    // int (u - K_i x)' R K_{i+1} x = <K_{i+1}, R (int u x' - K_i int x x')>.
    const Mat sxx = unpack_quad(win.ixx, n);
    const Mat coupling = 2.0 * w.r * (win.ixu.transpose() - k_i * sxx);  // m x n
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < n; ++b) eq.regressor(row, np + a * n + b) = coupling(a, b);
    }
    eq.rhs(row) = -cost_weights.dot(win.ixx);
  }
  return eq;
}

PolicyIterationReport policy_iteration(const DataWindowSet& data, const GainMatrix& k0,
                                       const CostWeights& w, double eps, int max_iter) {
  if (!(eps > 0.0)) throw PreconditionViolation("policy_iteration: eps must be > 0");
  if (max_iter < 1) throw PreconditionViolation("policy_iteration: max_iter must be >= 1");
  const int n = data.n;
  const int m = data.m;
  const int np = svec_size(n);

  PolicyIterationReport report;
  GainMatrix k = k0;
  for (int i = 0; i < max_iter; ++i) {
    const LearningEquations eq = assemble_learning_equations(data, k, w);
    const LeastSquaresResult sol = solve_least_squares(eq.regressor, eq.rhs);
    Mat p = smat(sol.solution.head(np), n);
    p = 0.5 * (p + p.transpose()).eval();
    GainMatrix k_next(m, n);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < n; ++b) k_next(a, b) = sol.solution(np + a * n + b);
    }
    if (!p.allFinite() || !k_next.allFinite()) {
      throw NumericalBlowup("policy_iteration: non-finite least-squares solution");
    }
    report.p_history.push_back(p);
    report.k_history.push_back(k_next);
    report.iterations = i + 1;
    k = k_next;
    if (i >= 1 && (p - report.p_history[i - 1]).norm() < eps) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    throw NotConverged("policy_iteration: no convergence after " + std::to_string(max_iter) +
                       " iterations");
  }
  report.k_final = k;
  report.p_final = report.p_history.back();
  return report;
}

KleinmanResult kleinman_iteration(const Mat& a, const Mat& b, const CostWeights& w,
                                  const GainMatrix& k0, double eps, int max_iter) {
  if (!(eps > 0.0)) throw PreconditionViolation("kleinman_iteration: eps must be > 0");
  if (a.rows() != a.cols() || b.rows() != a.rows() || k0.rows() != b.cols() ||
      k0.cols() != a.rows()) {
    throw PreconditionViolation("kleinman_iteration: dimension mismatch");
  }
  const Eigen::LLT<Mat> r_chol(w.r);
  if (r_chol.info() != Eigen::Success) throw PreconditionViolation("kleinman_iteration: R not PD");

  KleinmanResult out;
  GainMatrix k = k0;
  for (int i = 0; i < max_iter; ++i) {
    const Mat a_cl = a + b * k;
    if (!is_hurwitz(a_cl)) {
      throw NotHurwitz("kleinman_iteration: closed loop lost stability at iteration " +
                       std::to_string(i));
    }
    Mat m = w.q + k.transpose() * w.r * k;
    m = 0.5 * (m + m.transpose()).eval();
    const Mat p = solve_lyapunov(a_cl, m);
    out.p_history.push_back(p);
    out.iterations = i + 1;
    k = -r_chol.solve(b.transpose() * p);
    if (i >= 1 && (p - out.p_history[i - 1]).norm() < eps) {
      out.k_star = k;
      out.p_star = p;
      return out;
    }
  }
  throw NotConverged("kleinman_iteration: no convergence after " + std::to_string(max_iter) +
                     " iterations");
}

}  // namespace twostep
