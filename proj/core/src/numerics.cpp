#include "twostep/numerics.hpp"

#include <cmath>
#include <string>

namespace twostep {

namespace {

constexpr double kSymmetryTolerance = 1e-10;

void require_symmetric(const Mat& m, const char* where) {
  if (m.rows() != m.cols()) {
    throw Asymmetric(std::string(where) + ": matrix is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw Asymmetric(std::string(where) + ": matrix is not symmetric");
  }
}

}  // namespace

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

LeastSquaresResult solve_least_squares(const Mat& regressor, const Vec& rhs) {
  const auto rows = regressor.rows();
  const auto cols = regressor.cols();
  if (rows != rhs.size()) {
    throw PreconditionViolation("solve_least_squares: rhs length does not match regressor rows");
  }
  if (rows < cols) {
    throw PreconditionViolation("solve_least_squares: need at least as many rows as unknowns");
  }

  Eigen::JacobiSVD<Mat> svd(regressor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  const int rank = svd.nonzeroSingularValues() == 0 ? 0 : static_cast<int>(svd.rank());
  if (rank < cols) throw RankDeficient(rank, static_cast<int>(cols));
  return {svd.solve(rhs), rank};
}

Vec svec(const Mat& symmetric) {
  require_symmetric(symmetric, "svec");
  const int n = static_cast<int>(symmetric.rows());
  Vec out(svec_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out(k++) = symmetric(i, j);
  }
  return out;
}

Mat smat(const Vec& packed, int n) {
  if (packed.size() != svec_size(n)) {
    throw PreconditionViolation("smat: packed length does not match n(n+1)/2");
  }
  Mat out(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      out(i, j) = packed(k);
      out(j, i) = packed(k);
      ++k;
    }
  }
  return out;
}

Vec svec_quad(const Vec& x) {
  const int n = static_cast<int>(x.size());
  Vec out(svec_size(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    out(k++) = x(i) * x(i);
    for (int j = i + 1; j < n; ++j) out(k++) = 2.0 * x(i) * x(j);
  }
  return out;
}

Mat unpack_quad(const Vec& packed, int n) {
  if (packed.size() != svec_size(n)) {
    throw PreconditionViolation("unpack_quad: packed length does not match n(n+1)/2");
  }
  Mat out(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    out(i, i) = packed(k++);
    for (int j = i + 1; j < n; ++j) {
      out(i, j) = 0.5 * packed(k);
      out(j, i) = 0.5 * packed(k);
      ++k;
    }
  }
  return out;
}

Mat solve_lyapunov(const Mat& a_cl, const Mat& m) {
  const auto n = a_cl.rows();
  if (a_cl.cols() != n || m.rows() != n || m.cols() != n) {
    throw PreconditionViolation("solve_lyapunov: dimension mismatch");
  }
  require_symmetric(m, "solve_lyapunov");

  // Column-major vec: vec(A'P + PA) = (I (x) A' + A' (x) I) vec(P).
  const Mat eye = Mat::Identity(n, n);
  const Mat at = a_cl.transpose();
  Mat kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = eye(i, j) * at + at(i, j) * eye;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(Mat(m).data(), n * n);

  Eigen::FullPivLU<Mat> lu(kron);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SingularLyapunov("solve_lyapunov: closed loop has eigenvalues summing to zero");
  }
  const Vec p = lu.solve(rhs);
  Mat out = Eigen::Map<const Mat>(p.data(), n, n);
  out = 0.5 * (out + out.transpose()).eval();
  if (!out.allFinite()) throw SingularLyapunov("solve_lyapunov: non-finite solution");
  return out;
}

bool is_hurwitz(const Mat& a) {
  if (a.rows() != a.cols()) throw PreconditionViolation("is_hurwitz: matrix is not square");
  if (a.rows() == 2) {
    const double tr = a.trace();
    const double det = a.determinant();
    return tr < 0.0 && det > 0.0;
  }
  const Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

double min_eigenvalue_symmetric(const Mat& s) {
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

WindowMoments window_integrals(std::span<const Sample> samples, double dt_sample) {
  if (samples.size() < 2) throw EmptyWindow("window_integrals: need at least 2 samples");
  if (!(dt_sample > 0.0)) throw PreconditionViolation("window_integrals: dt_sample must be > 0");

  const auto n = samples.front().x.size();
  const auto m = samples.front().u.size();
  WindowMoments out{samples.front().x, samples.back().x, Vec::Zero(svec_size(static_cast<int>(n))),
                    Mat::Zero(n, m)};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double w = (k == 0 || k + 1 == samples.size()) ? 0.5 * dt_sample : dt_sample;
    out.ixx += w * svec_quad(samples[k].x);
    out.ixu += w * samples[k].x * samples[k].u.transpose();
  }
  return out;
}

}  // namespace twostep
