#pragma once

// Small dense real-matrix kernel: spectral radii, elementwise order,
// steady-state Riccati fixed points and Markov stationary distributions.
// Everything here is a pure function of its inputs.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace remest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SpectralResult {
  double radius = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

/// Spectral radius of a square real matrix (largest eigenvalue modulus).
/// Backed by a dense eigensolver; matrices in this toolkit are tiny.
inline SpectralResult spectral_radius(const Matrix& m, double tol = 1e-12) {
  require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
  require(m.rows() >= 1, "spectral_radius: empty matrix");
  require(tol > 0.0, "spectral_radius: tol must be positive");
  require(all_finite(m), "spectral_radius: non-finite entries");

  if (m.rows() == 1) return {std::abs(m(0, 0)), 0, true};

  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  require(solver.info() == Eigen::Success, "spectral_radius: eigensolver failed");
  double radius = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    radius = std::max(radius, std::abs(solver.eigenvalues()[i]));
  }
  return {radius, 0, true};
}

/// True iff every entry of a is <= the corresponding entry of b.
inline bool elementwise_leq(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "elementwise_leq: dimension mismatch");
  return (a.array() <= b.array()).all();
}

inline bool is_symmetric(const Matrix& m, double tol = 1e-9) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_psd(const Matrix& m, double tol = 1e-9) {
  if (!is_symmetric(m, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol;
}

inline bool is_pd(const Matrix& m, double tol = 0.0) {
  if (!is_symmetric(m, 1e-9)) return false;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > tol;
}

/// One full predict/update cycle of the steady-state filter covariance
/// recursion: P -> (I - K C) (A P A' + W).
inline Matrix filter_cycle(const Matrix& a, const Matrix& c, const Matrix& w,
                           const Matrix& v, const Matrix& p) {
  const Matrix prior = a * p * a.transpose() + w;
  const Matrix s = c * prior * c.transpose() + v;
  const Matrix k = prior * c.transpose() * s.inverse();
  const Matrix identity = Matrix::Identity(a.rows(), a.cols());
  Matrix post = (identity - k * c) * prior;
  // keep the iterate symmetric against round-off drift
  return 0.5 * (post + post.transpose());
}

/// Steady-state posterior covariance of the local Kalman filter, found as
/// the fixed point of the filter recursion. Throws if the iteration does
/// not settle (the process violates the steady-state assumption).
inline Matrix riccati_steady_state(const Matrix& a, const Matrix& c,
                                   const Matrix& w, const Matrix& v,
                                   double tol = 1e-10, long max_iter = 1000000) {
  require(a.rows() == a.cols(), "riccati: A must be square");
  require(c.cols() == a.rows(), "riccati: C column count must match A");
  require(is_psd(w), "riccati: W must be symmetric PSD");
  require(is_pd(v), "riccati: V must be symmetric PD");
  require(tol > 0.0 && max_iter >= 1, "riccati: bad tol/max_iter");

  Matrix p = w;
  for (long it = 0; it < max_iter; ++it) {
    const Matrix next = filter_cycle(a, c, w, v, p);
    require(all_finite(next), "riccati: iteration diverged to non-finite values");
    const double delta = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (delta < tol) return p;
  }
  throw std::runtime_error("riccati_steady_state: no convergence within max_iter");
}

/// Stationary distribution of a row-stochastic matrix: the probability
/// vector with beta' P = beta'. Transient states get (numerically) zero mass.
inline Vector stationary_distribution(const Matrix& p, double tol = 1e-9) {
  require(p.rows() == p.cols(), "stationary_distribution: matrix must be square");
  require(all_finite(p) && (p.array() >= -tol).all(),
          "stationary_distribution: negative or non-finite entries");
  const Eigen::Index n = p.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::abs(p.row(i).sum() - 1.0) <= std::max(tol, 1e-9),
            "stationary_distribution: row " + std::to_string(i) + " does not sum to 1");
  }

  // Solve (P' - I) beta = 0 with the normalization sum(beta) = 1 appended.
  Matrix sys(n + 1, n);
  sys.topRows(n) = p.transpose() - Matrix::Identity(n, n);
  sys.bottomRows(1).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector beta = sys.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (beta(i) < 0.0 && beta(i) > -1e-9) beta(i) = 0.0;
  }
  require((beta.array() >= 0.0).all(),
          "stationary_distribution: solver produced negative mass (chain not ergodic?)");
  beta /= beta.sum();
  return beta;
}

}  // namespace remest
