#pragma once

// LTI processes, their steady-state local Kalman filters, and the
// AoI-indexed estimation cost chain c(i), g(t).

#include "remest/linalg.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

namespace remest {

struct LtiProcess {
  Matrix a;       // state transition, l x l
  Matrix c_meas;  // measurement, r x l
  Matrix w_cov;   // process noise covariance, l x l
  Matrix v_cov;   // measurement noise covariance, r x r
  double rho = 0.0;  // cached spectral radius of a

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index meas_dim() const { return c_meas.rows(); }
};

inline LtiProcess make_process(Matrix a, Matrix c, Matrix w, Matrix v) {
  require(a.rows() == a.cols(), "process: A must be square");
  require(c.cols() == a.rows(), "process: C column count must match A");
  require(w.rows() == a.rows() && w.cols() == a.cols(), "process: W dimension mismatch");
  require(v.rows() == c.rows() && v.cols() == c.rows(), "process: V dimension mismatch");
  require(is_psd(w), "process: W must be symmetric PSD");
  require(is_pd(v), "process: V must be symmetric PD");
  const double rho = spectral_radius(a).radius;
  return LtiProcess{std::move(a), std::move(c), std::move(w), std::move(v), rho};
}

/// Processes ordered by decreasing spectral radius. Unsorted input is
/// sorted on construction rather than rejected.
struct ProcessSet {
  std::vector<LtiProcess> procs;

  ProcessSet() = default;  // empty placeholder; filled before use

  explicit ProcessSet(std::vector<LtiProcess> p) : procs(std::move(p)) {
    require(!procs.empty(), "ProcessSet: at least one process required");
    std::stable_sort(procs.begin(), procs.end(),
                     [](const LtiProcess& x, const LtiProcess& y) { return x.rho > y.rho; });
  }

  std::size_t size() const { return procs.size(); }
  double rho_max() const { return procs.front().rho; }
  double rho_max_sq() const { return rho_max() * rho_max(); }
};

struct LocalFilterState {
  Vector x_hat;
  Matrix p_bar;  // steady-state posterior covariance, fixed under one cycle
};

inline LocalFilterState make_local_filter(const LtiProcess& proc,
                                          double riccati_tol = 1e-10,
                                          long max_iter = 1000000) {
  Matrix p_bar = riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov,
                                      riccati_tol, max_iter);
  return {Vector::Zero(proc.state_dim()), std::move(p_bar)};
}

/// One steady-state KF step: predict with A, correct with the steady-state
/// gain. The covariance stays at p_bar.
inline LocalFilterState local_kf_step(const LtiProcess& proc, const LocalFilterState& state,
                                      const Vector& y) {
  require(state.x_hat.size() == proc.state_dim(), "local_kf_step: state dimension mismatch");
  require(y.size() == proc.meas_dim(), "local_kf_step: measurement dimension mismatch");
  const Vector prior = proc.a * state.x_hat;
  const Matrix prior_cov = proc.a * state.p_bar * proc.a.transpose() + proc.w_cov;
  const Matrix s = proc.c_meas * prior_cov * proc.c_meas.transpose() + proc.v_cov;
  const Matrix gain = prior_cov * proc.c_meas.transpose() * s.inverse();
  LocalFilterState next{prior + gain * (y - proc.c_meas * prior), state.p_bar};
  return next;
}

/// k-fold application of X -> A X A' + W.
inline Matrix zeta_apply(const LtiProcess& proc, Matrix x, long k) {
  require(k >= 1, "zeta_apply: k must be >= 1 (use X directly for k = 0)");
  require(x.rows() == proc.state_dim() && x.cols() == proc.state_dim(),
          "zeta_apply: dimension mismatch");
  for (long i = 0; i < k; ++i) {
    x = proc.a * x * proc.a.transpose() + proc.w_cov;
  }
  return x;
}

/// Per-slot estimation cost at AoI i: trace of the i-fold propagated
/// covariance. Overflow saturates to +inf instead of throwing.
inline double cost_c(const LtiProcess& proc, const Matrix& p_bar, long i) {
  require(i >= 1, "cost_c: AoI must be >= 1");
  Matrix x = p_bar;
  for (long j = 0; j < i; ++j) {
    x = proc.a * x * proc.a.transpose() + proc.w_cov;
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
  }
  return x.trace();
}

/// Cumulative cycle cost g(t) = sum_{j=1..t} c(j).
inline double cost_g(const LtiProcess& proc, const Matrix& p_bar, long t) {
  require(t >= 1, "cost_g: cycle length must be >= 1");
  double total = 0.0;
  Matrix x = p_bar;
  for (long j = 0; j < t; ++j) {
    x = proc.a * x * proc.a.transpose() + proc.w_cov;
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    total += x.trace();
    if (!std::isfinite(total)) return std::numeric_limits<double>::infinity();
  }
  return total;
}

/// Lazily extended lookup table of c(i) and g(i) for one process; the
/// simulator hits these once per slot so recomputing the zeta chain each
/// time would dominate the runtime.
class CostTable {
 public:
  CostTable(const LtiProcess& proc, Matrix p_bar)
      : proc_(&proc), state_(std::move(p_bar)) {}

  double c(long i) {
    extend(i);
    return c_[static_cast<std::size_t>(i - 1)];
  }

  double g(long i) {
    extend(i);
    return g_[static_cast<std::size_t>(i - 1)];
  }

 private:
  void extend(long i) {
    require(i >= 1, "CostTable: AoI must be >= 1");
    while (static_cast<long>(c_.size()) < i) {
      if (saturated_) {
        c_.push_back(std::numeric_limits<double>::infinity());
        g_.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      state_ = proc_->a * state_ * proc_->a.transpose() + proc_->w_cov;
      double value = state_.allFinite() ? state_.trace()
                                        : std::numeric_limits<double>::infinity();
      if (!std::isfinite(value)) saturated_ = true;
      c_.push_back(value);
      g_.push_back(g_.empty() ? value : g_.back() + value);
    }
  }

  const LtiProcess* proc_;
  Matrix state_;
  std::vector<double> c_;
  std::vector<double> g_;
  bool saturated_ = false;
};

}  // namespace remest
