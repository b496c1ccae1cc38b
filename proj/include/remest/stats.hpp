#pragma once

// Small statistical helpers for the validation suites: regularized
// incomplete gamma functions and a chi-square goodness-of-fit test.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace remest {

namespace detail {

// Lower regularized incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by Lentz continued fraction.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

/// Survival function of the chi-square distribution with k dof.
inline double chi_square_sf(double statistic, double dof) {
  return gamma_q(dof / 2.0, statistic / 2.0);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

/// Pearson goodness-of-fit of observed counts against expected counts.
/// Bins with expected count below `min_expected` are pooled into the last
/// kept bin.
inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected,
                                      double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: size mismatch");
  }
  std::vector<double> obs, exp;
  double pool_o = 0.0, pool_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    pool_o += observed[i];
    pool_e += expected[i];
    if (pool_e >= min_expected) {
      obs.push_back(pool_o);
      exp.push_back(pool_e);
      pool_o = pool_e = 0.0;
    }
  }
  if (pool_e > 0.0) {
    if (obs.empty()) {
      obs.push_back(pool_o);
      exp.push_back(pool_e);
    } else {
      obs.back() += pool_o;
      exp.back() += pool_e;
    }
  }
  if (obs.size() < 2) throw std::invalid_argument("chi_square_gof: too few usable bins");
  ChiSquareResult r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double diff = obs[i] - exp[i];
    r.statistic += diff * diff / exp[i];
  }
  r.dof = static_cast<double>(obs.size() - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

}  // namespace remest
