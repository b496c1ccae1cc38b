#pragma once

// Stability certificates: the depth-L minimized spectral radius of
// selection-matrix products (with dominance pruning), the closed-form
// current-state and redundant-transmission variants, per-sensor checks,
// and the estimation-cycle analytics (G, beta, E[T], E[C], analytic J).

#include "remest/channel.hpp"
#include "remest/process.hpp"

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace remest {

enum class ProductFamily {
  packet_error,   // E(v), previous channel state known
  current_state,  // V(v) M, current channel state known
  hidden          // E'(v), multi-level hidden states
};

enum class Verdict { stable, unstable, undecided_at_depth };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    default: return "undecided-at-depth";
  }
}

// ---------------------------------------------------------------------------
// Selection-vector enumeration

/// Selection vectors in {1..M}^n enumerated in lexicographic order; the
/// id is the base-M encoding with state 1 most significant.
inline ChannelSelectionVector selection_from_id(long id, int num_states, int num_freq) {
  ChannelSelectionVector v;
  v.choices.resize(static_cast<std::size_t>(num_states));
  for (int i = num_states - 1; i >= 0; --i) {
    v.choices[static_cast<std::size_t>(i)] = static_cast<int>(id % num_freq) + 1;
    id /= num_freq;
  }
  return v;
}

inline long selection_count(int num_states, int num_freq) {
  long count = 1;
  for (int i = 0; i < num_states; ++i) {
    count *= num_freq;
    require(count <= (1L << 22), "selection space too large to enumerate");
  }
  return count;
}

inline Matrix build_product_factor(const MarkovChannelModel& ch, ProductFamily family,
                                   const ChannelSelectionVector& v) {
  switch (family) {
    case ProductFamily::packet_error:
      return error_matrix(ch, v);
    case ProductFamily::current_state:
      return current_state_drop_matrix(ch, v) * ch.trans;
    case ProductFamily::hidden:
      return hidden_error_matrix(ch, v);
  }
  throw std::logic_error("unknown product family");
}

// ---------------------------------------------------------------------------
// lambda search

struct DepthEstimate {
  int depth = 0;
  double lambda = 0.0;                 // min over frontier of rho(product)^{1/L}
  std::vector<long> argmin_selection;  // selection ids, one per depth level
  bool capped = false;                 // frontier hit the cap at or before this depth
  std::size_t frontier_size = 0;       // after pruning
};

struct LambdaEstimate {
  std::vector<DepthEstimate> per_depth;
  double lambda_min = 1.0;
  int depth_max = 0;

  const DepthEstimate& best() const {
    const DepthEstimate* b = &per_depth.front();
    for (const auto& d : per_depth) {
      if (d.lambda < b->lambda) b = &d;
    }
    return *b;
  }
  bool any_capped() const {
    for (const auto& d : per_depth) {
      if (d.capped) return true;
    }
    return false;
  }
};

namespace detail {

struct Candidate {
  Matrix prod;
  std::vector<long> seq;
};

inline bool dominates_or_equal(const Matrix& a, const Matrix& b) {
  // a <= b elementwise
  return (a.array() <= b.array() + 1e-15).all();
}

// Insert `cand` into the dominance-pruned frontier. Candidates arrive in
// lexicographic sequence order, so equal matrices keep the earlier (lex
// smaller) sequence.
inline void frontier_insert(std::vector<Candidate>& frontier, Candidate cand) {
  for (const auto& kept : frontier) {
    if (dominates_or_equal(kept.prod, cand.prod)) return;  // dominated, drop
  }
  std::erase_if(frontier, [&](const Candidate& kept) {
    return dominates_or_equal(cand.prod, kept.prod);
  });
  frontier.push_back(std::move(cand));
}

// Over-cap fallback: keep the candidates with the smallest entry sum
// (deterministic tie-break on the sequence), turning the result into an
// upper bound.
inline void shrink_to_cap(std::vector<Candidate>& frontier, std::size_t cap) {
  std::sort(frontier.begin(), frontier.end(), [](const Candidate& a, const Candidate& b) {
    const double sa = a.prod.sum(), sb = b.prod.sum();
    return sa != sb ? sa < sb : a.seq < b.seq;
  });
  frontier.resize(cap);
}

}  // namespace detail

struct LambdaSearchOptions {
  int depth_max = 6;
  std::size_t frontier_cap = 20000;
};

/// Depth-wise minimization of rho(F(v_1) ... F(v_L))^{1/L} over all
/// selection sequences, where F is one of the E / V.M / E' families.
/// Partial products elementwise-dominated by another are pruned: for
/// nonnegative matrices they can never lead to a strictly smaller final
/// spectral radius. When the frontier never hits the cap the per-depth
/// minimum is exact; otherwise it is an upper bound flagged as capped.
inline LambdaEstimate lambda_search(const MarkovChannelModel& ch, ProductFamily family,
                                    const LambdaSearchOptions& opt = {}) {
  require(opt.depth_max >= 1, "lambda_search: depth_max must be >= 1");
  require(opt.frontier_cap >= 1, "lambda_search: frontier_cap must be >= 1");
  if (family == ProductFamily::hidden) {
    require(ch.kind == ChannelKind::multilevel_hidden,
            "lambda_search: hidden family needs a multilevel channel");
  } else {
    require(ch.kind == ChannelKind::binary_onoff,
            "lambda_search: E / V.M families need a binary channel");
  }

  const int n = ch.num_states();
  const long num_selections = selection_count(n, ch.num_freq);

  // One-step factors, dominance-pruned. A dominated factor can be
  // replaced by its dominator at any product position without increasing
  // the result, so global pruning is sound.
  std::vector<detail::Candidate> factors;
  for (long id = 0; id < num_selections; ++id) {
    detail::Candidate c{build_product_factor(ch, family, selection_from_id(id, n, ch.num_freq)),
                        {id}};
    detail::frontier_insert(factors, std::move(c));
  }

  LambdaEstimate result;
  result.depth_max = opt.depth_max;

  std::vector<detail::Candidate> frontier = factors;
  bool capped = false;
  for (int depth = 1; depth <= opt.depth_max; ++depth) {
    if (depth > 1) {
      std::vector<detail::Candidate> next;
      for (const auto& partial : frontier) {
        for (const auto& factor : factors) {
          detail::Candidate c{partial.prod * factor.prod, partial.seq};
          c.seq.push_back(factor.seq.front());
          detail::frontier_insert(next, std::move(c));
          if (next.size() > 2 * opt.frontier_cap) {
            capped = true;
            detail::shrink_to_cap(next, opt.frontier_cap);
          }
        }
      }
      if (next.size() > opt.frontier_cap) {
        capped = true;
        detail::shrink_to_cap(next, opt.frontier_cap);
      }
      frontier = std::move(next);
    }

    DepthEstimate de;
    de.depth = depth;
    de.capped = capped;
    de.frontier_size = frontier.size();
    double best = std::numeric_limits<double>::infinity();
    const std::vector<long>* best_seq = nullptr;
    for (const auto& cand : frontier) {
      const double rho = spectral_radius(cand.prod).radius;
      if (rho < best || (rho == best && best_seq != nullptr && cand.seq < *best_seq)) {
        best = rho;
        best_seq = &cand.seq;
      }
    }
    de.lambda = std::pow(std::max(best, 0.0), 1.0 / depth);
    if (best_seq != nullptr) de.argmin_selection = *best_seq;
    result.per_depth.push_back(std::move(de));
  }

  result.lambda_min = 1.0;
  for (const auto& d : result.per_depth) {
    result.lambda_min = std::min(result.lambda_min, d.lambda);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Theorem verdicts

struct StabilityReport {
  int theorem = 1;
  double rho_max_sq = 0.0;
  double lambda = 1.0;  // lambda_min of the search, or the closed-form value
  std::optional<LambdaEstimate> estimate;
  double product = 0.0;  // rho_max_sq * lambda
  Verdict verdict = Verdict::undecided_at_depth;
};

/// True iff no selection vector ever yields a nonzero success probability
/// (the paper's F~ = empty case: dropouts occur all the time).
inline bool success_impossible(const MarkovChannelModel& ch) {
  for (int i = 0; i < ch.num_states(); ++i) {
    for (int j = 0; j < ch.num_states(); ++j) {
      if (ch.trans(i, j) <= 0.0) continue;
      for (int f = 1; f <= ch.num_freq; ++f) {
        if (ch.is_on(j, f)) return false;
      }
    }
  }
  return true;
}

namespace detail {

// Certified lower bound on lambda_inf: every E(v) dominates M' elementwise
// (no selection can beat using every frequency at once), so
// lambda_inf >= rho(M').
inline double lambda_lower_bound(const MarkovChannelModel& ch) {
  return spectral_radius(redundant_error_matrix(ch)).radius;
}

inline double hidden_lambda_lower_bound(const MarkovChannelModel& ch) {
  const int n = ch.num_states();
  Matrix b = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double dmin = 1.0;
    for (double d : ch.drop_probs[static_cast<std::size_t>(j)]) dmin = std::min(dmin, d);
    for (int i = 0; i < n; ++i) b(i, j) = ch.trans(i, j) * dmin;
  }
  return spectral_radius(b).radius;
}

inline Verdict bounded_verdict(double rho_max_sq, double lambda_upper, double lambda_lower) {
  if (rho_max_sq * lambda_upper < 1.0) return Verdict::stable;
  if (rho_max_sq * lambda_lower >= 1.0) return Verdict::unstable;
  return Verdict::undecided_at_depth;
}

}  // namespace detail

/// Necessary-and-sufficient certificate for the previous-state scenario.
/// Stable verdicts come from the finite-depth upper bound; unstable ones
/// only from provable lower bounds on lambda_inf.
inline StabilityReport theorem1_verdict(const ProcessSet& procs, const MarkovChannelModel& ch,
                                        const LambdaSearchOptions& opt = {}) {
  require(ch.kind == ChannelKind::binary_onoff, "theorem1: binary channel required");
  StabilityReport report;
  report.theorem = 1;
  report.rho_max_sq = procs.rho_max_sq();
  if (success_impossible(ch)) {
    report.lambda = 1.0;  // every E(v) is the full stochastic matrix
    report.product = report.rho_max_sq;
    report.verdict = report.product < 1.0 ? Verdict::stable : Verdict::unstable;
    return report;
  }
  report.estimate = lambda_search(ch, ProductFamily::packet_error, opt);
  report.lambda = report.estimate->lambda_min;
  report.product = report.rho_max_sq * report.lambda;
  report.verdict =
      detail::bounded_verdict(report.rho_max_sq, report.lambda, detail::lambda_lower_bound(ch));
  return report;
}

/// Closed-form lambda' for the known-current-state scenario: the minimum
/// is attained at the elementwise-minimal V(v*), at depth 1.
inline double theorem2_lambda(const MarkovChannelModel& ch) {
  require(ch.kind == ChannelKind::binary_onoff, "theorem2: binary channel required");
  ChannelSelectionVector best;
  best.choices.resize(static_cast<std::size_t>(ch.num_states()), 1);
  for (int m = 0; m < ch.num_states(); ++m) {
    for (int f = 1; f <= ch.num_freq; ++f) {
      if (ch.is_on(m, f)) {
        best.choices[static_cast<std::size_t>(m)] = f;
        break;
      }
    }
  }
  return spectral_radius(current_state_drop_matrix(ch, best) * ch.trans).radius;
}

inline StabilityReport theorem2_verdict(const ProcessSet& procs, const MarkovChannelModel& ch) {
  StabilityReport report;
  report.theorem = 2;
  report.rho_max_sq = procs.rho_max_sq();
  report.lambda = theorem2_lambda(ch);
  report.product = report.rho_max_sq * report.lambda;
  report.verdict = report.product < 1.0 ? Verdict::stable : Verdict::unstable;  // exact at depth 1
  return report;
}

/// Hidden multi-level channel variant of the depth-L certificate.
inline StabilityReport theorem3_verdict(const ProcessSet& procs, const MarkovChannelModel& ch,
                                        const LambdaSearchOptions& opt = {}) {
  require(ch.kind == ChannelKind::multilevel_hidden, "theorem3: multilevel channel required");
  StabilityReport report;
  report.theorem = 3;
  report.rho_max_sq = procs.rho_max_sq();
  report.estimate = lambda_search(ch, ProductFamily::hidden, opt);
  report.lambda = report.estimate->lambda_min;
  report.product = report.rho_max_sq * report.lambda;
  report.verdict = detail::bounded_verdict(report.rho_max_sq, report.lambda,
                                           detail::hidden_lambda_lower_bound(ch));
  return report;
}

/// Redundant-transmission scenario: exact, no search needed.
inline StabilityReport theorem4_verdict(const ProcessSet& procs, const MarkovChannelModel& ch) {
  require(ch.kind == ChannelKind::binary_onoff, "theorem4: binary channel required");
  StabilityReport report;
  report.theorem = 4;
  report.rho_max_sq = procs.rho_max_sq();
  report.lambda = spectral_radius(redundant_error_matrix(ch)).radius;
  report.product = report.rho_max_sq * report.lambda;
  report.verdict = report.product < 1.0 ? Verdict::stable : Verdict::unstable;
  return report;
}

struct Theorem5Result {
  bool necessary_ok = false;
  bool sufficient_ok = false;
  std::vector<LambdaEstimate> per_sensor;
};

/// Gateway-free multi-sensor scenario: one channel chain per sensor.
/// Necessity and sufficiency do not coincide in general, so both flags
/// are reported instead of a single verdict.
inline Theorem5Result theorem5_verdicts(const ProcessSet& procs,
                                        const std::vector<MarkovChannelModel>& channels,
                                        const LambdaSearchOptions& opt = {}) {
  require(channels.size() == procs.size(),
          "theorem5: need exactly one channel model per sensor");
  Theorem5Result result;
  double lambda_max = 0.0;
  bool necessary = true;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    LambdaEstimate est = lambda_search(channels[i], ProductFamily::packet_error, opt);
    const double rho = procs.procs[i].rho;
    if (rho * rho * est.lambda_min >= 1.0) necessary = false;
    lambda_max = std::max(lambda_max, est.lambda_min);
    result.per_sensor.push_back(std::move(est));
  }
  result.necessary_ok = necessary;
  result.sufficient_ok = procs.rho_max_sq() * lambda_max < 1.0;
  return result;
}

// ---------------------------------------------------------------------------
// Estimation-cycle analytics

/// Periodic per-AoI channel selection rule: slot phi uses
/// table[(phi - 1) mod period].
struct PeriodicSelectionRule {
  std::vector<ChannelSelectionVector> table;

  int period() const { return static_cast<int>(table.size()); }
  const ChannelSelectionVector& at_aoi(long phi) const {
    return table[static_cast<std::size_t>((phi - 1) % period())];
  }
};

enum class PolicyType { type_I, type_II };

/// Type-I: zero success chance beyond some AoI threshold. For a periodic
/// rule every residue recurs at arbitrarily large AoI, so the rule is
/// type-I exactly when every slot has a vanishing success matrix.
inline PolicyType classify_policy_type(const MarkovChannelModel& ch,
                                       const PeriodicSelectionRule& rule) {
  require(!rule.table.empty(), "classify_policy_type: empty period table");
  for (const auto& v : rule.table) {
    if (success_matrix(ch, v).cwiseAbs().maxCoeff() > 0.0) return PolicyType::type_II;
  }
  return PolicyType::type_I;
}

struct CycleAnalytics {
  Matrix g_matrix;             // G = sum_j Xi~(j), truncated
  Vector beta;                 // stationary pre-cycle distribution, full length
  std::vector<int> pre_cycle_states;
  int m1_count = 0;
  double expected_t = 0.0;
  double expected_c = 0.0;
  double analytic_j = 0.0;     // E[C]/E[T]; +inf when the C-series diverges
  bool diverges = false;
  long truncation_depth = 0;
  double tail_bound = 0.0;
  // cycle_length_mass[j-1](m) = P(T = j | b = h_m), up to the truncation depth
  std::vector<Vector> cycle_length_mass;
};

/// Single-process estimation-cycle statistics under a periodic channel
/// selection rule: the pre-cycle-state chain G, its stationary beta, and
/// the series for E[T], E[C] and the analytic average MSE J = E[C]/E[T].
inline CycleAnalytics cycle_analytics(const LtiProcess& proc, const Matrix& p_bar,
                                      const MarkovChannelModel& ch,
                                      const PeriodicSelectionRule& rule,
                                      double truncation_tol = 1e-9,
                                      long max_depth = 200000) {
  require(ch.kind == ChannelKind::binary_onoff, "cycle_analytics: binary channel required");
  require(!rule.table.empty(), "cycle_analytics: empty period table");

  const int n = ch.num_states();
  CycleAnalytics out;
  out.g_matrix = Matrix::Zero(n, n);
  out.beta = Vector::Zero(n);

  // Precompute one period of factors.
  std::vector<Matrix> err, suc;
  for (const auto& v : rule.table) {
    err.push_back(error_matrix(ch, v));
    suc.push_back(success_matrix(ch, v));
  }

  CostTable costs(proc, p_bar);

  // Pass 1: accumulate G and the per-depth success masses until the
  // remaining dropout mass (rows of Xi(j)) is negligible, or declare
  // divergence when the cost-weighted terms stop shrinking.
  Matrix xi = Matrix::Identity(n, n);  // Xi(j-1)
  std::vector<double> g_values;
  double prev_term = 0.0;
  int growth_streak = 0;
  long j = 0;
  bool tail_ok = false;
  while (j < max_depth) {
    ++j;
    const std::size_t slot = static_cast<std::size_t>((j - 1) % rule.period());
    const Matrix xi_succ = xi * suc[slot];
    xi = xi * err[slot];
    out.g_matrix += xi_succ;
    out.cycle_length_mass.push_back(xi_succ.rowwise().sum());
    g_values.push_back(costs.g(j));

    const double remaining = xi.rowwise().sum().maxCoeff();  // max_m P(T > j | b = h_m)
    const double term = remaining * g_values.back();
    if (!std::isfinite(term) || (j > 4 && term >= prev_term && remaining > 0.0)) {
      ++growth_streak;
    } else {
      growth_streak = 0;
    }
    prev_term = term;
    if (growth_streak >= 200) {
      out.diverges = true;
      break;
    }
    if (remaining * std::max(g_values.back(), 1.0) < truncation_tol) {
      out.tail_bound = term;
      tail_ok = true;
      break;
    }
  }
  out.truncation_depth = j;
  if (!out.diverges && !tail_ok) out.diverges = true;  // series did not settle

  // Pre-cycle support: columns of G with non-negligible mass.
  for (int k = 0; k < n; ++k) {
    if (out.g_matrix.col(k).maxCoeff() > 1e-9) out.pre_cycle_states.push_back(k);
  }
  out.m1_count = static_cast<int>(out.pre_cycle_states.size());

  if (out.diverges || out.m1_count == 0) {
    out.diverges = true;
    out.expected_t = std::numeric_limits<double>::infinity();
    out.expected_c = std::numeric_limits<double>::infinity();
    out.analytic_j = std::numeric_limits<double>::infinity();
    return out;
  }

  // Stationary distribution of the pre-cycle chain (rows renormalized to
  // absorb the truncated tail mass).
  Matrix sub(out.m1_count, out.m1_count);
  for (int r = 0; r < out.m1_count; ++r) {
    for (int c = 0; c < out.m1_count; ++c) {
      sub(r, c) = out.g_matrix(out.pre_cycle_states[static_cast<std::size_t>(r)],
                               out.pre_cycle_states[static_cast<std::size_t>(c)]);
    }
  }
  for (int r = 0; r < out.m1_count; ++r) {
    const double s = sub.row(r).sum();
    require(s > 0.0, "cycle_analytics: pre-cycle chain has an absorbing defect");
    sub.row(r) /= s;
  }
  const Vector beta_sub = stationary_distribution(sub);
  for (int r = 0; r < out.m1_count; ++r) {
    out.beta(out.pre_cycle_states[static_cast<std::size_t>(r)]) = beta_sub(r);
  }

  for (long i = 1; i <= static_cast<long>(out.cycle_length_mass.size()); ++i) {
    const Vector& mass = out.cycle_length_mass[static_cast<std::size_t>(i - 1)];
    const double weighted = out.beta.dot(mass);
    out.expected_t += static_cast<double>(i) * weighted;
    out.expected_c += g_values[static_cast<std::size_t>(i - 1)] * weighted;
  }
  out.analytic_j = out.expected_c / out.expected_t;
  return out;
}

// ---------------------------------------------------------------------------

/// Diagonal selector matrix with a single 1 at position i.
inline Matrix state_selector(int i, int n) {
  Matrix l = Matrix::Zero(n, n);
  l(i, i) = 1.0;
  return l;
}

}  // namespace remest
