#pragma once

// Joint Markov channel chains: per-state on/off (or drop-probability)
// labels, the per-policy transition-probability matrices E(v), E~(v),
// V(v), E'(v) and M', an independent-channel composer and simulation draws.

#include "remest/linalg.hpp"

#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace remest {

enum class ChannelKind { binary_onoff, multilevel_hidden };

/// One frequency choice (1..M) per previous joint channel state.
struct ChannelSelectionVector {
  std::vector<int> choices;  // length M_bar, entries in {1..M}
};

struct MarkovChannelModel {
  int num_freq = 0;  // M
  ChannelKind kind = ChannelKind::binary_onoff;
  // binary kind: on_bits[s][m] in {0,1}, 1 = "on" (success) at frequency m+1
  std::vector<std::vector<int>> on_bits;
  // multilevel kind: drop_probs[s][m] in [0,1]
  std::vector<std::vector<double>> drop_probs;
  Matrix trans;  // row-stochastic, M_bar x M_bar

  int num_states() const { return static_cast<int>(trans.rows()); }

  bool is_on(int state, int freq) const {  // freq is 1-based
    return on_bits[static_cast<std::size_t>(state)][static_cast<std::size_t>(freq - 1)] == 1;
  }

  bool all_off(int state) const {
    for (int bit : on_bits[static_cast<std::size_t>(state)]) {
      if (bit == 1) return false;
    }
    return true;
  }
};

/// For each frequency, the set of state indices with an on-bit there.
struct OnSets {
  std::vector<std::vector<int>> states_per_freq;  // index 0 = frequency 1
};

inline OnSets on_sets(const MarkovChannelModel& ch) {
  require(ch.kind == ChannelKind::binary_onoff, "on_sets: binary channel required");
  OnSets sets;
  sets.states_per_freq.resize(static_cast<std::size_t>(ch.num_freq));
  for (int s = 0; s < ch.num_states(); ++s) {
    for (int m = 1; m <= ch.num_freq; ++m) {
      if (ch.is_on(s, m)) sets.states_per_freq[static_cast<std::size_t>(m - 1)].push_back(s);
    }
  }
  return sets;
}

namespace detail {

// Strong connectivity and aperiodicity on the positive-entry graph.
// Aperiodicity: gcd over all edges (u, v) of depth(u) + 1 - depth(v)
// equals 1, with depths from a BFS (valid once strongly connected).
inline void check_ergodic(const Matrix& p) {
  const int n = static_cast<int>(p.rows());
  auto reachable = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        double edge = forward ? p(u, v) : p(v, u);
        if (edge > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    return seen;
  };
  auto fwd = reachable(true);
  auto bwd = reachable(false);
  for (int v = 0; v < n; ++v) {
    if (!fwd[static_cast<std::size_t>(v)] || !bwd[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument(
          "channel model rejected: transition graph is not irreducible (state " +
          std::to_string(v + 1) + " not in a single communicating class)");
    }
  }
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  std::vector<int> queue{0};
  depth[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (int v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && depth[static_cast<std::size_t>(v)] < 0) {
        depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) {
        g = std::gcd(g, depth[static_cast<std::size_t>(u)] + 1 - depth[static_cast<std::size_t>(v)]);
      }
    }
  }
  if (std::abs(g) != 1) {
    throw std::invalid_argument("channel model rejected: transition graph is periodic (period " +
                                std::to_string(std::abs(g)) + ")");
  }
}

}  // namespace detail

inline void validate_channel(const MarkovChannelModel& ch, double tol = 1e-12) {
  require(ch.num_freq >= 1, "channel: need at least one frequency");
  const int n = ch.num_states();
  require(n >= 1, "channel: need at least one state");
  require(ch.trans.rows() == ch.trans.cols(), "channel: transition matrix must be square");
  require(all_finite(ch.trans) && (ch.trans.array() >= 0.0).all(),
          "channel: transition entries must be finite and nonnegative");
  for (int i = 0; i < n; ++i) {
    require(std::abs(ch.trans.row(i).sum() - 1.0) <= tol,
            "channel: transition row " + std::to_string(i + 1) + " does not sum to 1");
  }
  if (ch.kind == ChannelKind::binary_onoff) {
    require(static_cast<int>(ch.on_bits.size()) == n, "channel: one on/off label per state required");
    for (const auto& bits : ch.on_bits) {
      require(static_cast<int>(bits.size()) == ch.num_freq, "channel: label length must equal M");
      for (int b : bits) require(b == 0 || b == 1, "channel: on/off bits must be 0 or 1");
    }
  } else {
    require(static_cast<int>(ch.drop_probs.size()) == n,
            "channel: one drop-probability vector per state required");
    for (const auto& d : ch.drop_probs) {
      require(static_cast<int>(d.size()) == ch.num_freq, "channel: drop vector length must equal M");
      for (double x : d) require(x >= 0.0 && x <= 1.0, "channel: drop probabilities must be in [0,1]");
    }
  }
  detail::check_ergodic(ch.trans);
}

inline void check_selection(const MarkovChannelModel& ch, const ChannelSelectionVector& v) {
  require(static_cast<int>(v.choices.size()) == ch.num_states(),
          "selection vector length must equal the number of channel states");
  for (int c : v.choices) {
    require(c >= 1 && c <= ch.num_freq, "selection index out of {1..M}");
  }
}

/// Packet error probability matrix: [E(v)]_{i,j} = p_{i,j} if the frequency
/// chosen at previous state i is off in arriving state j, else 0.
inline Matrix error_matrix(const MarkovChannelModel& ch, const ChannelSelectionVector& v) {
  require(ch.kind == ChannelKind::binary_onoff, "error_matrix: binary channel required");
  check_selection(ch, v);
  const int n = ch.num_states();
  Matrix e = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int freq = v.choices[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (!ch.is_on(j, freq)) e(i, j) = ch.trans(i, j);
    }
  }
  return e;
}

/// Successful transmission probability matrix, the complement of E(v):
/// E~(v) = M - E(v).
inline Matrix success_matrix(const MarkovChannelModel& ch, const ChannelSelectionVector& v) {
  return ch.trans - error_matrix(ch, v);
}

/// Current-state failure indicator V(v): diagonal 0/1 matrix with
/// [V]_{m,m} = 1 iff state m is off at the frequency chosen for state m.
inline Matrix current_state_drop_matrix(const MarkovChannelModel& ch,
                                        const ChannelSelectionVector& v) {
  require(ch.kind == ChannelKind::binary_onoff, "current_state_drop_matrix: binary channel required");
  check_selection(ch, v);
  const int n = ch.num_states();
  Matrix d = Matrix::Zero(n, n);
  for (int m = 0; m < n; ++m) {
    if (!ch.is_on(m, v.choices[static_cast<std::size_t>(m)])) d(m, m) = 1.0;
  }
  return d;
}

/// Hidden-level drop matrix: [E'(v)]_{i,j} = p_{i,j} * d_{j, v_i}.
/// Note the convention: the drop probability is taken at the *arriving*
/// state j for the frequency chosen at the previous state i.
inline Matrix hidden_error_matrix(const MarkovChannelModel& ch, const ChannelSelectionVector& v) {
  require(ch.kind == ChannelKind::multilevel_hidden, "hidden_error_matrix: multilevel channel required");
  check_selection(ch, v);
  const int n = ch.num_states();
  Matrix e = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int freq = v.choices[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      e(i, j) = ch.trans(i, j) *
                ch.drop_probs[static_cast<std::size_t>(j)][static_cast<std::size_t>(freq - 1)];
    }
  }
  return e;
}

/// Redundant-transmission failure matrix M': keeps only the columns whose
/// state is all-off (transmission over every frequency at once fails only
/// when every frequency is off).
inline Matrix redundant_error_matrix(const MarkovChannelModel& ch) {
  require(ch.kind == ChannelKind::binary_onoff, "redundant_error_matrix: binary channel required");
  const int n = ch.num_states();
  Matrix m = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    if (ch.all_off(j)) m.col(j) = ch.trans.col(j);
  }
  return m;
}

/// Two-state (off, on) chain of one frequency: row-stochastic 2x2 with
/// state 0 = off, state 1 = on.
struct TwoStateChain {
  double stay_off = 0.0;  // alpha_00
  double stay_on = 0.0;   // alpha_11

  Matrix matrix() const {
    Matrix m(2, 2);
    m << stay_off, 1.0 - stay_off, 1.0 - stay_on, stay_on;
    return m;
  }
};

/// Joint chain over 2^M states from independent per-frequency two-state
/// chains. States are ordered lexicographically over the bit tuples
/// (frequency 1 most significant), so the all-off state comes first.
inline MarkovChannelModel compose_independent(const std::vector<TwoStateChain>& factors,
                                              int max_factors = 12) {
  require(!factors.empty(), "compose_independent: at least one factor required");
  require(static_cast<int>(factors.size()) <= max_factors,
          "compose_independent: too many factors (joint state space would blow up)");
  for (const auto& f : factors) {
    require(f.stay_off >= 0.0 && f.stay_off <= 1.0 && f.stay_on >= 0.0 && f.stay_on <= 1.0,
            "compose_independent: alpha parameters must be in [0,1]");
  }
  const int m = static_cast<int>(factors.size());
  const int n = 1 << m;
  MarkovChannelModel ch;
  ch.num_freq = m;
  ch.kind = ChannelKind::binary_onoff;
  ch.trans = Matrix::Zero(n, n);
  ch.on_bits.resize(static_cast<std::size_t>(n));
  auto bit = [&](int state, int freq) { return (state >> (m - 1 - freq)) & 1; };  // freq 0-based
  for (int s = 0; s < n; ++s) {
    auto& bits = ch.on_bits[static_cast<std::size_t>(s)];
    bits.resize(static_cast<std::size_t>(m));
    for (int f = 0; f < m; ++f) bits[static_cast<std::size_t>(f)] = bit(s, f);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double p = 1.0;
      for (int f = 0; f < m; ++f) {
        p *= factors[static_cast<std::size_t>(f)].matrix()(bit(i, f), bit(j, f));
      }
      ch.trans(i, j) = p;
    }
  }
  return ch;
}

/// Draw the next state from row `current` of the transition matrix.
inline int sample_transition(const MarkovChannelModel& ch, int current, std::mt19937_64& rng) {
  const int n = ch.num_states();
  require(current >= 0 && current < n, "sample_transition: state index out of range");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    acc += ch.trans(current, j);
    if (u < acc) return j;
  }
  return n - 1;  // guard against round-off in the row sum
}

}  // namespace remest
