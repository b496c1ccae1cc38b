#include "remest/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace remest;

namespace {

Matrix scalar(double x) {
  Matrix m(1, 1);
  m << x;
  return m;
}

LtiProcess scalar_process(double a) {
  return make_process(scalar(a), scalar(1.0), scalar(1.0), scalar(1.0));
}

ProcessSet scalar_set(double a) { return ProcessSet{{scalar_process(a)}}; }

MarkovChannelModel gilbert_elliott() {
  MarkovChannelModel ch;
  ch.num_freq = 1;
  ch.kind = ChannelKind::binary_onoff;
  ch.on_bits = {{0}, {1}};
  ch.trans.resize(2, 2);
  ch.trans << 0.9, 0.1, 0.2, 0.8;
  return ch;
}

MarkovChannelModel random_binary_model(std::mt19937_64& rng, int num_states, int num_freq) {
  MarkovChannelModel ch;
  ch.num_freq = num_freq;
  ch.kind = ChannelKind::binary_onoff;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ch.trans.resize(num_states, num_states);
  for (int i = 0; i < num_states; ++i) {
    double sum = 0.0;
    for (int j = 0; j < num_states; ++j) {
      ch.trans(i, j) = unit(rng) + 0.05;
      sum += ch.trans(i, j);
    }
    ch.trans.row(i) /= sum;
  }
  ch.on_bits.resize(static_cast<std::size_t>(num_states));
  for (auto& bits : ch.on_bits) {
    bits.resize(static_cast<std::size_t>(num_freq));
    for (auto& b : bits) b = unit(rng) < 0.5 ? 0 : 1;
  }
  return ch;
}

// Exhaustive minimum of rho(F(v_1)...F(v_L))^{1/L} with no pruning.
double brute_force_lambda(const MarkovChannelModel& ch, ProductFamily family, int depth) {
  const int n = ch.num_states();
  const long num_sel = selection_count(n, ch.num_freq);
  std::vector<Matrix> factors;
  for (long id = 0; id < num_sel; ++id) {
    factors.push_back(build_product_factor(ch, family, selection_from_id(id, n, ch.num_freq)));
  }
  long total = 1;
  for (int d = 0; d < depth; ++d) total *= num_sel;
  double best = std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    long c = code;
    Matrix prod = Matrix::Identity(n, n);
    for (int d = 0; d < depth; ++d) {
      prod = prod * factors[static_cast<std::size_t>(c % num_sel)];
      c /= num_sel;
    }
    best = std::min(best, spectral_radius(prod).radius);
  }
  return std::pow(best, 1.0 / depth);
}

}  // namespace

TEST_CASE("selection enumeration") {
  CHECK(selection_count(2, 2) == 4);
  CHECK(selection_count(3, 3) == 27);
  const ChannelSelectionVector first = selection_from_id(0, 3, 2);
  CHECK(first.choices == std::vector<int>{1, 1, 1});
  // state 1 is the most significant digit
  const ChannelSelectionVector v = selection_from_id(1, 3, 2);
  CHECK(v.choices == std::vector<int>{1, 1, 2});
  const ChannelSelectionVector last = selection_from_id(7, 3, 2);
  CHECK(last.choices == std::vector<int>{2, 2, 2});
  CHECK_THROWS_AS(selection_count(30, 4), std::invalid_argument);
}

TEST_CASE("lambda_search on the single-frequency Gilbert-Elliott channel") {
  const MarkovChannelModel ch = gilbert_elliott();
  const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {6, 20000});
  // Only one selection exists, so lambda_L = rho(E^L)^{1/L} = rho(E) = 0.9.
  for (const auto& d : est.per_depth) {
    CHECK(d.lambda == doctest::Approx(0.9).epsilon(1e-10));
    CHECK_FALSE(d.capped);
  }
  CHECK(est.lambda_min == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("lambda_search with an always-on state reachable in one hop") {
  MarkovChannelModel ch = gilbert_elliott();
  ch.on_bits = {{1}, {1}};
  const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {3, 100});
  CHECK(est.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pruned search equals exhaustive brute force") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);  // up to 4 states
    const MarkovChannelModel ch = random_binary_model(rng, n, 2);
    const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {3, 100000});
    REQUIRE_FALSE(est.any_capped());
    for (int depth = 1; depth <= 3; ++depth) {
      const double oracle = brute_force_lambda(ch, ProductFamily::packet_error, depth);
      CHECK(est.per_depth[static_cast<std::size_t>(depth - 1)].lambda ==
            doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda at a multiple depth never exceeds the base depth") {
  // Repeating the best depth-L block shows lambda_{kL} <= lambda_L.
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const MarkovChannelModel ch = random_binary_model(rng, 3, 2);
    const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {6, 100000});
    REQUIRE_FALSE(est.any_capped());
    auto lam = [&](int d) { return est.per_depth[static_cast<std::size_t>(d - 1)].lambda; };
    CHECK(lam(2) <= lam(1) + 1e-10);
    CHECK(lam(4) <= lam(2) + 1e-10);
    CHECK(lam(6) <= lam(3) + 1e-10);
    CHECK(lam(6) <= lam(2) + 1e-10);
    for (int d = 1; d <= 6; ++d) CHECK(est.lambda_min <= lam(d) + 1e-12);
  }
}

TEST_CASE("argmin sequence reproduces the reported lambda") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const MarkovChannelModel ch = random_binary_model(rng, 3, 2);
    const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {4, 100000});
    for (const auto& d : est.per_depth) {
      REQUIRE(static_cast<int>(d.argmin_selection.size()) == d.depth);
      Matrix prod = Matrix::Identity(3, 3);
      for (long id : d.argmin_selection) {
        prod = prod * build_product_factor(ch, ProductFamily::packet_error,
                                           selection_from_id(id, 3, 2));
      }
      CHECK(std::pow(spectral_radius(prod).radius, 1.0 / d.depth) ==
            doctest::Approx(d.lambda).epsilon(1e-12));
    }
  }
}

TEST_CASE("tight frontier cap still returns a valid upper bound") {
  std::mt19937_64 rng(29);
  const MarkovChannelModel ch = random_binary_model(rng, 4, 2);
  const LambdaEstimate exact = lambda_search(ch, ProductFamily::packet_error, {3, 1000000});
  REQUIRE_FALSE(exact.any_capped());
  const LambdaEstimate capped = lambda_search(ch, ProductFamily::packet_error, {3, 2});
  CHECK(capped.lambda_min >= exact.lambda_min - 1e-12);
}

TEST_CASE("theorem2 closed form matches a depth search over the V.M family") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const MarkovChannelModel ch = random_binary_model(rng, 3, 2);
    const double closed = theorem2_lambda(ch);
    const LambdaEstimate est = lambda_search(ch, ProductFamily::current_state, {3, 100000});
    REQUIRE_FALSE(est.any_capped());
    for (const auto& d : est.per_depth) {
      CHECK(d.lambda == doctest::Approx(closed).epsilon(1e-9));
    }
  }
  // Gilbert-Elliott by hand: V(v*) = diag(1, 0), V M = [[0.9, 0.1], [0, 0]].
  CHECK(theorem2_lambda(gilbert_elliott()) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("certificate ordering: current-state lambda never exceeds lambda_L") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const MarkovChannelModel ch = random_binary_model(rng, n, 2);
    const LambdaEstimate est = lambda_search(ch, ProductFamily::packet_error, {4, 100000});
    const double lp = theorem2_lambda(ch);
    for (const auto& d : est.per_depth) CHECK(lp <= d.lambda + 1e-10);
  }
}

TEST_CASE("success_impossible detection") {
  MarkovChannelModel ch = gilbert_elliott();
  CHECK_FALSE(success_impossible(ch));
  ch.on_bits = {{0}, {0}};
  CHECK(success_impossible(ch));
  // an on state that is unreachable still counts as impossible
  ch.on_bits = {{0}, {1}};
  ch.trans << 1.0, 0.0, 1.0, 0.0;
  CHECK(success_impossible(ch));
}

TEST_CASE("theorem1 verdicts") {
  SUBCASE("stable processes are stable on any channel") {
    MarkovChannelModel ch = gilbert_elliott();
    ch.on_bits = {{0}, {0}};  // worst case: never succeeds
    const StabilityReport r = theorem1_verdict(scalar_set(0.9), ch);
    CHECK(r.verdict == Verdict::stable);
  }
  SUBCASE("all-off channel with an unstable process is certifiably unstable") {
    MarkovChannelModel ch = gilbert_elliott();
    ch.on_bits = {{0}, {0}};
    const StabilityReport r = theorem1_verdict(scalar_set(std::sqrt(2.0)), ch);
    CHECK(r.verdict == Verdict::unstable);
    CHECK(r.lambda == doctest::Approx(1.0));
  }
  SUBCASE("Gilbert-Elliott boundary") {
    const MarkovChannelModel ch = gilbert_elliott();
    // With one frequency, E(v) equals the all-frequency relaxation, so the
    // lower bound is tight and the dichotomy is decided on both sides.
    CHECK(theorem1_verdict(scalar_set(std::sqrt(1.1)), ch).verdict == Verdict::stable);
    CHECK(theorem1_verdict(scalar_set(std::sqrt(1.2)), ch).verdict == Verdict::unstable);
  }
  SUBCASE("no all-off state leaves a large product undecided") {
    MarkovChannelModel ch = gilbert_elliott();
    ch.num_freq = 2;
    ch.on_bits = {{1, 0}, {0, 1}};  // every state is on somewhere
    const StabilityReport r = theorem1_verdict(scalar_set(1000.0), ch);
    CHECK(r.product >= 1.0);
    CHECK(r.verdict == Verdict::undecided_at_depth);
  }
  SUBCASE("lower-bound certificate from the all-frequency relaxation") {
    // Memoryless channel, single frequency, error 0.9: M' has rho 0.9,
    // so rho^2 >= 1/0.9 is provably unstable.
    MarkovChannelModel ch;
    ch.num_freq = 1;
    ch.kind = ChannelKind::binary_onoff;
    ch.on_bits = {{0}, {1}};
    ch.trans.resize(2, 2);
    ch.trans << 0.9, 0.1, 0.9, 0.1;
    const StabilityReport r = theorem1_verdict(scalar_set(std::sqrt(1.2)), ch);
    CHECK(r.verdict == Verdict::unstable);
  }
}

TEST_CASE("theorem3 hidden-channel verdicts") {
  MarkovChannelModel ch;
  ch.num_freq = 1;
  ch.kind = ChannelKind::multilevel_hidden;
  ch.trans.resize(2, 2);
  ch.trans << 0.9, 0.1, 0.2, 0.8;
  ch.drop_probs = {{0.9}, {0.1}};
  const StabilityReport r = theorem3_verdict(scalar_set(1.05), ch, {4, 10000});
  CHECK(r.theorem == 3);
  CHECK(r.lambda > 0.0);
  CHECK(r.lambda < 1.0);
  // drop probabilities all 1: certified unstable for an unstable process
  ch.drop_probs = {{1.0}, {1.0}};
  CHECK(theorem3_verdict(scalar_set(1.05), ch).verdict == Verdict::unstable);
}

TEST_CASE("theorem4 redundant-transmission verdicts") {
  SUBCASE("no all-off state means lambda 0 and a stable verdict") {
    MarkovChannelModel ch = gilbert_elliott();
    ch.on_bits = {{1}, {1}};
    const StabilityReport r = theorem4_verdict(scalar_set(10.0), ch);
    CHECK(r.lambda == doctest::Approx(0.0));
    CHECK(r.verdict == Verdict::stable);
  }
  SUBCASE("two iid channels with error 0.5 against rho^2 = 3.9") {
    const MarkovChannelModel joint =
        compose_independent({TwoStateChain{0.5, 0.5}, TwoStateChain{0.5, 0.5}});
    const StabilityReport r = theorem4_verdict(scalar_set(std::sqrt(3.9)), joint);
    CHECK(r.lambda == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.product == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(r.verdict == Verdict::stable);
    CHECK(theorem4_verdict(scalar_set(std::sqrt(4.1)), joint).verdict == Verdict::unstable);
  }
}

TEST_CASE("theorem5 per-sensor flags") {
  const MarkovChannelModel good = gilbert_elliott();
  MarkovChannelModel bad = good;
  bad.on_bits = {{0}, {0}};

  SUBCASE("both flags hold when every sensor has a good channel") {
    const ProcessSet procs{{scalar_process(1.02), scalar_process(1.01)}};
    const Theorem5Result r = theorem5_verdicts(procs, {good, good});
    CHECK(r.necessary_ok);
    CHECK(r.sufficient_ok);
    CHECK(r.per_sensor.size() == 2);
  }
  SUBCASE("one dead channel breaks the necessary condition") {
    const ProcessSet procs{{scalar_process(1.02), scalar_process(1.01)}};
    // ProcessSet sorts by rho, so pair the dead channel with the slow process.
    const Theorem5Result r = theorem5_verdicts(procs, {good, bad});
    CHECK_FALSE(r.necessary_ok);
    CHECK_FALSE(r.sufficient_ok);
  }
  SUBCASE("channel count must match the process count") {
    const ProcessSet procs{{scalar_process(1.02)}};
    CHECK_THROWS_AS(theorem5_verdicts(procs, {good, good}), std::invalid_argument);
  }
}

TEST_CASE("classify_policy_type") {
  ChannelSelectionVector all_one;
  all_one.choices = {1, 1};

  SUBCASE("live channel is type II") {
    CHECK(classify_policy_type(gilbert_elliott(), PeriodicSelectionRule{{all_one}}) ==
          PolicyType::type_II);
  }
  SUBCASE("permanently dead frequency is type I") {
    MarkovChannelModel ch = gilbert_elliott();
    ch.num_freq = 2;
    ch.on_bits = {{0, 0}, {1, 0}};  // frequency 2 never succeeds
    ChannelSelectionVector dead;
    dead.choices = {2, 2};
    CHECK(classify_policy_type(ch, PeriodicSelectionRule{{dead}}) == PolicyType::type_I);
    SUBCASE("alternating dead and live slots is type II") {
      CHECK(classify_policy_type(ch, PeriodicSelectionRule{{dead, all_one}}) ==
            PolicyType::type_II);
    }
  }
}

TEST_CASE("cycle_analytics on a perfect channel") {
  MarkovChannelModel ch = gilbert_elliott();
  ch.on_bits = {{1}, {1}};
  ChannelSelectionVector v;
  v.choices = {1, 1};
  const LtiProcess proc = scalar_process(0.8);
  const Matrix p_bar = riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov);
  const CycleAnalytics an = cycle_analytics(proc, p_bar, ch, PeriodicSelectionRule{{v}});
  CHECK_FALSE(an.diverges);
  CHECK((an.g_matrix - ch.trans).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(an.expected_t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(an.expected_c == doctest::Approx(cost_c(proc, p_bar, 1)).epsilon(1e-12));
  CHECK(an.analytic_j == doctest::Approx(cost_c(proc, p_bar, 1)).epsilon(1e-12));
  const Vector pi = stationary_distribution(ch.trans);
  CHECK((an.beta - pi).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cycle_analytics on an all-off channel reports divergence") {
  MarkovChannelModel ch = gilbert_elliott();
  ch.on_bits = {{0}, {0}};
  ChannelSelectionVector v;
  v.choices = {1, 1};
  const LtiProcess proc = scalar_process(0.8);
  const CycleAnalytics an =
      cycle_analytics(proc, scalar(0.5), ch, PeriodicSelectionRule{{v}});
  CHECK(an.diverges);
  CHECK(std::isinf(an.analytic_j));
}

TEST_CASE("cycle_analytics matches the Gilbert-Elliott closed form") {
  // On the two-state chain with stay-off 0.9, stay-on 0.8, every cycle
  // starts in the on state, so with u solving (I - E) u = 1 the mean cycle
  // length is u_on = 1 + 0.2 * (1 / 0.1) = 3. The cycle-cost series has a
  // geometric closed form for a scalar process.
  const MarkovChannelModel ch = gilbert_elliott();
  ChannelSelectionVector v;
  v.choices = {1, 1};
  const double a = 1.02;
  const LtiProcess proc = scalar_process(a);
  const Matrix p_bar = riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov);
  const CycleAnalytics an =
      cycle_analytics(proc, p_bar, ch, PeriodicSelectionRule{{v}}, 1e-12);
  REQUIRE_FALSE(an.diverges);

  CHECK(an.m1_count == 1);
  CHECK(an.pre_cycle_states == std::vector<int>{1});
  CHECK(an.beta(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(an.expected_t == doctest::Approx(3.0).epsilon(1e-9));

  // pmf: P(T=1 | on) = 0.8, P(T=j | on) = 0.2 * 0.9^{j-2} * 0.1 for j >= 2
  CHECK(an.cycle_length_mass[0](1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(an.cycle_length_mass[1](1) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(an.cycle_length_mass[2](1) == doctest::Approx(0.018).epsilon(1e-12));
  double mass = 0.0;
  for (const auto& m : an.cycle_length_mass) mass += m(1);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

  // c(i) = K r^i - B with r = a^2, B = w / (r - 1), K = p_bar + B, so
  // g(t) = K r (r^t - 1) / (r - 1) - B t and
  // E[C] = 0.8 g(1) + sum_{j>=2} 0.02 * 0.9^{j-2} g(j) in closed form.
  const double r = a * a;
  const double b = 1.0 / (r - 1.0);
  const double k = p_bar(0, 0) + b;
  auto g = [&](double t) { return k * r * (std::pow(r, t) - 1.0) / (r - 1.0) - b * t; };
  const double geo_rj = r * r / (1.0 - 0.9 * r);      // sum_{j>=2} 0.9^{j-2} r^j
  const double geo_1 = 10.0;                          // sum_{j>=2} 0.9^{j-2}
  const double geo_j = 110.0;                         // sum_{j>=2} 0.9^{j-2} j
  const double expected_c =
      0.8 * g(1.0) + 0.02 * (k * r / (r - 1.0) * (geo_rj - geo_1) - b * geo_j);
  CHECK(an.expected_c == doctest::Approx(expected_c).epsilon(1e-6));
  CHECK(an.analytic_j == doctest::Approx(expected_c / 3.0).epsilon(1e-6));

  // a trivially periodic rule with the same selection twice changes nothing
  const CycleAnalytics an2 =
      cycle_analytics(proc, p_bar, ch, PeriodicSelectionRule{{v, v}}, 1e-12);
  CHECK(an2.analytic_j == doctest::Approx(an.analytic_j).epsilon(1e-10));
}

TEST_CASE("cycle_analytics diverges when the cost outgrows the success tail") {
  // stay-off 0.9 gives tail 0.9^j; a^2 = 1.2 > 1/0.9 makes E[C] infinite.
  const MarkovChannelModel ch = gilbert_elliott();
  ChannelSelectionVector v;
  v.choices = {1, 1};
  const LtiProcess proc = scalar_process(std::sqrt(1.2));
  const Matrix p_bar = riccati_steady_state(proc.a, proc.c_meas, proc.w_cov, proc.v_cov);
  const CycleAnalytics an = cycle_analytics(proc, p_bar, ch, PeriodicSelectionRule{{v}});
  CHECK(an.diverges);
  CHECK(std::isinf(an.analytic_j));
}

TEST_CASE("single-row masks: diagonal entries bound the spectral radius from below") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Matrix prod = Matrix::Identity(n, n);
    for (int f = 0; f < 4; ++f) {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
      }
      prod = prod * m;
    }
    const double rho = spectral_radius(prod).radius;
    double max_masked = 0.0;
    for (int i = 0; i < n; ++i) {
      max_masked = std::max(max_masked, spectral_radius(state_selector(i, n) * prod).radius);
    }
    CHECK(max_masked <= rho + 1e-10);
    CHECK(rho <= n * max_masked + 1e-10);
  }
}
