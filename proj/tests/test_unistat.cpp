#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"

#include "rcor/rng.hpp"
#include "rcor/unistat.hpp"

using namespace rcor;
using rational = boost::multiprecision::cpp_rational;

namespace {

std::int64_t naive_inversions(const std::vector<std::int64_t>& seq) {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] > seq[j]) ++count;
    }
  }
  return count;
}

double naive_kendall(const PairedSample& sample) {
  const auto& x = sample.x();
  const auto& y = sample.y();
  const auto n = sample.n();
  double concordant_minus_discordant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sx = x[i] < x[j] ? 1.0 : (x[i] > x[j] ? -1.0 : 0.0);
      const double sy = y[i] < y[j] ? 1.0 : (y[i] > y[j] ? -1.0 : 0.0);
      concordant_minus_discordant += sx * sy;
    }
  }
  return concordant_minus_discordant / (0.5 * static_cast<double>(n * (n - 1)));
}

// Exact rational statistics on the concomitant arrangement pi of {1..n}
// (x taken as 1..n in order, so pi is also y as values).
struct RationalStats {
  rational xi;
  rational spearman;
  rational tau;
  rational quadrant;
};

RationalStats exact_stats(const std::vector<std::int64_t>& pi) {
  const std::int64_t n = static_cast<std::int64_t>(pi.size());
  std::int64_t abs_steps = 0;
  for (std::size_t i = 0; i + 1 < pi.size(); ++i) {
    abs_steps += std::abs(pi[i + 1] - pi[i]);
  }
  std::int64_t sq = 0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const std::int64_t d = static_cast<std::int64_t>(k + 1) - pi[k];
    sq += d * d;
  }
  const std::int64_t inv = naive_inversions(pi);

  // Median of 1..n is (n+1)/2; work in half-units to stay integral.
  const std::int64_t med2 = n + 1;
  std::int64_t sign_sum = 0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const std::int64_t dx = 2 * static_cast<std::int64_t>(k + 1) - med2;
    const std::int64_t dy = 2 * pi[k] - med2;
    const std::int64_t prod = dx * dy;
    sign_sum += prod > 0 ? 1 : (prod < 0 ? -1 : 0);
  }

  RationalStats s;
  s.xi = 1 - rational(3 * abs_steps, n * n - 1);
  s.spearman = 1 - rational(6 * sq, n * (n * n - 1));
  s.tau = 1 - rational(4 * inv, n * (n - 1));
  s.quadrant = rational(sign_sum, n);
  return s;
}

struct NullEnumeration {
  rational var_xi;        // V[sqrt(n) xi]
  rational var_spearman;  // V[sqrt(n) S]
  rational var_tau;       // V[sqrt(n) tau]
  rational var_quadrant;  // V[sqrt(n) Q]
  rational cov_s_xi;
  rational cov_tau_xi;
  rational cov_q_xi;
  rational cov_abs_tau_xi;
  rational mean_xi;
};

NullEnumeration enumerate_null(std::int64_t n) {
  std::vector<std::int64_t> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 1);

  rational sum_xi = 0, sum_s = 0, sum_tau = 0, sum_q = 0, sum_abs_tau = 0;
  rational sum_xi2 = 0, sum_s2 = 0, sum_tau2 = 0, sum_q2 = 0;
  rational sum_s_xi = 0, sum_tau_xi = 0, sum_q_xi = 0, sum_abs_tau_xi = 0;
  std::int64_t count = 0;

  do {
    const auto st = exact_stats(pi);
    const rational abs_tau = st.tau < 0 ? rational(-st.tau) : st.tau;
    sum_xi += st.xi;
    sum_s += st.spearman;
    sum_tau += st.tau;
    sum_q += st.quadrant;
    sum_abs_tau += abs_tau;
    sum_xi2 += st.xi * st.xi;
    sum_s2 += st.spearman * st.spearman;
    sum_tau2 += st.tau * st.tau;
    sum_q2 += st.quadrant * st.quadrant;
    sum_s_xi += st.spearman * st.xi;
    sum_tau_xi += st.tau * st.xi;
    sum_q_xi += st.quadrant * st.xi;
    sum_abs_tau_xi += abs_tau * st.xi;
    ++count;
  } while (std::next_permutation(pi.begin(), pi.end()));

  const rational m = count;
  NullEnumeration e;
  e.mean_xi = sum_xi / m;
  e.var_xi = n * (sum_xi2 / m - (sum_xi / m) * (sum_xi / m));
  e.var_spearman = n * (sum_s2 / m - (sum_s / m) * (sum_s / m));
  e.var_tau = n * (sum_tau2 / m - (sum_tau / m) * (sum_tau / m));
  e.var_quadrant = n * (sum_q2 / m - (sum_q / m) * (sum_q / m));
  e.cov_s_xi = sum_s_xi / m - (sum_s / m) * (sum_xi / m);
  e.cov_tau_xi = sum_tau_xi / m - (sum_tau / m) * (sum_xi / m);
  e.cov_q_xi = sum_q_xi / m - (sum_q / m) * (sum_xi / m);
  e.cov_abs_tau_xi = sum_abs_tau_xi / m - (sum_abs_tau / m) * (sum_xi / m);
  return e;
}

}  // namespace

TEST_CASE("count_inversions agrees with the quadratic count") {
  Rng rng(2024);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(60));
    std::vector<std::int64_t> seq(n);
    std::iota(seq.begin(), seq.end(), 1);
    rng.shuffle(std::span<std::int64_t>(seq));
    CHECK(count_inversions(seq) == naive_inversions(seq));
  }
  CHECK(count_inversions(std::vector<std::int64_t>{1, 2, 3}) == 0);
  CHECK(count_inversions(std::vector<std::int64_t>{3, 2, 1}) == 3);
}

TEST_CASE("xi over all n=3 arrangements") {
  // Arrangements in lexicographic order with their statistic values.
  const std::vector<std::vector<std::int64_t>> arrangements = {
      {1, 2, 3}, {1, 3, 2}, {2, 1, 3}, {2, 3, 1}, {3, 1, 2}, {3, 2, 1}};
  const std::vector<double> expected_xi = {0.25,   -0.125, -0.125,
                                           -0.125, -0.125, 0.25};
  const std::vector<double> expected_tau = {1.0,        1.0 / 3.0,  1.0 / 3.0,
                                            -1.0 / 3.0, -1.0 / 3.0, -1.0};
  for (std::size_t k = 0; k < arrangements.size(); ++k) {
    CHECK(xi_from_concomitant(arrangements[k]) ==
          doctest::Approx(expected_xi[k]).epsilon(1e-15));
    CHECK(kendall_from_concomitant(arrangements[k]) ==
          doctest::Approx(expected_tau[k]).epsilon(1e-15));
  }
}

TEST_CASE("hand-checked spearman and quadrant values") {
  CHECK(spearman_from_concomitant(std::vector<std::int64_t>{2, 1, 3}) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(spearman_from_concomitant(std::vector<std::int64_t>{1, 2, 3, 4}) == 1.0);
  CHECK(spearman_from_concomitant(std::vector<std::int64_t>{4, 3, 2, 1}) == -1.0);

  // n=3 quadrant over rank pairs: middle observation sits on the median.
  CHECK(quadrant(PairedSample({1, 2, 3}, {1, 2, 3})) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(quadrant(PairedSample({1, 2, 3}, {3, 1, 2})) ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  // Even n: non-monotone but quadrant-perfect arrangement.
  CHECK(quadrant(PairedSample({1, 2, 3, 4}, {2, 1, 3, 4})) == 1.0);
  CHECK(quadrant(PairedSample({1, 2, 3, 4}, {2, 4, 1, 3})) == 0.0);
}

TEST_CASE("sample_median conventions") {
  CHECK(sample_median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
  CHECK(sample_median(std::vector<double>{4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(sample_median(std::vector<double>{5.0}) == 5.0);
}

TEST_CASE("xi of monotone data is (n-2)/(n+1) in both directions") {
  for (const std::size_t n : {3u, 10u, 47u, 200u}) {
    std::vector<double> x(n), up(n), down(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 0.1 * static_cast<double>(i) - 3.0;
      up[i] = std::tanh(x[i]);
      down[i] = -x[i] * x[i] * x[i];
    }
    const double expected =
        static_cast<double>(n - 2) / static_cast<double>(n + 1);
    CHECK(xi(PairedSample(x, up)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(xi(PairedSample(x, down)) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("kendall matches the quadratic sign-pair oracle") {
  Rng rng(555);
  for (int round = 0; round < 10; ++round) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.below(120));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.4 * x[i] + rng.normal();
    }
    const PairedSample sample(x, y);
    CHECK(kendall(sample) ==
          doctest::Approx(naive_kendall(sample)).epsilon(1e-12));
  }
}

TEST_CASE("kendall is symmetric in the coordinates") {
  Rng rng(808);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(0.0, 1.0);
    y[i] = rng.normal();
  }
  const PairedSample sample(x, y);
  CHECK(kendall(sample) ==
        doctest::Approx(kendall(sample.swapped())).epsilon(1e-14));
  CHECK(spearman(sample) ==
        doctest::Approx(spearman(sample.swapped())).epsilon(1e-14));
}

TEST_CASE("null moment formulas at hand-reduced points") {
  const auto xi10 = xi_null_moments(10);
  CHECK(xi10.mean == 0.0);
  CHECK(xi10.variance == doctest::Approx(8.0 / 27.0).epsilon(1e-15));
  CHECK(xi10.asymptotic_variance == doctest::Approx(0.4).epsilon(1e-15));

  const auto tau10 = tau_null_moments(10);
  CHECK(tau10.variance == doctest::Approx(50.0 / 81.0).epsilon(1e-15));
  CHECK(tau10.asymptotic_variance == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

  CHECK(quadrant_null_moments(9).variance ==
        doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(quadrant_null_moments(10).variance ==
        doctest::Approx(10.0 / 9.0).epsilon(1e-15));
  CHECK(quadrant_null_moments(10).asymptotic_variance == 1.0);
}

TEST_CASE("moment formulas approach their limits") {
  const auto xi_big = xi_null_moments(100000);
  CHECK(xi_big.variance == doctest::Approx(0.4).epsilon(1e-4));
  const auto tau_big = tau_null_moments(100000);
  CHECK(tau_big.variance == doctest::Approx(4.0 / 9.0).epsilon(1e-4));
  const auto q_big = quadrant_null_moments(99999);
  CHECK(q_big.variance == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("exact enumeration confirms the null moments for n = 3, 4, 5") {
  for (const std::int64_t n : {3, 4, 5}) {
    CAPTURE(n);
    const auto e = enumerate_null(n);

    CHECK(e.mean_xi == rational(0));
    CHECK(e.var_xi ==
          rational(n * (n - 2) * (4 * n - 7), 10 * (n + 1) * (n - 1) * (n - 1)));
    CHECK(e.var_spearman == rational(n, n - 1));
    CHECK(e.var_tau == rational(2 * (2 * n + 5), 9 * (n - 1)));
    const rational expected_q =
        n % 2 == 1 ? rational(n - 1, n) : rational(n, n - 1);
    CHECK(e.var_quadrant == expected_q);

    CHECK(e.cov_s_xi == rational(0));
    CHECK(e.cov_tau_xi == rational(0));
    CHECK(e.cov_q_xi == rational(0));
  }
}

TEST_CASE("enumeration cross-checks the floating-point statistics") {
  std::vector<std::int64_t> pi = {1, 2, 3, 4, 5};
  do {
    const auto st = exact_stats(pi);
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y(pi.size());
    for (std::size_t k = 0; k < pi.size(); ++k) {
      y[k] = static_cast<double>(pi[k]);
    }
    const PairedSample sample(x, y);
    CHECK(xi(sample) ==
          doctest::Approx(static_cast<double>(st.xi)).epsilon(1e-14));
    CHECK(spearman(sample) ==
          doctest::Approx(static_cast<double>(st.spearman)).epsilon(1e-14));
    CHECK(kendall(sample) ==
          doctest::Approx(static_cast<double>(st.tau)).epsilon(1e-14));
    CHECK(quadrant(sample) ==
          doctest::Approx(static_cast<double>(st.quadrant)).epsilon(1e-14));
  } while (std::next_permutation(pi.begin(), pi.end()));
}

TEST_CASE("absolute kendall and xi correlate at n = 3") {
  const auto e = enumerate_null(3);
  CHECK(e.cov_abs_tau_xi == rational(1, 18));
}
