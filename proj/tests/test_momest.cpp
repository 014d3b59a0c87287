#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "sparsetest/bellpoly.hpp"
#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/momest.hpp"
#include "sparsetest/sampling.hpp"
#include "test_util.hpp"

using namespace sparsetest;

namespace {

const FiniteDistribution kRad = FiniteDistribution::rademacher();

// Test-only oracle: B_{n,k} by direct enumeration of the nonnegative tuples
// (j_1..j_{n-k+1}) with sum j = k and sum i*j_i = n.
Rat bell_by_partitions(unsigned n, unsigned k, const std::vector<Rat>& xs) {
  if (n == 0 && k == 0) return Rat(1);
  if (k == 0 || k > n) return Rat(0);
  const unsigned width = n - k + 1;
  Rat total = 0;
  std::vector<unsigned> j(width, 0);
  // odometer over j tuples bounded by k
  std::size_t pos = 0;
  while (true) {
    unsigned sj = 0, wj = 0;
    for (unsigned i = 0; i < width; ++i) {
      sj += j[i];
      wj += (i + 1) * j[i];
    }
    if (sj == k && wj == n) {
      Rat term(factorial(n));
      for (unsigned i = 0; i < width; ++i) {
        term /= Rat(factorial(j[i]));
        Rat base = xs[i] / Rat(factorial(i + 1));
        term *= rat_pow(base, j[i]);
      }
      total += term;
    }
    pos = 0;
    while (pos < width && ++j[pos] > k) j[pos++] = 0;
    if (pos == width) break;
  }
  return total;
}

std::vector<Rat> exact_moments(const DiscreteRV& rv, unsigned L) {
  std::vector<Rat> ms(L);
  for (unsigned j = 1; j <= L; ++j) ms[j - 1] = rv.raw_moment(j);
  return ms;
}

std::vector<Rat> exact_cumulants(const DiscreteRV& rv, unsigned L) {
  return moments_to_cumulants(exact_moments(rv, L));
}

}  // namespace

TEST_CASE("bell triangular recursion matches partition enumeration") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> coef(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rat> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(make_rat(coef(rng), 3));
    for (unsigned n = 1; n <= 8; ++n)
      for (unsigned k = 1; k <= n; ++k)
        CHECK(bell_partial<Rat>(n, k, xs) == bell_by_partitions(n, k, xs));
  }
}

TEST_CASE("moments_to_cumulants examples") {
  std::vector<double> rad = {0, 1, 0, 1};
  auto k = moments_to_cumulants(rad);
  CHECK(k[0] == doctest::Approx(0));
  CHECK(k[1] == doctest::Approx(1));
  CHECK(k[2] == doctest::Approx(0));
  CHECK(k[3] == doctest::Approx(-2));

  std::vector<double> gauss = {0, 1, 0, 3};
  CHECK(moments_to_cumulants(gauss)[3] == doctest::Approx(0));

  double c = 2.5;
  std::vector<double> point = {c, c * c, c * c * c};
  auto kc = moments_to_cumulants(point);
  CHECK(kc[0] == doctest::Approx(c));
  CHECK(kc[1] == doctest::Approx(0));
  CHECK(kc[2] == doctest::Approx(0));
}

TEST_CASE("cumulants_to_moments inverts the examples") {
  std::vector<double> k1 = {0, 1, 0, -2};
  auto m1 = cumulants_to_moments(k1);
  CHECK(m1[1] == doctest::Approx(1));
  CHECK(m1[3] == doctest::Approx(1));

  std::vector<double> k2 = {0, 1, 0, 0};
  CHECK(cumulants_to_moments(k2)[3] == doctest::Approx(3));

  std::vector<double> k3 = {2.5, 0, 0};
  CHECK(cumulants_to_moments(k3)[2] == doctest::Approx(2.5 * 2.5 * 2.5));
}

namespace {

// Conditioning scale of the order-l conversion: the same Bell sums evaluated
// on |m| with all signs positive. Relative agreement below is with respect to
// this magnitude, which is what double arithmetic can actually deliver.
double conversion_scale(const std::vector<double>& ms, unsigned l) {
  std::vector<double> am(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) am[i] = std::abs(ms[i]);
  double s = 0;
  double fac = 1;
  for (unsigned k = 1; k <= l; ++k) {
    s += fac * bell_partial<double>(l, k, am);
    fac *= k;
  }
  return std::max(1.0, s);
}

}  // namespace

TEST_CASE("round trip moments->cumulants->moments, ell <= 12") {
  // Double route on realistic rv moment sequences (values bounded by ~3).
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    auto p = testutil::random_polynomial(rng, 4, 2, 3);
    Rat n2 = coeff_norm_squared(p);
    auto rv = output_distribution(p, kRad);
    std::vector<double> ms(12);
    for (unsigned j = 1; j <= 12; ++j)
      ms[j - 1] = to_double(rv.raw_moment(j) / rat_pow(n2, j / 2)) /
                  (j % 2 ? coeff_norm(p) : 1.0);
    auto back = cumulants_to_moments(moments_to_cumulants(ms));
    for (unsigned j = 0; j < 12; ++j)
      CHECK(std::abs(back[j] - ms[j]) <= 1e-10 * conversion_scale(ms, j + 1));
  }
  // Exact-rational route: the round trip is the identity, bit for bit, even
  // with coordinates up to 10^3.
  std::uniform_int_distribution<long> mag(-1000, 1000);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rat> ms(12);
    for (auto& m : ms) m = Rat(mag(rng));
    auto back = cumulants_to_moments<Rat>(moments_to_cumulants<Rat>(ms));
    CHECK(back == ms);
  }
}

TEST_CASE("bell route agrees with the direct recursion route") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> mag(-10.0, 10.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> ms(10);
    for (auto& m : ms) m = mag(rng);
    ms[0] = (trial % 2) ? 0.0 : ms[0];  // exercise the mean-zero case too
    auto a = moments_to_cumulants(ms);
    auto b = moments_to_cumulants_recursion(ms);
    for (unsigned j = 0; j < 10; ++j)
      CHECK(std::abs(a[j] - b[j]) <= 1e-12 * conversion_scale(ms, j + 1));
    auto ma = cumulants_to_moments(a);
    auto mb = cumulants_to_moments_recursion(a);
    for (unsigned j = 0; j < 10; ++j)
      CHECK(std::abs(ma[j] - mb[j]) <= 1e-12 * conversion_scale(a, j + 1));
  }
}

TEST_CASE("cumulant additivity for independent rvs is exact") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = testutil::random_polynomial(rng, 3, 2, 3);
    auto q = testutil::random_polynomial(rng, 3, 2, 3).rename_variables(
        {8, 9, 10, 11});
    auto A = output_distribution(p, kRad);
    auto B = output_distribution(q, kRad);
    auto S = sum_independent(A, B);
    auto ka = exact_cumulants(A, 8);
    auto kb = exact_cumulants(B, 8);
    auto ks = exact_cumulants(S, 8);
    for (unsigned j = 0; j < 8; ++j) CHECK(ks[j] == ka[j] + kb[j]);
  }
}

TEST_CASE("cumulant magnitude bound for mean-zero rvs") {
  // |kappa_l| <= E|Y|^l e^l l!; checked with a rational lower bound on e,
  // which only strengthens the inequality.
  const Rat e_lb(2718281828UL, 1000000000UL);
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = testutil::random_polynomial(rng, 4, 2, 4, /*allow_constant=*/false);
    auto rv = output_distribution(p, kRad);
    if (rv.raw_moment(1) != 0) continue;
    auto ks = exact_cumulants(rv, 8);
    for (unsigned l = 1; l <= 8; ++l) {
      Rat bound = rv.abs_moment(l) * rat_pow(e_lb, l) * Rat(factorial(l));
      Rat kl = ks[l - 1] >= 0 ? ks[l - 1] : Rat(-ks[l - 1]);
      CHECK(kl <= bound);
    }
  }
}

TEST_CASE("noiseless moment bound (hypercontractive)") {
  // m_l(|p(X^k)|) <= (l-1)^{dl/2} lambda^{d - dl/2} K^l, squared for exactness.
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = testutil::random_polynomial(rng, 5, 3, 5);
    auto rv = output_distribution(p, kRad);
    unsigned d = std::max(1u, p.degree());
    Rat K2 = coeff_norm_squared(p);
    if (K2 < 1) K2 = 1;  // K is an upper bound with K >= 1
    Rat lambda = kRad.min_prob();
    for (unsigned l = 2; l <= 6; ++l) {
      Rat lhs = rv.abs_moment(l);
      // rhs^2 = (l-1)^{dl} lambda^{2d - dl} K^{2l}
      Rat rhs2 = rat_pow(Rat(l - 1), d * l) * rat_pow(K2, l);
      long lam_exp = 2 * static_cast<long>(d) - static_cast<long>(d) * l;
      if (lam_exp >= 0)
        rhs2 *= rat_pow(lambda, static_cast<unsigned long>(lam_exp));
      else
        rhs2 /= rat_pow(lambda, static_cast<unsigned long>(-lam_exp));
      CHECK(lhs * lhs <= rhs2);
    }
  }
}

TEST_CASE("moment monotonicity E|X|^n ^(1/n) >= E|X|^k ^(1/k)") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = testutil::random_polynomial(rng, 4, 2, 4);
    auto rv = output_distribution(p, kRad);
    for (unsigned k = 1; k <= 5; ++k)
      for (unsigned n = k + 1; n <= 6; ++n) {
        // compare E|X|^n ^ k >= E|X|^k ^ n
        Rat lhs = rat_pow(rv.abs_moment(n), k);
        Rat rhs = rat_pow(rv.abs_moment(k), n);
        CHECK(lhs >= rhs);
      }
  }
}

TEST_CASE("draw_labeled_samples determinism and content") {
  auto c = MultilinearPolynomial::constant(Rat(7, 2));
  auto b1 = draw_labeled_samples(c, kRad, NoiseSpec::none(), 100, 99);
  for (double y : b1.ys) CHECK(y == 3.5);

  auto x1 = MultilinearPolynomial::monomial_term(Rat(1), make_monomial({0}));
  auto b2 = draw_labeled_samples(x1, kRad, NoiseSpec::gaussian(0, 1), 10000, 7);
  auto b3 = draw_labeled_samples(x1, kRad, NoiseSpec::gaussian(0, 1), 10000, 7);
  CHECK(b2.ys == b3.ys);
  CHECK(b2.xs == b3.xs);

  // CLT-scale sanity band: sd(y) = sqrt(2), mean within 5 sd/sqrt(m)
  double mean = empirical_raw_moment(b2, 1);
  CHECK(std::abs(mean) <= 5 * std::sqrt(2.0) / std::sqrt(10000.0));
}

TEST_CASE("empirical_raw_moment basics") {
  auto c = MultilinearPolynomial::constant(Rat(2));
  auto b = draw_labeled_samples(c, kRad, NoiseSpec::none(), 50, 1);
  CHECK(empirical_raw_moment(b, 3) == doctest::Approx(8.0));

  auto x1 = MultilinearPolynomial::monomial_term(Rat(1), make_monomial({0}));
  auto bx = draw_labeled_samples(x1, kRad, NoiseSpec::none(), 10000, 5);
  CHECK(std::abs(empirical_raw_moment(bx, 2) - 1.0) < 0.1);
  CHECK(std::abs(empirical_raw_moment(bx, 1)) < 0.1);

  LabeledSampleBatch empty;
  CHECK_THROWS_AS(empirical_raw_moment(empty, 1), std::invalid_argument);
}

TEST_CASE("pairwise accumulator matches plain double sum on ones") {
  PairwiseAccumulator acc;
  for (int i = 0; i < 100000; ++i) acc.add(1.0);
  CHECK(acc.total() == 100000.0);
}

TEST_CASE("estimate_clean_moments: noiseless, gaussian, point-mass shift") {
  auto x1 = MultilinearPolynomial::monomial_term(Rat(1), make_monomial({0}));
  EstimatorConfig cfg;
  cfg.tau = 0.05;
  cfg.delta = 0.05;

  auto est = estimate_clean_moments(x1, kRad, NoiseSpec::none(), 2, cfg, 1, 11);
  CHECK(std::abs(est.value - 1.0) <= 0.05);

  auto g = NoiseSpec::gaussian(0, 1);
  auto est2 = estimate_clean_moments(x1, kRad, g, 2, cfg, 1, 13);
  CHECK(std::abs(est2.noisy_moments[1] - 2.0) <= 0.2);
  CHECK(std::abs(est2.value - 1.0) <= 0.05);

  auto shift = NoiseSpec::finite(DiscreteRV::point_mass(Rat(3)));
  auto est3 = estimate_clean_moments(x1, kRad, shift, 1, cfg, 1, 17);
  CHECK(std::abs(est3.noisy_moments[0] - 3.0) <= 0.05);
  CHECK(std::abs(est3.value - 0.0) <= 0.05);
}

TEST_CASE("sample_size_for formula behavior") {
  auto none = NoiseSpec::none();
  Int m1 = sample_size_for(2, 0.1, 0.1, 1, 1, 0.5, none);
  CHECK(m1 > 0);  // finite, far beyond any drawable budget

  long double lg1 = log2_sample_size_for(2, 0.1, 0.1, 1, 1, 0.5, none);
  long double lg2 = log2_sample_size_for(2, 0.05, 0.1, 1, 1, 0.5, none);
  CHECK(std::abs(static_cast<double>(lg2 - lg1 - 2.0L)) < 1e-9);  // tau/2 => x4

  CHECK_THROWS_AS(sample_size_for(8, 0.1, 0.1, 1, 2, 0.5, none),
                  SampleBudgetError);
  try {
    sample_size_for(8, 0.1, 0.1, 1, 2, 0.5, none);
  } catch (const SampleBudgetError& e) {
    CHECK(e.log2_required > 512);
  }
}

TEST_CASE("paper-mode estimation hits the drawable budget honestly") {
  auto x1 = MultilinearPolynomial::monomial_term(Rat(1), make_monomial({0}));
  EstimatorConfig cfg;
  cfg.mode = SampleSizeMode::paper;
  CHECK_THROWS_AS(
      estimate_clean_moments(x1, kRad, NoiseSpec::none(), 2, cfg, 1, 3),
      SampleBudgetError);
}

TEST_CASE("noise spec moments and cumulants") {
  auto g = NoiseSpec::gaussian(0.5, 2.0);
  CHECK(g.raw_moment(1) == doctest::Approx(0.5));
  CHECK(g.raw_moment(2) == doctest::Approx(4.25));
  CHECK(g.cumulant(2) == doctest::Approx(4.0));
  CHECK(g.cumulant(3) == doctest::Approx(0.0));

  // standard normal m_8 = 105
  auto std_g = NoiseSpec::gaussian(0, 1);
  CHECK(std_g.raw_moment(8) == doctest::Approx(105.0));

  auto f = NoiseSpec::finite(DiscreteRV::from_atoms(
      {{Rat(0), Rat(1, 2)}, {Rat(2), Rat(1, 2)}}));
  CHECK(f.raw_moment(1) == doctest::Approx(1.0));
  CHECK(f.raw_moment(2) == doctest::Approx(2.0));
  CHECK(f.cumulant(2) == doctest::Approx(1.0));  // variance of {0,2} uniform

  auto scaled = f.scaled(2.0);
  CHECK(scaled.raw_moment(1) == doctest::Approx(0.5));

  auto t = NoiseSpec::moment_table({0.0, 1.0});
  CHECK(t.raw_moment(2) == 1.0);
  CHECK_THROWS_AS(t.raw_moment(3), std::out_of_range);
  CHECK(!t.can_sample());
}
