#include "sparsetest/momest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sparsetest/bellpoly.hpp"
#include "sparsetest/sampling.hpp"

namespace sparsetest {

namespace {

long double lg(long double x) { return std::log2(x); }

long double log2_factorial(unsigned n) {
  long double s = 0;
  for (unsigned i = 2; i <= n; ++i) s += lg(static_cast<long double>(i));
  return s;
}

}  // namespace

long double log2_sample_size_for(unsigned ell, double tau, double delta,
                                 double K, unsigned d, double lambda,
                                 const NoiseSpec& noise,
                                 double paper_constant) {
  if (ell == 0 || tau <= 0 || delta <= 0 || K < 1 || lambda <= 0)
    throw std::invalid_argument("bad estimator parameters");
  const long double L = ell;
  const long double lgK = lg(K), lglam = lg(lambda), lgell = lg(L);

  // Accuracy each clean cumulant needs so the order-ell clean moment lands
  // within tau: tau / (ell^{d ell^2} lambda^{-d ell^2} K^{2 ell^2}
  // e^{2 ell^2} ell^{3 ell^2}).
  const long double ell2 = L * L;
  long double lg_eps_cum =
      lg(tau) - (d * ell2 * lgell - d * ell2 * lglam + 2 * ell2 * lgK +
                 2 * ell2 * lg(std::exp(1.0L)) + 3 * ell2 * lgell);

  // Accuracy each noisy raw moment needs so every noisy cumulant of order
  // <= ell lands within that: divide by (ell!)^2 2^{2 ell^2 + 2 ell}
  // (2^ell (ell^{d ell/2} lambda^{d(1-ell)/2} K^ell + m_[1..ell+1] + 1))^{2 ell}.
  const long double noise_low = noise.max_raw_moment(1, ell + 1);
  long double lg_ml_bound =
      L + lg(std::pow(L, d * L / 2) *
                 std::pow((long double)lambda, d * (1.0L - L) / 2) *
                 std::pow((long double)K, L) +
             std::max<long double>(noise_low, 0) + 1);
  long double lg_eps_mom =
      lg_eps_cum -
      (2 * log2_factorial(ell) + (2 * ell2 + 2 * L) + 2 * L * lg_ml_bound);

  // Chebyshev count at that accuracy with failure budget delta/ell:
  // (1/((delta/ell) eps^2)) 2^{2 ell} ((2 ell)^{d ell}
  // lambda^{d(1-2 ell)/2} K^{2 ell} + m_[2ell..2ell+2] + 1).
  const long double noise_high = noise.max_raw_moment(2 * ell, 2 * ell + 2);
  long double lg_var_bound =
      2 * L + lg(std::pow(2.0L * L, (long double)d * L) *
                     std::pow((long double)lambda, d * (1.0L - 2 * L) / 2) *
                     std::pow((long double)K, 2.0L * L) +
                 std::max<long double>(noise_high, 0) + 1);
  return lg(paper_constant) + lg(L / delta) - 2 * lg_eps_mom + lg_var_bound;
}

Int default_count_budget() { return Int(1) << 512; }

Int sample_size_for(unsigned ell, double tau, double delta, double K,
                    unsigned d, double lambda, const NoiseSpec& noise,
                    double paper_constant, const Int& budget) {
  long double lg_m = log2_sample_size_for(ell, tau, delta, K, d, lambda, noise,
                                          paper_constant);
  long double lg_budget = log2l(budget.get_d());
  if (!(lg_m <= lg_budget)) {
    std::ostringstream msg;
    msg << "sample-count cascade needs 2^" << static_cast<double>(lg_m)
        << " samples (budget 2^" << static_cast<double>(lg_budget) << ")";
    throw SampleBudgetError(msg.str(), lg_m);
  }
  if (lg_m <= 0) return Int(1);
  // 2^{lg_m} with the fractional part applied in double precision
  long double ip;
  long double frac = modfl(lg_m, &ip);
  Int count = Int(1) << static_cast<unsigned long>(ip);
  double scale = std::pow(2.0, static_cast<double>(frac));
  Rat scaled = rat_from_double(scale) * Rat(count);
  Int out = scaled.get_num() / scaled.get_den() + 1;
  return out;
}

std::vector<double> clean_moments_from_noisy(const std::vector<double>& noisy,
                                             const NoiseSpec& noise) {
  std::vector<double> noisy_cum = moments_to_cumulants(noisy);
  std::vector<double> clean_cum = noisy_cum;
  for (std::size_t j = 0; j < clean_cum.size(); ++j)
    clean_cum[j] -= noise.cumulant(static_cast<unsigned>(j + 1));
  return cumulants_to_moments(clean_cum);
}

namespace {

std::vector<double> stream_moments(const MultilinearPolynomial& p,
                                   const FiniteDistribution& d,
                                   const NoiseSpec& noise, unsigned L,
                                   std::size_t m, uint64_t seed) {
  std::vector<PairwiseAccumulator> acc(L);
  stream_labels(p, d, noise, m, seed, [&](double y) {
    double pw = 1;
    for (unsigned j = 0; j < L; ++j) {
      pw *= y;
      acc[j].add(pw);
    }
  });
  std::vector<double> ms(L);
  for (unsigned j = 0; j < L; ++j)
    ms[j] = acc[j].total() / static_cast<double>(m);
  return ms;
}

struct Pilot {
  std::vector<double> moments;           // noisy, 1..L
  std::vector<std::vector<double>> cov;  // covariance of (y^1..y^L)
};

Pilot pilot_run(const MultilinearPolynomial& p, const FiniteDistribution& d,
                const NoiseSpec& noise, unsigned L, std::size_t m,
                uint64_t seed) {
  std::vector<double> raw = stream_moments(p, d, noise, 2 * L, m, seed);
  Pilot out;
  out.moments.assign(raw.begin(), raw.begin() + L);
  out.cov.assign(L, std::vector<double>(L, 0.0));
  for (unsigned j = 1; j <= L; ++j)
    for (unsigned k = 1; k <= L; ++k)
      out.cov[j - 1][k - 1] = raw[j + k - 1] - raw[j - 1] * raw[k - 1];
  return out;
}

std::size_t aggressive_sample_count(const Pilot& pilot, const NoiseSpec& noise,
                                    unsigned ell, const EstimatorConfig& cfg) {
  const unsigned L = ell;
  // Delta method: gradient of the order-ell clean moment in the noisy moment
  // vector, central differences at the pilot point.
  std::vector<double> grad(L);
  for (unsigned j = 0; j < L; ++j) {
    double h = std::max(1e-6, 1e-6 * std::abs(pilot.moments[j]));
    std::vector<double> up = pilot.moments, dn = pilot.moments;
    up[j] += h;
    dn[j] -= h;
    double fu = clean_moments_from_noisy(up, noise)[ell - 1];
    double fd = clean_moments_from_noisy(dn, noise)[ell - 1];
    grad[j] = (fu - fd) / (2 * h);
  }
  double v = 0;
  for (unsigned j = 0; j < L; ++j)
    for (unsigned k = 0; k < L; ++k)
      v += grad[j] * pilot.cov[j][k] * grad[k];
  v = std::max(v, 0.0);
  double m = cfg.safety_factor * v / (cfg.delta * cfg.tau * cfg.tau);
  return static_cast<std::size_t>(std::clamp<double>(
      std::ceil(m), static_cast<double>(cfg.pilot_samples), 9e18));
}

}  // namespace

MomentEstimate estimate_clean_moments(const MultilinearPolynomial& p,
                                      const FiniteDistribution& d,
                                      const NoiseSpec& noise, unsigned ell,
                                      const EstimatorConfig& cfg, double K,
                                      uint64_t seed) {
  if (ell == 0) throw std::invalid_argument("moment order must be >= 1");
  std::size_t m = 0;
  std::string mode;
  switch (cfg.mode) {
    case SampleSizeMode::paper: {
      Int count = sample_size_for(ell, cfg.tau, cfg.delta, K, p.degree(),
                                  to_double(d.min_prob()), noise,
                                  cfg.paper_constant,
                                  Int(static_cast<unsigned long>(cfg.sample_budget)));
      m = count.get_ui();
      mode = "paper";
      break;
    }
    case SampleSizeMode::aggressive: {
      Pilot pilot = pilot_run(p, d, noise, ell, cfg.pilot_samples,
                              derive_seed(seed, 0xA11E));
      m = aggressive_sample_count(pilot, noise, ell, cfg);
      mode = "aggressive(empirical-variance, non-paper)";
      break;
    }
    case SampleSizeMode::fixed:
      m = cfg.fixed_samples;
      mode = "fixed";
      break;
  }
  if (m == 0) throw std::invalid_argument("sample count is zero");
  if (m > cfg.sample_budget) {
    std::ostringstream msg;
    msg << "requested " << m << " samples exceeds budget " << cfg.sample_budget;
    throw SampleBudgetError(msg.str(), std::log2(static_cast<double>(m)));
  }

  MomentEstimate est;
  est.order = ell;
  est.tau = cfg.tau;
  est.delta = cfg.delta;
  est.samples_used = m;
  est.mode = mode;
  est.noisy_moments = stream_moments(p, d, noise, ell, m, seed);
  est.noisy_cumulants = moments_to_cumulants(est.noisy_moments);
  est.clean_cumulants = est.noisy_cumulants;
  for (unsigned j = 1; j <= ell; ++j)
    est.clean_cumulants[j - 1] -= noise.cumulant(j);
  est.clean_moments = cumulants_to_moments(est.clean_cumulants);
  est.value = est.clean_moments[ell - 1];
  return est;
}

}  // namespace sparsetest
