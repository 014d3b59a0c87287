#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsetest/distribution.hpp"
#include "sparsetest/noise.hpp"
#include "sparsetest/polynomial.hpp"
#include "sparsetest/rational.hpp"

namespace sparsetest {

// Thrown when a requested sample count exceeds the configured budget; carries
// log2 of the requirement since the count itself routinely overflows.
struct SampleBudgetError : std::runtime_error {
  SampleBudgetError(std::string what, long double log2_required)
      : std::runtime_error(std::move(what)), log2_required(log2_required) {}
  long double log2_required;
};

struct MomentEstimate {
  unsigned order = 0;
  double value = 0;
  double tau = 0;
  double delta = 0;
  std::size_t samples_used = 0;
  std::string mode;
  std::vector<double> noisy_moments;    // orders 1..ell
  std::vector<double> noisy_cumulants;  // orders 1..ell
  std::vector<double> clean_cumulants;  // orders 1..ell
  std::vector<double> clean_moments;    // orders 1..ell
};

// How estimate_clean_moments picks its sample count.
//   paper:      the Appendix-level cascade evaluated verbatim (constants 1 by
//               default); astronomically conservative, budget-guarded.
//   aggressive: pilot-batch empirical covariance of the label powers driven
//               through the delta-method gradient of the deconvolution map,
//               then Chebyshev at the target (tau, delta). Not from the
//               paper; flagged in the estimate's mode string.
//   fixed:      caller-supplied count.
enum class SampleSizeMode { paper, aggressive, fixed };

struct EstimatorConfig {
  double tau = 0.1;
  double delta = 0.1;
  SampleSizeMode mode = SampleSizeMode::aggressive;
  std::size_t fixed_samples = 0;
  std::size_t sample_budget = 200'000'000;
  std::size_t pilot_samples = 8192;
  double safety_factor = 2.0;
  double paper_constant = 1.0;  // the unspecified O(1) constants, default 1
};

// Default cap for the formula value of sample_size_for. The drawable-sample
// budget in EstimatorConfig is separate and far smaller.
Int default_count_budget();

// The explicit Appendix-level sample-count cascade: inner Chebyshev count for
// noisy moments, the noisy-cumulant accuracy cascade, and the clean-moment
// accuracy cascade, composed (unspecified absolute constants default to 1).
// Returns the composed count as a big integer; throws SampleBudgetError with
// log2 of the requirement when it exceeds `budget`.
Int sample_size_for(unsigned ell, double tau, double delta, double K,
                    unsigned d, double lambda, const NoiseSpec& noise,
                    double paper_constant = 1.0,
                    const Int& budget = default_count_budget());

// log2 of the cascade count (always finite; never throws).
long double log2_sample_size_for(unsigned ell, double tau, double delta,
                                 double K, unsigned d, double lambda,
                                 const NoiseSpec& noise,
                                 double paper_constant = 1.0);

// Deconvolution map: noisy raw moments 1..L -> clean raw moments 1..L
// (noisy cumulants, subtract noise cumulants, back to moments).
std::vector<double> clean_moments_from_noisy(const std::vector<double>& noisy,
                                             const NoiseSpec& noise);

// Estimate-Moments-With-Noise: draws labeled samples of p under d with the
// given noise, estimates noisy raw moments 1..ell empirically, converts to
// cumulants, subtracts the known noise cumulants, converts back, and reports
// the order-ell clean moment with all intermediates.
MomentEstimate estimate_clean_moments(const MultilinearPolynomial& p,
                                      const FiniteDistribution& d,
                                      const NoiseSpec& noise, unsigned ell,
                                      const EstimatorConfig& cfg, double K,
                                      uint64_t seed);

}  // namespace sparsetest
