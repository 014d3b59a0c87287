#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sparsetest/coarse.hpp"
#include "sparsetest/nets.hpp"
#include "sparsetest/oracle.hpp"

namespace sparsetest {

struct SharpConfig {
  std::size_t s = 1;
  std::size_t T = 1;
  unsigned d = 1;
  double eps = 0.5;
  double K = 1.0;
  // Calibration stand-ins for the three nonconstructive constants: the tail
  // theorem's C, and the moment-to-Wasserstein C and C'. Every run's report
  // records them.
  double C_dfko = 1.0;
  double C_kv = 1.0;
  double Cp_kv = 1.0;
  double delta = 0.1;
  std::optional<std::size_t> upsilon_override;
  // Reusing a previously computed phase-1 gap (recorded in some earlier
  // report) skips the search; 0 recomputes.
  double gap_c_override = 0.0;
  uint64_t moment_order_cap = 64;  // cap on the phase-4 order k
  GapParams gap;
  EstimatorConfig estimator;
  CoarseConfig coarse_overrides() const;
};

// The four phase-2 deliverables: the output ceiling L = M^d sqrt(d Upsilon),
// the moment order k = ceil(2 L C / c), the refined closeness eps' =
// c / (16 C' 3^k xi), and the net granularity zeta_mom = c / (4 C' 3^k)
// (so zeta_mom = 4 eps' xi identically). eps' and zeta_mom are carried in
// log2 form; they routinely fall below double range.
struct DerivedParameters {
  double L = 0;
  uint64_t k = 0;
  long double log2_eps_prime = 0;
  long double log2_zeta_mom = 0;
  double eps_prime = 0;  // clamped to double, may be 0
  double zeta_mom = 0;
};

DerivedParameters derived_parameters(double c, unsigned d, std::size_t s,
                                     std::size_t upsilon, double C_kv,
                                     double Cp_kv,
                                     const FiniteDistribution& D,
                                     uint64_t k_cap = 64);

// Label normalization for the 1/K <= |p| <= K promise: estimates
// |p|_coeff^2 = m_2 to within tau0, divides labels (and the noise spec) by
// the root, and returns the rescaled sampling oracle. Throws
// std::domain_error if the estimate leaves [1/(2K^2), 2K^2].
struct NormalizedOracle {
  SamplingOracle oracle;
  double p_coeff_estimate = 0;
};
NormalizedOracle normalize_labels(const SamplingOracle& oracle, double K,
                                  double tau0, const FiniteDistribution& D);

struct SharpReport {
  Verdict verdict = Verdict::inconclusive;
  std::string decided_in;  // "phase0".."phase4"
  bool delegated = false;
  std::size_t upsilon = 0;
  std::optional<CoarseReport> phase0;
  double gap_c = 0;
  std::string gap_backend;
  DerivedParameters params;
  std::optional<CoarseReport> phase2;
  std::size_t net_size = 0;
  double min_moment_distance = 0;  // phase 4, exact or estimated
  std::size_t samples_used = 0;
  double C_dfko = 0, C_kv = 0, Cp_kv = 0;  // echoed for auditability
  std::string note;
};

// Test-Sparsity: phase 0 delegates to the coarse tester when T >= Upsilon;
// phase 1 halves the estimated Wasserstein gap; phase 2 re-runs the coarse
// tester at eps'; phase 3 builds the sparse-side moment net at zeta_mom/10;
// phase 4 accepts iff some net member sits within zeta_mom/2 of the
// estimated (or exact) first-k moment vector.
SharpReport test_sparsity(const MomentOracle& oracle, const SharpConfig& cfg,
                          const FiniteDistribution& D);

}  // namespace sparsetest
