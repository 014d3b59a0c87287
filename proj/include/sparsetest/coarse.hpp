#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/oracle.hpp"

namespace sparsetest {

// T ceiling for the coarse tester: ceil(((4 e K^6 M^{2d} C^d s)/eps^2)^d).
// Throws OverflowError (with log2 of the value) past 2^62.
struct OverflowError : std::runtime_error {
  OverflowError(std::string what, double log2_value)
      : std::runtime_error(std::move(what)), log2_value(log2_value) {}
  double log2_value;
};
uint64_t upsilon(double K, std::size_t s, unsigned d, double eps, double C,
                 double M);
double log2_upsilon(double K, std::size_t s, unsigned d, double eps, double C,
                    double M);

// K M^d sqrt(s): the sparse-output ceiling (holds with probability 1).
double sparse_value_bound(std::size_t s, double K, double M, unsigned d);

// q = exp(-4 C K^3 M^{2d} s d^2 log~(d) / eps); log~(1) = log 2 (the d = 1
// case of the exponent's log d is undefined; the substitution is recorded).
double tail_prob_bound(double K, double M, std::size_t s, unsigned d,
                       double eps, double C);
double log_tail_prob_bound(double K, double M, std::size_t s, unsigned d,
                           double eps, double C);

struct CoarseConfig {
  std::size_t s = 1;
  unsigned d = 1;
  double eps = 0.5;
  double K = 1.0;
  double C_dfko = 1.0;  // calibration stand-in for the tail-theorem constant
  std::optional<uint64_t> manual_order;  // even >= 2 when set
  double delta = 0.1;
  // Sampling explodes in the moment order; past this cap the sampled tester
  // refuses and reports the required order. The exact engine decides the
  // comparison at any order, so its cap is effectively unbounded.
  uint64_t sampled_order_cap = 12;
  long double exact_order_cap = 1e300L;
  EnumerationBudget enumeration;
};

enum class Verdict { sparse, far, inconclusive };

struct CoarseReport {
  Verdict verdict = Verdict::inconclusive;
  long double required_order = 0;  // the ell the rule asks for
  uint64_t order = 0;              // 0 when not representable
  double q = 0;
  double log_q = 0;
  double threshold_log2 = 0;   // log2 of (3/2)(K M^d sqrt s)^ell
  double estimate = 0;         // clean moment estimate (exact or sampled)
  double estimate_log2 = 0;    // log2 |estimate| when it overflows a double
  bool exact_mode = false;
  std::size_t samples_used = 0;
  std::string note;
};

std::string to_string(Verdict v);

// Decides m_ell(|rv|) <= factor * c^ell exactly, where c2 = c^2 is rational
// and ell is even. Works at any order: exact rationals for small ell,
// 512-bit floats up to 2^62, and the atom-ratio asymptotic rule beyond.
bool moment_below_threshold(const DiscreteRV& rv, const Rat& c2,
                            const Rat& factor, long double ell);

// The coarse tester: pick the smallest even ell > log2(1/(2q)), estimate the
// clean moment of that order, output "sparse" iff it is at most
// (3/2)(K M^d sqrt s)^ell. (The threshold uses K where one display in the
// source analysis writes C; the derivation's constant is K.)
CoarseReport coarse_test(const MomentOracle& oracle, const CoarseConfig& cfg,
                         const FiniteDistribution& D);

}  // namespace sparsetest
