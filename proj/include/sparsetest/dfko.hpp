#pragma once

#include <vector>

#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/distribution.hpp"
#include "sparsetest/polynomial.hpp"
#include "sparsetest/rational.hpp"

namespace sparsetest {

// Legal lower end of the noise-rate interval: lambda / (4 (1 - lambda)).
Rat rho_min(const FiniteDistribution& d);

struct NoiseOperatorSpec {
  Rat rho;
  // Throws if rho is outside [-rho_min(d), 1] or any single-coordinate
  // transition probability of N_rho would be negative.
  static NoiseOperatorSpec validate(const Rat& rho,
                                    const FiniteDistribution& d);
};

// T_rho f via the Fourier action: each degree-|S| coefficient scales by
// rho^{|S|}.
MultilinearPolynomial noise_operator(const MultilinearPolynomial& f,
                                     const NoiseOperatorSpec& spec);

// T_rho f(x) at one support point via the defining average over N_rho(x);
// exact, used to cross-check the Fourier route pointwise.
Rat noise_operator_pointwise(const MultilinearPolynomial& f,
                             const NoiseOperatorSpec& spec,
                             const FiniteDistribution& d,
                             const std::vector<std::size_t>& atom_index);

// Checks the Fourier and definitional routes agree at every point of
// support^k (k = active variables of f). Exact.
bool noise_operator_routes_agree(const MultilinearPolynomial& f,
                                 const NoiseOperatorSpec& spec,
                                 const FiniteDistribution& d);

// Exact E[|f|^q] versus the hypercontractive ceiling
// (sqrt(q-1) lambda^{1/q-1/2})^{dq} E[f^2]^{q/2}, for even q > 2. Both sides
// squared are rational, so `holds` is decided exactly.
struct HypercontractivityCheck {
  Rat lhs;          // E[|f|^q]
  Rat rhs_squared;  // ceiling squared (exact)
  double rhs;
  bool holds;
};
HypercontractivityCheck hypercontractive_check(const MultilinearPolynomial& f,
                                               unsigned q,
                                               const FiniteDistribution& d);

// The d+1 extrema cos(j pi / d), j = 0..d, of the Chebyshev polynomial T_d.
std::vector<double> chebyshev_extrema(unsigned d);

// Checks the tail theorem's hypotheses and conclusion on an explicit f:
// cond1: sum_{S: S\J nonempty} f(S)^2 >= delta
// cond2: t >= sqrt(delta) and Inf_i[f] <= delta^2 t^-2 C^-d outside J
// conclusion: Pr[|f| >= t] >= exp(-C t^2 d^2 log~(d) / delta)
// (log~(d) substitutes log 2 at d = 1). Tail is exact; the bound is a double.
struct TailTheoremReport {
  bool cond1 = false;
  bool cond2 = false;
  Rat exact_tail;
  double bound = 0;
  bool conclusion_holds = false;
};
TailTheoremReport verify_tail_theorem(const MultilinearPolynomial& f,
                                      const std::vector<uint32_t>& J,
                                      double delta, double t, double C,
                                      const FiniteDistribution& d);

// Far-from-sparse tail check: verifies p is eps-far from T-sparse, computes
// the exact tail Pr[|p| >= 2 K M^d sqrt(s)], compares it with
// q = exp(-4 C K^3 M^{2d} s d^2 log~(d) / eps), and audits the high-influence
// set J (kappa = e K^2 / T^{1/d}): |J| <= d K^2 / kappa plus the two derived
// conditions with delta = eps/K.
struct FarSparseTailReport {
  bool far_enough = false;
  Rat exact_tail;
  double q_bound = 0;
  double log_q_bound = 0;  // natural log, robust to underflow
  bool tail_meets_bound = false;
  std::vector<uint32_t> J;
  bool j_size_ok = false;
  bool cond1 = false;
  bool cond2 = false;
};
FarSparseTailReport far_sparse_tail_check(const MultilinearPolynomial& p,
                                          std::size_t s, std::size_t T,
                                          double eps, double K, double C,
                                          const FiniteDistribution& d);

// Smallest C such that every instance's exact tail still clears
// exp(-4 C K^3 M^{2d} s d^2 log~(d)/eps); the feasible set is upward closed,
// so this boundary is the informative calibration output.
double calibrate_dfko_constant(
    const std::vector<MultilinearPolynomial>& far_instances, std::size_t s,
    double eps, double K, const FiniteDistribution& d);

}  // namespace sparsetest
