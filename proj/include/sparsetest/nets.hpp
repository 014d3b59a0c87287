#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/distribution.hpp"
#include "sparsetest/polynomial.hpp"

namespace sparsetest {

// Explicit constant xi_{k,d,X} with Mom_k(q1(X..), q2(X..)) <= xi * |q1-q2|
// for |q1| = 1, |q1-q2| <= 1: first-moment term 1, second-moment term 3, and
// for orders 3..k the hypercontractive chain
//   B_l = l * (max_{a+b=2(l-1)} sqrt(U(a) U(b)))^{1/2},
//   U(0) = 1, U(1) = 4, U(c) = (2c-1)^{dc} lambda^{d-dc} 4^c,
// combined as xi = sqrt(1 + 9 + sum B_l^2). Grows fast; use the log form.
double xi_constant(unsigned k, unsigned d, const FiniteDistribution& D);
long double log2_xi_constant(unsigned k, unsigned d,
                             const FiniteDistribution& D);

enum class PolySpace { sparse, far };  // P versus P(eps)

struct PolyNet {
  PolySpace space = PolySpace::sparse;
  double zeta_coeff = 0;
  std::vector<MultilinearPolynomial> members;  // exact norm 1, in-space
};

struct RvNetMember {
  MultilinearPolynomial poly;
  DiscreteRV rv;
  std::vector<Rat> moments;  // exact raw moments 1..k
};

struct RvNet {
  PolySpace space = PolySpace::sparse;
  double zeta_mom = 0;
  unsigned order = 0;
  std::vector<RvNetMember> members;
};

struct NetParams {
  std::size_t upsilon = 0;     // sparsity cap of P(eps); must be set explicitly
  std::size_t member_budget = 1000000;
  bool canonical_supports = false;  // dedup supports up to variable renaming
  bool build_far_side = true;       // the sharp tester's net phase needs only P
  EnumerationBudget enumeration;
};

// Coefficient-distance nets. Members are exact rational points of the unit
// sphere restricted to each sparsity support (size <= s for P; size T+1..
// upsilon with the exact eps-farness filter for P(eps)). Every member has
// coeff_norm exactly 1; covering within zeta_coeff is a tested property.
// Throws BudgetExceeded with the projected cardinality when over budget.
std::pair<PolyNet, PolyNet> construct_poly_nets(const FiniteDistribution& D,
                                                unsigned d, std::size_t s,
                                                std::size_t T, double eps,
                                                double zeta_coeff,
                                                const NetParams& params);

// Moment-distance nets: the poly nets pushed through the exact output
// engine, with zeta_coeff = zeta_mom / xi_{k,d,X} and per-member exact
// moment vectors of length k. Members with identical output laws collapse.
std::pair<RvNet, RvNet> construct_rv_nets(const FiniteDistribution& D,
                                          unsigned d, std::size_t s,
                                          std::size_t T, double eps,
                                          double zeta_mom, unsigned k,
                                          const NetParams& params);

enum class GapBackend {
  grid,     // the literal doubling loop over sphere-grid nets
  adaptive  // branch-and-bound refinement with Lipschitz-1 pruning
};

struct GapParams {
  NetParams nets;
  GapBackend backend = GapBackend::adaptive;
  unsigned max_iterations = 24;
  // exit when exit_factor * zeta <= c; 4 matches the plain net argument,
  // the adaptive backend uses 8 to absorb its repair step
  double exit_factor_grid = 4;
  double exit_factor_adaptive = 8;
};

struct GapResult {
  double c = 0;               // certified: W1 of an exact in-space pair
  double zeta_final = 0;
  unsigned iterations = 0;
  std::string backend;
  MultilinearPolynomial witness_sparse;
  MultilinearPolynomial witness_far;
};

struct GapIterationCap : std::runtime_error {
  explicit GapIterationCap(const std::string& what)
      : std::runtime_error(what) {}
};

// Estimates c_eps = inf W1(RV(P), RV(P(eps))) by the doubling loop over
// zeta = 2^-t, returning c with c_eps <= c <= 2 c_eps. Hitting the iteration
// cap signals a near-zero gap (T below the max sparsity gap) and throws
// GapIterationCap.
GapResult estimate_wasserstein_gap(const FiniteDistribution& D, unsigned d,
                                   std::size_t s, std::size_t T, double eps,
                                   const GapParams& params);

}  // namespace sparsetest
