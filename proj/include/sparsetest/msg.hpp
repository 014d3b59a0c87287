#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/distribution.hpp"
#include "sparsetest/polynomial.hpp"

namespace sparsetest {

// 2^{2 d^2 (ell^{ds} + 3)}: the sparsity ceiling that makes the max-gap
// search finite. Exact big integer.
Int phi_bound(unsigned d, std::size_t s, std::size_t ell);

// Upper bound ell^{d*r} on distinct output values of an r-sparse polynomial,
// and the lower bound log2(T)/(2 d^2) - 3 that a T-sparse one must attain.
struct OutputCountBounds {
  Int sparse_upper;
  double dense_lower;
};
OutputCountBounds output_count_bounds(unsigned d, std::size_t r,
                                      std::size_t ell, const Int& T);

// An ordered list of r distinct monomials of degree <= d over x_1..x_{dr}.
struct SparsityPattern {
  std::vector<Monomial> monomials;
  std::vector<uint32_t> variables() const;
};

// All r-subsets of the degree-<= d monomials over dr variables. With
// `dedup_renamings` (the default) only first-use canonical representatives
// survive, one per variable-renaming key. Throws BudgetExceeded with the
// exact raw count when it exceeds `cap`.
std::vector<SparsityPattern> enumerate_sparsity_patterns(
    unsigned d, std::size_t r, std::size_t cap = 200000,
    bool dedup_renamings = true);

Int raw_sparsity_pattern_count(unsigned d, std::size_t r);

// Multilinear expansion of a complete depth-d decision tree on 2^d - 1
// fresh variables (heap order; branch +1 first). With the default
// alternating leaves the result has sparsity exactly 4^{d-1} and is a
// uniform +-1 output under a symmetric two-point distribution.
MultilinearPolynomial decision_tree_polynomial(unsigned d);
MultilinearPolynomial decision_tree_polynomial(
    unsigned d, const std::vector<int>& leaves);

// Sum of the given polynomials over pairwise-disjoint variable blocks.
MultilinearPolynomial disjoint_sum(
    const std::vector<MultilinearPolynomial>& parts);

struct MsgWitness {
  MultilinearPolynomial p;  // sparsity s
  MultilinearPolynomial q;  // sparsity t
  std::vector<Rat> matched_moments;  // the certifying 2k-1 exact moments
};

struct GridSpec {
  unsigned denominator = 4;
  unsigned max_numerator = 8;
  std::size_t pattern_cap = 50000;
  std::size_t candidate_cap = 4000000;
};

struct WitnessSearchResult {
  std::optional<MsgWitness> witness;
  bool exhaustive = false;  // the declared finite family was fully searched
  std::string note;
};

// Searches for p (sparsity s) and q (sparsity t) with exactly identical
// output distributions under D: first a structured shortlist (trivial p = q
// at t = s; decision trees and variable-disjoint sums of them), then exact
// moment-matching over the quantized coefficient grid. Any returned witness
// is certified by identical_by_moments; a miss is only grid-exhaustive.
WitnessSearchResult find_msg_witness(const FiniteDistribution& D, unsigned d,
                                     std::size_t s, std::size_t t,
                                     const GridSpec& grid = {});

struct MsgReport {
  std::size_t best_t_with_witness = 0;
  std::optional<MsgWitness> witness;
  Int phi;
  std::size_t searched_from = 0;  // the practical cap actually used
  bool certified = false;
  std::vector<std::size_t> truncated_at;  // t values with non-exhaustive misses
};

// Descends t from min(phi, t_cap) exactly as the max-gap loop prescribes,
// returning the largest t at which a certified witness was found. `certified`
// stays false unless every rejected t was searched exhaustively, which the
// grid backend cannot promise over the reals.
MsgReport compute_msg(const FiniteDistribution& D, unsigned d, std::size_t s,
                      std::size_t t_cap, const GridSpec& grid = {});

}  // namespace sparsetest
