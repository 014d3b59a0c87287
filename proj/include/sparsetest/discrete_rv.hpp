#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsetest/distribution.hpp"
#include "sparsetest/polynomial.hpp"
#include "sparsetest/rational.hpp"

namespace sparsetest {

// An exact finitely supported real random variable: sorted distinct rational
// values with positive rational probabilities summing to 1.
class DiscreteRV {
 public:
  struct Atom {
    Rat value;
    Rat prob;
  };

  // Merges duplicate values and drops zero-probability atoms; validates that
  // probabilities are nonnegative and sum to 1.
  static DiscreteRV from_atoms(std::vector<Atom> atoms);
  static DiscreteRV point_mass(const Rat& v);
  static DiscreteRV from_distribution(const FiniteDistribution& d);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }
  Rat max_abs_value() const;

  DiscreteRV scaled(const Rat& c) const;
  DiscreteRV shifted(const Rat& c) const;

  // Exact E[Y^ell] and E[|Y|^ell].
  Rat raw_moment(unsigned ell) const;
  Rat abs_moment(unsigned ell) const;

  // Sorted "value prob" lines, exact rationals; bit-exact round trip.
  std::string serialize() const;
  static DiscreteRV parse(const std::string& text);

  bool operator==(const DiscreteRV& o) const { return atoms_ == o.atoms_; }

 private:
  std::vector<Atom> atoms_;
};

inline bool operator==(const DiscreteRV::Atom& a, const DiscreteRV::Atom& b) {
  return a.value == b.value && a.prob == b.prob;
}

struct EnumerationBudget {
  // Cap on |support|^k enumeration points for output_distribution.
  Int max_points = Int(20000000);
};

// Exact output distribution of p(X^{\otimes k}) where k is the number of
// *active* variables of p (the ambient dimension never matters). Throws
// BudgetExceeded naming the required point count when |support|^k is over
// budget. Requires an exact-authoritative polynomial.
DiscreteRV output_distribution(const MultilinearPolynomial& p,
                               const FiniteDistribution& d,
                               const EnumerationBudget& budget = {});

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Exact 1-D Wasserstein distance through the quantile coupling.
Rat wasserstein1(const DiscreteRV& a, const DiscreteRV& b);
double wasserstein1_d(const DiscreteRV& a, const DiscreteRV& b);

// Squared Euclidean distance of the first-k raw-moment vectors (exact).
Rat moment_distance_squared(const DiscreteRV& a, const DiscreteRV& b,
                            unsigned k);
double moment_distance(const DiscreteRV& a, const DiscreteRV& b, unsigned k);

// True iff the first 2k-1 raw moments match exactly, k = max support size;
// by the Vandermonde argument this equals distribution identity, and the
// result is cross-checked against direct atom-list equality.
bool identical_by_moments(const DiscreteRV& a, const DiscreteRV& b);

// Distribution of A + B for independent A, B (exact convolution).
DiscreteRV sum_independent(const DiscreteRV& a, const DiscreteRV& b);

// Exact Pr[|Y| >= t] given t^2 (avoids irrational thresholds).
Rat tail_prob_abs_geq_sqrt(const DiscreteRV& y, const Rat& t_squared);

// Exact Pr[Y >= t].
Rat tail_prob_geq(const DiscreteRV& y, const Rat& t);

}  // namespace sparsetest
