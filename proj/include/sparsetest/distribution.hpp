#pragma once

#include <string>
#include <vector>

#include "sparsetest/rational.hpp"

namespace sparsetest {

// A finitely supported real random variable with exact rational atoms,
// normalized to mean 0 and variance 1. Immutable after construction.
class FiniteDistribution {
 public:
  struct Atom {
    Rat value;
    Rat prob;
  };

  // Validates: probabilities in (0,1] summing to 1 exactly, distinct values,
  // mean 0 and variance 1 exactly. Throws std::invalid_argument otherwise.
  static FiniteDistribution validate(std::vector<Atom> atoms);

  static FiniteDistribution rademacher();

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }

  // lambda = min atom probability, M = max |value| (M >= 1 is asserted).
  const Rat& min_prob() const { return lambda_; }
  const Rat& max_abs_value() const { return max_abs_; }

  // Exact raw moment E[X^j].
  Rat raw_moment(unsigned j) const;

  // Inverse-CDF sample from the atom list (atoms sorted by value).
  double sample(double u01) const;

  // Text format: one "value prob" line per atom, exact rationals, sorted by
  // value. Round-trips bit-exactly.
  std::string serialize() const;
  static FiniteDistribution parse(const std::string& text);

  bool operator==(const FiniteDistribution& o) const;

 private:
  FiniteDistribution() = default;
  std::vector<Atom> atoms_;  // sorted by value
  Rat lambda_;
  Rat max_abs_;
  std::vector<double> cdf_;     // cumulative probabilities as doubles
  std::vector<double> values_;  // atom values as doubles
};

}  // namespace sparsetest
