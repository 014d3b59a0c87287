#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sparsetest/rational.hpp"

namespace sparsetest {

// Strictly increasing list of variable indices; empty = constant monomial.
// Variables are global indices (1-based in the text format, 0-based here);
// polynomials do not carry an ambient dimension.
using Monomial = std::vector<uint32_t>;

Monomial make_monomial(std::initializer_list<uint32_t> vars);

// Sparse multilinear polynomial: monomial -> coefficient. Coefficients are
// carried in exact rational and float form; `exact_authoritative` flags which
// one defines the polynomial (rational is the default everywhere except the
// sampling path for inputs that only exist as floats).
class MultilinearPolynomial {
 public:
  MultilinearPolynomial() = default;

  static MultilinearPolynomial zero() { return {}; }
  static MultilinearPolynomial constant(const Rat& c);
  static MultilinearPolynomial monomial_term(const Rat& c, Monomial m);
  static MultilinearPolynomial from_terms(
      std::vector<std::pair<Monomial, Rat>> terms);

  // Float-authoritative construction; exact mirror holds dyadic conversions.
  static MultilinearPolynomial from_float_terms(
      std::vector<std::pair<Monomial, double>> terms);

  bool exact_authoritative() const { return exact_authoritative_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t sparsity() const { return terms_.size(); }
  unsigned degree() const;

  const std::map<Monomial, Rat>& terms() const { return terms_; }
  Rat coefficient(const Monomial& m) const;

  // Variables appearing in at least one monomial, sorted.
  std::vector<uint32_t> active_variables() const;

  // Renames variable i to perm[i]; perm must be injective on active vars.
  MultilinearPolynomial rename_variables(
      const std::vector<uint32_t>& perm) const;

  MultilinearPolynomial& add_term(const Monomial& m, const Rat& c);
  MultilinearPolynomial operator+(const MultilinearPolynomial& o) const;
  MultilinearPolynomial operator-(const MultilinearPolynomial& o) const;
  MultilinearPolynomial operator*(const Rat& c) const;

  double evaluate(const std::vector<double>& x) const;  // x indexed by variable
  Rat evaluate_exact(const std::map<uint32_t, Rat>& assignment) const;

  // Text format: one term per line, "coeff: i1 i2 ... ik" with 1-based
  // variable indices; empty index list denotes the constant term. Rational
  // coefficients round-trip bit-exactly.
  std::string serialize() const;
  static MultilinearPolynomial parse(const std::string& text);

  bool operator==(const MultilinearPolynomial& o) const {
    return terms_ == o.terms_;
  }

 private:
  std::map<Monomial, Rat> terms_;  // nonzero coefficients only
  bool exact_authoritative_ = true;
};

// (sum_S p(S)^2)^(1/2); the squared value is exact.
Rat coeff_norm_squared(const MultilinearPolynomial& p);
double coeff_norm(const MultilinearPolynomial& p);

// Exact squared distance to s-sparsity: 1 - (sum of s largest squared
// coefficients)/|p|^2. Ties among equal magnitudes break lexicographically on
// monomials (the value is tie-independent; only the witness approximant
// depends on it). Throws on the zero polynomial.
Rat distance_to_sparsity_squared(const MultilinearPolynomial& p,
                                 std::size_t s);
double distance_to_sparsity(const MultilinearPolynomial& p, std::size_t s);

// The s-sparse approximant keeping the s largest-magnitude coefficients.
MultilinearPolynomial sparsity_approximant(const MultilinearPolynomial& p,
                                           std::size_t s);

// Inf_i[p] = sum over monomials containing i of the squared coefficient.
Rat influence(const MultilinearPolynomial& p, uint32_t var);

}  // namespace sparsetest
