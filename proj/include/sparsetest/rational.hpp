#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace sparsetest {

using Rat = mpq_class;
using Int = mpz_class;

// Parses "a/b", "-3", "0.25", "1e-3" style numerals into an exact rational.
// Decimal and scientific forms are exact (0.25 -> 1/4), never rounded.
std::optional<Rat> try_parse_rational(const std::string& text);

inline Rat parse_rational(const std::string& text) {
  auto r = try_parse_rational(text);
  if (!r) throw std::invalid_argument("not a rational numeral: '" + text + "'");
  return *r;
}

// Canonical "a/b" (or plain "a" when b == 1); round-trips bit-exactly.
std::string to_string(const Rat& q);

// mpq_class(a, b) does not reduce to canonical form, but GMP comparison
// primitives assume it; route all two-argument constructions through here.
inline Rat make_rat(long num, long den) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline Rat canonical(Rat q) {
  q.canonicalize();
  return q;
}

inline double to_double(const Rat& q) { return q.get_d(); }

// Exact conversion; every finite double is a dyadic rational.
Rat rat_from_double(double x);

inline Rat rat_pow(const Rat& base, unsigned long e) {
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den().get_mpz_t(), e);
  r.canonicalize();
  return r;
}

inline Int int_pow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Int binomial(unsigned long n, unsigned long k) {
  Int r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline Int factorial(unsigned long n) {
  Int r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

// Number of monomials of degree <= d over n variables (constant included).
Int monomial_count(unsigned n, unsigned d);

}  // namespace sparsetest
