#pragma once

#include <cstddef>
#include <type_traits>
#include <stdexcept>
#include <vector>

#include "sparsetest/rational.hpp"

namespace sparsetest {

template <class T>
T scalar_from_int(const Int& z) {
  if constexpr (std::is_same_v<T, Rat>) {
    return Rat(z);
  } else {
    return static_cast<T>(z.get_d());
  }
}

// Partial (incomplete) Bell polynomials B_{n,k}(x_1..x_{n-k+1}) via the
// triangular recursion B_{n,k} = sum_i C(n-1,i-1) x_i B_{n-i,k-1}.
// `xs[i]` holds x_{i+1}. Works over double and exact rationals.
template <class T>
T bell_partial(unsigned n, unsigned k, const std::vector<T>& xs) {
  if (k > n) return T(0);
  if (n == 0) return T(1);  // k == 0 here
  if (k == 0) return T(0);
  // table[j][i] = B_{i,j}, built row by row in j.
  std::vector<std::vector<T>> table(k + 1, std::vector<T>(n + 1, T(0)));
  table[0][0] = T(1);
  for (unsigned j = 1; j <= k; ++j) {
    for (unsigned i = j; i <= n; ++i) {
      T acc(0);
      for (unsigned t = 1; i >= t && t <= i - j + 1; ++t) {
        if (t - 1 >= xs.size()) break;
        T c = scalar_from_int<T>(binomial(i - 1, t - 1));
        acc += c * xs[t - 1] * table[j - 1][i - t];
      }
      table[j][i] = acc;
    }
  }
  return table[k][n];
}

// kappa_l = sum_k (-1)^{k-1} (k-1)! B_{l,k}(m_1..m_{l-k+1}); moments[i] is
// m_{i+1}, result[i] is kappa_{i+1}.
template <class T>
std::vector<T> moments_to_cumulants(const std::vector<T>& moments) {
  if (moments.empty()) throw std::invalid_argument("need at least one moment");
  const unsigned L = static_cast<unsigned>(moments.size());
  std::vector<T> kappa(L);
  for (unsigned l = 1; l <= L; ++l) {
    T acc(0);
    T sign(1);
    for (unsigned k = 1; k <= l; ++k) {
      T fac = scalar_from_int<T>(factorial(k - 1));
      acc += sign * fac * bell_partial<T>(l, k, moments);
      sign = -sign;
    }
    kappa[l - 1] = acc;
  }
  return kappa;
}

// m_l = sum_k B_{l,k}(kappa_1..kappa_{l-k+1}).
template <class T>
std::vector<T> cumulants_to_moments(const std::vector<T>& kappa) {
  if (kappa.empty()) throw std::invalid_argument("need at least one cumulant");
  const unsigned L = static_cast<unsigned>(kappa.size());
  std::vector<T> moments(L);
  for (unsigned l = 1; l <= L; ++l) {
    T acc(0);
    for (unsigned k = 1; k <= l; ++k) acc += bell_partial<T>(l, k, kappa);
    moments[l - 1] = acc;
  }
  return moments;
}

// Direct recursion kappa_l = m_l - sum_{j<l} C(l-1,j-1) kappa_j m_{l-j}.
// Algebraically identical to the Bell route; kept as an independent path for
// the cross-check required when m_1 = 0.
template <class T>
std::vector<T> moments_to_cumulants_recursion(const std::vector<T>& moments) {
  const unsigned L = static_cast<unsigned>(moments.size());
  std::vector<T> kappa(L);
  for (unsigned l = 1; l <= L; ++l) {
    T acc = moments[l - 1];
    for (unsigned j = 1; j < l; ++j) {
      T c = scalar_from_int<T>(binomial(l - 1, j - 1));
      acc -= c * kappa[j - 1] * moments[l - j - 1];
    }
    kappa[l - 1] = acc;
  }
  return kappa;
}

template <class T>
std::vector<T> cumulants_to_moments_recursion(const std::vector<T>& kappa) {
  const unsigned L = static_cast<unsigned>(kappa.size());
  std::vector<T> moments(L);
  for (unsigned l = 1; l <= L; ++l) {
    T acc(0);
    for (unsigned j = 1; j <= l; ++j) {
      T c = scalar_from_int<T>(binomial(l - 1, j - 1));
      T tail = (j == l) ? T(1) : moments[l - j - 1];
      acc += c * kappa[j - 1] * tail;
    }
    moments[l - 1] = acc;
  }
  return moments;
}

}  // namespace sparsetest
