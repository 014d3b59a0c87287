#pragma once

#include <cstdint>
#include <variant>

#include "sparsetest/distribution.hpp"
#include "sparsetest/momest.hpp"
#include "sparsetest/noise.hpp"
#include "sparsetest/polynomial.hpp"

namespace sparsetest {

// Exact-moment oracle: the tester reads exact moments of p(X^{\otimes k})
// straight from the enumeration engine. Deterministic; separates the
// geometry of the testers from the statistics of the estimators.
struct ExactMomentOracle {
  MultilinearPolynomial p;
};

// Sampling oracle: labeled examples (x, p(x) + eta) with a pinned seed.
struct SamplingOracle {
  MultilinearPolynomial p;
  NoiseSpec noise;
  uint64_t seed = 0;
  EstimatorConfig estimator;
};

using MomentOracle = std::variant<ExactMomentOracle, SamplingOracle>;

inline const MultilinearPolynomial& oracle_polynomial(const MomentOracle& o) {
  if (auto* e = std::get_if<ExactMomentOracle>(&o)) return e->p;
  return std::get<SamplingOracle>(o).p;
}

inline bool oracle_is_exact(const MomentOracle& o) {
  return std::holds_alternative<ExactMomentOracle>(o);
}

}  // namespace sparsetest
