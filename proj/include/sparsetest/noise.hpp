#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsetest/discrete_rv.hpp"
#include "sparsetest/rational.hpp"

namespace sparsetest {

// Known label-noise distribution. The three validated kinds all have
// closed-form moments and cumulants of every order; `table` accepts a
// user-supplied moment sequence unvalidated.
class NoiseSpec {
 public:
  enum class Kind { none, finite, gaussian, table };

  static NoiseSpec none();
  // Finitely supported noise; atoms need not be mean-zero.
  static NoiseSpec finite(DiscreteRV atoms);
  static NoiseSpec gaussian(double mean, double stddev);
  // Raw moments m_1..m_L supplied by the caller, taken on faith.
  static NoiseSpec moment_table(std::vector<double> raw_moments);

  Kind kind() const { return kind_; }
  bool can_sample() const { return kind_ != Kind::table; }

  // Raw moment E[eta^j]; j = 0 gives 1.
  double raw_moment(unsigned j) const;
  // max{m_j : a <= j <= b} per the paper's bracketed-moment notation.
  double max_raw_moment(unsigned a, unsigned b) const;
  double cumulant(unsigned j) const;
  std::vector<double> cumulants(unsigned order) const;

  // Noise after dividing labels by `factor` (eta' = eta/factor).
  NoiseSpec scaled(double factor) const;

  // Draw one noise value from a uniform pair (for finite, u2 is unused).
  double sample(double u1, double u2) const;

  const DiscreteRV& finite_atoms() const;
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }

  std::string describe() const;

  // default-constructed spec is noiseless
  NoiseSpec() = default;

 private:
  Kind kind_ = Kind::none;
  double mean_ = 0, stddev_ = 0;                  // gaussian
  DiscreteRV atoms_;                              // finite
  std::vector<double> finite_values_, finite_cdf_;
  std::vector<double> table_moments_;             // table, m_1..m_L
  mutable std::vector<double> table_cumulants_;
};

}  // namespace sparsetest
