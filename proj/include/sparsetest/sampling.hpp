#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sparsetest/distribution.hpp"
#include "sparsetest/noise.hpp"
#include "sparsetest/polynomial.hpp"

namespace sparsetest {

// splitmix64; used to derive independent per-trial / per-block seeds.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

// m labeled pairs (x restricted to p's active variables, y = p(x) + eta).
// Fully deterministic given the seed.
struct LabeledSampleBatch {
  std::size_t m = 0;
  std::vector<uint32_t> variables;  // active variables, sorted
  std::vector<double> xs;           // row-major m x variables.size()
  std::vector<double> ys;
  uint64_t seed = 0;
  std::string distribution_id;
  std::string noise_id;

  const double* row(std::size_t i) const { return &xs[i * variables.size()]; }

  // CSV with header "x_1,...,x_k,y"; columns follow `variables` order.
  std::string to_csv() const;
};

LabeledSampleBatch draw_labeled_samples(const MultilinearPolynomial& p,
                                        const FiniteDistribution& d,
                                        const NoiseSpec& noise, std::size_t m,
                                        uint64_t seed);

// Streams the m labels without materializing the batch.
void stream_labels(const MultilinearPolynomial& p, const FiniteDistribution& d,
                   const NoiseSpec& noise, std::size_t m, uint64_t seed,
                   const std::function<void(double)>& sink);

// Deterministic pairwise (blocked cascade) summation; the reduction order is
// fixed so parallel or repeated runs reproduce bit-identical sums.
class PairwiseAccumulator {
 public:
  void add(double x);
  double total() const;
  std::size_t count() const { return n_; }

 private:
  static constexpr std::size_t kBlock = 4096;
  std::vector<double> stack_;  // one partial sum per filled level
  std::vector<std::size_t> level_counts_;
  double block_ = 0;
  std::size_t in_block_ = 0;
  std::size_t n_ = 0;
};

// Mean of y^ell over the batch, pairwise-summed in fixed order.
double empirical_raw_moment(const LabeledSampleBatch& batch, unsigned ell);

}  // namespace sparsetest
