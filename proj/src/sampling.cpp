#include "sparsetest/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sparsetest {

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct DenseTerm {
  std::vector<std::size_t> slots;
  double coeff;
};

std::vector<DenseTerm> dense_terms(const MultilinearPolynomial& p,
                                   const std::vector<uint32_t>& vars) {
  std::vector<DenseTerm> terms;
  for (const auto& [mono, c] : p.terms()) {
    DenseTerm t;
    t.coeff = to_double(c);
    for (uint32_t v : mono)
      t.slots.push_back(static_cast<std::size_t>(
          std::lower_bound(vars.begin(), vars.end(), v) - vars.begin()));
    terms.push_back(std::move(t));
  }
  return terms;
}

inline double eval_terms(const std::vector<DenseTerm>& terms,
                         const std::vector<double>& x) {
  double val = 0;
  for (const DenseTerm& t : terms) {
    double prod = t.coeff;
    for (std::size_t s : t.slots) prod *= x[s];
    val += prod;
  }
  return val;
}

}  // namespace

LabeledSampleBatch draw_labeled_samples(const MultilinearPolynomial& p,
                                        const FiniteDistribution& d,
                                        const NoiseSpec& noise, std::size_t m,
                                        uint64_t seed) {
  if (m == 0) throw std::invalid_argument("need at least one sample");
  LabeledSampleBatch batch;
  batch.m = m;
  batch.variables = p.active_variables();
  batch.seed = seed;
  batch.distribution_id = d.serialize();
  batch.noise_id = noise.describe();
  const std::size_t k = batch.variables.size();
  batch.xs.resize(m * k);
  batch.ys.resize(m);

  const auto terms = dense_terms(p, batch.variables);
  std::mt19937_64 rng(seed);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      x[j] = d.sample(uniform01(rng));
      batch.xs[i * k + j] = x[j];
    }
    double u1 = uniform01(rng), u2 = uniform01(rng);
    batch.ys[i] = eval_terms(terms, x) + noise.sample(u1, u2);
  }
  return batch;
}

void stream_labels(const MultilinearPolynomial& p, const FiniteDistribution& d,
                   const NoiseSpec& noise, std::size_t m, uint64_t seed,
                   const std::function<void(double)>& sink) {
  const auto vars = p.active_variables();
  const std::size_t k = vars.size();
  const auto terms = dense_terms(p, vars);
  std::mt19937_64 rng(seed);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) x[j] = d.sample(uniform01(rng));
    double u1 = uniform01(rng), u2 = uniform01(rng);
    sink(eval_terms(terms, x) + noise.sample(u1, u2));
  }
}

void PairwiseAccumulator::add(double x) {
  block_ += x;
  ++n_;
  if (++in_block_ == kBlock) {
    double carry = block_;
    block_ = 0;
    in_block_ = 0;
    std::size_t level = 0;
    while (level < level_counts_.size() && level_counts_[level] == 1) {
      carry += stack_[level];
      level_counts_[level] = 0;
      ++level;
    }
    if (level == level_counts_.size()) {
      stack_.push_back(carry);
      level_counts_.push_back(1);
    } else {
      stack_[level] = carry;
      level_counts_[level] = 1;
    }
  }
}

double PairwiseAccumulator::total() const {
  double t = block_;
  for (std::size_t level = 0; level < stack_.size(); ++level)
    if (level_counts_[level] == 1) t += stack_[level];
  return t;
}

double empirical_raw_moment(const LabeledSampleBatch& batch, unsigned ell) {
  if (batch.m == 0) throw std::invalid_argument("empty batch");
  PairwiseAccumulator acc;
  for (double y : batch.ys) acc.add(std::pow(y, static_cast<double>(ell)));
  return acc.total() / static_cast<double>(batch.m);
}

std::string LabeledSampleBatch::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < variables.size(); ++j)
    out << "x_" << (variables[j] + 1) << ",";
  out << "y\n";
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < variables.size(); ++j)
      out << xs[i * variables.size() + j] << ",";
    out << ys[i] << "\n";
  }
  return out.str();
}

}  // namespace sparsetest
