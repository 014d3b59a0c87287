#include "sparsetest/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sparsetest/bellpoly.hpp"

namespace sparsetest {

NoiseSpec NoiseSpec::none() { return NoiseSpec{}; }

NoiseSpec NoiseSpec::finite(DiscreteRV atoms) {
  NoiseSpec n;
  n.kind_ = Kind::finite;
  n.atoms_ = std::move(atoms);
  double cum = 0;
  for (const auto& a : n.atoms_.atoms()) {
    cum += to_double(a.prob);
    n.finite_values_.push_back(to_double(a.value));
    n.finite_cdf_.push_back(cum);
  }
  n.finite_cdf_.back() = 1.0;
  return n;
}

NoiseSpec NoiseSpec::gaussian(double mean, double stddev) {
  if (stddev < 0) throw std::invalid_argument("negative stddev");
  NoiseSpec n;
  n.kind_ = Kind::gaussian;
  n.mean_ = mean;
  n.stddev_ = stddev;
  return n;
}

NoiseSpec NoiseSpec::moment_table(std::vector<double> raw_moments) {
  NoiseSpec n;
  n.kind_ = Kind::table;
  n.table_moments_ = std::move(raw_moments);
  return n;
}

double NoiseSpec::raw_moment(unsigned j) const {
  if (j == 0) return 1.0;
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::finite:
      return to_double(atoms_.raw_moment(j));
    case Kind::gaussian: {
      // m_j = mu m_{j-1} + (j-1) sigma^2 m_{j-2}
      double m0 = 1, m1 = mean_;
      if (j == 1) return m1;
      for (unsigned i = 2; i <= j; ++i) {
        double m2 = mean_ * m1 + (i - 1) * stddev_ * stddev_ * m0;
        m0 = m1;
        m1 = m2;
      }
      return m1;
    }
    case Kind::table:
      if (j > table_moments_.size())
        throw std::out_of_range("noise moment table has no order " +
                                std::to_string(j));
      return table_moments_[j - 1];
  }
  return 0.0;
}

double NoiseSpec::max_raw_moment(unsigned a, unsigned b) const {
  double m = raw_moment(a);
  for (unsigned j = a + 1; j <= b; ++j) m = std::max(m, raw_moment(j));
  return m;
}

double NoiseSpec::cumulant(unsigned j) const {
  if (j == 0) return 0.0;
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::gaussian:
      if (j == 1) return mean_;
      if (j == 2) return stddev_ * stddev_;
      return 0.0;
    case Kind::finite:
    case Kind::table: {
      if (table_cumulants_.size() < j) {
        std::vector<double> ms(j);
        for (unsigned i = 1; i <= j; ++i) ms[i - 1] = raw_moment(i);
        table_cumulants_ = moments_to_cumulants(ms);
      }
      return table_cumulants_[j - 1];
    }
  }
  return 0.0;
}

std::vector<double> NoiseSpec::cumulants(unsigned order) const {
  std::vector<double> ks(order);
  for (unsigned j = 1; j <= order; ++j) ks[j - 1] = cumulant(j);
  return ks;
}

NoiseSpec NoiseSpec::scaled(double factor) const {
  if (factor <= 0) throw std::invalid_argument("scale factor must be positive");
  switch (kind_) {
    case Kind::none:
      return none();
    case Kind::gaussian:
      return gaussian(mean_ / factor, stddev_ / factor);
    case Kind::finite: {
      Rat f = rat_from_double(factor);
      std::vector<DiscreteRV::Atom> atoms;
      for (const auto& a : atoms_.atoms())
        atoms.push_back({a.value / f, a.prob});
      return finite(DiscreteRV::from_atoms(std::move(atoms)));
    }
    case Kind::table: {
      std::vector<double> ms = table_moments_;
      double scale = 1;
      for (std::size_t j = 0; j < ms.size(); ++j) {
        scale /= factor;
        ms[j] *= scale;
      }
      return moment_table(std::move(ms));
    }
  }
  return none();
}

double NoiseSpec::sample(double u1, double u2) const {
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::gaussian: {
      if (stddev_ == 0) return mean_;
      double r = std::sqrt(-2.0 * std::log(1.0 - u1));
      return mean_ + stddev_ * r * std::cos(2.0 * M_PI * u2);
    }
    case Kind::finite: {
      auto it = std::upper_bound(finite_cdf_.begin(), finite_cdf_.end(), u1);
      std::size_t i = static_cast<std::size_t>(it - finite_cdf_.begin());
      if (i >= finite_values_.size()) i = finite_values_.size() - 1;
      return finite_values_[i];
    }
    case Kind::table:
      throw std::logic_error("cannot sample from a bare moment table");
  }
  return 0.0;
}

const DiscreteRV& NoiseSpec::finite_atoms() const {
  if (kind_ != Kind::finite) throw std::logic_error("noise is not finite");
  return atoms_;
}

std::string NoiseSpec::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::none:
      out << "none";
      break;
    case Kind::gaussian:
      out << "gaussian(" << mean_ << "," << stddev_ << ")";
      break;
    case Kind::finite:
      out << "finite[" << atoms_.support_size() << " atoms]";
      break;
    case Kind::table:
      out << "table[" << table_moments_.size() << " moments]";
      break;
  }
  return out.str();
}

}  // namespace sparsetest
