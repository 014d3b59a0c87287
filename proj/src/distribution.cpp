#include "sparsetest/distribution.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace sparsetest {

FiniteDistribution FiniteDistribution::validate(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("empty support");
  for (Atom& a : atoms) {
    a.value.canonicalize();
    a.prob.canonicalize();
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i)
    if (atoms[i].value == atoms[i + 1].value)
      throw std::invalid_argument("duplicate support values");

  Rat total = 0, mean = 0, second = 0;
  for (const Atom& a : atoms) {
    if (a.prob <= 0 || a.prob > 1)
      throw std::invalid_argument("atom probability outside (0,1]");
    total += a.prob;
    mean += a.prob * a.value;
    second += a.prob * a.value * a.value;
  }
  if (total != 1) throw std::invalid_argument("probabilities do not sum to 1");
  if (mean != 0) throw std::invalid_argument("nonzero mean");
  if (second != 1) throw std::invalid_argument("variance is not 1");

  FiniteDistribution d;
  d.atoms_ = std::move(atoms);
  d.lambda_ = d.atoms_[0].prob;
  d.max_abs_ = 0;
  for (const Atom& a : d.atoms_) {
    d.lambda_ = std::min(d.lambda_, a.prob);
    Rat av = a.value >= 0 ? a.value : Rat(-a.value);
    d.max_abs_ = std::max(d.max_abs_, av);
  }
  // E X = 0, E X^2 = 1 forces some |value| >= 1.
  if (d.max_abs_ < 1) throw std::logic_error("max |value| < 1 is impossible");
  double cum = 0;
  for (const Atom& a : d.atoms_) {
    cum += to_double(a.prob);
    d.cdf_.push_back(cum);
    d.values_.push_back(to_double(a.value));
  }
  d.cdf_.back() = 1.0;
  return d;
}

FiniteDistribution FiniteDistribution::rademacher() {
  return validate({{Rat(-1), Rat(1, 2)}, {Rat(1), Rat(1, 2)}});
}

Rat FiniteDistribution::raw_moment(unsigned j) const {
  Rat m = 0;
  for (const Atom& a : atoms_) m += a.prob * rat_pow(a.value, j);
  return m;
}

double FiniteDistribution::sample(double u01) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u01);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  if (i >= values_.size()) i = values_.size() - 1;
  return values_[i];
}

std::string FiniteDistribution::serialize() const {
  std::ostringstream out;
  for (const Atom& a : atoms_)
    out << to_string(a.value) << " " << to_string(a.prob) << "\n";
  return out.str();
}

FiniteDistribution FiniteDistribution::parse(const std::string& text) {
  std::istringstream in(text);
  std::vector<Atom> atoms;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string v, p;
    if (!(ls >> v >> p))
      throw std::invalid_argument("distribution line needs 'value prob': " + line);
    atoms.push_back({parse_rational(v), parse_rational(p)});
  }
  return validate(std::move(atoms));
}

bool FiniteDistribution::operator==(const FiniteDistribution& o) const {
  if (atoms_.size() != o.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].value != o.atoms_[i].value || atoms_[i].prob != o.atoms_[i].prob)
      return false;
  return true;
}

}  // namespace sparsetest
