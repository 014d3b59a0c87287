#include "sparsetest/discrete_rv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sparsetest {

DiscreteRV DiscreteRV::from_atoms(std::vector<Atom> atoms) {
  for (Atom& a : atoms) {
    a.value.canonicalize();
    a.prob.canonicalize();
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  DiscreteRV rv;
  Rat total = 0;
  for (Atom& a : atoms) {
    if (a.prob < 0) throw std::invalid_argument("negative probability");
    if (a.prob == 0) continue;
    total += a.prob;
    if (!rv.atoms_.empty() && rv.atoms_.back().value == a.value)
      rv.atoms_.back().prob += a.prob;
    else
      rv.atoms_.push_back(std::move(a));
  }
  if (total != 1) throw std::invalid_argument("probabilities do not sum to 1");
  return rv;
}

DiscreteRV DiscreteRV::point_mass(const Rat& v) {
  return from_atoms({{v, Rat(1)}});
}

DiscreteRV DiscreteRV::from_distribution(const FiniteDistribution& d) {
  std::vector<Atom> atoms;
  for (const auto& a : d.atoms()) atoms.push_back({a.value, a.prob});
  return from_atoms(std::move(atoms));
}

Rat DiscreteRV::max_abs_value() const {
  Rat m = 0;
  for (const Atom& a : atoms_) {
    Rat av = a.value >= 0 ? a.value : Rat(-a.value);
    m = std::max(m, av);
  }
  return m;
}

DiscreteRV DiscreteRV::scaled(const Rat& c) const {
  std::vector<Atom> atoms;
  for (const Atom& a : atoms_) atoms.push_back({a.value * c, a.prob});
  return from_atoms(std::move(atoms));
}

DiscreteRV DiscreteRV::shifted(const Rat& c) const {
  std::vector<Atom> atoms;
  for (const Atom& a : atoms_) atoms.push_back({a.value + c, a.prob});
  return from_atoms(std::move(atoms));
}

Rat DiscreteRV::raw_moment(unsigned ell) const {
  Rat m = 0;
  for (const Atom& a : atoms_) m += a.prob * rat_pow(a.value, ell);
  return m;
}

Rat DiscreteRV::abs_moment(unsigned ell) const {
  Rat m = 0;
  for (const Atom& a : atoms_) {
    Rat av = a.value >= 0 ? a.value : Rat(-a.value);
    m += a.prob * rat_pow(av, ell);
  }
  return m;
}

std::string DiscreteRV::serialize() const {
  std::ostringstream out;
  for (const Atom& a : atoms_)
    out << to_string(a.value) << " " << to_string(a.prob) << "\n";
  return out.str();
}

DiscreteRV DiscreteRV::parse(const std::string& text) {
  std::istringstream in(text);
  std::vector<Atom> atoms;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string v, p;
    if (!(ls >> v >> p))
      throw std::invalid_argument("rv line needs 'value prob': " + line);
    atoms.push_back({parse_rational(v), parse_rational(p)});
  }
  return from_atoms(std::move(atoms));
}

DiscreteRV output_distribution(const MultilinearPolynomial& p,
                               const FiniteDistribution& d,
                               const EnumerationBudget& budget) {
  if (!p.exact_authoritative())
    throw std::invalid_argument(
        "output_distribution requires exact-authoritative coefficients");
  const auto vars = p.active_variables();
  const std::size_t k = vars.size();
  const std::size_t supp = d.support_size();
  Int points = int_pow(Int(static_cast<unsigned long>(supp)),
                       static_cast<unsigned long>(k));
  if (points > budget.max_points) {
    throw BudgetExceeded("output_distribution needs " + points.get_str() +
                         " = " + std::to_string(supp) + "^" +
                         std::to_string(k) + " enumeration points (budget " +
                         budget.max_points.get_str() + ")");
  }

  // Dense index remap so monomials address a k-slot assignment.
  std::map<uint32_t, std::size_t> slot;
  for (std::size_t i = 0; i < k; ++i) slot[vars[i]] = i;
  struct Term {
    std::vector<std::size_t> slots;
    Rat coeff;
  };
  std::vector<Term> terms;
  for (const auto& [m, c] : p.terms()) {
    Term t;
    t.coeff = c;
    for (uint32_t v : m) t.slots.push_back(slot.at(v));
    terms.push_back(std::move(t));
  }

  std::map<Rat, Rat> acc;  // value -> probability
  std::vector<std::size_t> idx(k, 0);
  std::vector<Rat> assign(k);
  for (std::size_t i = 0; i < k; ++i) assign[i] = d.atoms()[0].value;
  while (true) {
    Rat value = 0;
    for (const Term& t : terms) {
      Rat prod = t.coeff;
      for (std::size_t s : t.slots) prod *= assign[s];
      value += prod;
    }
    Rat prob = 1;
    for (std::size_t i = 0; i < k; ++i) prob *= d.atoms()[idx[i]].prob;
    acc[value] += prob;

    std::size_t pos = 0;
    while (pos < k) {
      if (++idx[pos] < supp) {
        assign[pos] = d.atoms()[idx[pos]].value;
        break;
      }
      idx[pos] = 0;
      assign[pos] = d.atoms()[0].value;
      ++pos;
    }
    if (pos == k) break;
  }

  std::vector<DiscreteRV::Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [v, pr] : acc) atoms.push_back({v, pr});
  return DiscreteRV::from_atoms(std::move(atoms));
}

Rat wasserstein1(const DiscreteRV& a, const DiscreteRV& b) {
  // Quantile coupling: walk both sorted atom lists, transporting the
  // overlapping probability mass between current values.
  const auto& A = a.atoms();
  const auto& B = b.atoms();
  std::size_t i = 0, j = 0;
  Rat remaining_a = A[0].prob, remaining_b = B[0].prob;
  Rat total = 0;
  while (i < A.size() && j < B.size()) {
    Rat mass = std::min(remaining_a, remaining_b);
    Rat diff = A[i].value - B[j].value;
    if (diff < 0) diff = -diff;
    total += mass * diff;
    remaining_a -= mass;
    remaining_b -= mass;
    if (remaining_a == 0 && ++i < A.size()) remaining_a = A[i].prob;
    if (remaining_b == 0 && ++j < B.size()) remaining_b = B[j].prob;
  }
  return total;
}

double wasserstein1_d(const DiscreteRV& a, const DiscreteRV& b) {
  const auto& A = a.atoms();
  const auto& B = b.atoms();
  std::vector<double> av(A.size()), ap(A.size()), bv(B.size()), bp(B.size());
  for (std::size_t i = 0; i < A.size(); ++i) {
    av[i] = to_double(A[i].value);
    ap[i] = to_double(A[i].prob);
  }
  for (std::size_t j = 0; j < B.size(); ++j) {
    bv[j] = to_double(B[j].value);
    bp[j] = to_double(B[j].prob);
  }
  std::size_t i = 0, j = 0;
  double ra = ap[0], rb = bp[0], total = 0;
  while (i < A.size() && j < B.size()) {
    double mass = std::min(ra, rb);
    total += mass * std::abs(av[i] - bv[j]);
    ra -= mass;
    rb -= mass;
    if (ra <= 0 && ++i < A.size()) ra = ap[i];
    if (rb <= 0 && ++j < B.size()) rb = bp[j];
  }
  return total;
}

Rat moment_distance_squared(const DiscreteRV& a, const DiscreteRV& b,
                            unsigned k) {
  Rat s = 0;
  for (unsigned ell = 1; ell <= k; ++ell) {
    Rat diff = a.raw_moment(ell) - b.raw_moment(ell);
    s += diff * diff;
  }
  return s;
}

double moment_distance(const DiscreteRV& a, const DiscreteRV& b, unsigned k) {
  return std::sqrt(to_double(moment_distance_squared(a, b, k)));
}

bool identical_by_moments(const DiscreteRV& a, const DiscreteRV& b) {
  std::size_t k = std::max(a.support_size(), b.support_size());
  bool match = true;
  for (unsigned ell = 1; ell + 1 <= 2 * k && match; ++ell)
    match = (a.raw_moment(ell) == b.raw_moment(ell));
  bool atom_equal = (a == b);
  if (match != atom_equal)
    throw std::logic_error(
        "moment-matching disagrees with atom equality; Vandermonde argument "
        "violated");
  return match;
}

DiscreteRV sum_independent(const DiscreteRV& a, const DiscreteRV& b) {
  std::map<Rat, Rat> acc;
  for (const auto& x : a.atoms())
    for (const auto& y : b.atoms()) acc[x.value + y.value] += x.prob * y.prob;
  std::vector<DiscreteRV::Atom> atoms;
  for (auto& [v, p] : acc) atoms.push_back({v, p});
  return DiscreteRV::from_atoms(std::move(atoms));
}

Rat tail_prob_abs_geq_sqrt(const DiscreteRV& y, const Rat& t_squared) {
  Rat p = 0;
  for (const auto& a : y.atoms())
    if (a.value * a.value >= t_squared) p += a.prob;
  return p;
}

Rat tail_prob_geq(const DiscreteRV& y, const Rat& t) {
  Rat p = 0;
  for (const auto& a : y.atoms())
    if (a.value >= t) p += a.prob;
  return p;
}

}  // namespace sparsetest
