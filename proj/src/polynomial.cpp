#include "sparsetest/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sparsetest {

Monomial make_monomial(std::initializer_list<uint32_t> vars) {
  Monomial m(vars);
  std::sort(m.begin(), m.end());
  if (std::adjacent_find(m.begin(), m.end()) != m.end())
    throw std::invalid_argument("monomial with repeated variable");
  return m;
}

MultilinearPolynomial MultilinearPolynomial::constant(const Rat& c) {
  MultilinearPolynomial p;
  p.add_term({}, c);
  return p;
}

MultilinearPolynomial MultilinearPolynomial::monomial_term(const Rat& c,
                                                           Monomial m) {
  MultilinearPolynomial p;
  p.add_term(m, c);
  return p;
}

MultilinearPolynomial MultilinearPolynomial::from_terms(
    std::vector<std::pair<Monomial, Rat>> terms) {
  MultilinearPolynomial p;
  for (auto& [m, c] : terms) p.add_term(m, c);
  return p;
}

MultilinearPolynomial MultilinearPolynomial::from_float_terms(
    std::vector<std::pair<Monomial, double>> terms) {
  MultilinearPolynomial p;
  for (auto& [m, c] : terms) p.add_term(m, rat_from_double(c));
  p.exact_authoritative_ = false;
  return p;
}

unsigned MultilinearPolynomial::degree() const {
  std::size_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.size());
  return static_cast<unsigned>(d);
}

Rat MultilinearPolynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rat(0) : it->second;
}

std::vector<uint32_t> MultilinearPolynomial::active_variables() const {
  std::set<uint32_t> vars;
  for (const auto& [m, c] : terms_) vars.insert(m.begin(), m.end());
  return {vars.begin(), vars.end()};
}

MultilinearPolynomial MultilinearPolynomial::rename_variables(
    const std::vector<uint32_t>& perm) const {
  MultilinearPolynomial out;
  out.exact_authoritative_ = exact_authoritative_;
  for (const auto& [m, c] : terms_) {
    Monomial r;
    r.reserve(m.size());
    for (uint32_t v : m) {
      if (v >= perm.size()) throw std::invalid_argument("rename out of range");
      r.push_back(perm[v]);
    }
    std::sort(r.begin(), r.end());
    if (std::adjacent_find(r.begin(), r.end()) != r.end())
      throw std::invalid_argument("rename is not injective");
    out.add_term(r, c);
  }
  return out;
}

MultilinearPolynomial& MultilinearPolynomial::add_term(const Monomial& m,
                                                       const Rat& c) {
  if (!std::is_sorted(m.begin(), m.end()) ||
      std::adjacent_find(m.begin(), m.end()) != m.end())
    throw std::invalid_argument("monomial indices must be strictly increasing");
  Rat cc = canonical(c);
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (cc != 0) terms_.emplace(m, cc);
  } else {
    it->second += cc;
    if (it->second == 0) terms_.erase(it);
  }
  return *this;
}

MultilinearPolynomial MultilinearPolynomial::operator+(
    const MultilinearPolynomial& o) const {
  MultilinearPolynomial out = *this;
  out.exact_authoritative_ = exact_authoritative_ && o.exact_authoritative_;
  for (const auto& [m, c] : o.terms_) out.add_term(m, c);
  return out;
}

MultilinearPolynomial MultilinearPolynomial::operator-(
    const MultilinearPolynomial& o) const {
  MultilinearPolynomial out = *this;
  out.exact_authoritative_ = exact_authoritative_ && o.exact_authoritative_;
  for (const auto& [m, c] : o.terms_) out.add_term(m, -c);
  return out;
}

MultilinearPolynomial MultilinearPolynomial::operator*(const Rat& c) const {
  MultilinearPolynomial out;
  out.exact_authoritative_ = exact_authoritative_;
  if (c == 0) return out;
  for (const auto& [m, k] : terms_) out.terms_.emplace(m, k * c);
  return out;
}

double MultilinearPolynomial::evaluate(const std::vector<double>& x) const {
  double acc = 0;
  for (const auto& [m, c] : terms_) {
    double prod = to_double(c);
    for (uint32_t v : m) prod *= x[v];
    acc += prod;
  }
  return acc;
}

Rat MultilinearPolynomial::evaluate_exact(
    const std::map<uint32_t, Rat>& assignment) const {
  Rat acc = 0;
  for (const auto& [m, c] : terms_) {
    Rat prod = c;
    for (uint32_t v : m) prod *= assignment.at(v);
    acc += prod;
  }
  return acc;
}

std::string MultilinearPolynomial::serialize() const {
  std::ostringstream out;
  for (const auto& [m, c] : terms_) {
    out << to_string(c) << ":";
    for (uint32_t v : m) out << " " << (v + 1);
    out << "\n";
  }
  return out.str();
}

MultilinearPolynomial MultilinearPolynomial::parse(const std::string& text) {
  MultilinearPolynomial p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("term line needs 'coeff: vars': " + line);
    Rat c = parse_rational(line.substr(0, colon));
    Monomial m;
    std::istringstream vs(line.substr(colon + 1));
    long v;
    while (vs >> v) {
      if (v < 1) throw std::invalid_argument("variable indices are 1-based");
      m.push_back(static_cast<uint32_t>(v - 1));
    }
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
      throw std::invalid_argument("repeated variable in monomial: " + line);
    p.add_term(m, c);
  }
  return p;
}

Rat coeff_norm_squared(const MultilinearPolynomial& p) {
  Rat s = 0;
  for (const auto& [m, c] : p.terms()) s += c * c;
  return s;
}

double coeff_norm(const MultilinearPolynomial& p) {
  return std::sqrt(to_double(coeff_norm_squared(p)));
}

namespace {

// Squared coefficients sorted descending, lexicographic monomial tiebreak.
std::vector<std::pair<Rat, Monomial>> squared_coeffs_sorted(
    const MultilinearPolynomial& p) {
  std::vector<std::pair<Rat, Monomial>> sq;
  sq.reserve(p.sparsity());
  for (const auto& [m, c] : p.terms()) sq.emplace_back(c * c, m);
  std::sort(sq.begin(), sq.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  return sq;
}

}  // namespace

Rat distance_to_sparsity_squared(const MultilinearPolynomial& p,
                                 std::size_t s) {
  if (p.is_zero())
    throw std::invalid_argument("undefined distance for the zero polynomial");
  if (p.sparsity() <= s) return Rat(0);
  auto sq = squared_coeffs_sorted(p);
  Rat head = 0, total = 0;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    total += sq[i].first;
    if (i < s) head += sq[i].first;
  }
  return 1 - head / total;
}

double distance_to_sparsity(const MultilinearPolynomial& p, std::size_t s) {
  return std::sqrt(to_double(distance_to_sparsity_squared(p, s)));
}

MultilinearPolynomial sparsity_approximant(const MultilinearPolynomial& p,
                                           std::size_t s) {
  auto sq = squared_coeffs_sorted(p);
  MultilinearPolynomial out;
  for (std::size_t i = 0; i < sq.size() && i < s; ++i)
    out.add_term(sq[i].second, p.coefficient(sq[i].second));
  return out;
}

Rat influence(const MultilinearPolynomial& p, uint32_t var) {
  Rat s = 0;
  for (const auto& [m, c] : p.terms())
    if (std::binary_search(m.begin(), m.end(), var)) s += c * c;
  return s;
}

}  // namespace sparsetest
