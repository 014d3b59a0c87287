#include "sparsetest/msg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace sparsetest {

Int phi_bound(unsigned d, std::size_t s, std::size_t ell) {
  if (d == 0 || s == 0 || ell == 0)
    throw std::invalid_argument("phi_bound arguments must be >= 1");
  Int inner = int_pow(Int(static_cast<unsigned long>(ell)),
                      static_cast<unsigned long>(d) * s);
  Int exponent = 2 * Int(d) * Int(d) * (inner + 3);
  if (exponent > 100000000)
    throw std::overflow_error("phi exponent too large to materialize: 2^" +
                              exponent.get_str());
  Int out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, exponent.get_ui());
  return out;
}

OutputCountBounds output_count_bounds(unsigned d, std::size_t r,
                                      std::size_t ell, const Int& T) {
  OutputCountBounds b;
  b.sparse_upper = int_pow(Int(static_cast<unsigned long>(ell)),
                           static_cast<unsigned long>(d) * r);
  double log2T = static_cast<double>(mpz_sizeinbase(T.get_mpz_t(), 2)) - 1;
  b.dense_lower = log2T / (2.0 * d * d) - 3.0;
  return b;
}

std::vector<uint32_t> SparsityPattern::variables() const {
  std::set<uint32_t> vars;
  for (const auto& m : monomials) vars.insert(m.begin(), m.end());
  return {vars.begin(), vars.end()};
}

namespace {

std::vector<Monomial> all_monomials(unsigned nvars, unsigned d) {
  std::vector<Monomial> out;
  out.push_back({});  // constant
  std::vector<Monomial> frontier = {{}};
  for (unsigned deg = 1; deg <= d; ++deg) {
    std::vector<Monomial> next;
    for (const auto& m : frontier) {
      uint32_t start = m.empty() ? 0 : m.back() + 1;
      for (uint32_t v = start; v < nvars; ++v) {
        Monomial ext = m;
        ext.push_back(v);
        next.push_back(ext);
        out.push_back(ext);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

// First-use renaming key: variables renumbered by first appearance across
// the sorted monomial list.
std::string renaming_key(const std::vector<Monomial>& monomials) {
  std::map<uint32_t, uint32_t> rename;
  std::vector<Monomial> relabeled;
  for (const auto& m : monomials) {
    for (uint32_t v : m)
      if (!rename.count(v)) rename[v] = static_cast<uint32_t>(rename.size());
  }
  for (const auto& m : monomials) {
    Monomial r;
    for (uint32_t v : m) r.push_back(rename[v]);
    std::sort(r.begin(), r.end());
    relabeled.push_back(std::move(r));
  }
  std::sort(relabeled.begin(), relabeled.end());
  std::ostringstream key;
  for (const auto& m : relabeled) {
    for (uint32_t v : m) key << v << ",";
    key << ";";
  }
  return key.str();
}

}  // namespace

Int raw_sparsity_pattern_count(unsigned d, std::size_t r) {
  Int monomials = monomial_count(static_cast<unsigned>(d * r), d);
  Int count;
  if (monomials < Int(static_cast<unsigned long>(r))) return Int(0);
  mpz_bin_ui(count.get_mpz_t(), monomials.get_mpz_t(),
             static_cast<unsigned long>(r));
  return count;
}

std::vector<SparsityPattern> enumerate_sparsity_patterns(unsigned d,
                                                         std::size_t r,
                                                         std::size_t cap,
                                                         bool dedup_renamings) {
  Int raw = raw_sparsity_pattern_count(d, r);
  if (raw > Int(static_cast<unsigned long>(cap)))
    throw BudgetExceeded("sparsity-pattern count " + raw.get_str() +
                         " exceeds cap " + std::to_string(cap));
  auto monos = all_monomials(static_cast<unsigned>(d * r), d);
  std::vector<SparsityPattern> out;
  std::set<std::string> seen;
  if (monos.size() < r) return out;
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    SparsityPattern pat;
    for (std::size_t i : idx) pat.monomials.push_back(monos[i]);
    if (!dedup_renamings) {
      out.push_back(pat);
    } else if (seen.insert(renaming_key(pat.monomials)).second) {
      out.push_back(pat);
    }
    // next combination
    bool advanced = false;
    std::size_t pos = r;
    while (pos > 0) {
      --pos;
      if (idx[pos] + (r - pos) < monos.size()) {
        ++idx[pos];
        for (std::size_t j = pos + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return out;
}

namespace {

MultilinearPolynomial build_tree(unsigned depth, uint32_t node,
                                 const std::vector<int>& leaves,
                                 std::size_t leaf_base, std::size_t width) {
  if (depth == 0)
    return MultilinearPolynomial::constant(Rat(leaves[leaf_base]));
  auto first = build_tree(depth - 1, 2 * node + 1, leaves, leaf_base, width / 2);
  auto second = build_tree(depth - 1, 2 * node + 2, leaves,
                           leaf_base + width / 2, width / 2);
  // (1 + x)/2 first + (1 - x)/2 second
  MultilinearPolynomial out = (first + second) * make_rat(1, 2);
  auto diff = (first - second) * make_rat(1, 2);
  for (const auto& [m, c] : diff.terms()) {
    Monomial ext = m;
    ext.insert(std::lower_bound(ext.begin(), ext.end(), node), node);
    out.add_term(ext, c);
  }
  return out;
}

}  // namespace

MultilinearPolynomial decision_tree_polynomial(unsigned d,
                                               const std::vector<int>& leaves) {
  if (d == 0) throw std::invalid_argument("tree depth must be >= 1");
  const std::size_t width = std::size_t{1} << d;
  if (leaves.size() != width)
    throw std::invalid_argument("need exactly 2^d leaf values");
  for (int v : leaves)
    if (v != 1 && v != -1)
      throw std::invalid_argument("leaf values must be +-1");
  return build_tree(d, 0, leaves, 0, width);
}

MultilinearPolynomial decision_tree_polynomial(unsigned d) {
  std::vector<int> leaves(std::size_t{1} << d);
  for (std::size_t j = 0; j < leaves.size(); ++j)
    leaves[j] = (j % 2 == 0) ? 1 : -1;
  return decision_tree_polynomial(d, leaves);
}

MultilinearPolynomial disjoint_sum(
    const std::vector<MultilinearPolynomial>& parts) {
  MultilinearPolynomial out;
  uint32_t base = 0;
  for (const auto& part : parts) {
    auto vars = part.active_variables();
    uint32_t hi = vars.empty() ? 0 : vars.back() + 1;
    std::vector<uint32_t> perm(hi);
    for (uint32_t v = 0; v < hi; ++v) perm[v] = base + v;
    out = out + part.rename_variables(perm);
    base += hi;
  }
  return out;
}

namespace {

std::vector<Rat> matched_moment_certificate(const DiscreteRV& a,
                                            const DiscreteRV& b) {
  std::size_t k = std::max(a.support_size(), b.support_size());
  std::vector<Rat> ms;
  for (unsigned j = 1; j + 1 <= 2 * k; ++j) ms.push_back(a.raw_moment(j));
  (void)b;
  return ms;
}

std::optional<MsgWitness> certify(const MultilinearPolynomial& p,
                                  const MultilinearPolynomial& q,
                                  const FiniteDistribution& D) {
  auto pa = output_distribution(p, D);
  auto qa = output_distribution(q, D);
  if (!identical_by_moments(pa, qa)) return std::nullopt;
  MsgWitness w;
  w.p = p;
  w.q = q;
  w.matched_moments = matched_moment_certificate(pa, qa);
  return w;
}

bool is_symmetric_two_point(const FiniteDistribution& D) {
  return D.support_size() == 2 && D.atoms()[0].value == -D.atoms()[1].value &&
         D.atoms()[0].prob == D.atoms()[1].prob;
}

MultilinearPolynomial linear_chain(std::size_t s) {
  MultilinearPolynomial p;
  for (uint32_t i = 0; i < s; ++i) p.add_term(make_monomial({i}), Rat(1));
  return p;
}

// ---- exact integerized grid search ----------------------------------------

struct PatternTable {
  // one row per point of support^vars: per-monomial integer values over the
  // common denominator B^d, plus the row-probability numerator over Q^vars
  std::vector<std::vector<long long>> mono_values;
  std::vector<unsigned long long> prob_num;
  Rat value_den;  // den * B^d
  Rat prob_den;   // Q^vars
};

bool build_pattern_table(const SparsityPattern& pat,
                         const FiniteDistribution& D, unsigned d,
                         unsigned coeff_den, PatternTable& out) {
  auto vars = pat.variables();
  const std::size_t v = vars.size();
  const std::size_t supp = D.support_size();

  Int B = 1, Q = 1;
  for (const auto& a : D.atoms()) {
    Int vb = a.value.get_den(), pb = a.prob.get_den();
    mpz_lcm(B.get_mpz_t(), B.get_mpz_t(), vb.get_mpz_t());
    mpz_lcm(Q.get_mpz_t(), Q.get_mpz_t(), pb.get_mpz_t());
  }
  std::vector<long long> val_int(supp);
  std::vector<unsigned long long> prob_int(supp);
  double max_abs = 0;
  for (std::size_t i = 0; i < supp; ++i) {
    Rat vi = canonical(D.atoms()[i].value * Rat(B));
    Rat pi = canonical(D.atoms()[i].prob * Rat(Q));
    if (vi.get_den() != 1 || pi.get_den() != 1) return false;
    if (!vi.get_num().fits_slong_p() || !pi.get_num().fits_ulong_p())
      return false;
    val_int[i] = vi.get_num().get_si();
    prob_int[i] = pi.get_num().get_ui();
    max_abs = std::max(max_abs, std::abs(static_cast<double>(val_int[i])));
  }
  double rows_d = std::pow(static_cast<double>(supp), static_cast<double>(v));
  if (rows_d > 2e6) return false;
  if (v * std::log2(std::max<double>(Q.get_d(), 2)) > 60) return false;
  double mono_bound = std::pow(std::max(max_abs, 1.0), d);
  if (mono_bound * std::pow(B.get_d(), d) > 1e12) return false;

  const std::size_t rows = static_cast<std::size_t>(rows_d);
  out.mono_values.assign(rows, std::vector<long long>(pat.monomials.size()));
  out.prob_num.assign(rows, 1);
  long long Bi = B.get_si();
  std::vector<std::size_t> idx(v, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    unsigned long long pn = 1;
    for (std::size_t j = 0; j < v; ++j) pn *= prob_int[idx[j]];
    out.prob_num[r] = pn;
    for (std::size_t mi = 0; mi < pat.monomials.size(); ++mi) {
      long long prod = 1;
      unsigned degree = 0;
      for (uint32_t var : pat.monomials[mi]) {
        std::size_t slot = static_cast<std::size_t>(
            std::lower_bound(vars.begin(), vars.end(), var) - vars.begin());
        prod *= val_int[idx[slot]];
        ++degree;
      }
      for (unsigned e = degree; e < d; ++e) prod *= Bi;
      out.mono_values[r][mi] = prod;
    }
    std::size_t pos = 0;
    while (pos < v && ++idx[pos] == supp) idx[pos++] = 0;
  }
  Int Bd = int_pow(B, d);
  out.value_den = Rat(Int(coeff_den) * Bd);
  out.prob_den = rat_pow(Rat(Q), static_cast<unsigned long>(v));
  return true;
}

// Reduced-fraction fingerprint of the output distribution of sum_i c_i M_i.
std::string fingerprint(const PatternTable& table,
                        const std::vector<long long>& coeffs) {
  std::map<long long, unsigned long long> hist;
  const std::size_t rows = table.mono_values.size();
  for (std::size_t r = 0; r < rows; ++r) {
    long long value = 0;
    const auto& mv = table.mono_values[r];
    for (std::size_t i = 0; i < coeffs.size(); ++i) value += coeffs[i] * mv[i];
    hist[value] += table.prob_num[r];
  }
  std::ostringstream out;
  for (const auto& [v, pn] : hist) {
    Rat value = canonical(Rat(static_cast<long>(v)) / table.value_den);
    Rat prob = canonical(Rat(static_cast<unsigned long>(pn)) / table.prob_den);
    out << to_string(value) << ":" << to_string(prob) << ";";
  }
  return out.str();
}

MultilinearPolynomial materialize(const SparsityPattern& pat,
                                  const std::vector<long long>& coeffs,
                                  unsigned coeff_den) {
  MultilinearPolynomial p;
  for (std::size_t i = 0; i < pat.monomials.size(); ++i)
    p.add_term(pat.monomials[i],
               canonical(Rat(static_cast<long>(coeffs[i])) / Rat(coeff_den)));
  return p;
}

// Iterates every assignment of nonzero grid coefficients to the pattern.
template <class F>
void for_each_assignment(std::size_t r, const GridSpec& grid, F&& f) {
  std::vector<long long> values;
  for (long long k = 1; k <= grid.max_numerator; ++k) {
    values.push_back(k);
    values.push_back(-k);
  }
  std::vector<std::size_t> idx(r, 0);
  std::vector<long long> coeffs(r);
  while (true) {
    for (std::size_t i = 0; i < r; ++i) coeffs[i] = values[idx[i]];
    if (!f(coeffs)) return;
    std::size_t pos = 0;
    while (pos < r && ++idx[pos] == values.size()) idx[pos++] = 0;
    if (pos == r) break;
  }
}

double projected_candidates(std::size_t r, const GridSpec& grid,
                            std::size_t n_patterns) {
  return static_cast<double>(n_patterns) *
         std::pow(2.0 * grid.max_numerator, static_cast<double>(r));
}

}  // namespace

WitnessSearchResult find_msg_witness(const FiniteDistribution& D, unsigned d,
                                     std::size_t s, std::size_t t,
                                     const GridSpec& grid) {
  if (t < s) throw std::invalid_argument("need t >= s");
  WitnessSearchResult res;

  if (t == s) {
    auto p = linear_chain(s);
    if (auto w = certify(p, p, D)) {
      res.witness = std::move(w);
      res.exhaustive = true;
      res.note = "trivial witness q = p";
      return res;
    }
  }

  // Structured shortlist: variable-disjoint decision trees match the sum of
  // s singleton monomials when the base distribution is balanced two-point
  // (values +-1 forced by the normalization) and t = 4^{e-1} s, e <= d.
  if (is_symmetric_two_point(D)) {
    for (unsigned e = 2; e <= d; ++e) {
      double target = std::pow(4.0, e - 1) * static_cast<double>(s);
      if (target == static_cast<double>(t)) {
        std::vector<MultilinearPolynomial> trees(s,
                                                 decision_tree_polynomial(e));
        auto q = disjoint_sum(trees);
        auto p = linear_chain(s);
        if (auto w = certify(p, q, D)) {
          res.witness = std::move(w);
          res.note = "structured shortlist: disjoint depth-" +
                     std::to_string(e) + " trees";
          return res;
        }
      }
    }
  }

  // Exact moment-matching over the quantized coefficient grid.
  std::vector<SparsityPattern> pats_p, pats_q;
  try {
    pats_p = enumerate_sparsity_patterns(d, s, grid.pattern_cap);
    pats_q = enumerate_sparsity_patterns(d, t, grid.pattern_cap);
  } catch (const BudgetExceeded& e) {
    res.note = std::string("pattern enumeration truncated: ") + e.what();
    return res;
  }
  double work = projected_candidates(s, grid, pats_p.size()) +
                projected_candidates(t, grid, pats_q.size());
  if (work > static_cast<double>(grid.candidate_cap)) {
    std::ostringstream note;
    note << "grid search skipped: " << work << " candidates exceed cap "
         << grid.candidate_cap;
    res.note = note.str();
    return res;
  }

  struct Candidate {
    const SparsityPattern* pat;
    std::vector<long long> coeffs;
  };
  std::unordered_map<std::string, Candidate> p_index;
  for (const auto& pat : pats_p) {
    PatternTable table;
    if (!build_pattern_table(pat, D, d, grid.denominator, table)) {
      res.note = "integer fast path unavailable for this distribution";
      return res;
    }
    for_each_assignment(s, grid, [&](const std::vector<long long>& coeffs) {
      p_index.emplace(fingerprint(table, coeffs), Candidate{&pat, coeffs});
      return true;
    });
  }
  for (const auto& pat : pats_q) {
    PatternTable table;
    if (!build_pattern_table(pat, D, d, grid.denominator, table)) {
      res.note = "integer fast path unavailable for this distribution";
      return res;
    }
    std::optional<MsgWitness> found;
    for_each_assignment(t, grid, [&](const std::vector<long long>& coeffs) {
      auto it = p_index.find(fingerprint(table, coeffs));
      if (it == p_index.end()) return true;
      auto p = materialize(*it->second.pat, it->second.coeffs,
                           grid.denominator);
      auto q = materialize(pat, coeffs, grid.denominator);
      if (p.sparsity() != s || q.sparsity() != t) return true;
      if (auto w = certify(p, q, D)) {
        found = std::move(w);
        return false;
      }
      return true;
    });
    if (found) {
      res.witness = std::move(found);
      res.note = "quantized-grid match";
      return res;
    }
  }
  res.exhaustive = true;
  res.note = "no witness on the quantized grid (grid-exhaustive only)";
  return res;
}

MsgReport compute_msg(const FiniteDistribution& D, unsigned d, std::size_t s,
                      std::size_t t_cap, const GridSpec& grid) {
  MsgReport rep;
  rep.phi = phi_bound(d, s, D.support_size());
  std::size_t from = t_cap;
  if (rep.phi < Int(static_cast<unsigned long>(t_cap))) from = rep.phi.get_ui();
  rep.searched_from = from;

  bool all_exhaustive = true;
  for (std::size_t t = from; t >= s && t > 0; --t) {
    auto r = find_msg_witness(D, d, s, t, grid);
    if (r.witness) {
      rep.best_t_with_witness = t;
      rep.witness = std::move(r.witness);
      rep.certified =
          all_exhaustive && Int(static_cast<unsigned long>(from)) == rep.phi;
      return rep;
    }
    if (!r.exhaustive) {
      all_exhaustive = false;
      rep.truncated_at.push_back(t);
    }
  }
  rep.certified = false;
  return rep;
}

}  // namespace sparsetest
