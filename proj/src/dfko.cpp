#include "sparsetest/dfko.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsetest {

namespace {

double log_d_tilde(unsigned d) {
  // log d is undefined at d = 1 in the tail exponent; log 2 substitutes.
  return d >= 2 ? std::log(static_cast<double>(d)) : std::log(2.0);
}

}  // namespace

Rat rho_min(const FiniteDistribution& d) {
  Rat best;
  bool first = true;
  for (const auto& a : d.atoms()) {
    Rat r = a.prob / (1 - a.prob);
    if (first || r < best) {
      best = r;
      first = false;
    }
  }
  return best / 4;
}

NoiseOperatorSpec NoiseOperatorSpec::validate(const Rat& rho,
                                              const FiniteDistribution& d) {
  if (rho > 1 || rho < -rho_min(d))
    throw std::invalid_argument("rho outside [-rho_min, 1]");
  // Every single-coordinate transition probability must be nonnegative:
  // rho + (1 - rho) alpha_i on the diagonal, (1 - rho) alpha_j off it.
  for (const auto& a : d.atoms()) {
    if (rho + (1 - rho) * a.prob < 0 || (1 - rho) * a.prob < 0)
      throw std::invalid_argument("N_rho has a negative transition probability");
  }
  return NoiseOperatorSpec{rho};
}

MultilinearPolynomial noise_operator(const MultilinearPolynomial& f,
                                     const NoiseOperatorSpec& spec) {
  MultilinearPolynomial out;
  for (const auto& [m, c] : f.terms())
    out.add_term(m, c * rat_pow(spec.rho, static_cast<unsigned long>(m.size())));
  return out;
}

Rat noise_operator_pointwise(const MultilinearPolynomial& f,
                             const NoiseOperatorSpec& spec,
                             const FiniteDistribution& d,
                             const std::vector<std::size_t>& atom_index) {
  // E_{y ~ N_rho(x)} f(y): coordinates of y are independent given x, so each
  // monomial contributes the product of per-coordinate conditional means.
  const auto vars = f.active_variables();
  if (atom_index.size() != vars.size())
    throw std::invalid_argument("atom_index must match active variables");
  std::vector<Rat> cond_mean(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    Rat mean = 0;
    for (std::size_t a = 0; a < d.atoms().size(); ++a) {
      Rat trans = (1 - spec.rho) * d.atoms()[a].prob;
      if (a == atom_index[j]) trans += spec.rho;
      mean += trans * d.atoms()[a].value;
    }
    cond_mean[j] = mean;
  }
  Rat total = 0;
  for (const auto& [m, c] : f.terms()) {
    Rat prod = c;
    for (uint32_t v : m) {
      std::size_t j = static_cast<std::size_t>(
          std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
      prod *= cond_mean[j];
    }
    total += prod;
  }
  return total;
}

bool noise_operator_routes_agree(const MultilinearPolynomial& f,
                                 const NoiseOperatorSpec& spec,
                                 const FiniteDistribution& d) {
  const auto vars = f.active_variables();
  const std::size_t k = vars.size();
  const std::size_t supp = d.support_size();
  auto fourier = noise_operator(f, spec);

  std::vector<std::size_t> idx(k, 0);
  while (true) {
    std::map<uint32_t, Rat> assign;
    for (std::size_t j = 0; j < k; ++j)
      assign[vars[j]] = d.atoms()[idx[j]].value;
    if (fourier.evaluate_exact(assign) !=
        noise_operator_pointwise(f, spec, d, idx))
      return false;
    std::size_t pos = 0;
    while (pos < k && ++idx[pos] == supp) idx[pos++] = 0;
    if (pos == k) break;
  }
  return true;
}

HypercontractivityCheck hypercontractive_check(const MultilinearPolynomial& f,
                                               unsigned q,
                                               const FiniteDistribution& d) {
  if (q <= 2 || q % 2 != 0)
    throw std::invalid_argument("q must be an even integer > 2");
  auto rv = output_distribution(f, d);
  unsigned deg = std::max(1u, f.degree());
  HypercontractivityCheck out;
  out.lhs = rv.raw_moment(q);  // q even, so E|f|^q = E f^q
  // ceiling^2 = (q-1)^{dq} lambda^{2d - dq} (E f^2)^q  (integer exponents)
  Rat ef2 = rv.raw_moment(2);
  Rat rhs2 = rat_pow(Rat(q - 1), deg * q) * rat_pow(ef2, q);
  long lam_exp = 2L * deg - static_cast<long>(deg) * q;
  const Rat lambda = d.min_prob();
  if (lam_exp >= 0)
    rhs2 *= rat_pow(lambda, static_cast<unsigned long>(lam_exp));
  else
    rhs2 /= rat_pow(lambda, static_cast<unsigned long>(-lam_exp));
  out.rhs_squared = rhs2;
  out.rhs = std::sqrt(to_double(rhs2));
  out.holds = out.lhs * out.lhs <= rhs2;
  return out;
}

std::vector<double> chebyshev_extrema(unsigned d) {
  if (d < 1) throw std::invalid_argument("degree must be >= 1");
  std::vector<double> pts(d + 1);
  for (unsigned j = 0; j <= d; ++j)
    pts[j] = std::cos(j * M_PI / static_cast<double>(d));
  return pts;
}

TailTheoremReport verify_tail_theorem(const MultilinearPolynomial& f,
                                      const std::vector<uint32_t>& J,
                                      double delta, double t, double C,
                                      const FiniteDistribution& d) {
  TailTheoremReport rep;
  unsigned deg = std::max(1u, f.degree());

  Rat outside = 0;
  for (const auto& [m, c] : f.terms()) {
    bool escapes = false;
    for (uint32_t v : m)
      if (!std::binary_search(J.begin(), J.end(), v)) {
        escapes = true;
        break;
      }
    if (escapes) outside += c * c;
  }
  rep.cond1 = to_double(outside) >= delta;

  double influence_cap = delta * delta / (t * t) * std::pow(C, -(double)deg);
  rep.cond2 = t >= std::sqrt(delta);
  for (uint32_t v : f.active_variables()) {
    if (std::binary_search(J.begin(), J.end(), v)) continue;
    if (to_double(influence(f, v)) > influence_cap) rep.cond2 = false;
  }

  auto rv = output_distribution(f, d);
  rep.exact_tail = tail_prob_abs_geq_sqrt(rv, rat_from_double(t * t));
  rep.bound = std::exp(-C * t * t * deg * deg * log_d_tilde(deg) / delta);
  rep.conclusion_holds = to_double(rep.exact_tail) >= rep.bound;
  return rep;
}

FarSparseTailReport far_sparse_tail_check(const MultilinearPolynomial& p,
                                          std::size_t s, std::size_t T,
                                          double eps, double K, double C,
                                          const FiniteDistribution& d) {
  FarSparseTailReport rep;
  unsigned deg = std::max(1u, p.degree());
  const double M = to_double(d.max_abs_value());

  rep.far_enough =
      to_double(distance_to_sparsity_squared(p, T)) >= eps * eps * (1 - 1e-12);

  auto rv = output_distribution(p, d);
  // threshold^2 = 4 K^2 M^{2d} s
  Rat thr2 = rat_from_double(4 * K * K) *
             rat_pow(rat_from_double(M * M), deg) *
             Rat(static_cast<unsigned long>(s));
  rep.exact_tail = tail_prob_abs_geq_sqrt(rv, thr2);
  rep.log_q_bound = -4 * C * K * K * K * std::pow(M * M, deg) * s * deg * deg *
                    log_d_tilde(deg) / eps;
  rep.q_bound = std::exp(rep.log_q_bound);
  double tail_d = to_double(rep.exact_tail);
  rep.tail_meets_bound =
      tail_d > 0 && std::log(tail_d) >= rep.log_q_bound - 1e-12;

  // J from the far-from-sparse claim: coordinates with influence above
  // kappa = e K^2 / T^{1/d}.
  double kappa =
      std::exp(1.0) * K * K / std::pow(static_cast<double>(T), 1.0 / deg);
  for (uint32_t v : p.active_variables())
    if (to_double(influence(p, v)) > kappa) rep.J.push_back(v);
  rep.j_size_ok = static_cast<double>(rep.J.size()) <= deg * K * K / kappa;

  double delta = eps / K;
  Rat outside = 0;
  for (const auto& [m, c] : p.terms()) {
    bool escapes = false;
    for (uint32_t v : m)
      if (!std::binary_search(rep.J.begin(), rep.J.end(), v)) {
        escapes = true;
        break;
      }
    if (escapes) outside += c * c;
  }
  rep.cond1 = to_double(outside) >= delta * (1 - 1e-12);
  double t = 2 * K * std::pow(M, deg) * std::sqrt(static_cast<double>(s));
  double cap = delta * delta / (t * t) * std::pow(C, -(double)deg);
  rep.cond2 = true;
  for (uint32_t v : p.active_variables()) {
    if (std::binary_search(rep.J.begin(), rep.J.end(), v)) continue;
    if (to_double(influence(p, v)) > cap * (1 + 1e-12)) rep.cond2 = false;
  }
  return rep;
}

double calibrate_dfko_constant(
    const std::vector<MultilinearPolynomial>& far_instances, std::size_t s,
    double eps, double K, const FiniteDistribution& d) {
  if (far_instances.empty())
    throw std::invalid_argument("need at least one far instance");
  const double M = to_double(d.max_abs_value());
  double worst = 1.0;  // smallest exact tail across the family
  unsigned deg = 1;
  for (const auto& p : far_instances) {
    deg = std::max(deg, p.degree());
    auto rv = output_distribution(p, d);
    unsigned pd = std::max(1u, p.degree());
    Rat thr2 = rat_from_double(4 * K * K) *
               rat_pow(rat_from_double(M * M), pd) *
               Rat(static_cast<unsigned long>(s));
    double tail = to_double(tail_prob_abs_geq_sqrt(rv, thr2));
    if (tail <= 0) throw std::domain_error("a far instance has zero tail");
    worst = std::min(worst, tail);
  }
  // exp(-4 C K^3 M^{2d} s d^2 log~(d)/eps) <= worst  <=>  C >= C*
  double denom =
      4 * K * K * K * std::pow(M * M, deg) * s * deg * deg * log_d_tilde(deg);
  return eps * std::log(1.0 / worst) / denom;
}

}  // namespace sparsetest
