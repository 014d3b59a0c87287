#include "sparsetest/coarse.hpp"

#include <cmath>
#include <sstream>

namespace sparsetest {

namespace {

double log_d_tilde(unsigned d) {
  return d >= 2 ? std::log(static_cast<double>(d)) : std::log(2.0);
}

}  // namespace

double log2_upsilon(double K, std::size_t s, unsigned d, double eps, double C,
                    double M) {
  if (K < 1 || s == 0 || d == 0 || eps <= 0 || C <= 0 || M <= 0)
    throw std::invalid_argument("upsilon arguments must be positive (K >= 1)");
  double base = std::log2(4 * std::exp(1.0)) + 6 * std::log2(K) +
                2 * d * std::log2(M) + d * std::log2(C) +
                std::log2(static_cast<double>(s)) - 2 * std::log2(eps);
  return d * base;
}

uint64_t upsilon(double K, std::size_t s, unsigned d, double eps, double C,
                 double M) {
  double lg = log2_upsilon(K, s, d, eps, C, M);
  if (lg >= 62) {
    std::ostringstream msg;
    msg << "upsilon overflows: log2 = " << lg;
    throw OverflowError(msg.str(), lg);
  }
  return static_cast<uint64_t>(std::ceil(std::exp2(lg) - 1e-9));
}

double sparse_value_bound(std::size_t s, double K, double M, unsigned d) {
  return K * std::pow(M, static_cast<double>(d)) *
         std::sqrt(static_cast<double>(s));
}

double log_tail_prob_bound(double K, double M, std::size_t s, unsigned d,
                           double eps, double C) {
  return -4 * C * K * K * K * std::pow(M * M, static_cast<double>(d)) *
         static_cast<double>(s) * d * d * log_d_tilde(d) / eps;
}

double tail_prob_bound(double K, double M, std::size_t s, unsigned d,
                       double eps, double C) {
  return std::exp(log_tail_prob_bound(K, M, s, d, eps, C));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::sparse:
      return "s-sparse";
    case Verdict::far:
      return "far-from-T-sparse";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

bool moment_below_threshold(const DiscreteRV& rv, const Rat& c2,
                            const Rat& factor, long double ell) {
  if (c2 <= 0) throw std::invalid_argument("threshold must be positive");
  if (ell > 9.2e18L) {
    // m_ell / c^ell diverges iff some atom lies strictly above the ceiling;
    // otherwise the ratio sum is at most 1 < factor. (Parity is immaterial
    // up here and not even representable.)
    for (const auto& a : rv.atoms())
      if (a.value * a.value > c2) return false;
    return true;
  }
  if (ell < 2 || fmodl(ell, 2.0L) != 0.0L)
    throw std::invalid_argument("even moment order required");
  const unsigned long half = static_cast<unsigned long>(ell / 2.0L);

  if (ell <= 4096) {
    Rat m = 0;
    for (const auto& a : rv.atoms())
      m += a.prob * rat_pow(a.value * a.value, half);
    return m <= factor * rat_pow(c2, half);
  }

  // 512-bit floating comparison of sum p_i (v_i^2/c^2)^{ell/2} vs factor.
  mpf_class sum(0, 512);
  for (const auto& a : rv.atoms()) {
    Rat ratio = a.value * a.value / c2;
    mpf_class term(0, 512);
    mpf_set_q(term.get_mpf_t(), ratio.get_mpq_t());
    mpf_pow_ui(term.get_mpf_t(), term.get_mpf_t(), half);
    mpf_class pr(0, 512);
    mpf_set_q(pr.get_mpf_t(), a.prob.get_mpq_t());
    sum += term * pr;
  }
  mpf_class f(0, 512);
  mpf_set_q(f.get_mpf_t(), factor.get_mpq_t());
  mpf_class margin = (sum - f);
  mpf_class scale = f >> 200;  // relative margin 2^-200
  if (margin < scale && margin > -scale)
    throw std::logic_error(
        "moment/threshold comparison too close for 512-bit resolution");
  return sum <= f;
}

namespace {

CoarseReport run_exact(const ExactMomentOracle& oracle, const CoarseConfig& cfg,
                       const FiniteDistribution& D, CoarseReport rep) {
  rep.exact_mode = true;
  DiscreteRV rv;
  try {
    rv = output_distribution(oracle.p, D, cfg.enumeration);
  } catch (const BudgetExceeded& e) {
    rep.verdict = Verdict::inconclusive;
    rep.note = e.what();
    return rep;
  }
  const double M = to_double(D.max_abs_value());
  Rat c2 = rat_from_double(cfg.K * cfg.K) *
           rat_pow(D.max_abs_value() * D.max_abs_value(), cfg.d) *
           Rat(static_cast<unsigned long>(cfg.s));
  bool below = moment_below_threshold(rv, c2, make_rat(3, 2), rep.required_order);
  rep.verdict = below ? Verdict::sparse : Verdict::far;
  if (rep.required_order <= 4096) {
    Rat m = rv.raw_moment(static_cast<unsigned>(rep.required_order));
    rep.estimate = to_double(m);
    rep.estimate_log2 =
        m > 0 ? mpz_sizeinbase(Rat(m).get_num().get_mpz_t(), 2) -
                    static_cast<double>(
                        mpz_sizeinbase(Rat(m).get_den().get_mpz_t(), 2))
              : 0;
  } else {
    rep.estimate = std::numeric_limits<double>::quiet_NaN();
    rep.note += "order too large to materialize the exact moment; "
                "comparison decided by atom-ratio analysis";
  }
  (void)M;
  return rep;
}

CoarseReport run_sampled(const SamplingOracle& oracle, const CoarseConfig& cfg,
                         const FiniteDistribution& D, CoarseReport rep) {
  rep.exact_mode = false;
  const double M = to_double(D.max_abs_value());
  const double ceiling = sparse_value_bound(cfg.s, cfg.K, M, cfg.d);
  const double ell = static_cast<double>(rep.required_order);
  const double ceil_pow = std::pow(ceiling, ell);

  EstimatorConfig est = oracle.estimator;
  est.tau = 0.1 * ceil_pow;
  est.delta = cfg.delta;
  try {
    auto estimate = estimate_clean_moments(
        oracle.p, D, oracle.noise, static_cast<unsigned>(rep.required_order),
        est, cfg.K, oracle.seed);
    rep.estimate = estimate.value;
    rep.samples_used = estimate.samples_used;
    rep.verdict = estimate.value <= 1.5 * ceil_pow ? Verdict::sparse
                                                   : Verdict::far;
  } catch (const SampleBudgetError& e) {
    rep.verdict = Verdict::inconclusive;
    rep.note = e.what();
  }
  return rep;
}

}  // namespace

CoarseReport coarse_test(const MomentOracle& oracle, const CoarseConfig& cfg,
                         const FiniteDistribution& D) {
  CoarseReport rep;
  const double M = to_double(D.max_abs_value());
  rep.log_q = log_tail_prob_bound(cfg.K, M, cfg.s, cfg.d, cfg.eps, cfg.C_dfko);
  rep.q = std::exp(rep.log_q);

  if (cfg.manual_order) {
    if (*cfg.manual_order < 2 || *cfg.manual_order % 2 != 0)
      throw std::invalid_argument("manual moment order must be even and >= 2");
    rep.required_order = static_cast<long double>(*cfg.manual_order);
  } else {
    // smallest even integer strictly above log2(1/(2q)) = -log_q/ln2 - 1
    long double x = -static_cast<long double>(rep.log_q) / std::log(2.0L) - 1;
    long double ell = floorl(x / 2) * 2 + 2;
    if (ell < 2) ell = 2;
    rep.required_order = ell;
  }
  if (rep.required_order < 9.2e18L)
    rep.order = static_cast<uint64_t>(rep.required_order);

  const double ceiling = sparse_value_bound(cfg.s, cfg.K, M, cfg.d);
  rep.threshold_log2 = std::log2(1.5) +
                       static_cast<double>(rep.required_order) *
                           std::log2(ceiling);

  const long double cap = oracle_is_exact(oracle)
                              ? cfg.exact_order_cap
                              : static_cast<long double>(cfg.sampled_order_cap);
  if (rep.required_order > cap) {
    rep.verdict = Verdict::inconclusive;
    std::ostringstream note;
    note << "required moment order " << static_cast<double>(rep.required_order)
         << " exceeds the cap " << static_cast<double>(cap)
         << "; refusing rather than degrading";
    rep.note = note.str();
    return rep;
  }

  if (auto* e = std::get_if<ExactMomentOracle>(&oracle))
    return run_exact(*e, cfg, D, rep);
  return run_sampled(std::get<SamplingOracle>(oracle), cfg, D, rep);
}

}  // namespace sparsetest
