#include "zce/exceedance.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "zce/detail/quadrature.hpp"
#include "zce/detail/numeric.hpp"
#include "zce/error.hpp"

namespace zce {
namespace {

using detail::lchoose;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class MpReal {
 public:
  explicit MpReal(mpfr_prec_t precision) { mpfr_init2(value_, precision); }
  ~MpReal() { mpfr_clear(value_); }
  MpReal(const MpReal&) = delete;
  MpReal& operator=(const MpReal&) = delete;
  mpfr_ptr get() { return value_; }

 private:
  mpfr_t value_;
};

void check_beg_args(int n, int N, double psi) {
  if (n < 1) throw DomainError("training size n must be at least 1");
  if (N < 1) throw DomainError("test size N must be at least 1");
  if (!(psi > 0.0) || !std::isfinite(psi)) throw DomainError("psi must be positive and finite");
}

// One MPFR evaluation of C(N,k) sum_j (-1)^(M-j) C(M,j) (psi (N-j) + 1)^(-n).
// Returns false if the result is nonpositive or has fewer than 60 trusted bits.
bool alternating_at_precision(int n, int N, double psi, int k, mpfr_prec_t precision,
                              double max_term_log2, double& result) {
  const int span = N - k;
  MpReal sum(precision), term(precision), base(precision), coeff(precision);
  mpfr_set_ui(sum.get(), 0, MPFR_RNDN);
  mpfr_set_ui(coeff.get(), 1, MPFR_RNDN);
  for (int j = 0; j <= span; ++j) {
    mpfr_set_d(base.get(), psi, MPFR_RNDN);
    mpfr_mul_ui(base.get(), base.get(), static_cast<unsigned long>(N - j), MPFR_RNDN);
    mpfr_add_ui(base.get(), base.get(), 1, MPFR_RNDN);
    mpfr_pow_si(base.get(), base.get(), -n, MPFR_RNDN);
    mpfr_mul(term.get(), base.get(), coeff.get(), MPFR_RNDN);
    if ((span - j) % 2 == 0) {
      mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    } else {
      mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    }
    // C(M, j+1) = C(M, j) (M - j) / (j + 1); exact while precision covers it.
    mpfr_mul_ui(coeff.get(), coeff.get(), static_cast<unsigned long>(span - j), MPFR_RNDN);
    mpfr_div_ui(coeff.get(), coeff.get(), static_cast<unsigned long>(j + 1), MPFR_RNDN);
  }
  // C(N, k) = C(N, span).
  mpfr_set_ui(coeff.get(), 1, MPFR_RNDN);
  for (int i = 1; i <= span; ++i) {
    mpfr_mul_ui(coeff.get(), coeff.get(), static_cast<unsigned long>(k + i), MPFR_RNDN);
    mpfr_div_ui(coeff.get(), coeff.get(), static_cast<unsigned long>(i), MPFR_RNDN);
  }
  mpfr_mul(sum.get(), sum.get(), coeff.get(), MPFR_RNDN);

  if (mpfr_sgn(sum.get()) <= 0) return false;
  // Absolute rounding error is about 2^(max_term_log2 - precision) per term.
  const double result_log2 = static_cast<double>(mpfr_get_exp(sum.get()));
  const double error_log2 = max_term_log2 - static_cast<double>(precision) + std::log2(span + 2.0);
  if (result_log2 - error_log2 < 60.0) return false;
  result = mpfr_get_d(sum.get(), MPFR_RNDN);
  return true;
}

// Log of the BEG integrand in g and its derivative; log-concave in g.
struct BegIntegrand {
  int n;
  int N;
  double psi;
  int k;
  double log_const;

  double log_value(double g) const {
    if (g < 0.0) return -std::numeric_limits<double>::infinity();
    const int rest = N - k;
    const double psi_g = psi * g;
    double v = log_const - k * psi_g - g;
    if (n > 1) v += (n - 1) * std::log(g);
    if (rest > 0) v += rest * std::log(-std::expm1(-psi_g));
    return v;
  }

  double slope(double g) const {
    const int rest = N - k;
    double d = -k * psi - 1.0;
    if (n > 1) d += (n - 1) / g;
    if (rest > 0) d += rest * psi / std::expm1(psi * g);
    return d;
  }
};

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

ExceedancePmf::ExceedancePmf(std::vector<double> probabilities, PmfParams params)
    : probabilities_(std::move(probabilities)), params_(std::move(params)) {
  if (probabilities_.empty()) throw DomainError("pmf must have at least one entry");
  for (double p : probabilities_) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-12)) throw DomainError("pmf entries must lie in [0, 1]");
  }
}

double ExceedancePmf::total() const { return detail::pairwise_sum(probabilities_); }

double ExceedancePmf::mean() const { return moment(1); }

double ExceedancePmf::variance() const {
  const double mu = mean();
  std::vector<double> terms(probabilities_.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    terms[k] = d * d * probabilities_[k];
  }
  return detail::pairwise_sum(terms);
}

double ExceedancePmf::moment(int order) const {
  if (order < 0) throw DomainError("moment order must be nonnegative");
  std::vector<double> terms(probabilities_.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    terms[k] = std::pow(static_cast<double>(k), order) * probabilities_[k];
  }
  return detail::pairwise_sum(terms);
}

double ExceedancePmf::survival(std::size_t k) const {
  if (k + 1 >= probabilities_.size()) return 0.0;
  return detail::pairwise_sum(std::span<const double>(probabilities_).subspan(k + 1));
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  const std::size_t size = std::max(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double a = k < p.size() ? p[k] : 0.0;
    const double b = k < q.size() ? q[k] : 0.0;
    sum += std::abs(a - b);
  }
  return 0.5 * sum;
}

void write_csv(std::ostream& out, const ExceedancePmf& pmf) {
  out << "k,probability\n";
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    out << k << ',' << format_number(pmf[k]) << '\n';
  }
  auto f = format_number;
  out << "# "
      << std::visit(
             Overloaded{
                 [&](const BegParams& p) {
                   return "kind=beg n=" + std::to_string(p.n) + " N=" + std::to_string(p.N) +
                          " method=" + std::string(to_string(p.psi.method)) + " alpha=" + f(p.psi.alpha) +
                          " psi=" + f(p.psi.value);
                 },
                 [&](const GvsParams& p) {
                   return "kind=gvs n=" + std::to_string(p.n) + " m=" + std::to_string(p.m) +
                          " N=" + std::to_string(p.N);
                 },
                 [&](const PredictiveCountParams& p) {
                   return "kind=nb-predictive n=" + std::to_string(p.n) + " n_tilde=" +
                          std::to_string(p.n_tilde) + " N=" + std::to_string(p.N) + " a=" + f(p.prior.a) +
                          " b=" + f(p.prior.b);
                 },
                 [&](const UnconditionalParams& p) {
                   return "kind=pot-unconditional n=" + std::to_string(p.n) + " n_tilde=" +
                          std::to_string(p.n_tilde) + " N=" + std::to_string(p.N) + " method=" +
                          std::string(to_string(p.psi.method)) + " alpha=" + f(p.alpha) +
                          " psi=" + f(p.psi.value);
                 },
             },
             pmf.params())
      << " mean=" << f(pmf.mean()) << " variance=" << f(pmf.variance()) << '\n';
}

double beg_probability_alternating(int n, int N, double psi, int k) {
  check_beg_args(n, N, psi);
  if (k < 0 || k > N) throw DomainError("k must lie in [0, N]");
  const int span = N - k;
  // Largest |term| (log2) sets the working precision.
  const double log_cnk = lchoose(N, k);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= span; ++j) {
    const double t = log_cnk + lchoose(span, j) - n * std::log1p(psi * (N - j));
    max_log = std::max(max_log, t);
  }
  const double max_log2 = max_log / std::log(2.0);
  auto precision = static_cast<mpfr_prec_t>(std::max(0.0, max_log2) + 128.0);
  double result = 0.0;
  while (precision <= 16384) {
    if (alternating_at_precision(n, N, psi, k, precision, max_log2, result)) return result;
    precision *= 2;
  }
  return beg_probability_quadrature(n, N, psi, k);
}

double beg_probability_quadrature(int n, int N, double psi, int k) {
  check_beg_args(n, N, psi);
  if (k < 0 || k > N) throw DomainError("k must lie in [0, N]");
  BegIntegrand f{n, N, psi, k, lchoose(N, k) - std::lgamma(static_cast<double>(n))};

  // Mode of the log-concave integrand.
  double mode = 0.0;
  const bool interior_mode = (N - k) > 0 || n > 1;
  if (interior_mode) {
    double hi = 1.0;
    while (f.slope(hi) > 0.0) hi *= 2.0;
    mode = detail::bisect([&](double g) { return -f.slope(g); }, 0.0, hi);
  }
  const double peak = f.log_value(mode);

  // Breaks where the log integrand has dropped by fixed amounts below the peak.
  constexpr std::array<double, 6> kDrops{80.0, 40.0, 16.0, 6.0, 2.0, 0.5};
  std::vector<double> breaks;
  if (interior_mode) {
    double lo = 0.0;
    for (double drop : kDrops) {
      const double level = peak - drop;
      if (!(f.log_value(lo) < level)) continue;
      lo = detail::bisect([&](double g) { return f.log_value(g) - level; }, lo, mode);
      breaks.push_back(lo);
    }
  }
  breaks.push_back(mode);
  double hi = mode;
  for (auto it = kDrops.rbegin(); it != kDrops.rend(); ++it) {
    const double level = peak - *it;
    double right = std::max(2.0 * hi, 1.0);
    while (f.log_value(right) > level) right *= 2.0;
    hi = detail::bisect([&](double g) { return level - f.log_value(g); }, hi, right);
    breaks.push_back(hi);
  }

  auto integrand = [&](double g) {
    const double v = f.log_value(g) - peak;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double integral = detail::integrate_panels(integrand, breaks, 1e-13, 14);
  return std::exp(peak) * integral;
}

ExceedancePmf beg_pmf(int n, int N, const PsiCoefficient& psi) {
  check_beg_args(n, N, psi.value);
  std::vector<double> p(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    p[k] = (N - k <= kAlternatingSpan) ? beg_probability_alternating(n, N, psi.value, k)
                                       : beg_probability_quadrature(n, N, psi.value, k);
    p[k] = std::clamp(p[k], 0.0, 1.0);
  }
  return ExceedancePmf(std::move(p), BegParams{n, N, psi});
}

double beg_moment(int order, int n, int N, const PsiCoefficient& psi) {
  if (order < 1 || order > 8) throw DomainError("moment order must be in 1..8");
  if (n < 1 || N < 1) throw DomainError("n and N must be at least 1");
  if (!(psi.value >= 0.0)) throw DomainError("psi must be nonnegative");
  // Stirling numbers of the second kind, S(order, i).
  std::array<std::array<double, 9>, 9> stirling{};
  stirling[0][0] = 1.0;
  for (int r = 1; r <= order; ++r) {
    for (int i = 1; i <= r; ++i) stirling[r][i] = i * stirling[r - 1][i] + stirling[r - 1][i - 1];
  }
  double total = 0.0;
  double falling = 1.0;  // N (N-1) ... (N-i+1)
  for (int i = 1; i <= order; ++i) {
    falling *= static_cast<double>(N - i + 1);
    if (falling <= 0.0) break;
    total += stirling[order][i] * falling * std::exp(-n * std::log1p(i * psi.value));
  }
  return total;
}

double beg_variance(int n, int N, const PsiCoefficient& psi) {
  if (n < 1 || N < 1) throw DomainError("n and N must be at least 1");
  if (!(psi.value >= 0.0)) throw DomainError("psi must be nonnegative");
  const double mean = N * std::exp(-n * std::log1p(psi.value));
  const double pair = static_cast<double>(N) * (N - 1) * std::exp(-n * std::log1p(2.0 * psi.value));
  return mean * (1.0 - mean) + pair;
}

ExceedancePmf gvs_pmf(int n, int m, int N) {
  if (n < 1 || N < 1) throw DomainError("n and N must be at least 1");
  if (m < 1 || m > n) throw DomainError("order-statistic rank m must satisfy 1 <= m <= n");
  std::vector<double> p(static_cast<std::size_t>(N) + 1);
  const double log_total = lchoose(n + N, N);
  for (int k = 0; k <= N; ++k) {
    p[k] = std::exp(lchoose(m + k - 1, k) + lchoose(n - m + N - k, N - k) - log_total);
  }
  return ExceedancePmf(std::move(p), GvsParams{n, m, N});
}

}  // namespace zce
