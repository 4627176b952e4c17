#include "zce/pot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <string>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "zce/detail/numeric.hpp"
#include "zce/detail/quadrature.hpp"
#include "zce/error.hpp"

namespace zce {
namespace {

constexpr double kTruncationMass = 1e-11;
constexpr std::size_t kHardCap = 1'000'000;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie strictly between 0 and 1");
}

void check_counts(int n, int n_tilde) {
  if (n < 1) throw DomainError("tail count n must be at least 1");
  if (n_tilde < 1) throw DomainError("block count n_tilde must be at least 1");
}

// ((numerator) / (1 - alpha))^(1/n) - 1 from the log of the numerator.
PsiCoefficient pot_psi(double log_numerator, int n, double alpha, Method method) {
  const double log_ratio = log_numerator - std::log1p(-alpha);
  if (!(log_ratio > 0.0)) {
    throw QuantileBelowThresholdError(
        "requested quantile lies below the threshold's own percentile; choose a smaller n_tail");
  }
  return {std::expm1(log_ratio / n), method, alpha, n};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<int> PotSeries::block_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(observations.size());
  for (const auto& block : observations) sizes.push_back(static_cast<int>(block.size()));
  return sizes;
}

double PotSeries::mean_block_size() const {
  if (observations.empty()) return 0.0;
  double total = 0.0;
  for (const auto& block : observations) total += static_cast<double>(block.size());
  return total / static_cast<double>(observations.size());
}

double PotSeries::log_sum() const { return detail::pairwise_sum(log_exceedances); }

ThresholdSelection select_threshold(std::span<const double> pooled, int n_tail) {
  if (n_tail < 1) throw DomainError("n_tail must be at least 1");
  if (pooled.size() <= static_cast<std::size_t>(n_tail)) {
    throw DataSizeError("need more than n_tail = " + std::to_string(n_tail) + " observations, got " +
                        std::to_string(pooled.size()));
  }
  std::vector<double> sorted(pooled.begin(), pooled.end());
  const auto cut = sorted.begin() + n_tail;
  std::nth_element(sorted.begin(), cut, sorted.end(), std::greater<>());
  const double u = *cut;
  std::vector<double> above;
  above.reserve(static_cast<std::size_t>(n_tail));
  for (auto it = sorted.begin(); it != cut; ++it) {
    if (*it > u) above.push_back(*it);
  }
  if (above.size() < static_cast<std::size_t>(n_tail)) {
    throw TieError("ties at the threshold leave " + std::to_string(above.size()) +
                   " strict exceedances, fewer than n_tail = " + std::to_string(n_tail));
  }
  std::sort(above.begin(), above.end(), std::greater<>());
  return {u, std::move(above)};
}

PotSeries make_pot_series(std::vector<std::vector<double>> blocks, int n_tail) {
  std::vector<double> pooled;
  for (const auto& block : blocks) pooled.insert(pooled.end(), block.begin(), block.end());
  auto selection = select_threshold(pooled, n_tail);
  if (!(selection.threshold > 0.0)) {
    throw DomainError("threshold must be positive for the log-ratio transform; choose a smaller n_tail");
  }
  PotSeries series;
  series.observations = std::move(blocks);
  series.n_tail = n_tail;
  series.threshold = selection.threshold;
  series.log_exceedances.reserve(selection.exceedances.size());
  for (double x : selection.exceedances) series.log_exceedances.push_back(std::log(x / selection.threshold));
  return series;
}

std::vector<std::vector<double>> read_blocks_csv(std::istream& in) {
  std::vector<std::vector<double>> blocks;
  std::map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected block_id,value");
    }
    const std::string id(trim(view.substr(0, comma)));
    const std::string_view text = trim(view.substr(comma + 1));
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      if (line_no == 1 && blocks.empty()) continue;  // header
      throw ParseError("line " + std::to_string(line_no) + ": value '" + std::string(text) +
                       "' is not a number");
    }
    auto [it, inserted] = index.try_emplace(id, blocks.size());
    if (inserted) blocks.emplace_back();
    blocks[it->second].push_back(value);
  }
  if (blocks.empty()) throw ParseError("no observations in input");
  return blocks;
}

double hill_estimate(std::span<const double> log_exceedances) {
  if (log_exceedances.empty()) throw DomainError("no exceedances");
  return detail::pairwise_sum(log_exceedances) / static_cast<double>(log_exceedances.size());
}

ExceedancePmf nu_predictive(int n, int n_tilde, int N, PriorParams prior) {
  check_counts(n, n_tilde);
  if (N < 1) throw DomainError("future block count N must be at least 1");
  if (!(prior.a >= 0.0 && prior.b >= 0.0)) throw DomainError("prior parameters must be nonnegative");
  const double r = n + prior.a;
  const double q = (n_tilde + prior.b) / (n_tilde + N + prior.b);
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double lgamma_r = std::lgamma(r);

  // Cut where the upper tail drops below kTruncationMass; a running sum of the
  // terms cannot resolve that tail once the support reaches ~1e5.
  const double last = boost::math::quantile(
      boost::math::complement(boost::math::negative_binomial_distribution<double>(r, q), kTruncationMass));
  if (!(last < static_cast<double>(kHardCap))) {
    throw TruncationError("negative-binomial predictive exceeds 1e6 terms");
  }
  std::vector<double> pmf(static_cast<std::size_t>(last) + 1);
  for (std::size_t j = 0; j < pmf.size(); ++j) {
    const double jd = static_cast<double>(j);
    pmf[j] = std::exp(std::lgamma(jd + r) - lgamma_r - std::lgamma(jd + 1.0) + r * log_q + jd * log_1mq);
  }
  const double mass = detail::pairwise_sum(pmf);
  for (double& p : pmf) p /= mass;
  return ExceedancePmf(std::move(pmf), PredictiveCountParams{n, n_tilde, N, prior});
}

PsiCoefficient psi_pot_bayes(int n, int n_tilde, double alpha) {
  check_counts(n, n_tilde);
  check_alpha(alpha);
  // (n/n_tilde)(1 + 1/(2n)) = (n + 1/2)/n_tilde
  return pot_psi(std::log(n + 0.5) - std::log(static_cast<double>(n_tilde)), n, alpha, Method::PotBayes);
}

PsiCoefficient psi_pot_ml(int n, int n_tilde, int N, double alpha) {
  check_counts(n, n_tilde);
  check_alpha(alpha);
  if (N < 1) throw DomainError("future block count N must be at least 1");
  return pot_psi(std::log(static_cast<double>(n)) - std::log(static_cast<double>(n_tilde)) +
                     std::log(static_cast<double>(N)),
                 n, alpha, Method::PotML);
}

double pot_quantile(double threshold, double log_sum, const PsiCoefficient& psi) {
  if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
  if (!(log_sum >= 0.0)) throw DomainError("sum of log exceedances must be nonnegative");
  return threshold * std::exp(psi.value * log_sum);
}

double pot_quantile(const PotSeries& series, const PsiCoefficient& psi) {
  return pot_quantile(series.threshold, series.log_sum(), psi);
}

ExceedancePmf unconditional_exceedance_pmf(int n, int n_tilde, int N, double alpha,
                                           const PsiCoefficient& psi) {
  check_counts(n, n_tilde);
  check_alpha(alpha);
  if (!(psi.value > 0.0) || !std::isfinite(psi.value)) throw DomainError("psi must be positive and finite");
  const ExceedancePmf nb = nu_predictive(n, n_tilde, N, PriorParams{0.5, 0.0});
  const auto weights = nb.probabilities();
  const std::size_t cap = weights.size() - 1;

  // Log weights and successive ratios in closed form so underflowed entries
  // do not poison the recurrence below.
  const double r = n + 0.5;
  const double q = static_cast<double>(n_tilde) / (n_tilde + N);
  const double log_mass = std::log(detail::pairwise_sum(weights));
  std::vector<double> log_nb(weights.size());
  std::vector<double> nb_ratio(weights.size(), 0.0);  // NB(j+1) / NB(j)
  for (std::size_t j = 0; j <= cap; ++j) {
    const double jd = static_cast<double>(j);
    log_nb[j] = std::lgamma(jd + r) - std::lgamma(r) - std::lgamma(jd + 1.0) + r * std::log(q) +
                jd * std::log1p(-q) - log_mass;
    nb_ratio[j] = (jd + r) / (jd + 1.0) * (1.0 - q);
  }

  const double lgamma_n = std::lgamma(static_cast<double>(n));
  const double g_max = boost::math::gamma_q_inv(static_cast<double>(n), 1e-17);
  std::vector<double> breaks{0.0};
  for (int i = 64; i >= 0; --i) breaks.push_back(std::ldexp(g_max, -i));

  std::vector<double> pmf(cap + 1, 0.0);
  for (std::size_t k = 0; k <= cap; ++k) {
    const double kd = static_cast<double>(k);
    // Gamma(n,1)-weighted sum over N_u >= k of NB(N_u) Bin(k; N_u, p), p = exp(-psi g).
    auto integrand = [&](double g) {
      if (g <= 0.0) return 0.0;
      const double psi_g = psi.value * g;
      const double one_minus_p = -std::expm1(-psi_g);
      double log_head = log_nb[k] - kd * psi_g + (n - 1) * std::log(g) - g - lgamma_n;
      double term = 1.0;
      double sum = 1.0;
      for (std::size_t j = k; j < cap; ++j) {
        term *= nb_ratio[j] * static_cast<double>(j + 1) / static_cast<double>(j + 1 - k) * one_minus_p;
        sum += term;
        if (sum > 1e280) {
          log_head += std::log(sum);
          term /= sum;
          sum = 1.0;
        }
      }
      const double v = log_head + std::log(sum);
      return v < -745.0 ? 0.0 : std::exp(v);
    };
    pmf[k] = std::clamp(detail::integrate_panels(integrand, breaks, 1e-12), 0.0, 1.0);
  }
  return ExceedancePmf(std::move(pmf), UnconditionalParams{n, n_tilde, N, alpha, psi});
}

}  // namespace zce
