#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "zce/estimators.hpp"

namespace zce {

/// Gamma(a, b) conjugate prior on a Poisson rate; Jeffreys is a = 1/2, b = 0.
struct PriorParams {
  double a = 0.5;
  double b = 0.0;
};

/// BEG(k; n, N, psi): exceedances of N future samples over psi * sigma.
struct BegParams {
  int n = 0;
  int N = 0;
  PsiCoefficient psi;
};

/// Exceedances of N future samples over the m-th largest of n past samples.
struct GvsParams {
  int n = 0;
  int m = 0;
  int N = 0;
};

/// Negative-binomial predictive for the threshold-exceedance count N_u.
struct PredictiveCountParams {
  int n = 0;
  int n_tilde = 0;
  int N = 0;
  PriorParams prior;
};

/// BEG mixed over the predictive N_u.
struct UnconditionalParams {
  int n = 0;
  int n_tilde = 0;
  int N = 0;
  double alpha = 0.0;
  PsiCoefficient psi;
};

using PmfParams = std::variant<BegParams, GvsParams, PredictiveCountParams, UnconditionalParams>;

/// Finite pmf over counts k = 0..size()-1. Immutable after construction.
class ExceedancePmf {
 public:
  ExceedancePmf(std::vector<double> probabilities, PmfParams params);

  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::size_t size() const noexcept { return probabilities_.size(); }
  double operator[](std::size_t k) const { return probabilities_.at(k); }
  const PmfParams& params() const noexcept { return params_; }

  double total() const;
  double mean() const;
  double variance() const;
  /// Raw moment E[K^order].
  double moment(int order) const;
  /// P(K > k).
  double survival(std::size_t k) const;

 private:
  std::vector<double> probabilities_;
  PmfParams params_;
};

/// Half the L1 distance; the shorter vector is padded with zeros.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Columns `k,probability` followed by one `# key=value ...` metadata line.
void write_csv(std::ostream& out, const ExceedancePmf& pmf);

/// Full BEG pmf over k = 0..N. Entries with N - k <= kAlternatingSpan use the
/// finite-difference sum in extended precision, the rest the gamma-mixture
/// integral.
ExceedancePmf beg_pmf(int n, int N, const PsiCoefficient& psi);

inline constexpr int kAlternatingSpan = 40;

/// P(N_alpha = k) from the alternating binomial sum, evaluated with MPFR at a
/// working precision raised until the cancellation is absorbed. Falls back to
/// the quadrature route if that cannot be reached.
double beg_probability_alternating(int n, int N, double psi, int k);

/// P(N_alpha = k) = C(N,k) E[p^k (1-p)^(N-k)], p = exp(-psi G), G ~ Gamma(n, 1),
/// by adaptive Gauss-Kronrod over the log-concave integrand.
double beg_probability_quadrature(int n, int N, double psi, int k);

/// E[N_alpha^order] via Stirling numbers of the second kind; order in 1..8.
double beg_moment(int order, int n, int N, const PsiCoefficient& psi);

/// E (1 - E) + N (N - 1) (2 psi + 1)^(-n).
double beg_variance(int n, int N, const PsiCoefficient& psi);

/// Distribution-free law of exceedances over the m-th largest order statistic:
/// C(m+k-1, k) C(n-m+N-k, N-k) / C(n+N, N).
ExceedancePmf gvs_pmf(int n, int m, int N);

}  // namespace zce
