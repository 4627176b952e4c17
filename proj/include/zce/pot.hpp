#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "zce/estimators.hpp"
#include "zce/exceedance.hpp"

namespace zce {

/// Threshold u and the values strictly above it, largest first.
struct ThresholdSelection {
  double threshold = 0.0;
  std::vector<double> exceedances;
};

/// Blocked observations reduced to the n_tail largest (partial duration
/// series) above the (n_tail+1)-th largest value.
struct PotSeries {
  std::vector<std::vector<double>> observations;  ///< one vector per block
  int n_tail = 0;
  double threshold = 0.0;
  std::vector<double> log_exceedances;  ///< log(x_i / u), all > 0

  int blocks() const noexcept { return static_cast<int>(observations.size()); }
  std::vector<int> block_sizes() const;
  double mean_block_size() const;
  /// Sum of log exceedances: the exponential-domain Sigma.
  double log_sum() const;
};

/// u = (n_tail+1)-th largest of `pooled`; exceedances are the values > u.
/// Throws DataSizeError if pooled.size() <= n_tail, TieError if ties at u
/// leave fewer than n_tail strict exceedances.
ThresholdSelection select_threshold(std::span<const double> pooled, int n_tail);

/// Pools the blocks, selects the threshold and log-transforms the exceedances.
/// Throws DomainError if the threshold is not positive.
PotSeries make_pot_series(std::vector<std::vector<double>> blocks, int n_tail);

/// Reads `block_id,value` rows (optional header); blocks are ordered by first
/// appearance of their id.
std::vector<std::vector<double>> read_blocks_csv(std::istream& in);

/// Tail-index estimate (1/n) sum log(x_i / u).
double hill_estimate(std::span<const double> log_exceedances);

/// NB(n + a, (n_tilde + b) / (n_tilde + N + b)) predictive for the number of
/// threshold exceedances in N future blocks, truncated where the upper
/// tail mass falls below 1e-11 and renormalised.
ExceedancePmf nu_predictive(int n, int n_tilde, int N, PriorParams prior = {});

/// ((n/n_tilde)(1 + 1/(2n)) / (1 - alpha))^(1/n) - 1; alpha is the per-block
/// (annual) quantile level.
PsiCoefficient psi_pot_bayes(int n, int n_tilde, double alpha);

/// ((n/n_tilde) N / (1 - alpha))^(1/n) - 1.
PsiCoefficient psi_pot_ml(int n, int n_tilde, int N, double alpha);

/// u exp(psi * sum log(x_i / u)).
double pot_quantile(const PotSeries& series, const PsiCoefficient& psi);
double pot_quantile(double threshold, double log_sum, const PsiCoefficient& psi);

/// sum_{N_u >= k} BEG(k; n, N_u, psi) NB(N_u; n + 1/2, n_tilde / (n_tilde + N)),
/// over the truncated predictive support.
ExceedancePmf unconditional_exceedance_pmf(int n, int n_tilde, int N, double alpha,
                                           const PsiCoefficient& psi);

}  // namespace zce
