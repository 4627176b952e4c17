#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zce/distributions.hpp"
#include "zce/estimators.hpp"

namespace zce {

enum class ExperimentKind { CoverageVsN, BegComparison, IntervalSweep, SasSweep, DistributionTable };

enum class Estimator { Bayes, ML, GvS };

/// Per-replication multiplier on the data's rate parameter.
enum class LambdaPrior {
  Fixed,       ///< always 1
  Gamma,       ///< Gamma(shape 2, rate 2)
  LogUniform,  ///< log-uniform on [0.1, 10]
};

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Estimator estimator);
std::string_view to_string(LambdaPrior prior);
ExperimentKind parse_experiment_kind(std::string_view text);
Estimator parse_estimator(std::string_view text);
LambdaPrior parse_lambda_prior(std::string_view text);

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::CoverageVsN;
  DistributionSpec data = Exponential{};
  /// DistributionTable: the data families; SasSweep builds them from `shapes`.
  std::vector<DistributionSpec> distributions;
  std::vector<double> shapes;
  /// BegComparison only: run the blocked threshold pipeline instead of
  /// estimating from all n training values.
  bool pot = false;
  int n_tilde = 50;
  int block_size = 100;
  /// Training sizes for unconditional runs, tail counts for threshold runs.
  std::vector<int> n_values{50};
  /// Future samples (unconditional) or future blocks (threshold runs).
  /// Zero in CoverageVsN means round(1 / (1 - alpha)).
  int N = 100;
  /// IntervalSweep reads these as bin edges, the last bin running to 1.
  std::vector<double> alphas{0.99};
  std::vector<Estimator> estimators{Estimator::Bayes};
  int gvs_rank = 1;
  LambdaPrior prior = LambdaPrior::Fixed;
  std::uint64_t replications = 10000;
  std::uint64_t seed = 1;
  bool seed_given = false;  ///< set when a config file supplied `seed`
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Mean and spread of one per-replication quantity. Standard errors are zero
/// when fewer than two replications were run.
struct SampleSummary {
  std::uint64_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se_mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double se_sd = std::numeric_limits<double>::quiet_NaN();
};

SampleSummary summarize_sample(std::span<const double> values);

struct CellResult {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  std::string distribution;
  std::string estimator;
  int n = 0;
  int n_tilde = 0;
  int N = 0;
  double alpha = kMissing;
  double alpha_upper = kMissing;
  double shape = kMissing;
  double psi = kMissing;
  std::uint64_t replications = 0;

  SampleSummary exceedances;
  double p_more_than_one = kMissing;
  double se_p_more_than_one = kMissing;
  double analytic_mean = kMissing;

  SampleSummary tail_index;
  SampleSummary estimate;
  double true_quantile = kMissing;

  /// histogram[k] = replications with exactly k exceedances.
  std::vector<std::uint64_t> histogram;
  std::vector<double> reference_pmf;
  double tv = kMissing;
  std::vector<double> unconditional_pmf;
  double tv_unconditional = kMissing;

  std::vector<double> frequencies() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;
};

/// Simulated and analytic E[N_alpha] against the training size n.
ExperimentResult run_coverage_vs_n(const ExperimentConfig& config);
/// Exceedance-count histograms against the BEG (and GvS) pmfs.
ExperimentResult run_beg_comparison(const ExperimentConfig& config);
/// Exceedances falling between consecutive quantile estimates.
ExperimentResult run_interval_sweep(const ExperimentConfig& config);
/// Threshold pipeline on symmetric stable data over a grid of exponents.
ExperimentResult run_sas_sweep(const ExperimentConfig& config);
/// Threshold pipeline over several data families and tail counts.
ExperimentResult run_distribution_table(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Experiments described by an INI file, one section per experiment.
std::vector<ExperimentConfig> read_experiment_configs(std::istream& in);

/// Built-in configurations for `figure` in {1, 2, 4, 5, 6, table1}.
std::vector<ExperimentConfig> reproduction_configs(std::string_view figure, bool quick);
std::vector<std::string_view> reproduction_ids();

/// One row per cell.
void write_cells_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
/// One row per (cell, k) with empirical and reference probabilities.
void write_histogram_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
/// Run metadata and per-cell statistics.
void write_summary_json(std::ostream& out, const std::vector<ExperimentResult>& results);

/// `git describe` of the source tree the library was built from.
std::string_view build_version();

}  // namespace zce
