#include "zce/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "zce/detail/numeric.hpp"
#include "zce/error.hpp"
#include "zce/exceedance.hpp"
#include "zce/pot.hpp"

namespace zce {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t group_seed(std::uint64_t seed, std::uint64_t group) {
  return mix64(seed ^ mix64(group + 0x9e3779b97f4a7c15ULL));
}

unsigned worker_count(unsigned requested, std::uint64_t work) {
  const unsigned available = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::clamp<std::uint64_t>(work, 1, available));
}

// Row r of the result holds the `width` values written by replication r, which
// draws from RandomStream::derive(stream_seed, r). The layout does not depend
// on the number of threads.
template <class MakeWorker>
std::vector<double> run_replications(std::uint64_t stream_seed, std::uint64_t replications,
                                     std::size_t width, unsigned threads, MakeWorker make_worker) {
  std::vector<double> rows(replications * width, kNaN);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto job = [&](std::uint64_t begin, std::uint64_t end) {
    try {
      auto worker = make_worker();
      for (std::uint64_t r = begin; r < end; ++r) {
        RandomStream rng = RandomStream::derive(stream_seed, r);
        worker(rng, std::span<double>(rows.data() + r * width, width));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const unsigned workers = worker_count(threads, replications);
  if (workers == 1) {
    job(0, replications);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(job, replications * w / workers, replications * (w + 1) / workers);
    }
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<double> column(const std::vector<double>& rows, std::size_t width, std::size_t j) {
  std::vector<double> out(rows.size() / width);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = rows[r * width + j];
  return out;
}

void fill_count_statistics(CellResult& cell, std::span<const double> counts) {
  cell.replications = counts.size();
  cell.exceedances = summarize_sample(counts);
  std::vector<double> more(counts.size());
  std::size_t max_k = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    more[r] = counts[r] > 1.0 ? 1.0 : 0.0;
    max_k = std::max(max_k, static_cast<std::size_t>(counts[r]));
  }
  const double R = static_cast<double>(counts.size());
  const double p = detail::pairwise_sum(more) / R;
  cell.p_more_than_one = p;
  cell.se_p_more_than_one = counts.size() > 1 ? std::sqrt(p * (1.0 - p) / R) : 0.0;
  cell.histogram.assign(max_k + 1, 0);
  for (double c : counts) ++cell.histogram[static_cast<std::size_t>(c)];
}

void attach_reference(CellResult& cell, const ExceedancePmf& pmf) {
  const auto p = pmf.probabilities();
  cell.reference_pmf.assign(p.begin(), p.end());
  cell.tv = total_variation(cell.frequencies(), p);
}

void attach_unconditional(CellResult& cell, const ExceedancePmf& pmf) {
  const auto p = pmf.probabilities();
  cell.unconditional_pmf.assign(p.begin(), p.end());
  cell.tv_unconditional = total_variation(cell.frequencies(), p);
}

void check_common(const ExperimentConfig& config) {
  if (config.replications < 1) throw DomainError("replications must be at least 1");
  if (config.n_values.empty()) throw DomainError("at least one n value is required");
  for (int n : config.n_values) {
    if (n < 1) throw DomainError("n values must be positive");
  }
  if (config.alphas.empty()) throw DomainError("at least one alpha is required");
  for (double a : config.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("alpha values must lie strictly between 0 and 1");
  }
  if (config.estimators.empty()) throw DomainError("at least one estimator is required");
  if (config.N < 0) throw DomainError("N must be nonnegative");
}

// Exponential-domain view of the data: the transform h and the rate of h(Z).
struct ExponentialModel {
  TransformSpec transform;
  double rate = 1.0;
};

ExponentialModel exponential_model(const DistributionSpec& spec) {
  validate(spec);
  if (const auto* e = std::get_if<Exponential>(&spec)) return {transform::Identity{}, e->rate};
  if (const auto* r = std::get_if<Rayleigh>(&spec)) {
    return {transform::Square{}, 1.0 / (2.0 * r->sigma * r->sigma)};
  }
  if (const auto* p = std::get_if<StandardPareto>(&spec)) return {transform::LogRatio{p->u}, 1.0 / p->xi};
  throw DomainError("unconditional runs need exp, rayleigh or stdpar data, got " + to_string(spec));
}

double rate_multiplier(LambdaPrior prior, RandomStream& rng) {
  switch (prior) {
    case LambdaPrior::Fixed:
      return 1.0;
    case LambdaPrior::Gamma:
      return 0.5 * rng.gamma(2.0);
    case LambdaPrior::LogUniform:
      return std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
  }
  return 1.0;
}

PsiCoefficient unconditional_psi(Estimator estimator, int n, double alpha) {
  switch (estimator) {
    case Estimator::Bayes:
      return psi_bayes(n, alpha);
    case Estimator::ML:
      return psi_ml(n, alpha);
    case Estimator::GvS:
      break;
  }
  throw DomainError("GvS has no psi coefficient");
}

PsiCoefficient threshold_psi(Estimator estimator, int n_tail, int n_tilde, int N, double alpha) {
  switch (estimator) {
    case Estimator::Bayes:
      return psi_pot_bayes(n_tail, n_tilde, alpha);
    case Estimator::ML:
      return psi_pot_ml(n_tail, n_tilde, N, alpha);
    case Estimator::GvS:
      break;
  }
  throw DomainError("GvS is only available for unconditional runs");
}

int future_count(const ExperimentConfig& config, double alpha) {
  if (config.N > 0) return config.N;
  if (config.kind != ExperimentKind::CoverageVsN) throw DomainError("N must be positive");
  return static_cast<int>(std::lround(1.0 / (1.0 - alpha)));
}

// Training/test replications on exponential-isomorphic data, estimating from
// all n training values. Used for the coverage curves and the unconditional
// histogram comparison.
ExperimentResult run_unconditional(const ExperimentConfig& config, bool with_reference) {
  check_common(config);
  const ExponentialModel model = exponential_model(config.data);
  ExperimentResult result{config, {}};
  std::uint64_t group = 0;
  for (double alpha : config.alphas) {
    const int N = future_count(config, alpha);
    for (int n : config.n_values) {
      const std::size_t cells = config.estimators.size();
      const std::size_t width = 2 * cells;  // counts, then estimates
      std::vector<PsiCoefficient> psis;
      for (Estimator e : config.estimators) {
        if (e == Estimator::GvS) {
          if (config.gvs_rank < 1 || config.gvs_rank > n) {
            throw DomainError("GvS rank must lie in [1, n]");
          }
          psis.push_back({});
        } else {
          psis.push_back(unconditional_psi(e, n, alpha));
        }
      }
      const auto make_worker = [&] {
        return [&, train = std::vector<double>(static_cast<std::size_t>(n)),
                order = std::vector<double>(static_cast<std::size_t>(n))](RandomStream& rng,
                                                                          std::span<double> out) mutable {
          const double lambda = model.rate * rate_multiplier(config.prior, rng);
          for (double& z : train) z = transform_inverse(model.transform, rng.exponential() / lambda);
          const ObservationSummary s = summarize(train, model.transform);
          const auto eta = out.subspan(cells);
          for (std::size_t j = 0; j < cells; ++j) {
            if (config.estimators[j] == Estimator::GvS) {
              order = train;
              const auto rank = order.begin() + (config.gvs_rank - 1);
              std::nth_element(order.begin(), rank, order.end(), std::greater<>());
              eta[j] = *rank;
            } else {
              eta[j] = quantile_estimate(s, psis[j], model.transform);
            }
          }
          std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cells), 0.0);
          for (int i = 0; i < N; ++i) {
            const double z = transform_inverse(model.transform, rng.exponential() / lambda);
            for (std::size_t j = 0; j < cells; ++j) {
              if (z > eta[j]) out[j] += 1.0;
            }
          }
        };
      };
      const auto rows = run_replications(group_seed(config.seed, group++), config.replications, width,
                                         config.threads, make_worker);

      for (std::size_t j = 0; j < cells; ++j) {
        CellResult cell;
        cell.distribution = to_string(config.data);
        cell.estimator = std::string(to_string(config.estimators[j]));
        cell.n = n;
        cell.N = N;
        cell.alpha = alpha;
        const auto counts = column(rows, width, j);
        fill_count_statistics(cell, counts);
        cell.estimate = summarize_sample(column(rows, width, cells + j));
        if (config.prior == LambdaPrior::Fixed) {
          cell.true_quantile = transform_inverse(model.transform, -std::log1p(-alpha) / model.rate);
        }
        if (config.estimators[j] == Estimator::GvS) {
          cell.analytic_mean = static_cast<double>(N) * config.gvs_rank / (n + 1.0);
          if (with_reference) attach_reference(cell, gvs_pmf(n, config.gvs_rank, N));
        } else {
          cell.psi = psis[j].value;
          cell.analytic_mean = expected_exceedances(psis[j], n, N);
          if (with_reference) attach_reference(cell, beg_pmf(n, N, psis[j]));
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

// Blocked threshold pipeline: n_tilde * block_size training values, the
// threshold at the (n_tail+1)-th largest, and N * block_size future values.
ExperimentResult run_threshold(const ExperimentConfig& config, const std::vector<DistributionSpec>& families,
                               bool with_reference) {
  check_common(config);
  if (config.n_tilde < 1 || config.block_size < 1) throw DomainError("n_tilde and block_size must be positive");
  if (config.N < 1) throw DomainError("N must be positive");
  if (families.empty()) throw DomainError("no data distributions given");
  const int max_tail = *std::max_element(config.n_values.begin(), config.n_values.end());
  const std::size_t train_size = static_cast<std::size_t>(config.n_tilde) * config.block_size;
  const std::size_t test_size = static_cast<std::size_t>(config.N) * config.block_size;
  if (train_size <= static_cast<std::size_t>(max_tail)) {
    throw DataSizeError("n_tail exceeds the number of training values");
  }

  struct Slot {
    std::size_t tail;  // index into n_values
    double alpha;
    Estimator estimator;
    PsiCoefficient psi;
  };
  std::vector<Slot> slots;
  for (std::size_t t = 0; t < config.n_values.size(); ++t) {
    for (double alpha : config.alphas) {
      for (Estimator e : config.estimators) {
        slots.push_back({t, alpha, e, threshold_psi(e, config.n_values[t], config.n_tilde, config.N, alpha)});
      }
    }
  }
  const std::size_t tails = config.n_values.size();
  const std::size_t width = slots.size() + tails;

  ExperimentResult result{config, {}};
  for (std::size_t g = 0; g < families.size(); ++g) {
    const DistributionSpec& spec = families[g];
    validate(spec);
    const auto make_worker = [&] {
      return [&, train = std::vector<double>(train_size), test = std::vector<double>(test_size),
              log_sums = std::vector<double>(tails),
              eta = std::vector<double>(slots.size())](RandomStream& rng, std::span<double> out) mutable {
        sample_into(spec, train, rng);
        const auto top = train.begin() + max_tail;
        std::nth_element(train.begin(), top, train.end(), std::greater<>());
        std::sort(train.begin(), top + 1, std::greater<>());
        for (std::size_t t = 0; t < tails; ++t) {
          const int n_tail = config.n_values[t];
          const double u = train[static_cast<std::size_t>(n_tail)];
          if (!(u > 0.0)) throw DomainError("threshold is not positive; choose a smaller n_tail");
          if (!(train[static_cast<std::size_t>(n_tail) - 1] > u)) throw TieError("ties at the threshold");
          double sum = 0.0;
          for (int i = 0; i < n_tail; ++i) sum += std::log(train[static_cast<std::size_t>(i)] / u);
          log_sums[t] = sum;
          out[slots.size() + t] = sum / n_tail;
        }
        for (std::size_t j = 0; j < slots.size(); ++j) {
          const std::size_t t = slots[j].tail;
          eta[j] = pot_quantile(train[static_cast<std::size_t>(config.n_values[t])], log_sums[t], slots[j].psi);
        }
        sample_into(spec, test, rng);
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(slots.size()), 0.0);
        for (double z : test) {
          for (std::size_t j = 0; j < slots.size(); ++j) {
            if (z > eta[j]) out[j] += 1.0;
          }
        }
      };
    };
    const auto rows =
        run_replications(group_seed(config.seed, g), config.replications, width, config.threads, make_worker);

    std::vector<SampleSummary> xi(tails);
    for (std::size_t t = 0; t < tails; ++t) xi[t] = summarize_sample(column(rows, width, slots.size() + t));
    for (std::size_t j = 0; j < slots.size(); ++j) {
      const Slot& slot = slots[j];
      const int n_tail = config.n_values[slot.tail];
      CellResult cell;
      cell.distribution = to_string(spec);
      cell.estimator = std::string(to_string(slot.psi.method));
      cell.n = n_tail;
      cell.n_tilde = config.n_tilde;
      cell.N = config.N;
      cell.alpha = slot.alpha;
      cell.psi = slot.psi.value;
      if (const auto* sas = std::get_if<StableSas>(&spec)) cell.shape = sas->alpha;
      fill_count_statistics(cell, column(rows, width, j));
      cell.tail_index = xi[slot.tail];
      if (with_reference) {
        attach_reference(cell, beg_pmf(n_tail, config.N, slot.psi));
        attach_unconditional(
            cell, unconditional_exceedance_pmf(n_tail, config.n_tilde, config.N, slot.alpha, slot.psi));
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

}  // namespace

SampleSummary summarize_sample(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  const double R = static_cast<double>(values.size());
  s.mean = detail::pairwise_sum(values) / R;
  if (values.size() < 2) {
    s.se_mean = s.sd = s.se_sd = 0.0;
    return s;
  }
  std::vector<double> d2(values.size());
  std::vector<double> d4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = detail::pairwise_sum(d2) / R;
  const double m4 = detail::pairwise_sum(d4) / R;
  s.sd = std::sqrt(m2 * R / (R - 1.0));
  s.se_mean = s.sd / std::sqrt(R);
  s.se_sd = m2 > 0.0 ? std::sqrt(std::max(m4 - m2 * m2, 0.0) / (4.0 * m2 * R)) : 0.0;
  return s;
}

std::vector<double> CellResult::frequencies() const {
  std::vector<double> f(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    f[k] = static_cast<double>(histogram[k]) / static_cast<double>(replications);
  }
  return f;
}

ExperimentResult run_coverage_vs_n(const ExperimentConfig& config) { return run_unconditional(config, false); }

ExperimentResult run_beg_comparison(const ExperimentConfig& config) {
  if (!config.pot) return run_unconditional(config, true);
  return run_threshold(config, {config.data}, true);
}

ExperimentResult run_interval_sweep(const ExperimentConfig& config) {
  check_common(config);
  if (config.N < 1) throw DomainError("N must be positive");
  const ExponentialModel model = exponential_model(config.data);
  std::vector<double> edges = config.alphas;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (Estimator e : config.estimators) {
    if (e == Estimator::GvS) throw DomainError("interval sweeps take bayes or ml estimators");
  }
  const std::size_t bins = edges.size();
  const std::size_t width = config.estimators.size() * bins;
  const int N = config.N;

  ExperimentResult result{config, {}};
  for (std::size_t g = 0; g < config.n_values.size(); ++g) {
    const int n = config.n_values[g];
    std::vector<std::vector<PsiCoefficient>> psis(config.estimators.size());
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      for (double a : edges) psis[e].push_back(unconditional_psi(config.estimators[e], n, a));
    }
    const auto make_worker = [&] {
      return [&, train = std::vector<double>(static_cast<std::size_t>(n)),
              thresholds = std::vector<std::vector<double>>(config.estimators.size(), std::vector<double>(bins))](
                 RandomStream& rng, std::span<double> out) mutable {
        const double lambda = model.rate * rate_multiplier(config.prior, rng);
        for (double& z : train) z = transform_inverse(model.transform, rng.exponential() / lambda);
        const ObservationSummary s = summarize(train, model.transform);
        for (std::size_t e = 0; e < config.estimators.size(); ++e) {
          for (std::size_t b = 0; b < bins; ++b) thresholds[e][b] = quantile_estimate(s, psis[e][b], model.transform);
        }
        std::fill(out.begin(), out.end(), 0.0);
        for (int i = 0; i < N; ++i) {
          const double z = transform_inverse(model.transform, rng.exponential() / lambda);
          for (std::size_t e = 0; e < config.estimators.size(); ++e) {
            const auto& t = thresholds[e];
            // Bin b is (t[b], t[b+1]]; the last bin is unbounded above.
            const auto below = std::lower_bound(t.begin(), t.end(), z) - t.begin();
            if (below > 0) out[e * bins + static_cast<std::size_t>(below) - 1] += 1.0;
          }
        }
      };
    };
    const auto rows =
        run_replications(group_seed(config.seed, g), config.replications, width, config.threads, make_worker);
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      for (std::size_t b = 0; b < bins; ++b) {
        CellResult cell;
        cell.distribution = to_string(config.data);
        cell.estimator = std::string(to_string(config.estimators[e]));
        cell.n = n;
        cell.N = N;
        cell.alpha = edges[b];
        cell.alpha_upper = b + 1 < bins ? edges[b + 1] : 1.0;
        cell.psi = psis[e][b].value;
        const double upper = b + 1 < bins ? expected_exceedances(psis[e][b + 1], n, N) : 0.0;
        cell.analytic_mean = expected_exceedances(psis[e][b], n, N) - upper;
        fill_count_statistics(cell, column(rows, width, e * bins + b));
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

ExperimentResult run_sas_sweep(const ExperimentConfig& config) {
  std::vector<double> shapes = config.shapes;
  if (shapes.empty()) {
    for (int i = 11; i <= 20; ++i) shapes.push_back(i / 10.0);
  }
  std::vector<DistributionSpec> families;
  for (double a : shapes) families.emplace_back(StableSas{a});
  return run_threshold(config, families, false);
}

ExperimentResult run_distribution_table(const ExperimentConfig& config) {
  return run_threshold(config, config.distributions.empty() ? std::vector{config.data} : config.distributions,
                       false);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::CoverageVsN:
      return run_coverage_vs_n(config);
    case ExperimentKind::BegComparison:
      return run_beg_comparison(config);
    case ExperimentKind::IntervalSweep:
      return run_interval_sweep(config);
    case ExperimentKind::SasSweep:
      return run_sas_sweep(config);
    case ExperimentKind::DistributionTable:
      return run_distribution_table(config);
  }
  throw DomainError("unknown experiment kind");
}

}  // namespace zce
