#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"
#include "zce/error.hpp"
#include "zce/estimators.hpp"
#include "zce/exceedance.hpp"
#include "zce/pot.hpp"
#include "zce/sim.hpp"

namespace zce::cli {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void print(std::ostream& out, std::string_view key, double v) { out << key << '=' << fmt(v) << '\n'; }
void print(std::ostream& out, std::string_view key, long long v) { out << key << '=' << v << '\n'; }
void print(std::ostream& out, std::string_view key, std::string_view v) { out << key << '=' << v << '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

// One value per line; blank lines and lines starting with '#' are skipped.
std::vector<double> read_values(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": '" + std::string(text) + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ParseError(path + ": no observations");
  return values;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("ZCE_SEED");
  if (env == nullptr || *env == '\0') return 1;
  const std::string_view text(env);
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("ZCE_SEED must be an unsigned integer, got '" + std::string(text) + "'");
  }
  return seed;
}

PsiCoefficient unconditional_psi(const std::string& method, int n, double alpha) {
  return method == "ml" ? psi_ml(n, alpha) : psi_bayes(n, alpha);
}

struct RunOptions {
  std::string prefix;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  std::uint64_t replications = 0;
};

void run_and_write(std::vector<ExperimentConfig> configs, const RunOptions& opts, std::ostream& out) {
  // --seed, then a seed in the config file, then $ZCE_SEED, then 1.
  const std::uint64_t fallback = opts.seed_given ? opts.seed : default_seed();
  std::vector<ExperimentResult> results;
  for (auto& config : configs) {
    if (opts.seed_given || !config.seed_given) config.seed = fallback;
    const std::uint64_t seed = config.seed;
    if (opts.threads != 0) config.threads = opts.threads;
    if (opts.replications != 0) config.replications = opts.replications;
    results.push_back(run_experiment(config));
    out << "experiment=" << config.name << " kind=" << to_string(config.kind) << " cells=" << results.back().cells.size()
        << " replications=" << config.replications << " seed=" << seed << '\n';
  }
  const std::string cells = opts.prefix + "_cells.csv";
  const std::string hist = opts.prefix + "_hist.csv";
  const std::string summary = opts.prefix + "_summary.json";
  {
    auto f = open_output(cells);
    write_cells_csv(f, results);
  }
  {
    auto f = open_output(hist);
    write_histogram_csv(f, results);
  }
  {
    auto f = open_output(summary);
    write_summary_json(f, results);
  }
  print(out, "cells_csv", cells);
  print(out, "histogram_csv", hist);
  print(out, "summary_json", summary);
}

void add_run_options(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Base seed (default: config seed, else $ZCE_SEED, else 1)")
      ->each([&](const std::string&) { opts.seed_given = true; });
  cmd->add_option("--threads", opts.threads, "Worker threads (default: all cores)");
  cmd->add_option("--replications", opts.replications, "Override the replication count")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-coverage-error quantile estimation and exceedance distributions", "zce"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(build_version()));

  // estimate
  std::string data_path;
  double alpha = 0.0;
  std::string method = "bayes";
  std::string transform_text = "identity";
  bool as_json = false;
  auto* estimate = app.add_subcommand("estimate", "Quantile estimate from one value per line");
  estimate->add_option("data", data_path, "Input file")->required();
  estimate->add_option("--alpha", alpha, "Quantile level in (0, 1)")->required();
  estimate->add_option("--method", method, "bayes or ml")->check(CLI::IsMember({"bayes", "ml"}));
  estimate->add_option("--transform", transform_text, "identity, square or logratio:u");
  estimate->add_flag("--json", as_json, "Print JSON instead of key=value lines");

  // exceedance
  int n = 0;
  int N = 0;
  int gvs_rank = 0;
  std::string output;
  auto* exceedance = app.add_subcommand("exceedance", "BEG or GvS pmf of the exceedance count as CSV");
  exceedance->add_option("--n", n, "Training sample size")->required()->check(CLI::PositiveNumber);
  exceedance->add_option("--N", N, "Future sample size")->required()->check(CLI::PositiveNumber);
  auto* alpha_opt = exceedance->add_option("--alpha", alpha, "Quantile level in (0, 1)");
  exceedance->add_option("--method", method, "bayes or ml")->check(CLI::IsMember({"bayes", "ml"}));
  auto* gvs_opt = exceedance->add_option("--gvs", gvs_rank, "GvS pmf over the m-th largest value")
                      ->check(CLI::PositiveNumber);
  exceedance->add_option("--output", output, "CSV path (default: standard output)");
  alpha_opt->excludes(gvs_opt);

  // pot
  int n_tail = 0;
  auto* pot = app.add_subcommand("pot", "Threshold pipeline on block_id,value rows");
  pot->add_option("data", data_path, "Input CSV")->required();
  pot->add_option("--ntail", n_tail, "Exceedances kept above the threshold")->required()->check(CLI::PositiveNumber);
  pot->add_option("--alpha", alpha, "Per-block quantile level in (0, 1)")->required();
  pot->add_option("--N", N, "Future blocks")->required()->check(CLI::PositiveNumber);
  pot->add_option("--method", method, "bayes or ml")->check(CLI::IsMember({"bayes", "ml"}));
  pot->add_option("--output", output, "Write the unconditional exceedance pmf CSV here");

  // simulate
  std::string config_path;
  RunOptions run_opts;
  auto* simulate = app.add_subcommand("simulate", "Run the experiments in an INI config");
  simulate->add_option("--config", config_path, "Experiment config")->required();
  simulate->add_option("--out", run_opts.prefix, "Output path prefix")->required();
  add_run_options(simulate, run_opts);

  // reproduce
  std::string figure;
  bool quick = false;
  auto* reproduce = app.add_subcommand("reproduce", "Run a built-in figure or table configuration");
  reproduce->add_option("--figure", figure, "1, 2, 4, 5, 6 or table1")->required();
  reproduce->add_flag("--quick", quick, "Ten times fewer replications");
  reproduce->add_option("--out", run_opts.prefix, "Output path prefix (default: figure id)");
  add_run_options(reproduce, run_opts);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*estimate) {
      const auto values = read_values(data_path);
      const TransformSpec transform = parse_transform(transform_text);
      const ObservationSummary s = summarize(values, transform);
      const PsiCoefficient psi = unconditional_psi(method, s.n, alpha);
      const double eta = quantile_estimate(s, psi, transform);
      const double x = psi.value * s.sigma;
      const double round_trip = s.sigma > 0.0 ? (method == "ml" ? predictive_cdf_ml(x, s) : predictive_cdf_bayes(x, s))
                                              : std::numeric_limits<double>::quiet_NaN();
      if (as_json) {
        nlohmann::json j{{"n", s.n}, {"sigma", s.sigma}, {"method", method}, {"alpha", alpha},
                         {"psi", psi.value}, {"eta", eta}};
        if (s.sigma > 0.0) j["predictive_cdf_at_eta"] = round_trip;
        out << j.dump(2) << '\n';
      } else {
        print(out, "n", static_cast<long long>(s.n));
        print(out, "sigma", s.sigma);
        print(out, "method", method);
        print(out, "alpha", alpha);
        print(out, "psi", psi.value);
        print(out, "eta", eta);
        if (s.sigma > 0.0) print(out, "predictive_cdf_at_eta", round_trip);
      }
    } else if (*exceedance) {
      ExceedancePmf pmf = *gvs_opt ? gvs_pmf(n, gvs_rank, N) : [&] {
        if (!*alpha_opt) throw ParseError("--alpha is required unless --gvs is given");
        return beg_pmf(n, N, unconditional_psi(method, n, alpha));
      }();
      if (output.empty()) {
        write_csv(out, pmf);
      } else {
        auto f = open_output(output);
        write_csv(f, pmf);
        print(out, "mean", pmf.mean());
        print(out, "variance", pmf.variance());
        print(out, "p_gt1", pmf.survival(1));
        print(out, "pmf_csv", output);
      }
    } else if (*pot) {
      auto in = open_input(data_path);
      const PotSeries series = make_pot_series(read_blocks_csv(in), n_tail);
      const PsiCoefficient psi = method == "ml" ? psi_pot_ml(n_tail, series.blocks(), N, alpha)
                                                : psi_pot_bayes(n_tail, series.blocks(), alpha);
      print(out, "blocks", static_cast<long long>(series.blocks()));
      print(out, "mean_block_size", series.mean_block_size());
      print(out, "n_tail", static_cast<long long>(n_tail));
      print(out, "threshold", series.threshold);
      print(out, "xi", hill_estimate(series.log_exceedances));
      print(out, "method", to_string(psi.method));
      print(out, "psi", psi.value);
      print(out, "eta", pot_quantile(series, psi));
      if (!output.empty()) {
        const auto pmf = unconditional_exceedance_pmf(n_tail, series.blocks(), N, alpha, psi);
        auto f = open_output(output);
        write_csv(f, pmf);
        print(out, "pmf_mean", pmf.mean());
        print(out, "pmf_p_gt1", pmf.survival(1));
        print(out, "pmf_csv", output);
      }
    } else if (*simulate) {
      auto in = open_input(config_path);
      run_and_write(read_experiment_configs(in), run_opts, out);
    } else if (*reproduce) {
      auto configs = reproduction_configs(figure, quick);
      if (run_opts.prefix.empty()) run_opts.prefix = "fig" + figure;
      run_and_write(std::move(configs), run_opts, out);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace zce::cli
