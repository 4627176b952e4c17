#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "zce/error.hpp"
#include "zce/sim.hpp"

#ifndef ZCE_GIT_DESCRIBE
#define ZCE_GIT_DESCRIBE "unknown"
#endif

namespace zce {
namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find(sep);
    const auto part = trim(text.substr(0, pos));
    if (!part.empty()) parts.push_back(part);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("key '" + std::string(key) + "': '" + std::string(text) + "' is not a valid number");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> values;
  for (auto part : split(text, ',')) values.push_back(parse_number<T>(key, part));
  if (values.empty()) throw ParseError("key '" + std::string(key) + "' is empty");
  return values;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError("key '" + std::string(key) + "': expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> grid(double first, double step, int count) {
  std::vector<double> values;
  for (int i = 0; i < count; ++i) values.push_back(std::round((first + i * step) * 1e6) / 1e6);
  return values;
}

ExperimentConfig base(std::string name, ExperimentKind kind, bool quick, std::uint64_t full_replications) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.kind = kind;
  c.replications = quick ? full_replications / 10 : full_replications;
  return c;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::CoverageVsN:
      return "coverage";
    case ExperimentKind::BegComparison:
      return "beg";
    case ExperimentKind::IntervalSweep:
      return "intervals";
    case ExperimentKind::SasSweep:
      return "sas";
    case ExperimentKind::DistributionTable:
      return "table";
  }
  return "unknown";
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::Bayes:
      return "bayes";
    case Estimator::ML:
      return "ml";
    case Estimator::GvS:
      return "gvs";
  }
  return "unknown";
}

std::string_view to_string(LambdaPrior prior) {
  switch (prior) {
    case LambdaPrior::Fixed:
      return "fixed";
    case LambdaPrior::Gamma:
      return "gamma";
    case LambdaPrior::LogUniform:
      return "loguniform";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::CoverageVsN, ExperimentKind::BegComparison, ExperimentKind::IntervalSweep,
                    ExperimentKind::SasSweep, ExperimentKind::DistributionTable}) {
    if (text == to_string(kind)) return kind;
  }
  throw ParseError("unknown experiment kind '" + std::string(text) +
                   "' (expected coverage, beg, intervals, sas or table)");
}

Estimator parse_estimator(std::string_view text) {
  for (auto e : {Estimator::Bayes, Estimator::ML, Estimator::GvS}) {
    if (text == to_string(e)) return e;
  }
  throw ParseError("unknown estimator '" + std::string(text) + "' (expected bayes, ml or gvs)");
}

LambdaPrior parse_lambda_prior(std::string_view text) {
  for (auto p : {LambdaPrior::Fixed, LambdaPrior::Gamma, LambdaPrior::LogUniform}) {
    if (text == to_string(p)) return p;
  }
  throw ParseError("unknown prior '" + std::string(text) + "' (expected fixed, gamma or loguniform)");
}

std::vector<ExperimentConfig> read_experiment_configs(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<ExperimentConfig> configs;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw ParseError("key '" + section + "' lies outside any [section]");
    ExperimentConfig c;
    c.name = section;
    bool has_kind = false;
    for (const auto& [key, node] : entries) {
      const std::string value = node.get_value<std::string>();
      if (key == "kind") {
        c.kind = parse_experiment_kind(trim(value));
        has_kind = true;
      } else if (key == "data") {
        c.data = parse_distribution(trim(value));
      } else if (key == "distributions") {
        c.distributions.clear();
        for (auto part : split(value, ';')) c.distributions.push_back(parse_distribution(part));
      } else if (key == "shapes") {
        c.shapes = parse_list<double>(key, value);
      } else if (key == "pot") {
        c.pot = parse_bool(key, value);
      } else if (key == "n_tilde") {
        c.n_tilde = parse_number<int>(key, value);
      } else if (key == "block_size") {
        c.block_size = parse_number<int>(key, value);
      } else if (key == "n") {
        c.n_values = parse_list<int>(key, value);
      } else if (key == "N") {
        c.N = parse_number<int>(key, value);
      } else if (key == "alpha") {
        c.alphas = parse_list<double>(key, value);
      } else if (key == "estimators") {
        c.estimators.clear();
        for (auto part : split(value, ',')) c.estimators.push_back(parse_estimator(part));
      } else if (key == "gvs_rank") {
        c.gvs_rank = parse_number<int>(key, value);
      } else if (key == "prior") {
        c.prior = parse_lambda_prior(trim(value));
      } else if (key == "replications") {
        c.replications = parse_number<std::uint64_t>(key, value);
      } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
        c.seed_given = true;
      } else if (key == "threads") {
        c.threads = parse_number<unsigned>(key, value);
      } else {
        throw ParseError("[" + section + "]: unknown key '" + key + "'");
      }
    }
    if (!has_kind) throw ParseError("[" + section + "]: missing 'kind'");
    configs.push_back(std::move(c));
  }
  if (configs.empty()) throw ParseError("no experiments in config");
  return configs;
}

std::vector<std::string_view> reproduction_ids() { return {"1", "2", "4", "5", "6", "table1"}; }

std::vector<ExperimentConfig> reproduction_configs(std::string_view figure, bool quick) {
  std::vector<ExperimentConfig> out;
  if (figure == "1") {
    auto c = base("fig1", ExperimentKind::CoverageVsN, quick, 10000);
    c.n_values = {1, 2, 5, 10, 20, 50, 100, 250, 500};
    c.N = 0;
    c.alphas = {0.99, 0.999, 0.9999};
    c.estimators = {Estimator::ML, Estimator::Bayes};
    out.push_back(c);
  } else if (figure == "2") {
    auto left = base("fig2-left", ExperimentKind::BegComparison, quick, 100000);
    left.n_values = {50};
    left.estimators = {Estimator::Bayes, Estimator::ML};
    out.push_back(left);
    auto right = left;
    right.name = "fig2-right";
    right.n_values = {100};
    right.estimators = {Estimator::Bayes, Estimator::ML, Estimator::GvS};
    out.push_back(right);
  } else if (figure == "4") {
    auto c = base("fig4", ExperimentKind::BegComparison, quick, 10000);
    c.pot = true;
    c.data = StandardPareto{0.3, 1.0};
    c.n_values = {50};
    out.push_back(c);
  } else if (figure == "5") {
    auto left = base("fig5-left", ExperimentKind::IntervalSweep, quick, 10000);
    left.n_values = {50};
    left.N = 100;
    left.alphas = grid(0.90, 0.01, 10);
    left.estimators = {Estimator::Bayes, Estimator::ML};
    out.push_back(left);
    auto right = left;
    right.name = "fig5-right";
    right.N = 1000;
    right.alphas = grid(0.990, 0.001, 10);
    out.push_back(right);
  } else if (figure == "6") {
    auto c = base("fig6", ExperimentKind::SasSweep, quick, 10000);
    c.shapes = grid(1.1, 0.1, 10);
    c.n_values = {5, 10, 25, 50};
    out.push_back(c);
  } else if (figure == "table1") {
    auto c = base("table1", ExperimentKind::DistributionTable, quick, 10000);
    c.distributions = {Exponential{1.0}, LogNormal{0.0, 1.0}, StandardPareto{0.1, 1.0},
                       Gev{0.5, 0.0, 1.0},  StudentT{2.0},       StudentT{10.0}};
    c.n_values = {5, 10, 25, 50};
    out.push_back(c);
  } else {
    std::string ids;
    for (auto id : reproduction_ids()) ids += (ids.empty() ? "" : ", ") + std::string(id);
    throw ParseError("unknown figure '" + std::string(figure) + "' (valid: " + ids + ")");
  }
  return out;
}

void write_cells_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "experiment,kind,distribution,estimator,n,n_tilde,N,alpha,alpha_upper,shape,psi,prior,"
         "replications,mean,se_mean,sd,se_sd,p_gt1,se_p_gt1,analytic_mean,xi_mean,xi_se_mean,xi_sd,"
         "xi_se_sd,estimate_mean,estimate_se_mean,true_quantile,tv,tv_unconditional\n";
  for (const auto& result : results) {
    for (const auto& c : result.cells) {
      out << result.config.name << ',' << to_string(result.config.kind) << ",\"" << c.distribution << "\","
          << c.estimator << ',' << c.n << ',' << c.n_tilde << ',' << c.N << ',' << format_double(c.alpha) << ','
          << format_double(c.alpha_upper) << ',' << format_double(c.shape) << ',' << format_double(c.psi) << ','
          << to_string(result.config.prior) << ',' << c.replications << ',' << format_double(c.exceedances.mean)
          << ',' << format_double(c.exceedances.se_mean) << ',' << format_double(c.exceedances.sd) << ','
          << format_double(c.exceedances.se_sd) << ',' << format_double(c.p_more_than_one) << ','
          << format_double(c.se_p_more_than_one) << ',' << format_double(c.analytic_mean) << ','
          << format_double(c.tail_index.mean) << ',' << format_double(c.tail_index.se_mean) << ','
          << format_double(c.tail_index.sd) << ',' << format_double(c.tail_index.se_sd) << ','
          << format_double(c.estimate.mean) << ',' << format_double(c.estimate.se_mean) << ','
          << format_double(c.true_quantile) << ',' << format_double(c.tv) << ','
          << format_double(c.tv_unconditional) << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << "experiment,cell,k,count,frequency,reference,unconditional\n";
  for (const auto& result : results) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const auto& c = result.cells[i];
      const auto freq = c.frequencies();
      const std::size_t size =
          std::max({c.histogram.size(), c.reference_pmf.size(), c.unconditional_pmf.size()});
      auto at = [](const auto& v, std::size_t k) {
        return k < v.size() ? static_cast<double>(v[k]) : 0.0;
      };
      for (std::size_t k = 0; k < size; ++k) {
        out << result.config.name << ',' << i << ',' << k << ',' << (k < c.histogram.size() ? c.histogram[k] : 0)
            << ',' << format_double(at(freq, k)) << ','
            << (c.reference_pmf.empty() ? std::string() : format_double(at(c.reference_pmf, k))) << ','
            << (c.unconditional_pmf.empty() ? std::string() : format_double(at(c.unconditional_pmf, k)))
            << '\n';
      }
    }
  }
}

void write_summary_json(std::ostream& out, const std::vector<ExperimentResult>& results) {
  auto summary = [](const SampleSummary& s) {
    return nlohmann::json{{"mean", json_number(s.mean)},
                          {"se_mean", json_number(s.se_mean)},
                          {"sd", json_number(s.sd)},
                          {"se_sd", json_number(s.se_sd)}};
  };
  nlohmann::json doc;
  doc["git_describe"] = std::string(build_version());
  doc["experiments"] = nlohmann::json::array();
  for (const auto& result : results) {
    const auto& cfg = result.config;
    nlohmann::json e;
    e["name"] = cfg.name;
    e["kind"] = std::string(to_string(cfg.kind));
    e["seed"] = cfg.seed;
    e["replications"] = cfg.replications;
    e["prior"] = std::string(to_string(cfg.prior));
    e["cells"] = nlohmann::json::array();
    for (const auto& c : result.cells) {
      nlohmann::json j{{"distribution", c.distribution},
                       {"estimator", c.estimator},
                       {"n", c.n},
                       {"n_tilde", c.n_tilde},
                       {"N", c.N},
                       {"alpha", json_number(c.alpha)},
                       {"alpha_upper", json_number(c.alpha_upper)},
                       {"shape", json_number(c.shape)},
                       {"psi", json_number(c.psi)},
                       {"exceedances", summary(c.exceedances)},
                       {"p_gt1", json_number(c.p_more_than_one)},
                       {"se_p_gt1", json_number(c.se_p_more_than_one)},
                       {"analytic_mean", json_number(c.analytic_mean)},
                       {"tv", json_number(c.tv)},
                       {"tv_unconditional", json_number(c.tv_unconditional)}};
      if (c.tail_index.count > 0) j["xi"] = summary(c.tail_index);
      if (c.estimate.count > 0) j["estimate"] = summary(c.estimate);
      e["cells"].push_back(std::move(j));
    }
    doc["experiments"].push_back(std::move(e));
  }
  out << doc.dump(2) << '\n';
}

std::string_view build_version() { return ZCE_GIT_DESCRIBE; }

}  // namespace zce
