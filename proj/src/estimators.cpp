#include "zce/estimators.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "zce/error.hpp"

namespace zce {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_psi_args(int n, double alpha) {
  if (n < 1) throw DomainError("sample count n must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie strictly between 0 and 1, got " + std::to_string(alpha));
  }
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Bayes:
      return "bayes";
    case Method::ML:
      return "ml";
    case Method::PotBayes:
      return "pot-bayes";
    case Method::PotML:
      return "pot-ml";
  }
  return "unknown";
}

double transform_forward(const TransformSpec& transform, double z) {
  return std::visit(
      Overloaded{
          [&](const transform::Identity&) {
            if (!(z >= 0.0)) throw DomainError("identity transform requires z >= 0");
            return z;
          },
          [&](const transform::Square&) {
            if (!(z >= 0.0)) throw DomainError("square transform requires z >= 0");
            return z * z;
          },
          [&](const transform::LogRatio& t) {
            if (!(z >= t.u)) throw DomainError("log-ratio transform requires z >= u");
            return std::log(z / t.u);
          },
          [&](const transform::NegLogSurvival& t) {
            if (!(z >= support_lower(t.base))) {
              throw DomainError("value below the support of the base distribution");
            }
            return -log_survival(t.base, z);
          },
      },
      transform);
}

double transform_inverse(const TransformSpec& transform, double x) {
  if (!(x >= 0.0)) throw DomainError("inverse transform requires x >= 0");
  return std::visit(Overloaded{
                        [&](const transform::Identity&) { return x; },
                        [&](const transform::Square&) { return std::sqrt(x); },
                        [&](const transform::LogRatio& t) { return t.u * std::exp(x); },
                        [&](const transform::NegLogSurvival& t) {
                          return quantile_from_log_survival(t.base, -x);
                        },
                    },
                    transform);
}

ObservationSummary summarize(std::span<const double> data, const TransformSpec& transform) {
  if (data.empty()) throw DomainError("cannot summarise an empty sample");
  // Neumaier summation keeps Sigma exact enough for n in the millions.
  double sum = 0.0;
  double carry = 0.0;
  for (double z : data) {
    const double x = transform_forward(transform, z);
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return {static_cast<int>(data.size()), sum + carry};
}

PsiCoefficient psi_ml(int n, double alpha) {
  check_psi_args(n, alpha);
  return {-std::log1p(-alpha) / n, Method::ML, alpha, n};
}

PsiCoefficient psi_bayes(int n, double alpha) {
  check_psi_args(n, alpha);
  return {std::expm1(-std::log1p(-alpha) / n), Method::Bayes, alpha, n};
}

double quantile_estimate(const ObservationSummary& summary, const PsiCoefficient& psi,
                         const TransformSpec& transform) {
  if (summary.n < 1) throw DomainError("summary must contain at least one observation");
  if (!(summary.sigma >= 0.0)) throw DomainError("summary sigma must be nonnegative");
  if (summary.sigma == 0.0 && std::holds_alternative<transform::Identity>(transform)) {
    throw DegenerateSummaryError("sum of observations is zero; exponential data cannot produce this");
  }
  return transform_inverse(transform, psi.value * summary.sigma);
}

double predictive_cdf_bayes(double y, const ObservationSummary& summary) {
  if (!(summary.sigma > 0.0)) throw DegenerateSummaryError("predictive cdf needs a positive sigma");
  if (!(y >= 0.0)) throw DomainError("predictive cdf requires y >= 0");
  return -std::expm1(-summary.n * std::log1p(y / summary.sigma));
}

double predictive_cdf_ml(double y, const ObservationSummary& summary) {
  if (!(summary.sigma > 0.0)) throw DegenerateSummaryError("predictive cdf needs a positive sigma");
  if (!(y >= 0.0)) throw DomainError("predictive cdf requires y >= 0");
  return -std::expm1(-summary.n * y / summary.sigma);
}

double expected_exceedances(const PsiCoefficient& psi, int n, int N) {
  if (n < 1 || N < 1) throw DomainError("n and N must be at least 1");
  if (!(psi.value >= 0.0)) throw DomainError("psi must be nonnegative");
  return N * std::exp(-n * std::log1p(psi.value));
}

TransformSpec parse_transform(std::string_view text) {
  if (text == "identity") return transform::Identity{};
  if (text == "square") return transform::Square{};
  constexpr std::string_view prefix = "logratio:";
  if (text.starts_with(prefix)) {
    const std::string_view num = text.substr(prefix.size());
    double u = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), u);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(u > 0.0)) {
      throw ParseError("logratio threshold must be a positive number, got '" + std::string(num) + "'");
    }
    return transform::LogRatio{u};
  }
  throw ParseError("unknown transform '" + std::string(text) +
                   "' (expected identity, square or logratio:u)");
}

}  // namespace zce
