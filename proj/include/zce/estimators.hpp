#pragma once

#include <span>
#include <string_view>
#include <variant>

#include "zce/distributions.hpp"

namespace zce {

/// Sufficient statistics of a training sample after the transform h.
struct ObservationSummary {
  int n = 0;
  double sigma = 0.0;  ///< sum of h(z_i)
};

enum class Method { Bayes, ML, PotBayes, PotML };

std::string_view to_string(Method method);

/// Multiplier defining eta = h^-1(value * sigma).
struct PsiCoefficient {
  double value = 0.0;
  Method method = Method::Bayes;
  double alpha = 0.0;
  int n = 0;
};

namespace transform {
struct Identity {};
/// Rayleigh data: h(z) = z^2.
struct Square {};
/// Standard Pareto data above u: h(z) = log(z / u).
struct LogRatio {
  double u = 1.0;
};
/// h(z) = -log(1 - F(z)) for a fully specified base distribution F.
struct NegLogSurvival {
  DistributionSpec base;
};
}  // namespace transform

using TransformSpec =
    std::variant<transform::Identity, transform::Square, transform::LogRatio, transform::NegLogSurvival>;

/// h(z). Throws DomainError below the support's lower endpoint.
double transform_forward(const TransformSpec& transform, double z);

/// h^-1(x) for x >= 0.
double transform_inverse(const TransformSpec& transform, double x);

/// n and sum of h(z_i).
ObservationSummary summarize(std::span<const double> data, const TransformSpec& transform);

/// -log(1 - alpha) / n.
PsiCoefficient psi_ml(int n, double alpha);

/// (1 - alpha)^(-1/n) - 1, evaluated as expm1(-log1p(-alpha) / n).
PsiCoefficient psi_bayes(int n, double alpha);

/// h^-1(psi * sigma). An Identity summary with sigma = 0 is degenerate.
double quantile_estimate(const ObservationSummary& summary, const PsiCoefficient& psi,
                         const TransformSpec& transform);

/// Lomax predictive cdf 1 - (1 + y / sigma)^(-n) under the Jeffreys prior.
double predictive_cdf_bayes(double y, const ObservationSummary& summary);

/// Plug-in predictive cdf 1 - exp(-n y / sigma).
double predictive_cdf_ml(double y, const ObservationSummary& summary);

/// N (psi + 1)^(-n): expected count of N future exponential samples above
/// psi * sigma, marginalised over sigma. Independent of the true rate.
double expected_exceedances(const PsiCoefficient& psi, int n, int N);

/// Parses `identity`, `square`, `logratio:u`.
TransformSpec parse_transform(std::string_view text);

}  // namespace zce
