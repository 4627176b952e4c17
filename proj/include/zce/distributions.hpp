#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zce/random.hpp"

namespace zce {

struct Exponential {
  double rate = 1.0;
};

struct Rayleigh {
  double sigma = 1.0;
};

/// G(x) = 1 - (x/u)^(-1/xi) on [u, inf).
struct StandardPareto {
  double xi = 1.0;
  double u = 1.0;
};

/// Jenkinson-von Mises form exp(-(1 + xi (x - mu)/beta)^(-1/xi)); xi = 0 is
/// the Gumbel limit.
struct Gev {
  double xi = 0.0;
  double mu = 0.0;
  double beta = 1.0;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct StudentT {
  double nu = 1.0;
};

/// Symmetric alpha-stable with unit scale and zero location, i.e.
/// characteristic function exp(-|t|^alpha). alpha = 2 is Normal(0, 2).
struct StableSas {
  double alpha = 2.0;
};

using DistributionSpec =
    std::variant<Exponential, Rayleigh, StandardPareto, Gev, LogNormal, StudentT, StableSas>;

/// Throws DomainError if any parameter is outside its domain.
void validate(const DistributionSpec& spec);

/// Lower endpoint of the support (may be -inf).
double support_lower(const DistributionSpec& spec);

/// One draw. Assumes `spec` has been validated.
double draw(const DistributionSpec& spec, RandomStream& rng);

/// `count` i.i.d. draws.
std::vector<double> sample(const DistributionSpec& spec, std::size_t count, RandomStream& rng);

/// Fills `out` with i.i.d. draws; avoids an allocation in hot loops.
void sample_into(const DistributionSpec& spec, std::span<double> out, RandomStream& rng);

double cdf(const DistributionSpec& spec, double x);

/// log(1 - cdf(x)), computed without cancellation in the upper tail.
double log_survival(const DistributionSpec& spec, double x);

/// Inverse cdf. StableSas has no closed form and throws DomainError.
double quantile(const DistributionSpec& spec, double p);

/// x such that log_survival(spec, x) = log_s (log_s <= 0).
double quantile_from_log_survival(const DistributionSpec& spec, double log_s);

/// Parses the config form, e.g. `gev(xi=0.5,beta=1,mu=0)` or `t(nu=2)`.
/// Omitted parameters take the defaults of the corresponding struct.
DistributionSpec parse_distribution(std::string_view text);

/// Canonical config form; round-trips through parse_distribution.
std::string to_string(const DistributionSpec& spec);

}  // namespace zce
