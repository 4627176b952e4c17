#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <catch_amalgamated.hpp>

#include "zce/distributions.hpp"
#include "zce/error.hpp"

using namespace zce;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<DistributionSpec> all_families() {
  return {Exponential{1.0},      Exponential{2.5},   Rayleigh{1.3},    StandardPareto{0.3, 1.0},
          StandardPareto{0.1, 2.0}, Gev{0.5, 0.0, 1.0}, Gev{0.0, 1.0, 2.0}, Gev{-0.2, 0.0, 1.0},
          LogNormal{0.0, 1.0},   StudentT{2.0},      StudentT{10.0},   StableSas{1.5},
          StableSas{2.0},        StableSas{1.1}};
}

double ks_statistic(const DistributionSpec& spec, std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(spec, xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_CASE("cdf examples", "[distributions]") {
  CHECK_THAT(cdf(StandardPareto{0.5, 1.0}, 4.0), WithinRel(0.9375, 1e-15));
  CHECK_THAT(cdf(Gev{1.0, 0.0, 1.0}, 0.0), WithinRel(std::exp(-1.0), 1e-15));
  CHECK(cdf(Exponential{2.0}, 0.0) == 0.0);
  CHECK_THAT(cdf(StableSas{2.0}, 1.0), WithinRel(0.5 * std::erfc(-0.5), 1e-8));
  CHECK_THAT(cdf(StableSas{1.0}, 1.0), WithinRel(0.75, 1e-8));
}

TEST_CASE("cdf limits and monotonicity", "[distributions]") {
  for (const auto& spec : all_families()) {
    INFO(to_string(spec));
    CHECK(cdf(spec, -1e300) == 0.0);
    CHECK_THAT(cdf(spec, 1e300), WithinAbs(1.0, 1e-12));
    double prev = 0.0;
    for (double x = -20.0; x <= 20.0; x += 0.25) {
      const double f = cdf(spec, x);
      CHECK(f >= prev - 1e-15);
      prev = f;
    }
  }
}

TEST_CASE("samples match their cdf (Kolmogorov-Smirnov)", "[distributions]") {
  // Critical value at the 0.001 level is 1.949 / sqrt(n).
  constexpr std::size_t n = 100000;
  const double critical = 1.949 / std::sqrt(static_cast<double>(n));
  std::uint64_t seed = 11;
  for (const auto& spec : all_families()) {
    INFO(to_string(spec));
    RandomStream rng(seed++);
    CHECK(ks_statistic(spec, sample(spec, n, rng)) < critical);
  }
}

TEST_CASE("exponential sample mean", "[distributions]") {
  RandomStream rng(2024);
  const auto xs = sample(Exponential{1.0}, 1000000, rng);
  double sum = 0.0;
  for (double x : xs) sum += x;
  CHECK_THAT(sum / 1e6, WithinAbs(1.0, 3e-3));
}

TEST_CASE("samples lie in the support", "[distributions]") {
  RandomStream rng(5);
  for (double x : sample(StandardPareto{0.3, 1.0}, 100000, rng)) REQUIRE(x >= 1.0);
  for (double x : sample(Exponential{3.0}, 100000, rng)) REQUIRE(x >= 0.0);
  for (double x : sample(Gev{0.5, 0.0, 1.0}, 100000, rng)) REQUIRE(x >= -2.0);
  for (const auto& spec : all_families()) {
    const double lower = support_lower(spec);
    for (double x : sample(spec, 1000, rng)) REQUIRE(x >= lower);
  }
}

TEST_CASE("stable with exponent 2 is Normal(0, 2)", "[distributions]") {
  RandomStream rng(77);
  constexpr int n = 400000;
  const auto xs = sample(StableSas{2.0}, n, rng);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  // Var of the sample kurtosis of a normal is about 24 / n.
  CHECK_THAT(m4 / (m2 * m2), WithinAbs(3.0, 4.0 * std::sqrt(24.0 / n)));
  CHECK_THAT(m2, WithinAbs(2.0, 4.0 * std::sqrt(8.0 / n)));
}

TEST_CASE("quantile inverts cdf", "[distributions]") {
  for (const auto& spec : all_families()) {
    if (const auto* s = std::get_if<StableSas>(&spec); s != nullptr && s->alpha != 2.0) continue;
    INFO(to_string(spec));
    for (double p : {1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999}) {
      const double x = quantile(spec, p);
      CHECK_THAT(cdf(spec, x), WithinRel(p, 1e-9));
      const double f = cdf(spec, x);
      if (f > 0.0 && f < 1.0) CHECK_THAT(quantile(spec, f), WithinRel(x, 1e-9) || WithinAbs(x, 1e-12));
    }
  }
}

TEST_CASE("quantile from log survival reaches deep tails", "[distributions]") {
  for (const auto& spec : all_families()) {
    if (const auto* s = std::get_if<StableSas>(&spec); s != nullptr && s->alpha != 2.0) continue;
    INFO(to_string(spec));
    for (double log_s : {-0.5, -5.0, -20.0}) {
      const double x = quantile_from_log_survival(spec, log_s);
      CHECK_THAT(log_survival(spec, x), WithinRel(log_s, 1e-7));
    }
  }
  CHECK_THAT(quantile_from_log_survival(Exponential{2.0}, -300.0), WithinRel(150.0, 1e-14));
}

TEST_CASE("same seed gives the same stream", "[distributions]") {
  for (const auto& spec : all_families()) {
    RandomStream a(99);
    RandomStream b(99);
    CHECK(sample(spec, 1000, a) == sample(spec, 1000, b));
  }
  RandomStream c = RandomStream::derive(3, 0);
  RandomStream d = RandomStream::derive(3, 1);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("config form round trips", "[distributions]") {
  for (const auto& spec : all_families()) {
    const auto text = to_string(spec);
    CHECK(to_string(parse_distribution(text)) == text);
  }
  CHECK(to_string(parse_distribution("gev(xi=0.5,beta=1,mu=0)")) == "gev(xi=0.5,beta=1,mu=0)");
  CHECK(std::get<StudentT>(parse_distribution(" t( nu = 2 ) ")).nu == 2.0);
  CHECK(std::get<StandardPareto>(parse_distribution("stdpar(xi=0.1)")).u == 1.0);
  CHECK_THROWS_AS(parse_distribution("weibull(k=2)"), ParseError);
  CHECK_THROWS_AS(parse_distribution("exp(lambda=2)"), ParseError);
  CHECK_THROWS_AS(parse_distribution("exp(rate=abc)"), ParseError);
}

TEST_CASE("invalid parameters are domain errors", "[distributions]") {
  CHECK_THROWS_AS(validate(Exponential{0.0}), DomainError);
  CHECK_THROWS_AS(validate(Rayleigh{-1.0}), DomainError);
  CHECK_THROWS_AS(validate(StandardPareto{0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(StandardPareto{0.3, 0.0}), DomainError);
  CHECK_THROWS_AS(validate(Gev{0.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(validate(StudentT{0.0}), DomainError);
  CHECK_THROWS_AS(validate(StableSas{0.0}), DomainError);
  CHECK_THROWS_AS(validate(StableSas{2.1}), DomainError);
  CHECK_THROWS_AS(parse_distribution("sas(alpha=3)"), DomainError);
  CHECK_THROWS_AS(quantile(StableSas{1.5}, 0.5), DomainError);
}
