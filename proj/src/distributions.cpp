#include "zce/distributions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "zce/detail/quadrature.hpp"
#include "zce/error.hpp"

namespace zce {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

// Symmetric alpha-stable cdf for x > 0 through Nolan's integral
// representation; alpha in (0, 2), alpha != 1.
double sas_cdf_positive(double alpha, double x) {
  const double pi = std::numbers::pi;
  const double e = alpha / (alpha - 1.0);
  const double log_x = std::log(x);
  auto log_g = [&](double theta) {
    return e * (log_x + std::log(std::cos(theta)) - std::log(std::sin(alpha * theta))) +
           std::log(std::cos((alpha - 1.0) * theta)) - std::log(std::cos(theta));
  };
  auto integrand = [&](double theta) {
    if (theta <= 0.0 || theta >= pi / 2) return alpha > 1.0 ? (theta <= 0.0 ? 0.0 : 1.0)
                                                            : (theta <= 0.0 ? 1.0 : 0.0);
    const double lg = log_g(theta);
    if (lg > 700.0) return 0.0;
    return std::exp(-std::exp(lg));
  };

  // log g is monotone in theta; split the range where exp(-g) changes fastest.
  std::vector<double> breaks{0.0};
  const double lo = 1e-12;
  const double hi = pi / 2 - 1e-12;
  for (double level : {-6.0, -2.0, 0.0, 2.0, 4.0}) {
    auto f = [&](double t) { return log_g(t) - level; };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (std::isfinite(flo) && std::isfinite(fhi) && (flo < 0.0) != (fhi < 0.0)) {
      breaks.push_back(detail::bisect(f, lo, hi, 100));
    }
  }
  breaks.push_back(pi / 2);
  std::sort(breaks.begin(), breaks.end());
  const double integral = detail::integrate_panels(integrand, breaks, 1e-12);
  return alpha > 1.0 ? 1.0 - integral / pi : 0.5 + integral / pi;
}

double sas_cdf(double alpha, double x) {
  if (alpha == 2.0) return 0.5 * std::erfc(-x / 2.0);
  if (alpha == 1.0) return 0.5 + std::atan(x) / std::numbers::pi;
  if (x == 0.0) return 0.5;
  if (x > 0.0) return sas_cdf_positive(alpha, x);
  return 1.0 - sas_cdf_positive(alpha, -x);
}

// Samplers; parameters assumed valid.
double draw_from(const Exponential& d, RandomStream& rng) { return rng.exponential() / d.rate; }

double draw_from(const Rayleigh& d, RandomStream& rng) {
  return d.sigma * std::sqrt(2.0 * rng.exponential());
}

double draw_from(const StandardPareto& d, RandomStream& rng) {
  return d.u * std::exp(d.xi * rng.exponential());
}

double draw_from(const Gev& d, RandomStream& rng) {
  // Inverse cdf with -log(U) ~ Exp(1).
  const double log_e = std::log(rng.exponential());
  if (d.xi == 0.0) return d.mu - d.beta * log_e;
  return d.mu + d.beta * std::expm1(-d.xi * log_e) / d.xi;
}

double draw_from(const LogNormal& d, RandomStream& rng) {
  return std::exp(d.mu + d.sigma * rng.normal());
}

double draw_from(const StudentT& d, RandomStream& rng) {
  // Bailey's polar method.
  double u, v, w;
  do {
    u = 2.0 * rng.uniform() - 1.0;
    v = 2.0 * rng.uniform() - 1.0;
    w = u * u + v * v;
  } while (w >= 1.0 || w == 0.0);
  return u * std::sqrt(d.nu * std::expm1(-2.0 / d.nu * std::log(w)) / w);
}

double draw_from(const StableSas& d, RandomStream& rng) {
  // Chambers-Mallows-Stuck, symmetric case.
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double a = d.alpha;
  if (a == 1.0) return std::tan(v);
  return std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
         std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
}

// Parsing helpers.
std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view context) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("invalid number '" + std::string(text) + "' in '" + std::string(context) + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

void validate(const DistributionSpec& spec) {
  std::visit(Overloaded{
                 [](const Exponential& d) { require(d.rate > 0.0, "exponential rate must be positive"); },
                 [](const Rayleigh& d) { require(d.sigma > 0.0, "rayleigh sigma must be positive"); },
                 [](const StandardPareto& d) {
                   require(d.xi > 0.0, "pareto tail index must be positive");
                   require(d.u > 0.0, "pareto scale u must be positive");
                 },
                 [](const Gev& d) {
                   require(d.beta > 0.0, "gev scale beta must be positive");
                   require(std::isfinite(d.xi) && std::isfinite(d.mu), "gev parameters must be finite");
                 },
                 [](const LogNormal& d) {
                   require(d.sigma > 0.0, "lognormal sigma must be positive");
                   require(std::isfinite(d.mu), "lognormal mu must be finite");
                 },
                 [](const StudentT& d) { require(d.nu > 0.0, "student-t degrees of freedom must be positive"); },
                 [](const StableSas& d) {
                   require(d.alpha > 0.0 && d.alpha <= 2.0, "stable characteristic exponent must be in (0, 2]");
                 },
             },
             spec);
}

double support_lower(const DistributionSpec& spec) {
  return std::visit(Overloaded{
                        [](const Exponential&) { return 0.0; },
                        [](const Rayleigh&) { return 0.0; },
                        [](const StandardPareto& d) { return d.u; },
                        [](const Gev& d) { return d.xi > 0.0 ? d.mu - d.beta / d.xi : -kInf; },
                        [](const LogNormal&) { return 0.0; },
                        [](const StudentT&) { return -kInf; },
                        [](const StableSas&) { return -kInf; },
                    },
                    spec);
}

double draw(const DistributionSpec& spec, RandomStream& rng) {
  return std::visit([&](const auto& d) { return draw_from(d, rng); }, spec);
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t count, RandomStream& rng) {
  validate(spec);
  if (count == 0) throw DomainError("sample count must be positive");
  std::vector<double> out(count);
  sample_into(spec, out, rng);
  return out;
}

void sample_into(const DistributionSpec& spec, std::span<double> out, RandomStream& rng) {
  std::visit(
      [&](const auto& d) {
        for (double& x : out) x = draw_from(d, rng);
      },
      spec);
}

double cdf(const DistributionSpec& spec, double x) {
  validate(spec);
  if (std::isnan(x)) throw DomainError("cdf argument is NaN");
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x); },
          [&](const Rayleigh& d) {
            return x <= 0.0 ? 0.0 : -std::expm1(-x * x / (2.0 * d.sigma * d.sigma));
          },
          [&](const StandardPareto& d) {
            return x <= d.u ? 0.0 : -std::expm1(-std::log(x / d.u) / d.xi);
          },
          [&](const Gev& d) {
            if (d.xi == 0.0) return std::exp(-std::exp(-(x - d.mu) / d.beta));
            const double t = 1.0 + d.xi * (x - d.mu) / d.beta;
            if (t <= 0.0) return d.xi > 0.0 ? 0.0 : 1.0;
            return std::exp(-std::pow(t, -1.0 / d.xi));
          },
          [&](const LogNormal& d) {
            if (x <= 0.0) return 0.0;
            return 0.5 * std::erfc(-(std::log(x) - d.mu) / (d.sigma * std::numbers::sqrt2));
          },
          [&](const StudentT& d) {
            if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
            return boost::math::cdf(boost::math::students_t_distribution<double>(d.nu), x);
          },
          [&](const StableSas& d) {
            if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
            return sas_cdf(d.alpha, x);
          },
      },
      spec);
}

double log_survival(const DistributionSpec& spec, double x) {
  validate(spec);
  if (std::isnan(x)) throw DomainError("log_survival argument is NaN");
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return x <= 0.0 ? 0.0 : -d.rate * x; },
          [&](const Rayleigh& d) { return x <= 0.0 ? 0.0 : -x * x / (2.0 * d.sigma * d.sigma); },
          [&](const StandardPareto& d) { return x <= d.u ? 0.0 : -std::log(x / d.u) / d.xi; },
          [&](const Gev& d) {
            double z;
            if (d.xi == 0.0) {
              z = std::exp(-(x - d.mu) / d.beta);
            } else {
              const double t = 1.0 + d.xi * (x - d.mu) / d.beta;
              if (t <= 0.0) return d.xi > 0.0 ? 0.0 : -kInf;
              z = std::pow(t, -1.0 / d.xi);
            }
            return std::log(-std::expm1(-z));
          },
          [&](const LogNormal& d) {
            if (x <= 0.0) return 0.0;
            return std::log(0.5 * std::erfc((std::log(x) - d.mu) / (d.sigma * std::numbers::sqrt2)));
          },
          [&](const StudentT& d) {
            if (std::isinf(x)) return x > 0.0 ? -kInf : 0.0;
            boost::math::students_t_distribution<double> t(d.nu);
            return std::log(boost::math::cdf(boost::math::complement(t, x)));
          },
          [&](const StableSas& d) {
            if (std::isinf(x)) return x > 0.0 ? -kInf : 0.0;
            // Symmetry: S(x) = F(-x).
            return std::log(sas_cdf(d.alpha, -x));
          },
      },
      spec);
}

double quantile(const DistributionSpec& spec, double p) {
  validate(spec);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must be in [0, 1]");
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return -std::log1p(-p) / d.rate; },
          [&](const Rayleigh& d) { return d.sigma * std::sqrt(-2.0 * std::log1p(-p)); },
          [&](const StandardPareto& d) { return d.u * std::exp(-d.xi * std::log1p(-p)); },
          [&](const Gev& d) {
            const double log_e = std::log(-std::log(p));
            if (d.xi == 0.0) return d.mu - d.beta * log_e;
            return d.mu + d.beta * std::expm1(-d.xi * log_e) / d.xi;
          },
          [&](const LogNormal& d) {
            if (p == 0.0) return 0.0;
            if (p == 1.0) return kInf;
            return std::exp(d.mu - d.sigma * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p));
          },
          [&](const StudentT& d) {
            if (p == 0.0) return -kInf;
            if (p == 1.0) return kInf;
            return boost::math::quantile(boost::math::students_t_distribution<double>(d.nu), p);
          },
          [&](const StableSas& d) -> double {
            if (d.alpha == 2.0) {
              return -2.0 * boost::math::erfc_inv(2.0 * p);
            }
            if (d.alpha == 1.0) return std::tan(std::numbers::pi * (p - 0.5));
            throw DomainError("stable quantile has no closed form");
          },
      },
      spec);
}

double quantile_from_log_survival(const DistributionSpec& spec, double log_s) {
  validate(spec);
  if (!(log_s <= 0.0)) throw DomainError("log survival must be nonpositive");
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return -log_s / d.rate; },
          [&](const Rayleigh& d) { return d.sigma * std::sqrt(-2.0 * log_s); },
          [&](const StandardPareto& d) { return d.u * std::exp(-d.xi * log_s); },
          [&](const Gev& d) {
            // cdf p = 1 - exp(log_s); -log p = -log1p(-exp(log_s)).
            const double log_e = std::log(-std::log1p(-std::exp(log_s)));
            if (d.xi == 0.0) return d.mu - d.beta * log_e;
            return d.mu + d.beta * std::expm1(-d.xi * log_e) / d.xi;
          },
          [&](const LogNormal& d) {
            return std::exp(d.mu + d.sigma * std::numbers::sqrt2 *
                                       boost::math::erfc_inv(2.0 * std::exp(log_s)));
          },
          [&](const StudentT& d) {
            if (log_s == 0.0) return -kInf;
            boost::math::students_t_distribution<double> t(d.nu);
            return boost::math::quantile(boost::math::complement(t, std::exp(log_s)));
          },
          [&](const StableSas& d) {
            return -quantile(d, std::exp(log_s));
          },
      },
      spec);
}

DistributionSpec parse_distribution(std::string_view text) {
  const std::string_view original = text;
  text = trim(text);
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
      !trim(text.substr(close + 1)).empty()) {
    throw ParseError("expected name(key=value,...) but got '" + std::string(original) + "'");
  }
  const std::string name(trim(text.substr(0, open)));
  std::vector<std::pair<std::string, double>> args;
  std::string_view body = text.substr(open + 1, close - open - 1);
  while (!trim(body).empty()) {
    const auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected key=value in '" + std::string(original) + "'");
    }
    args.emplace_back(std::string(trim(item.substr(0, eq))), parse_number(item.substr(eq + 1), original));
  }

  auto bind = [&](std::initializer_list<std::pair<const char*, double*>> slots) {
    for (const auto& [key, value] : args) {
      bool found = false;
      for (const auto& [slot_key, slot] : slots) {
        if (key == slot_key) {
          *slot = value;
          found = true;
        }
      }
      if (!found) throw ParseError("unknown parameter '" + key + "' for " + name);
    }
  };

  DistributionSpec spec;
  if (name == "exp") {
    Exponential d;
    bind({{"rate", &d.rate}});
    spec = d;
  } else if (name == "rayleigh") {
    Rayleigh d;
    bind({{"sigma", &d.sigma}});
    spec = d;
  } else if (name == "stdpar") {
    StandardPareto d;
    bind({{"xi", &d.xi}, {"u", &d.u}});
    spec = d;
  } else if (name == "gev") {
    Gev d;
    bind({{"xi", &d.xi}, {"mu", &d.mu}, {"beta", &d.beta}});
    spec = d;
  } else if (name == "lognormal") {
    LogNormal d;
    bind({{"mu", &d.mu}, {"sigma", &d.sigma}});
    spec = d;
  } else if (name == "t") {
    StudentT d;
    bind({{"nu", &d.nu}});
    spec = d;
  } else if (name == "sas") {
    StableSas d;
    bind({{"alpha", &d.alpha}});
    spec = d;
  } else {
    throw ParseError("unknown distribution '" + name +
                     "' (expected exp, rayleigh, stdpar, gev, lognormal, t, sas)");
  }
  validate(spec);
  return spec;
}

std::string to_string(const DistributionSpec& spec) {
  auto f = format_number;
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return "exp(rate=" + f(d.rate) + ")"; },
                        [&](const Rayleigh& d) { return "rayleigh(sigma=" + f(d.sigma) + ")"; },
                        [&](const StandardPareto& d) {
                          return "stdpar(xi=" + f(d.xi) + ",u=" + f(d.u) + ")";
                        },
                        [&](const Gev& d) {
                          return "gev(xi=" + f(d.xi) + ",beta=" + f(d.beta) + ",mu=" + f(d.mu) + ")";
                        },
                        [&](const LogNormal& d) {
                          return "lognormal(mu=" + f(d.mu) + ",sigma=" + f(d.sigma) + ")";
                        },
                        [&](const StudentT& d) { return "t(nu=" + f(d.nu) + ")"; },
                        [&](const StableSas& d) { return "sas(alpha=" + f(d.alpha) + ")"; },
                    },
                    spec);
}

}  // namespace zce
