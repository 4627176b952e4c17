#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <catch_amalgamated.hpp>

#include "reference.hpp"
#include "zce/error.hpp"
#include "zce/exceedance.hpp"

using namespace zce;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using zce::test::reference;

namespace {

PsiCoefficient psi_for(const std::string& method, int n, double alpha) {
  return method == "ml" ? psi_ml(n, alpha) : psi_bayes(n, alpha);
}

PsiCoefficient raw_psi(double value) { return PsiCoefficient{value, Method::Bayes, 0.5, 1}; }

}  // namespace

TEST_CASE("BEG pmf matches the high-precision reference", "[exceedance]") {
  for (const auto& [key, expected] : reference()["beg_alpha_0.99"].items()) {
    INFO(key);
    int n = 0;
    int N = 0;
    char method[8] = {};
    REQUIRE(std::sscanf(key.c_str(), "%d,%d,%7s", &n, &N, method) == 3);
    const auto pmf = beg_pmf(n, N, psi_for(method, n, 0.99));
    const auto& ref = expected["pmf"];
    REQUIRE(pmf.size() == ref.size());
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      const double r = ref[k].get<double>();
      REQUIRE_THAT(pmf[k], WithinAbs(r, 1e-13) || WithinRel(r, 1e-9));
    }
    CHECK_THAT(pmf.mean(), WithinRel(expected["mean"].get<double>(), 1e-10));
    CHECK_THAT(pmf.variance(), WithinRel(expected["variance"].get<double>(), 1e-9));
    CHECK_THAT(pmf.survival(1), WithinRel(expected["p_gt1"].get<double>(), 1e-9));
  }
}

TEST_CASE("BEG examples", "[exceedance]") {
  const auto bayes = beg_pmf(50, 100, psi_bayes(50, 0.99));
  CHECK_THAT(bayes.mean(), WithinAbs(1.0, 1e-6));
  CHECK_THAT(bayes.survival(1), WithinAbs(0.25, 0.01));
  CHECK_THAT(beg_variance(50, 100, psi_bayes(50, 0.99)),
             WithinRel(reference()["beg_alpha_0.99"]["50,100,bayes"]["variance"].get<double>(), 1e-10));
  CHECK_THAT(beg_variance(50, 100, psi_ml(50, 0.99)), WithinAbs(1.840, 1e-3));
  CHECK_THAT(beg_moment(1, 50, 100, psi_ml(50, 0.99)), WithinAbs(1.2212, 1e-4));
  const auto tiny = beg_pmf(1, 1, raw_psi(1.0));
  CHECK_THAT(tiny[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(tiny[1], WithinAbs(0.5, 1e-15));
}

TEST_CASE("BEG pmf invariants", "[exceedance]") {
  for (int n : {1, 2, 5, 20, 50, 200}) {
    for (int N : {1, 2, 10, 100, 1000}) {
      for (double psi : {0.001, 0.05, 0.5, 3.0}) {
        INFO("n=" << n << " N=" << N << " psi=" << psi);
        const auto p = raw_psi(psi);
        const auto pmf = beg_pmf(n, N, p);
        REQUIRE(pmf.size() == static_cast<std::size_t>(N + 1));
        for (double v : pmf.probabilities()) REQUIRE((v >= 0.0 && v <= 1.0));
        REQUIRE_THAT(pmf.total(), WithinAbs(1.0, 1e-8));
        const double m1 = beg_moment(1, n, N, p);
        CHECK_THAT(m1, WithinRel(N * std::pow(psi + 1.0, -n), 1e-8));
        CHECK_THAT(pmf.mean(), WithinRel(m1, 1e-6) || WithinAbs(m1, 1e-12));
        const double var = beg_variance(n, N, p);
        CHECK_THAT(beg_moment(2, n, N, p) - m1 * m1, WithinRel(var, 1e-8) || WithinAbs(var, 1e-12));
        CHECK(var >= 0.0);
        if (N <= 100) {
          CHECK_THAT(pmf.moment(3), WithinRel(beg_moment(3, n, N, p), 1e-6) || WithinAbs(beg_moment(3, n, N, p), 1e-12));
        }
      }
    }
  }
}

TEST_CASE("BEG with one future sample is Bernoulli", "[exceedance]") {
  for (int n : {1, 3, 40}) {
    for (double psi : {0.01, 0.2, 2.0}) {
      const double p = std::pow(psi + 1.0, -n);
      const auto pmf = beg_pmf(n, 1, raw_psi(psi));
      CHECK_THAT(pmf[1], WithinRel(p, 1e-13));
      CHECK_THAT(beg_variance(n, 1, raw_psi(psi)), WithinRel(p * (1.0 - p), 1e-12));
    }
  }
}

TEST_CASE("ML survival dominates Bayes survival", "[exceedance]") {
  const auto bayes = beg_pmf(50, 100, psi_bayes(50, 0.99));
  const auto ml = beg_pmf(50, 100, psi_ml(50, 0.99));
  for (std::size_t k = 1; k < 40; ++k) CHECK(ml.survival(k) > bayes.survival(k));
}

TEST_CASE("large psi concentrates at zero", "[exceedance]") {
  const auto pmf = beg_pmf(10, 100, raw_psi(1e4));
  CHECK_THAT(pmf[0], WithinAbs(1.0, 1e-12));
  CHECK(pmf.mean() < 1e-12);
}

TEST_CASE("alternating and quadrature routes agree", "[exceedance]") {
  for (int n : {1, 10, 50, 200}) {
    for (int N : {40, 100, 1000}) {
      for (double psi : {0.002, 0.05, 0.7}) {
        for (int span = 0; span <= std::min(N, kAlternatingSpan); span += 5) {
          const int k = N - span;
          const double a = beg_probability_alternating(n, N, psi, k);
          const double q = beg_probability_quadrature(n, N, psi, k);
          INFO("n=" << n << " N=" << N << " psi=" << psi << " k=" << k);
          REQUIRE_THAT(a, WithinAbs(q, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("no negative probabilities at N = 1000", "[exceedance]") {
  for (int n : {1, 5, 50, 500}) {
    for (double a : {0.9, 0.99, 0.999}) {
      for (const auto& psi : {psi_bayes(n, a), psi_ml(n, a)}) {
        const auto pmf = beg_pmf(n, 1000, psi);
        for (double v : pmf.probabilities()) REQUIRE(v >= 0.0);
        CHECK_THAT(pmf.total(), WithinAbs(1.0, 1e-8));
      }
    }
  }
}

TEST_CASE("GvS pmf", "[exceedance]") {
  const auto& ref = reference()["gvs_100_1_100"];
  const auto pmf = gvs_pmf(100, 1, 100);
  for (std::size_t k = 0; k < pmf.size(); ++k) REQUIRE_THAT(pmf[k], WithinRel(ref["pmf"][k].get<double>(), 1e-11));
  CHECK_THAT(pmf.mean(), WithinAbs(0.990099, 1e-6));
  CHECK_THAT(pmf.variance(), WithinRel(ref["variance"].get<double>(), 1e-10));
  const auto two = gvs_pmf(1, 1, 1);
  CHECK_THAT(two[0], WithinRel(0.5, 1e-15));
  CHECK_THAT(two[1], WithinRel(0.5, 1e-15));
  for (int n : {1, 7, 100, 400}) {
    for (int m : {1, 3}) {
      if (m > n) continue;
      for (int N : {1, 10, 1000}) {
        const auto g = gvs_pmf(n, m, N);
        CHECK_THAT(g.total(), WithinAbs(1.0, 1e-10));
        CHECK_THAT(g.mean(), WithinRel(static_cast<double>(N) * m / (n + 1), 1e-9));
      }
    }
  }
  CHECK_THROWS_AS(gvs_pmf(5, 6, 10), DomainError);
}

TEST_CASE("GvS agrees with order-statistic simulation", "[exceedance]") {
  constexpr int n = 20;
  constexpr int m = 2;
  constexpr int N = 10;
  constexpr int replications = 200000;
  RandomStream rng(4);
  std::vector<double> counts(N + 1, 0.0);
  std::vector<double> past(n);
  for (int r = 0; r < replications; ++r) {
    for (auto& x : past) x = rng.uniform();
    std::nth_element(past.begin(), past.begin() + (m - 1), past.end(), std::greater<>());
    const double cut = past[m - 1];
    int k = 0;
    for (int j = 0; j < N; ++j) k += rng.uniform() > cut;
    counts[k] += 1.0 / replications;
  }
  CHECK(total_variation(counts, gvs_pmf(n, m, N).probabilities()) < 0.005);
}

TEST_CASE("total variation", "[exceedance]") {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.25, 0.25, 0.5};
  CHECK_THAT(total_variation(p, q), WithinAbs(0.5, 1e-15));
  CHECK(total_variation(p, p) == 0.0);
}

TEST_CASE("pmf CSV", "[exceedance]") {
  std::ostringstream out;
  write_csv(out, beg_pmf(2, 3, psi_bayes(2, 0.9)));
  const std::string text = out.str();
  CHECK(text.starts_with("k,probability\n0,"));
  CHECK_THAT(text, ContainsSubstring("\n3,"));
  CHECK_THAT(text, ContainsSubstring("# "));
  CHECK_THAT(text, ContainsSubstring("N=3"));
}

TEST_CASE("moment order is limited", "[exceedance]") {
  CHECK_THROWS_AS(beg_moment(9, 5, 5, raw_psi(0.1)), DomainError);
  CHECK_THROWS_AS(beg_moment(0, 5, 5, raw_psi(0.1)), DomainError);
  CHECK_THROWS_AS(beg_pmf(5, 5, raw_psi(0.0)), DomainError);
}
