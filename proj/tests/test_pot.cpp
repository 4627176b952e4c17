#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <catch_amalgamated.hpp>

#include "reference.hpp"
#include "zce/error.hpp"
#include "zce/pot.hpp"

using namespace zce;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using zce::test::reference;

TEST_CASE("threshold selection", "[pot]") {
  std::vector<double> pooled{4, 9, 1, 7, 10, 3, 8, 2, 6, 5};
  const auto sel = select_threshold(pooled, 3);
  CHECK(sel.threshold == 7.0);
  CHECK(sel.exceedances == std::vector<double>{10, 9, 8});
  CHECK(select_threshold(pooled, 9).threshold == 1.0);
  CHECK_THROWS_AS(select_threshold(pooled, 10), DataSizeError);
  const std::vector<double> tied{1, 2, 5, 5, 5, 6};
  CHECK_THROWS_AS(select_threshold(tied, 2), TieError);
  CHECK(select_threshold(tied, 1).threshold == 5.0);
}

TEST_CASE("threshold keeps the top percentile", "[pot]") {
  RandomStream rng(3);
  const auto pooled = sample(StandardPareto{0.3, 1.0}, 5000, rng);
  const auto sel = select_threshold(pooled, 50);
  const auto above = std::count_if(pooled.begin(), pooled.end(), [&](double x) { return x > sel.threshold; });
  CHECK(above == 50);
  CHECK(sel.exceedances.size() == 50);
  CHECK(std::is_sorted(sel.exceedances.rbegin(), sel.exceedances.rend()));
}

TEST_CASE("pot series from blocks", "[pot]") {
  std::vector<std::vector<double>> blocks{{1.0, 2.0, 8.0}, {4.0, 16.0}, {1.5}};
  const auto s = make_pot_series(blocks, 2);
  CHECK(s.blocks() == 3);
  CHECK(s.block_sizes() == std::vector<int>{3, 2, 1});
  CHECK_THAT(s.mean_block_size(), WithinRel(2.0, 1e-15));
  CHECK(s.threshold == 4.0);
  CHECK_THAT(s.log_sum(), WithinRel(std::log(4.0) + std::log(2.0), 1e-15));
  CHECK_THAT(hill_estimate(s.log_exceedances), WithinRel(1.5 * std::log(2.0), 1e-15));
  for (double v : s.log_exceedances) CHECK(v > 0.0);
  CHECK_THROWS_AS(make_pot_series({{-3.0, -2.0, 1.0}}, 2), DomainError);
}

TEST_CASE("block CSV reader", "[pot]") {
  std::istringstream in("block_id,value\nb,2.5\na,1\nb,3\n\nc,4\n");
  const auto blocks = read_blocks_csv(in);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0] == std::vector<double>{2.5, 3.0});
  CHECK(blocks[1] == std::vector<double>{1.0});
  std::istringstream bad("1,2\n1,x\n");
  CHECK_THROWS_AS(read_blocks_csv(bad), ParseError);
  std::istringstream missing("1\n");
  CHECK_THROWS_AS(read_blocks_csv(missing), ParseError);
}

TEST_CASE("negative binomial predictive", "[pot]") {
  const auto nb = nu_predictive(50, 50, 100);
  CHECK_THAT(nb.mean(), WithinRel(reference()["nb_mean_50_50_100"].get<double>(), 1e-8));
  CHECK_THAT(nb.total(), WithinAbs(1.0, 1e-12));
  for (int n : {1, 5, 50, 200}) {
    for (int nt : {1, 10, 50}) {
      for (int N : {1, 10, 100, 1000}) {
        INFO(n << ' ' << nt << ' ' << N);
        const auto p = nu_predictive(n, nt, N);
        CHECK_THAT(p.total(), WithinAbs(1.0, 1e-8));
        CHECK_THAT(p.mean(), WithinRel(static_cast<double>(n) / nt * N * (1.0 + 0.5 / n), 1e-8));
      }
    }
  }
  CHECK_THAT(nu_predictive(100000, 100000, 10000).mean() / 10000.0, WithinAbs(1.0, 1e-3));
}

TEST_CASE("threshold psi values", "[pot]") {
  CHECK_THAT(psi_pot_bayes(50, 50, 0.99).value,
             WithinRel(reference()["psi_pot_bayes_50_50_0.99"].get<double>(), 1e-13));
  CHECK_THAT(psi_pot_bayes(50, 50, 0.99).value, WithinAbs(0.0966957, 1e-6));
  CHECK_THAT(psi_pot_ml(50, 50, 100, 0.99).value,
             WithinRel(reference()["psi_pot_ml_50_50_100_0.99"].get<double>(), 1e-13));
  CHECK_THAT(psi_pot_ml(50, 50, 100, 0.99).value, WithinAbs(0.202264, 1e-6));
  CHECK(psi_pot_bayes(50, 100, 0.99).value < psi_pot_bayes(50, 50, 0.99).value);
  CHECK_THAT(psi_pot_bayes(1000000, 1000000, 0.99).value, WithinRel(psi_bayes(1000000, 0.99).value, 1e-6));
  CHECK(psi_pot_ml(100000, 100000, 100, 0.99).value < 2e-4);
  CHECK_THROWS_AS(psi_pot_bayes(1, 1000, 0.5), QuantileBelowThresholdError);
  CHECK_THROWS_AS(psi_pot_ml(1, 1000, 1, 0.5), QuantileBelowThresholdError);
  CHECK_THROWS_AS(psi_pot_bayes(5, 5, 1.0), DomainError);
}

TEST_CASE("threshold psi ordering", "[pot]") {
  for (int n : {1, 2, 5, 10}) CHECK(psi_pot_bayes(n, n, 0.99).value > psi_bayes(n, 0.99).value);
  CHECK(psi_pot_bayes(500, 1000, 0.99).value < psi_bayes(500, 0.99).value);
}

TEST_CASE("threshold quantile", "[pot]") {
  const auto psi = psi_pot_bayes(50, 50, 0.99);
  CHECK_THAT(pot_quantile(1.0, 10.0, psi), WithinRel(reference()["pot_quantile_example"].get<double>(), 1e-13));
  CHECK_THAT(pot_quantile(1.0, 10.0, psi), WithinAbs(2.6300, 1e-4));
  CHECK(pot_quantile(3.0, 0.0, psi) == 3.0);
  std::vector<std::vector<double>> blocks{{1.0, 2.0, 8.0}, {4.0, 16.0}, {1.5}};
  const auto s = make_pot_series(blocks, 2);
  auto scaled = blocks;
  for (auto& b : scaled)
    for (auto& x : b) x *= 2.0;
  const auto s2 = make_pot_series(scaled, 2);
  CHECK_THAT(pot_quantile(s2, psi), WithinRel(2.0 * pot_quantile(s, psi), 1e-14));
  CHECK(pot_quantile(s, psi) >= s.threshold);
}

TEST_CASE("unconditional exceedance pmf", "[pot]") {
  const auto psi = psi_pot_bayes(50, 50, 0.99);
  const auto pmf = unconditional_exceedance_pmf(50, 50, 100, 0.99, psi);
  CHECK_THAT(pmf.total(), WithinAbs(1.0, 1e-8));
  CHECK_THAT(pmf.mean(), WithinAbs(1.0, 1e-6));
  for (double v : pmf.probabilities()) REQUIRE(v >= 0.0);
  const auto fixed = beg_pmf(50, 100, psi);
  CHECK(total_variation(pmf.probabilities(), fixed.probabilities()) < 0.01);
  const auto far = unconditional_exceedance_pmf(5, 5, 10, 1.0 - 1e-12, psi_pot_bayes(5, 5, 1.0 - 1e-12));
  CHECK_THAT(far[0], WithinAbs(1.0, 1e-6));
}
