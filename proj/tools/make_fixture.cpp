// Writes seeded standard Pareto data as block_id,value rows.
#include <charconv>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "zce/distributions.hpp"
#include "zce/random.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a blocked standard Pareto fixture", "make_fixture"};
  std::uint64_t seed = 1;
  int blocks = 50;
  int block_size = 100;
  double xi = 0.3;
  std::string output;
  app.add_option("--seed", seed);
  app.add_option("--blocks", blocks)->check(CLI::PositiveNumber);
  app.add_option("--block-size", block_size)->check(CLI::PositiveNumber);
  app.add_option("--xi", xi)->check(CLI::PositiveNumber);
  app.add_option("--output", output)->required();
  CLI11_PARSE(app, argc, argv);

  std::ofstream out(output);
  if (!out) {
    std::cerr << "error: cannot write '" << output << "'\n";
    return 1;
  }
  zce::RandomStream rng(seed);
  const zce::DistributionSpec spec = zce::StandardPareto{xi, 1.0};
  out << "block_id,value\n";
  char buf[64];
  for (int b = 0; b < blocks; ++b) {
    for (double v : zce::sample(spec, static_cast<std::size_t>(block_size), rng)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << b << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
    }
  }
  return 0;
}
