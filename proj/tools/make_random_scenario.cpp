// Writes a commutative scenario on n random points of the unit square with
// k seeded strictly contractive point maps.
//
//   make_random_scenario <n> <k> <seed> > scenario.json

#include <iostream>
#include <string>

#include "ncfractal/classical.hpp"
#include "report.hpp"

using namespace ncfractal;

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: make_random_scenario <n> <k> <seed>\n";
    return 2;
  }
  const int n = std::stoi(argv[1]);
  const int k = std::stoi(argv[2]);
  Rng rng(std::stoull(argv[3]));
  const FiniteMetricSpace x = FiniteMetricSpace::random(n, rng);

  std::uniform_int_distribution<int> point(0, n - 1);
  std::vector<PointMap> maps;
  bool moving = false;  // at least one map must be non-constant
  for (int tries = 0; static_cast<int>(maps.size()) < k && tries < 1000000; ++tries) {
    std::vector<int> g(static_cast<std::size_t>(n));
    for (int& v : g) v = point(rng);
    const PointMap pm{g};
    if (!(lipschitz_constant(pm, x) < ExtendedReal(1.0))) continue;
    const bool constant = std::all_of(g.begin(), g.end(), [&](int v) { return v == g[0]; });
    if (constant && !moving && static_cast<int>(maps.size()) == k - 1) continue;
    moving = moving || !constant;
    maps.push_back(pm);
  }
  if (static_cast<int>(maps.size()) < k) {
    std::cerr << "could not find enough contractive maps\n";
    return 1;
  }

  cli::ojson doc;
  doc["name"] = "random" + std::to_string(n);
  doc["description"] = "Seeded random " + std::to_string(n) + "-point Euclidean metric with strictly contractive maps";
  doc["space"] = {{"d", cli::matrix_json(x.d())}};
  cli::ojson jm = cli::ojson::array();
  for (const auto& m : maps) jm.push_back(m.g);
  doc["maps"] = jm;
  cli::ojson w = cli::ojson::array();
  for (int i = 0; i < k; ++i) w.push_back(1.0 / k);
  std::vector<double> skew(static_cast<std::size_t>(k));
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += (skew[i] = i + 1.0);
  cli::ojson w2 = cli::ojson::array();
  for (double v : skew) w2.push_back(v / total);
  doc["weights"] = {w, w2};
  doc["states"] = {{"phi0", {{"dirac", 0}}}, {"last", {{"dirac", n - 1}}}, {"uniform", {{"maximally_mixed", true}}}};
  std::cout << cli::dump_json(doc);
  return 0;
}
