// Minimal grid-search run: seeded TSP-10 datasets, exact references, then
// gamma selection on the validation set and a test-set report.

#include <cstdio>

#include "eqctsp/sigs.hpp"
#include "eqctsp/solvers.hpp"

int main() {
  using namespace eqctsp;
  Dataset val = generate(10, 50, 7001, DatasetRole::validation);
  Dataset test = generate(10, 200, 7002, DatasetRole::test);
  compute_references(val);
  compute_references(test);

  const SigsResult res = run_sigs(val, test, SigsConfig{});
  std::printf("selected gamma* = %.2f\n", res.gamma_star);
  std::printf("test gaps: mean %.4f, worst %.4f, best %.4f\n", res.test.mean, res.test.worst,
              res.test.best);
  return 0;
}
