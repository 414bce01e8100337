// Rolls out the closed-form greedy policy on one random TSP-10 instance and
// compares it with the exact optimum.

#include <cstdio>

#include "eqctsp/eqc.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/mdp.hpp"
#include "eqctsp/solvers.hpp"

int main() {
  using namespace eqctsp;
  const TspInstance inst = generate_instance(10, 12345, "demo");
  const EqcParams params{0.9, 1.1};

  const Tour policy_tour = greedy_rollout(inst, params);
  const Tour optimal = solve_held_karp(inst);

  std::printf("policy tour :");
  for (int v : policy_tour.order) std::printf(" %d", v);
  std::printf("  length %.6f\n", policy_tour.length);
  std::printf("optimal tour:");
  for (int v : optimal.order) std::printf(" %d", v);
  std::printf("  length %.6f\n", optimal.length);
  std::printf("gap: %.4f\n", policy_tour.length / optimal.length);
  return 0;
}
