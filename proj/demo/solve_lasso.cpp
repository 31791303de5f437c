// Solves one random LASSO instance with both solvers and prints the outcome.
#include <cstdio>

#include "ladmm/lasso.hpp"
#include "ladmm/solvers.hpp"

int main() {
  const auto inst = ladmm::lasso::generate(200, 500, 7);
  const auto problem = ladmm::lasso::to_split_form(inst);
  ladmm::SolverConfig config;

  const auto adaptive = ladmm::solve_adaptive(problem, config);
  const auto fixed = ladmm::solve_oladmm(problem, config);
  for (const auto* run : {&adaptive, &fixed}) {
    std::printf("%-9s %-10s iter=%4d  ||p||=%.2e  ||q||=%.2e  obj=%.8f  kkt=%.2e\n",
                run == &adaptive ? "adaptive" : "oladmm", ladmm::to_string(run->reason),
                run->iterations, run->primal_res, run->dual_res, run->objective,
                ladmm::lasso::kkt_residual(inst, run->final_iterate.y));
  }
  return 0;
}
