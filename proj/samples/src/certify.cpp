// Residual, energy bounds, spectral gap and Kantorovich certificate for V = cos(x), mu = 1
// over a range of cutoffs.

#include <cstdio>

#include "gpspec/gpspec.hpp"

int main() {
  using namespace gpspec;
  const Problem p = cosine_problem(1, 1.0);
  std::printf("%-4s %-11s %-11s %-11s %-9s %-11s %-9s\n", "M", "residual", "E_lower", "E_upper", "gap",
              "2gammaL", "bound");
  for (int m : {1, 2, 3, 4, 6, 8}) {
    const GroundState gs = solve_ground_state(p, make_basis(1, m), SolverConfig{});
    const EstimateReport r = estimate(p, gs, make_basis(1, 4 * m));
    std::printf("%-4d %-11.3e %-11.8f %-11.8f %-9.5f %-11.3e %-9.2e\n", m, r.residual_dual, r.energy_lower,
                r.energy_upper, r.gap, r.validity_alpha, r.error_bound_h1);
  }
}
