// Coarse ground state for V = cos(x) and every post-processing scheme on a 4M fine space,
// compared with a fine reference solve.

#include <cstdio>

#include "gpspec/gpspec.hpp"

int main() {
  using namespace gpspec;
  const Problem p = cosine_problem(1, 1.0);
  const int m = 4;
  const GroundState gs = solve_ground_state(p, make_basis(1, m), SolverConfig{});
  const GroundState ref = solve_ground_state(p, make_basis(1, 64), SolverConfig{});
  const Basis fine = make_basis(1, 4 * m);

  const auto err = [&](const SpectralField& u) {
    return h1_norm(align_sign(prolong(u, ref.basis), ref.u) - ref.u);
  };
  std::printf("M = %d, lambda = %.12f, E = %.12f\n", m, gs.lambda, gs.energy);
  std::printf("%-8s %-12s %-12s\n", "scheme", "err_h1", "err_lambda");
  std::printf("%-8s %-12.3e %-12.3e\n", "coarse", err(gs.u), std::abs(gs.lambda - ref.lambda));
  for (Scheme s : {Scheme::kNewton, Scheme::kTwoGrid1, Scheme::kTwoGrid2a, Scheme::kTwoGrid2b,
                   Scheme::kPerturbation}) {
    const Correction c = apply_scheme(s, p, gs, fine);
    std::printf("%-8s %-12.3e %-12.3e\n", to_string(s).c_str(), err(c.u_hat), std::abs(c.lambda_hat - ref.lambda));
  }
}
