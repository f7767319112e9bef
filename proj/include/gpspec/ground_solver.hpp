#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gpspec/eigensolver.hpp"
#include "gpspec/error.hpp"
#include "gpspec/field.hpp"
#include "gpspec/model.hpp"

namespace gpspec {

struct SolverConfig {
  enum class Method { kScf, kGradientFlow };
  Method method = Method::kScf;
  double tol_residual = 1e-10;  ///< H^{-1} norm of A_u u - Lambda_u u on X_M
  int max_outer = 500;
  double damping = 0.5;         ///< SCF mixing beta in (0, 1]
  double flow_step = 1.0;       ///< preconditioned gradient-flow step
  double inner_tol = 1e-12;     ///< inner eigensolve tolerance
  std::uint64_t seed = 1;
  int residual_fine_factor = 4; ///< cutoff multiple on which the reported residual is measured

  void validate() const {
    if (!(tol_residual > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tol_residual must be positive");
    if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "damping must lie in (0, 1]");
    if (!(flow_step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "flow step must be positive");
    if (!(inner_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "inner tolerance must be positive");
    if (max_outer < 1) throw Error(ErrorCode::kInvalidArgument, "max_outer must be at least 1");
    if (residual_fine_factor < 1) throw Error(ErrorCode::kInvalidArgument, "residual fine factor must be >= 1");
  }
};

inline std::string to_string(SolverConfig::Method m) {
  return m == SolverConfig::Method::kScf ? "scf" : "gradient_flow";
}

struct TraceRow {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
  double lambda = 0.0;
};

/// Flip v so that it has nonnegative L2 overlap with `reference`.
inline SpectralField align_sign(SpectralField v, const SpectralField& reference) {
  if (l2_inner(v, reference) < 0.0) v *= -1.0;
  return v;
}

/// Pin the sign through the k = 0 coefficient (nonnegative mean).
inline SpectralField pin_sign(SpectralField v) {
  if (v.mean_coeff().real() < 0.0) v *= -1.0;
  return v;
}

/// Normalized constant plus a seeded 1e-2 perturbation of the modes with |k| <= 2.
inline SpectralField initial_guess(const Basis& basis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField u = unit_constant(basis);
  const auto& b = *basis;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.norm2(i) > 0.0 && b.norm2(i) <= 4.0) u[i] += 1e-2 * Complex(normal(rng), normal(rng));
  }
  u.symmetrize();
  return pin_sign(normalized(std::move(u)));
}

/// H^{-1} norm of A_u u - Lambda_u u restricted to the basis of u, and Lambda_u.
inline std::pair<double, double> projected_residual(const Problem& p, const SpectralField& u) {
  const SpectralField au = apply_fock(p, u, u);
  const double lambda = l2_inner(au, u) / l2_inner(u, u);
  SpectralField r = au;
  r.axpy(-lambda, u);
  return {hminus1_norm(r), lambda};
}

struct ScfStep {
  SpectralField u_next;
  double lambda_next = 0.0;  ///< lowest eigenvalue of the frozen operator
  double lambda2 = 0.0;
  int inner_iterations = 0;
};

inline EigConfig inner_eig_config(const SolverConfig& cfg) {
  EigConfig e;
  e.tol = cfg.inner_tol;
  e.seed = cfg.seed;
  return e;
}

/// One damped self-consistent field step: lowest eigenpair of the frozen A_u, then mixing.
inline ScfStep scf_step(const Problem& p, const SpectralField& u, const SolverConfig& cfg) {
  const LocalOperator op = fock_operator(p, u);
  const int nev = u.size() >= 2 ? 2 : 1;
  EigenPairs eig = lowest_eigenpairs(op, nev, inner_eig_config(cfg), &u);
  if (!eig.converged) {
    throw Error(ErrorCode::kNonconvergence, "inner eigensolve did not converge", eig.residuals.front());
  }
  ScfStep out;
  out.lambda_next = eig.values[0];
  out.lambda2 = nev == 2 ? eig.values[1] : std::numeric_limits<double>::infinity();
  out.inner_iterations = eig.iterations;
  if (out.lambda2 - out.lambda_next < 1e-10) {
    throw Error(ErrorCode::kDegenerateGroundState, "lowest eigenvalue of the frozen operator is not simple",
                out.lambda2 - out.lambda_next);
  }
  const SpectralField phi = align_sign(eig.vectors[0], u);
  SpectralField mixed = (1.0 - cfg.damping) * u;
  mixed.axpy(cfg.damping, phi);
  mixed.symmetrize();
  out.u_next = align_sign(normalized(std::move(mixed)), u);
  return out;
}

/// One projected Sobolev gradient step with backtracking so that E(u_next) <= E(u).
inline SpectralField gradient_flow_step(const Problem& p, const SpectralField& u, const SolverConfig& cfg,
                                        double* accepted_step = nullptr) {
  const SpectralField au = apply_fock(p, u, u);
  const double lambda = l2_inner(au, u);
  SpectralField g = au;
  g.axpy(-lambda, u);
  const auto& b = u.spec();
  for (std::size_t i = 0; i < b.size(); ++i) g[i] /= p.a0 * (1.0 + b.norm2(i));
  g = project_orthogonal(g, u);
  if (l2_norm(g) == 0.0) return u;

  const double e0 = energy(p, u);
  const double slack = 1e-14 * std::max(1.0, std::abs(e0));
  for (double tau = cfg.flow_step; tau >= 1e-12; tau *= 0.5) {
    SpectralField trial = u;
    trial.axpy(-tau, g);
    trial.symmetrize();
    trial = normalized(std::move(trial));
    if (energy(p, trial) <= e0 + slack) {
      if (accepted_step != nullptr) *accepted_step = tau;
      return trial;
    }
  }
  throw Error(ErrorCode::kStagnation, "gradient-flow step underflow without energy decrease", hminus1_norm(g));
}

/// Fill energy, lambda, residuals and the frozen-operator gap for a converged iterate.
inline GroundState finalize_ground_state(const Problem& p, const Basis& basis, SpectralField u, int iterations,
                                         const SolverConfig& cfg) {
  GroundState gs;
  gs.basis = basis;
  gs.u = pin_sign(normalized(std::move(u)));
  gs.lambda = rayleigh(p, gs.u);
  gs.energy = energy(p, gs.u);
  gs.iterations = iterations;
  gs.converged = true;
  const Basis fine = make_basis(basis->dim(), cfg.residual_fine_factor * basis->cutoff());
  gs.residual_cutoff = fine->cutoff();
  gs.residual_dual_norm = hminus1_norm(residual(p, gs, fine));
  if (basis->size() >= 2) {
    const EigenPairs eig = lowest_eigenpairs(fock_operator(p, gs.u), 2, inner_eig_config(cfg), &gs.u);
    gs.lambda2 = eig.values[1];
  }
  return gs;
}

/// Discrete ground state on `basis`: ||u|| = 1, mean(u) >= 0 and the projected residual below tol.
inline GroundState solve_ground_state(const Problem& p, const Basis& basis, const SolverConfig& cfg,
                                      std::vector<TraceRow>* trace = nullptr) {
  p.validate();
  cfg.validate();
  if (basis->dim() != p.dim) throw Error(ErrorCode::kDimensionMismatch, "basis and problem dimensions differ");

  SpectralField u = initial_guess(basis, cfg.seed);
  double res = 0.0;
  for (int it = 0; it <= cfg.max_outer; ++it) {
    const auto [r, lambda] = projected_residual(p, u);
    res = r;
    if (trace != nullptr) trace->push_back({it, energy(p, u), r, lambda});
    if (r <= cfg.tol_residual) return finalize_ground_state(p, basis, std::move(u), it, cfg);
    if (it == cfg.max_outer) break;
    if (cfg.method == SolverConfig::Method::kScf) {
      u = pin_sign(scf_step(p, u, cfg).u_next);
    } else {
      u = pin_sign(gradient_flow_step(p, u, cfg));
    }
  }
  throw Error(ErrorCode::kNonconvergence,
              "ground state not converged after " + std::to_string(cfg.max_outer) + " outer iterations", res);
}

}  // namespace gpspec
