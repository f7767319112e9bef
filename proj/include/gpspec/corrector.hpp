#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "gpspec/eigensolver.hpp"
#include "gpspec/error.hpp"
#include "gpspec/field.hpp"
#include "gpspec/ground_solver.hpp"
#include "gpspec/krylov.hpp"
#include "gpspec/model.hpp"

namespace gpspec {

struct LinSolveConfig {
  double tol = 1e-11;   ///< H^{-1} residual of the fine linear system; Newton also stops at 1e-6 |rhs| (floor 1e-15)
  int max_iter = 5000;
  int min_fine_ratio = 2;  ///< reconstructed_error requires fine.M >= ratio * M

  void validate() const {
    if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "linear solve tolerance must be positive");
    if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "linear solve max_iter must be >= 1");
    if (min_fine_ratio < 1) throw Error(ErrorCode::kInvalidArgument, "minimum fine ratio must be >= 1");
  }
};

enum class Scheme { kNewton, kTwoGrid1, kTwoGrid2a, kTwoGrid2b, kPerturbation };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kNewton: return "newton";
    case Scheme::kTwoGrid1: return "tg1";
    case Scheme::kTwoGrid2a: return "tg2a";
    case Scheme::kTwoGrid2b: return "tg2b";
    case Scheme::kPerturbation: return "pert";
  }
  return "unknown";
}

inline Scheme scheme_from_string(const std::string& s) {
  for (Scheme k : {Scheme::kNewton, Scheme::kTwoGrid1, Scheme::kTwoGrid2a, Scheme::kTwoGrid2b,
                   Scheme::kPerturbation}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme '" + s + "' (newton, tg1, tg2a, tg2b, pert)");
}

enum class Normalization { kAffine, kRadial };

inline std::string to_string(Normalization n) { return n == Normalization::kAffine ? "affine" : "radial"; }

/// Fine-space post-processing result. u_hat = (1 - alpha_star) u + w_hat with w_hat orthogonal to u.
struct Correction {
  Scheme scheme = Scheme::kNewton;
  Basis fine;
  SpectralField w_hat;
  double alpha_star = 0.0;
  double beta_star = std::numeric_limits<double>::quiet_NaN();  ///< radial normalization only
  SpectralField u_hat;
  double lambda_hat = 0.0;
  double energy_hat = 0.0;
  double a_ww = 0.0;
  int linsolve_iterations = 0;
  double linsolve_residual = 0.0;
  bool regularized = false;                                         ///< tg2a fell back to the regularized form
  double smallest_ritz = std::numeric_limits<double>::quiet_NaN();  ///< tg2a / tg2b diagnostic
};

struct NormalizedCorrection {
  double alpha_star = 0.0;
  double beta_star = std::numeric_limits<double>::quiet_NaN();
  SpectralField u_hat;
};

/// Unit-norm post-processed state from u (unit norm) and a correction w orthogonal to u.
inline NormalizedCorrection normalize_correction(const SpectralField& u, const SpectralField& w,
                                                 Normalization mode = Normalization::kAffine) {
  const double w2 = l2_inner(w, w);
  NormalizedCorrection out;
  if (mode == Normalization::kAffine) {
    if (!(w2 < 1.0)) {
      throw Error(ErrorCode::kCorrectionTooLarge, "affine normalization needs ||w|| < 1", std::sqrt(w2));
    }
    const double keep = std::sqrt(1.0 - w2);
    out.alpha_star = 1.0 - keep;
    out.u_hat = keep * u;
    out.u_hat += w;
  } else {
    out.beta_star = 1.0 / std::sqrt(1.0 + w2);
    out.u_hat = u + w;
    out.u_hat *= out.beta_star;
    out.alpha_star = 1.0 - out.beta_star;
  }
  return out;
}

namespace detail {

inline void require_fine(const GroundState& gs, const Basis& fine, int ratio) {
  if (fine->dim() != gs.basis->dim()) throw Error(ErrorCode::kDimensionMismatch, "fine basis dimension differs");
  if (fine->cutoff() < ratio * gs.basis->cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "fine cutoff " + std::to_string(fine->cutoff()) + " is below " +
                                                 std::to_string(ratio) + " x coarse cutoff " +
                                                 std::to_string(gs.basis->cutoff()));
  }
}

inline auto h1_preconditioner(double a0) {
  return [a0](const SpectralField& r) {
    SpectralField z = r;
    const auto& b = r.spec();
    for (std::size_t i = 0; i < b.size(); ++i) z[i] /= a0 * (1.0 + b.norm2(i));
    return z;
  };
}

// Shared tail: record w_hat relative to u, Rayleigh quotient, energy and a_ww.
inline void finish(const Problem& p, const GroundState& gs, const SpectralField& uf, Correction& c) {
  c.u_hat.symmetrize();
  c.u_hat = align_sign(normalized(std::move(c.u_hat)), uf);
  if (c.w_hat.size() == 0) {
    const double overlap = l2_inner(c.u_hat, uf);
    c.w_hat = c.u_hat;
    c.w_hat.axpy(-overlap, uf);
    c.alpha_star = 1.0 - overlap;
  }
  c.lambda_hat = rayleigh(p, c.u_hat);
  c.energy_hat = energy(p, c.u_hat);
  c.a_ww = l2_inner(apply_linearized(p, uf, gs.lambda, c.w_hat), c.w_hat);
}

}  // namespace detail

/// Newton correction: w in X_f orthogonal to u solving
/// (A + mu[2 g'(u^2) u^2 + g(u^2)] - lambda) w = -(A + mu g(u^2) - lambda) u.
inline Correction reconstructed_error(const Problem& p, const GroundState& gs, const Basis& fine,
                                      const LinSolveConfig& lin = {},
                                      Normalization mode = Normalization::kAffine) {
  lin.validate();
  detail::require_fine(gs, fine, lin.min_fine_ratio);
  const SpectralField uf = prolong(gs.u, fine);
  const LocalOperator op = linearized_operator(p, uf, gs.lambda);
  auto project = [&uf](const SpectralField& v) { return project_orthogonal(v, uf); };
  SpectralField rhs = residual(p, gs, fine);
  rhs *= -1.0;
  rhs = project(rhs);

  const double tol = std::max(std::min(lin.tol, 1e-6 * hminus1_norm(rhs)), 1e-15);
  SpectralField w(fine);
  const KrylovResult kr = projected_cg(op, rhs, w, detail::h1_preconditioner(p.a0), project, tol, lin.max_iter);
  if (kr.negative_curvature) {
    throw Error(ErrorCode::kCoercivityViolated,
                "linearized operator is not positive on the complement of u", kr.min_curvature);
  }
  if (!kr.converged) throw Error(ErrorCode::kNonconvergence, "reconstructed-error solve did not converge", kr.residual);
  w.symmetrize();
  w = project(w);

  Correction c;
  c.scheme = Scheme::kNewton;
  c.fine = fine;
  c.linsolve_iterations = kr.iterations;
  c.linsolve_residual = kr.residual;
  const NormalizedCorrection nc = normalize_correction(uf, w, mode);
  c.w_hat = std::move(w);
  c.alpha_star = nc.alpha_star;
  c.beta_star = nc.beta_star;
  c.u_hat = nc.u_hat;
  detail::finish(p, gs, uf, c);
  return c;
}

/// Lowest eigenpair of the frozen operator A + mu g(u^2) on the fine space.
inline Correction two_grid_scheme1(const Problem& p, const GroundState& gs, const Basis& fine,
                                   const EigConfig& eig = {}) {
  detail::require_fine(gs, fine, 1);
  const SpectralField uf = prolong(gs.u, fine);
  const EigenPairs ep = lowest_eigenpairs(fock_operator(p, uf), 1, eig, &uf);
  if (!ep.converged) throw Error(ErrorCode::kNonconvergence, "scheme-1 eigensolve did not converge", ep.residuals[0]);
  Correction c;
  c.scheme = Scheme::kTwoGrid1;
  c.fine = fine;
  c.u_hat = ep.vectors[0];
  c.linsolve_iterations = ep.iterations;
  c.linsolve_residual = ep.residuals[0];
  c.smallest_ritz = ep.values[0];
  detail::finish(p, gs, uf, c);
  return c;
}

/// Boundary-value two-grid scheme (A + mu g(u^2)) x = lambda u on the full fine space.
/// When the frozen operator is numerically singular the solution is taken in the limiting
/// form phi_1 + theta_1 / (lambda (u, phi_1)) y, with y solved on the complement of phi_1.
inline Correction two_grid_scheme2a(const Problem& p, const GroundState& gs, const Basis& fine,
                                    const LinSolveConfig& lin = {}, const EigConfig& eig = {}) {
  lin.validate();
  detail::require_fine(gs, fine, 1);
  const SpectralField uf = prolong(gs.u, fine);
  const LocalOperator op = fock_operator(p, uf);
  const EigenPairs ep = lowest_eigenpairs(op, 1, eig, &uf);
  const double theta = ep.values[0];
  const SpectralField phi = align_sign(ep.vectors[0], uf);
  const SpectralField rhs = gs.lambda * uf;

  Correction c;
  c.scheme = Scheme::kTwoGrid2a;
  c.fine = fine;
  c.smallest_ritz = theta;
  SpectralField x(fine);
  if (std::abs(theta) < 1e-8) {
    c.regularized = true;
    const double coupling = gs.lambda * l2_inner(uf, phi);
    auto project = [&phi](const SpectralField& v) { return project_orthogonal(v, phi); };
    SpectralField y(fine);
    const KrylovResult kr =
        projected_minres(op, project(rhs), y, detail::h1_preconditioner(p.a0), project, lin.tol, lin.max_iter);
    if (!kr.converged) throw Error(ErrorCode::kNearSingularBvp, "regularized scheme-2a solve stagnated", theta);
    c.linsolve_iterations = kr.iterations;
    c.linsolve_residual = kr.residual;
    x = phi;
    if (coupling != 0.0) x.axpy(theta / coupling, y);
  } else {
    auto identity = [](const SpectralField& v) { return v; };
    const KrylovResult kr =
        projected_minres(op, rhs, x, detail::h1_preconditioner(p.a0), identity, lin.tol, lin.max_iter);
    if (!kr.converged) throw Error(ErrorCode::kNearSingularBvp, "scheme-2a solve stagnated", theta);
    c.linsolve_iterations = kr.iterations;
    c.linsolve_residual = kr.residual;
  }
  if (!(l2_norm(x) > 0.0)) throw Error(ErrorCode::kNearSingularBvp, "scheme-2a produced a zero field", theta);
  c.u_hat = std::move(x);
  detail::finish(p, gs, uf, c);
  return c;
}

/// Boundary-value two-grid scheme A x = lambda u - mu g(u^2) u with the bare operator A = -a0 Delta + V.
/// For V = 0 the null k = 0 mode keeps the coarse coefficient.
inline Correction two_grid_scheme2b(const Problem& p, const GroundState& gs, const Basis& fine,
                                    const LinSolveConfig& lin = {}, const EigConfig& eig = {}) {
  lin.validate();
  detail::require_fine(gs, fine, 1);
  const SpectralField uf = prolong(gs.u, fine);
  const LocalOperator bare = bare_operator(p, fine);
  SpectralField rhs = gs.lambda * uf;
  rhs -= fock_operator(p, uf).apply(uf) - bare.apply(uf);

  Correction c;
  c.scheme = Scheme::kTwoGrid2b;
  c.fine = fine;
  SpectralField x(fine);
  KrylovResult kr;
  if (p.potential_is_zero()) {
    const std::size_t zero = static_cast<std::size_t>(fine->index_of({0, 0, 0}));
    auto project = [zero](const SpectralField& v) {
      SpectralField out = v;
      out[zero] = 0.0;
      return out;
    };
    c.smallest_ritz = 0.0;
    kr = projected_cg(bare, project(rhs), x, detail::h1_preconditioner(p.a0), project, lin.tol, lin.max_iter);
    x[zero] = uf[zero];
  } else {
    const EigenPairs ep = lowest_eigenpairs(bare, 1, eig, &uf);
    c.smallest_ritz = ep.values[0];
    if (std::abs(ep.values[0]) < 1e-8) {
      throw Error(ErrorCode::kIndefiniteOperator, "bare operator is singular on the fine space", ep.values[0]);
    }
    auto identity = [](const SpectralField& v) { return v; };
    if (ep.values[0] > 0.0) {
      kr = projected_cg(bare, rhs, x, detail::h1_preconditioner(p.a0), identity, lin.tol, lin.max_iter);
    } else {
      kr = projected_minres(bare, rhs, x, detail::h1_preconditioner(p.a0), identity, lin.tol, lin.max_iter);
    }
  }
  if (!kr.converged) throw Error(ErrorCode::kNonconvergence, "scheme-2b solve did not converge", kr.residual);
  c.linsolve_iterations = kr.iterations;
  c.linsolve_residual = kr.residual;
  if (!(l2_norm(x) > 0.0)) throw Error(ErrorCode::kIndefiniteOperator, "scheme-2b produced a zero field");
  c.u_hat = std::move(x);
  detail::finish(p, gs, uf, c);
  return c;
}

/// Diagonal correction on the fine-only modes: tau_k = -r_k / (a0 |k|^2 - lambda).
inline Correction perturbation_correction(const Problem& p, const GroundState& gs, const Basis& fine,
                                          Normalization mode = Normalization::kAffine) {
  detail::require_fine(gs, fine, 1);
  const int m = gs.basis->cutoff();
  if (!(gs.lambda < p.a0 * m * m)) {
    throw Error(ErrorCode::kDiagonalNotInvertible, "lambda must lie below a0 M^2 for the diagonal correction",
                gs.lambda);
  }
  const SpectralField uf = prolong(gs.u, fine);
  const SpectralField r = residual(p, gs, fine);
  SpectralField tau(fine);
  const auto& b = *fine;
  const double m2 = static_cast<double>(m) * m;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.norm2(i) > m2) tau[i] = -r[i] / (p.a0 * b.norm2(i) - gs.lambda);
  }
  Correction c;
  c.scheme = Scheme::kPerturbation;
  c.fine = fine;
  const NormalizedCorrection nc = normalize_correction(uf, tau, mode);
  c.w_hat = std::move(tau);
  c.alpha_star = nc.alpha_star;
  c.beta_star = nc.beta_star;
  c.u_hat = nc.u_hat;
  detail::finish(p, gs, uf, c);
  return c;
}

/// Dispatch by scheme tag with default configurations.
inline Correction apply_scheme(Scheme s, const Problem& p, const GroundState& gs, const Basis& fine,
                               const LinSolveConfig& lin = {}, const EigConfig& eig = {},
                               Normalization mode = Normalization::kAffine) {
  switch (s) {
    case Scheme::kNewton: return reconstructed_error(p, gs, fine, lin, mode);
    case Scheme::kTwoGrid1: return two_grid_scheme1(p, gs, fine, eig);
    case Scheme::kTwoGrid2a: return two_grid_scheme2a(p, gs, fine, lin, eig);
    case Scheme::kTwoGrid2b: return two_grid_scheme2b(p, gs, fine, lin, eig);
    case Scheme::kPerturbation: return perturbation_correction(p, gs, fine, mode);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

}  // namespace gpspec
