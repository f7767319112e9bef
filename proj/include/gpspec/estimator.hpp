#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "gpspec/corrector.hpp"
#include "gpspec/eigensolver.hpp"
#include "gpspec/error.hpp"
#include "gpspec/field.hpp"
#include "gpspec/krylov.hpp"
#include "gpspec/model.hpp"

namespace gpspec {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// ||(A + mu g(u^2) - lambda) u||_{H^{-1}} on the fine basis.
inline double residual_dual_norm(const Problem& p, const GroundState& gs, const Basis& fine) {
  return hminus1_norm(residual(p, gs, fine));
}

struct EnergyBounds {
  double lower = 0.0;  ///< E(u) - a_u(w, w) / 2, asymptotic lower bound
  double upper = 0.0;  ///< E(u)
  double best = 0.0;   ///< second-order estimate of the exact energy
  double a_ww = 0.0;
};

inline EnergyBounds energy_bounds(const Problem& p, const GroundState& gs, const Correction& corr,
                                  double tolerance = 1e-10) {
  if (corr.scheme != Scheme::kNewton) {
    throw Error(ErrorCode::kInvalidArgument, "energy bounds need the Newton reconstructed error");
  }
  if (corr.a_ww < -tolerance) {
    throw Error(ErrorCode::kCoercivityViolated, "a_u(w, w) is negative", corr.a_ww);
  }
  EnergyBounds b;
  b.a_ww = corr.a_ww;
  b.upper = gs.energy;
  b.lower = gs.energy - 0.5 * corr.a_ww;
  b.best = b.lower;
  return b;
}

struct SpectralGap {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  double lambda1_shift = 0.0;  ///< lambda1 - gs.lambda; zero up to tolerance when fine == coarse
};

/// Two lowest eigenvalues of the frozen operator A + mu g(u^2) on the fine space.
inline SpectralGap spectral_gap(const Problem& p, const GroundState& gs, const Basis& fine,
                                const EigConfig& eig = {}) {
  if (fine->cutoff() < gs.basis->cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "fine basis must contain the ground-state basis");
  }
  if (fine->size() < 2) throw Error(ErrorCode::kInvalidArgument, "gap needs at least two modes");
  const SpectralField uf = prolong(gs.u, fine);
  const EigenPairs ep = lowest_eigenpairs(fock_operator(p, uf), 2, eig, &uf);
  if (!ep.converged) throw Error(ErrorCode::kNonconvergence, "gap eigensolve did not converge", ep.residuals[1]);
  SpectralGap g;
  g.lambda1 = ep.values[0];
  g.lambda2 = ep.values[1];
  g.gap = g.lambda2 - g.lambda1;
  g.lambda1_shift = g.lambda1 - gs.lambda;
  if (!(g.gap > 0.0)) throw Error(ErrorCode::kDegenerateGroundState, "no gap between the two lowest eigenvalues", g.gap);
  return g;
}

/// Constant of ||w||_inf <= C ||w||_{H^1} on (0, 2pi): sqrt(pi coth(pi) / (2 pi)).
inline double sup_embedding_constant_1d() { return std::sqrt(1.0 / (2.0 * std::tanh(std::numbers::pi))); }

/// Bound (2pi)^{-1/2} sum |u_k| >= ||u||_inf in one dimension.
inline double sup_norm_bound_1d(const SpectralField& u) {
  double acc = 0.0;
  for (const auto& c : u.coeffs()) acc += std::abs(c);
  return acc / std::sqrt(2.0 * std::numbers::pi);
}

/// Lipschitz bound of DF over the ball of radius alpha in H^1 x R around (u, lambda), cubic case:
/// the H^1 -> H^{-1} block is bounded by 3 mu C a (2 |u|_inf + C a) + a, the border blocks by a and 2a.
inline double lipschitz_bound(double mu, double u_sup, double alpha) {
  const double c = sup_embedding_constant_1d();
  const double block = 3.0 * mu * c * alpha * (2.0 * u_sup + c * alpha) + alpha;
  return std::sqrt(block * block + 5.0 * alpha * alpha);
}

struct EstimateReport {
  double residual_dual = 0.0;
  double energy_upper = kNaN;
  double energy_lower = kNaN;
  double energy_best = kNaN;
  double a_ww = kNaN;
  double lambda1 = kNaN;
  double lambda2 = kNaN;
  double gap = kNaN;
  bool certificate_supported = false;
  double gamma = kNaN;
  double eps = kNaN;
  double nu = kNaN;  ///< multiplier part of the Newton step
  double L_of_2eps = kNaN;
  double u_sup = kNaN;
  double validity_alpha = kNaN;
  bool certified = false;
  double error_bound_h1 = kInfinity;        ///< 2 eps
  double error_bound_residual = kInfinity;  ///< 2 gamma residual_dual
  int fine_cutoff = 0;
};

/// Largest fine space the certificate assembles densely.
inline constexpr std::size_t kCertificateDenseCap = 4001;

/// Newton-Kantorovich check 2 gamma L(2 eps) <= 1 for F(u, lambda) = (A_u u - lambda u, |u|^2 - 1),
/// with gamma measured on the fine space ("discrete-certified"). Cubic nonlinearity in d = 1 only.
inline EstimateReport kantorovich_certificate(const Problem& p, const GroundState& gs, const Basis& fine,
                                              const LinSolveConfig& lin = {1e-12, 5000, 1}) {
  if (p.dim != 1 || !p.nonlinearity.is_cubic()) {
    throw Error(ErrorCode::kCertificateUnsupported, "certificate is available for d = 1 and p = 2 only");
  }
  if (fine->cutoff() < gs.basis->cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "fine basis must contain the ground-state basis");
  }
  if (fine->size() + 1 > kCertificateDenseCap) {
    throw Error(ErrorCode::kSizeCapExceeded, "certificate fine space too large for dense assembly",
                static_cast<double>(fine->size()));
  }
  EstimateReport rep;
  rep.certificate_supported = true;
  rep.fine_cutoff = fine->cutoff();
  const SpectralField uf = prolong(gs.u, fine);
  const LocalOperator op = linearized_operator(p, uf, gs.lambda);
  const SpectralField r = residual(p, gs, fine);
  rep.residual_dual = hminus1_norm(r);

  // Newton step DF (w, nu) = F with F = (r, 0): w orthogonal to u, P L w = P r, nu = (L w - r, u).
  auto project = [&uf](const SpectralField& v) { return project_orthogonal(v, uf); };
  SpectralField w(fine);
  const KrylovResult kr = projected_minres(op, project(r), w, detail::h1_preconditioner(p.a0), project, lin.tol,
                                           lin.max_iter);
  if (!kr.converged) throw Error(ErrorCode::kNonconvergence, "bordered Newton solve did not converge", kr.residual);
  SpectralField lw = op.apply(w);
  lw -= r;
  rep.nu = l2_inner(lw, uf);
  const double wh1 = h1_norm(w);
  rep.eps = std::sqrt(wh1 * wh1 + rep.nu * rep.nu);

  // gamma = 1 / sigma_min of the bordered matrix scaled to H^1 x R -> H^{-1} x R.
  const auto phi = real_planewave_basis(fine);
  const Eigen::MatrixXd lmat = dense_real_matrix(op, phi);
  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::VectorXd scale(n), ucoord(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& f = phi[static_cast<std::size_t>(a)];
    double weight = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] != Complex(0.0)) weight = 1.0 + fine->norm2(i);
    }
    scale(a) = 1.0 / std::sqrt(weight);
    ucoord(a) = l2_inner(uf, f);
  }
  Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = scale.asDiagonal() * lmat * scale.asDiagonal();
  bordered.block(0, n, n, 1) = -(scale.array() * ucoord.array()).matrix();
  bordered.block(n, 0, 1, n) = (2.0 * scale.array() * ucoord.array()).matrix().transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(bordered);
  const double smin = svd.singularValues()(n);
  if (!(smin > 0.0)) throw Error(ErrorCode::kDegenerateGroundState, "bordered operator is singular", smin);
  rep.gamma = 1.0 / smin;

  rep.u_sup = sup_norm_bound_1d(uf);
  rep.L_of_2eps = lipschitz_bound(p.mu, rep.u_sup, 2.0 * rep.eps);
  rep.validity_alpha = 2.0 * rep.gamma * rep.L_of_2eps;
  rep.certified = rep.validity_alpha <= 1.0;
  if (rep.certified) {
    rep.error_bound_h1 = 2.0 * rep.eps;
    rep.error_bound_residual = 2.0 * rep.gamma * rep.residual_dual;
  }
  return rep;
}

/// Full report: residual, Newton energy bounds, gap and (when supported) the certificate.
inline EstimateReport estimate(const Problem& p, const GroundState& gs, const Basis& fine,
                               const LinSolveConfig& lin = {}, const EigConfig& eig = {}, bool with_certificate = true,
                               bool with_gap = true) {
  EstimateReport rep;
  bool have_certificate = false;
  if (with_certificate && p.dim == 1 && p.nonlinearity.is_cubic() && fine->size() + 1 <= kCertificateDenseCap) {
    rep = kantorovich_certificate(p, gs, fine);
    have_certificate = true;
  }
  if (!have_certificate) rep.fine_cutoff = fine->cutoff();
  rep.residual_dual = residual_dual_norm(p, gs, fine);
  const Correction corr = reconstructed_error(p, gs, fine, lin);
  const EnergyBounds eb = energy_bounds(p, gs, corr);
  rep.energy_upper = eb.upper;
  rep.energy_lower = eb.lower;
  rep.energy_best = eb.best;
  rep.a_ww = eb.a_ww;
  if (with_gap) {
    const SpectralGap g = spectral_gap(p, gs, fine, eig);
    rep.lambda1 = g.lambda1;
    rep.lambda2 = g.lambda2;
    rep.gap = g.gap;
  }
  return rep;
}

}  // namespace gpspec
