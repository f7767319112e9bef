#pragma once

#include <cmath>
#include <limits>

#include "gpspec/field.hpp"

namespace gpspec {

struct KrylovResult {
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();  ///< true residual in H^{-1}
  bool converged = false;
  /// Smallest <p, A p> / <p, p> seen by CG; negative means A is not positive on the search space.
  double min_curvature = std::numeric_limits<double>::infinity();
  bool negative_curvature = false;
};

/// Preconditioned conjugate gradients for A x = b restricted to the range of the projector P.
/// A, precond and project are callables SpectralField -> SpectralField. x holds the initial
/// guess on entry. Convergence is declared on the H^{-1} norm of P(b - A x). Stops early
/// (negative_curvature = true) if a search direction with <p, A p> <= 0 shows up.
template <class Op, class Prec, class Proj>
KrylovResult projected_cg(const Op& apply, const SpectralField& b, SpectralField& x, const Prec& precond,
                          const Proj& project, double tol, int max_iter) {
  KrylovResult out;
  x = project(x);
  const int restarts = 4;
  for (int round = 0; round <= restarts && out.iterations < max_iter; ++round) {
    SpectralField r = project(b - apply(x));
    out.residual = hminus1_norm(r);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    SpectralField z = project(precond(r));
    SpectralField p = z;
    double rz = l2_inner(r, z);
    while (out.iterations < max_iter) {
      ++out.iterations;
      const SpectralField ap = project(apply(p));
      const double pap = l2_inner(p, ap);
      const double pp = l2_inner(p, p);
      if (pp > 0.0) out.min_curvature = std::min(out.min_curvature, pap / pp);
      if (!(pap > 0.0)) {
        out.negative_curvature = true;
        return out;
      }
      const double alpha = rz / pap;
      x.axpy(alpha, p);
      r.axpy(-alpha, ap);
      out.residual = hminus1_norm(r);
      if (out.residual <= tol) break;
      z = project(precond(r));
      const double rz_next = l2_inner(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      p *= beta;
      p += z;
    }
    // Re-check against the true residual; recurrences drift near round-off.
    const double true_res = hminus1_norm(project(b - apply(x)));
    out.residual = true_res;
    if (true_res <= tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

/// Preconditioned MINRES for symmetric, possibly indefinite A on the range of P.
/// The preconditioner must be symmetric positive definite on that range.
template <class Op, class Prec, class Proj>
KrylovResult projected_minres(const Op& apply, const SpectralField& b, SpectralField& x, const Prec& precond,
                              const Proj& project, double tol, int max_iter) {
  KrylovResult out;
  x = project(x);
  const int restarts = 4;
  for (int round = 0; round <= restarts && out.iterations < max_iter; ++round) {
    SpectralField v = project(b - apply(x));
    out.residual = hminus1_norm(v);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    SpectralField v_old(v.basis());
    SpectralField z = project(precond(v));
    double gamma = std::sqrt(std::max(0.0, l2_inner(z, v)));
    double gamma_old = 1.0;
    double eta = gamma;
    double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
    SpectralField w_old(v.basis()), w(v.basis());
    const double start = gamma;
    // Maps the preconditioned residual estimate |eta| onto the H^{-1} scale.
    const double to_dual = (start > 0.0) ? out.residual / start : 1.0;
    while (out.iterations < max_iter && gamma > 0.0) {
      ++out.iterations;
      z *= 1.0 / gamma;
      const SpectralField az = project(apply(z));
      const double delta = l2_inner(az, z);
      SpectralField v_new = az;
      v_new.axpy(-delta / gamma, v);
      v_new.axpy(-gamma / gamma_old, v_old);
      SpectralField z_new = project(precond(v_new));
      const double gamma_new = std::sqrt(std::max(0.0, l2_inner(z_new, v_new)));

      const double a0 = c * delta - c_old * s * gamma;
      const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
      const double a2 = s * delta + c_old * c * gamma;
      const double a3 = s_old * gamma;
      const double c_new = a0 / a1;
      const double s_new = gamma_new / a1;

      SpectralField w_new = z;
      w_new.axpy(-a3, w_old);
      w_new.axpy(-a2, w);
      w_new *= 1.0 / a1;
      x.axpy(c_new * eta, w_new);
      eta = -s_new * eta;

      w_old = std::move(w);
      w = std::move(w_new);
      v_old = std::move(v);
      v = std::move(v_new);
      z = std::move(z_new);
      gamma_old = gamma;
      gamma = gamma_new;
      c_old = c;
      c = c_new;
      s_old = s;
      s = s_new;
      if (std::abs(eta) * to_dual <= 0.5 * tol || std::abs(eta) <= 1e-16 * start) break;
    }
    const double true_res = hminus1_norm(project(b - apply(x)));
    out.residual = true_res;
    if (true_res <= tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace gpspec
