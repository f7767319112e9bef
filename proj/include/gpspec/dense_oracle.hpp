#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "gpspec/error.hpp"
#include "gpspec/field.hpp"
#include "gpspec/model.hpp"

// Brute-force reference: dense matrices assembled from Fourier coefficients by explicit
// convolution sums, no transforms involved. Cubic nonlinearity only.
namespace gpspec::oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxModes = 200;

inline void require_dense(const Problem& p, const BasisSpec& b) {
  if (b.size() > kMaxModes) {
    throw Error(ErrorCode::kSizeCapExceeded,
                "dense oracle limited to " + std::to_string(kMaxModes) + " modes, got " + std::to_string(b.size()),
                static_cast<double>(b.size()));
  }
  if (!p.nonlinearity.is_cubic()) throw Error(ErrorCode::kInvalidArgument, "dense oracle supports p = 2 only");
  if (p.dim != b.dim()) throw Error(ErrorCode::kDimensionMismatch, "basis and problem dimensions differ");
}

inline Vector to_vector(const SpectralField& v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

inline SpectralField to_field(const Vector& x, const Basis& basis) {
  SpectralField v(basis);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x(static_cast<Eigen::Index>(i));
  return v;
}

inline WaveVector minus(const WaveVector& a, const WaveVector& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// Matrix of multiplication by f = sum_m f_m e_m: entry (j, k) = (2pi)^{-d/2} f_{j-k}.
template <class Coeff>
Matrix multiplication_matrix(const BasisSpec& b, const Coeff& coeff) {
  const auto n = static_cast<Eigen::Index>(b.size());
  const double c = std::pow(2.0 * std::numbers::pi, -0.5 * b.dim());
  Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      m(j, k) = c * coeff(minus(b.mode(static_cast<std::size_t>(j)), b.mode(static_cast<std::size_t>(k))));
    }
  }
  return m;
}

inline Matrix kinetic_matrix(const Problem& p, const BasisSpec& b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = p.a0 * b.norm2(static_cast<std::size_t>(i));
  return m;
}

inline Matrix potential_matrix(const Problem& p, const BasisSpec& b) {
  const auto& vb = p.potential.spec();
  return multiplication_matrix(b, [&](const WaveVector& m) -> Complex {
    const int idx = vb.index_of(m);
    return idx < 0 ? Complex(0.0) : p.potential[static_cast<std::size_t>(idx)];
  });
}

/// Coefficients of |u|^2: rho_m = (2pi)^{-d/2} sum_k u_k conj(u_{k-m}).
inline std::map<WaveVector, Complex> density(const SpectralField& u) {
  const auto& b = u.spec();
  const double c = std::pow(2.0 * std::numbers::pi, -0.5 * b.dim());
  std::map<WaveVector, Complex> rho;
  for (std::size_t k = 0; k < b.size(); ++k) {
    for (std::size_t l = 0; l < b.size(); ++l) rho[minus(b.mode(k), b.mode(l))] += c * u[k] * std::conj(u[l]);
  }
  return rho;
}

inline Matrix density_matrix(const SpectralField& u, const BasisSpec& b) {
  const auto rho = density(u);
  return multiplication_matrix(b, [&](const WaveVector& m) -> Complex {
    const auto it = rho.find(m);
    return it == rho.end() ? Complex(0.0) : it->second;
  });
}

/// Fock matrix of A + mu |u|^2 on basis b (u may live on a smaller basis).
inline Matrix fock_matrix(const Problem& p, const SpectralField& u, const BasisSpec& b) {
  return kinetic_matrix(p, b) + potential_matrix(p, b) + p.mu * density_matrix(u, b);
}

/// Linearized matrix A + 3 mu u^2 - lambda on basis b.
inline Matrix linearized_matrix(const Problem& p, const SpectralField& u, double lambda, const BasisSpec& b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  return kinetic_matrix(p, b) + potential_matrix(p, b) + 3.0 * p.mu * density_matrix(u, b) -
         lambda * Matrix::Identity(n, n);
}

/// E(u) = 1/2 (a0 |grad u|^2 + (V u, u)) + mu/4 (u^2 u, u).
inline double dense_energy(const Problem& p, const SpectralField& u) {
  const auto& b = u.spec();
  const Vector x = to_vector(u);
  const double quad = (x.adjoint() * (kinetic_matrix(p, b) + potential_matrix(p, b)) * x)(0).real();
  const double quart = (x.adjoint() * density_matrix(u, b) * x)(0).real();
  return 0.5 * quad + 0.25 * p.mu * quart;
}

/// Phase-fix a complex eigenvector into a real field: rotate so the largest coefficient is real,
/// then keep the conjugate-symmetric part.
inline SpectralField realify(const Vector& x, const Basis& basis) {
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  const Complex phase = std::abs(x(imax)) > 0.0 ? std::conj(x(imax)) / std::abs(x(imax)) : Complex(1.0);
  SpectralField v = to_field(x * phase, basis);
  v.symmetrize();
  return normalized(std::move(v));
}

/// Ascending eigenvalues of the Fock matrix A + mu |u|^2 on basis b.
inline std::vector<double> fock_eigenvalues(const Problem& p, const SpectralField& u, const BasisSpec& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(fock_matrix(p, u, b));
  std::vector<double> out(static_cast<std::size_t>(es.eigenvalues().size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
  return out;
}

struct OracleResult {
  GroundState gs;
  int scf_iterations = 0;
  int newton_iterations = 0;
  double final_residual = 0.0;  ///< H^{-1} norm of F(u) u - lambda u
};

inline double dual_norm(const Vector& r, const BasisSpec& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) acc += std::norm(r(i)) / (1.0 + b.norm2(static_cast<std::size_t>(i)));
  return std::sqrt(acc);
}

/// Constrained minimizer on b: damped SCF on dense matrices, then Newton on the bordered
/// system [[A + 3 mu u^2 - lambda, -u], [2 u^H, 0]] to residual 1e-12.
inline OracleResult solve(const Problem& p, const Basis& basis, double tol = 1e-12, int max_scf = 5000) {
  require_dense(p, *basis);
  const auto& b = *basis;
  const auto n = static_cast<Eigen::Index>(b.size());

  SpectralField u = unit_constant(basis);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(kinetic_matrix(p, b) + potential_matrix(p, b));
    u = realify(es.eigenvectors().col(0), basis);
    if (u.mean_coeff().real() < 0.0) u *= -1.0;
  }
  OracleResult out;
  auto residual_of = [&](const SpectralField& v, double& lambda) {
    const Vector x = to_vector(v);
    const Vector fx = fock_matrix(p, v, b) * x;
    lambda = x.dot(fx).real();
    return Vector(fx - lambda * x);
  };

  double lambda = 0.0;
  for (int it = 0; it < max_scf; ++it) {
    const Vector r = residual_of(u, lambda);
    if (dual_norm(r, b) < 1e-6) break;
    Eigen::SelfAdjointEigenSolver<Matrix> es(fock_matrix(p, u, b));
    SpectralField phi = realify(es.eigenvectors().col(0), basis);
    if (l2_inner(phi, u) < 0.0) phi *= -1.0;
    SpectralField mixed = 0.5 * u;
    mixed.axpy(0.5, phi);
    u = normalized(std::move(mixed));
    out.scf_iterations = it + 1;
  }

  for (int it = 0; it < 50; ++it) {
    Vector r = residual_of(u, lambda);
    out.final_residual = dual_norm(r, b);
    if (out.final_residual <= tol) break;
    const Vector x = to_vector(u);
    Matrix j = Matrix::Zero(n + 1, n + 1);
    j.topLeftCorner(n, n) = linearized_matrix(p, u, lambda, b);
    j.block(0, n, n, 1) = -x;
    j.block(n, 0, 1, n) = 2.0 * x.adjoint();
    Vector f(n + 1);
    f.head(n) = r;
    f(n) = x.squaredNorm() - 1.0;
    const Vector step = j.partialPivLu().solve(-f);
    SpectralField next = u;
    next += to_field(step.head(n), basis);
    next.symmetrize();
    u = normalized(std::move(next));
    out.newton_iterations = it + 1;
  }
  if (out.final_residual > tol) {
    throw Error(ErrorCode::kNonconvergence, "dense oracle did not reach the residual target", out.final_residual);
  }
  if (u.mean_coeff().real() < 0.0) u *= -1.0;

  GroundState& gs = out.gs;
  gs.basis = basis;
  gs.u = u;
  const Vector x = to_vector(u);
  gs.lambda = x.dot(fock_matrix(p, u, b) * x).real();
  gs.energy = dense_energy(p, u);
  gs.residual_dual_norm = out.final_residual;
  gs.residual_cutoff = b.cutoff();
  const auto ev = fock_eigenvalues(p, u, b);
  if (ev.size() >= 2) gs.lambda2 = ev[1];
  gs.iterations = out.scf_iterations + out.newton_iterations;
  gs.converged = true;
  return out;
}

/// Dense Newton correction on `fine`: w orthogonal to u with
/// P (A + 3 mu u^2 - lambda) w = -P (A + mu u^2 - lambda) u, via the bordered system [[J, u], [u^H, 0]].
inline SpectralField complement_solve(const Problem& p, const GroundState& gs, const Basis& fine) {
  require_dense(p, *fine);
  const auto& b = *fine;
  const auto n = static_cast<Eigen::Index>(b.size());
  const SpectralField uf = prolong(gs.u, fine);
  const Vector x = to_vector(uf);
  const Vector r = fock_matrix(p, uf, b) * x - gs.lambda * x;
  Matrix j = Matrix::Zero(n + 1, n + 1);
  j.topLeftCorner(n, n) = linearized_matrix(p, uf, gs.lambda, b);
  j.block(0, n, n, 1) = x;
  j.block(n, 0, 1, n) = x.adjoint();
  Vector rhs = Vector::Zero(n + 1);
  rhs.head(n) = -r;
  const Vector sol = j.partialPivLu().solve(rhs);
  SpectralField w = to_field(sol.head(n), fine);
  w.symmetrize();
  return w;
}

}  // namespace gpspec::oracle
