#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "gpspec/error.hpp"
#include "gpspec/field.hpp"
#include "gpspec/model.hpp"

namespace gpspec {

struct EigConfig {
  double tol = 1e-11;             ///< H^{-1} norm of A x - theta x per wanted pair
  int max_iter = 1000;
  std::uint64_t seed = 7;
  std::size_t dense_limit = 300;  ///< assemble and diagonalize directly up to this many modes
};

struct EigenPairs {
  std::vector<double> values;
  std::vector<SpectralField> vectors;
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

/// Orthonormal basis of real-valued fields: the constant mode plus cos/sin pairs (e_k +- e_{-k}).
inline std::vector<SpectralField> real_planewave_basis(const Basis& basis) {
  const auto& b = *basis;
  const double h = std::numbers::sqrt2 / 2.0;
  std::vector<SpectralField> out;
  out.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::size_t j = b.negated(i);
    if (j == i) {
      SpectralField f(basis);
      f[i] = 1.0;
      out.push_back(std::move(f));
    } else if (j > i) {
      SpectralField c(basis), s(basis);
      c[i] = h;
      c[j] = h;
      s[i] = Complex(0.0, h);
      s[j] = Complex(0.0, -h);
      out.push_back(std::move(c));
      out.push_back(std::move(s));
    }
  }
  return out;
}

/// Real symmetric matrix of `op` in the real planewave basis.
template <class Op>
Eigen::MatrixXd dense_real_matrix(const Op& op, const std::vector<SpectralField>& phi) {
  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const SpectralField col = op.apply(phi[static_cast<std::size_t>(b)]);
    for (Eigen::Index a = 0; a < n; ++a) h(a, b) = l2_inner(col, phi[static_cast<std::size_t>(a)]);
  }
  return 0.5 * (h + h.transpose());
}

namespace detail {

inline SpectralField diagonal_precondition(const LocalOperator& op, const SpectralField& r) {
  SpectralField out = r;
  const auto& b = *op.basis();
  for (std::size_t i = 0; i < b.size(); ++i) out[i] /= op.a0() * (1.0 + b.norm2(i));
  return out;
}

// Modified Gram-Schmidt (two passes); drops nearly dependent vectors.
inline std::vector<SpectralField> orthonormalize(std::vector<SpectralField> vs, std::size_t keep_leading = 0) {
  std::vector<SpectralField> out;
  out.reserve(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    SpectralField v = std::move(vs[i]);
    const double before = l2_norm(v);
    if (!(before > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) v.axpy(-l2_inner(v, q), q);
    }
    const double after = l2_norm(v);
    if (i >= keep_leading && after < 1e-10 * before) continue;
    if (!(after > 0.0)) continue;
    v *= 1.0 / after;
    out.push_back(std::move(v));
  }
  return out;
}

inline EigenPairs dense_lowest(const LocalOperator& op, int nev) {
  const auto phi = real_planewave_basis(op.basis());
  const Eigen::MatrixXd h = dense_real_matrix(op, phi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::kNonconvergence, "dense eigensolver failed");
  EigenPairs out;
  for (int j = 0; j < nev; ++j) {
    out.values.push_back(es.eigenvalues()(j));
    SpectralField v(op.basis());
    for (std::size_t a = 0; a < phi.size(); ++a) v.axpy(es.eigenvectors()(static_cast<Eigen::Index>(a), j), phi[a]);
    SpectralField r = op.apply(v);
    r.axpy(-out.values.back(), v);
    out.residuals.push_back(hminus1_norm(r));
    out.vectors.push_back(std::move(v));
  }
  out.converged = true;
  return out;
}

}  // namespace detail

/// Lowest `nev` eigenpairs of a frozen local operator, with real-valued eigenvectors.
/// Small spaces are diagonalized directly; larger ones use LOBPCG preconditioned by
/// the Fourier-diagonal a0 (1 + |k|^2). `guess` seeds the first block vector.
/// Every block vector is kept conjugate-symmetric: otherwise round-off lets i*phi
/// (same Rayleigh quotient, L2-orthogonal in the real product) enter the block.
inline EigenPairs lowest_eigenpairs(const LocalOperator& op, int nev, const EigConfig& cfg,
                                    const SpectralField* guess = nullptr) {
  const auto& basis = op.basis();
  const auto n = basis->size();
  if (nev < 1 || static_cast<std::size_t>(nev) > n) {
    throw Error(ErrorCode::kInvalidArgument, "requested more eigenpairs than basis functions");
  }
  if (n <= cfg.dense_limit) return detail::dense_lowest(op, nev);

  const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(nev) + 2);
  std::mt19937_64 rng(cfg.seed);
  std::vector<SpectralField> x;
  if (guess != nullptr) x.push_back(transfer(*guess, basis));
  while (x.size() < m) x.push_back(random_real_field(basis, rng, 2.0));
  x = detail::orthonormalize(std::move(x));

  std::vector<SpectralField> p;
  EigenPairs out;
  std::vector<double> theta(x.size(), 0.0);
  std::vector<SpectralField> ax;

  auto rayleigh_ritz = [&](const std::vector<SpectralField>& s, std::vector<SpectralField>& as) {
    const auto k = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd h(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = a; b < k; ++b) {
        const double v = l2_inner(as[static_cast<std::size_t>(b)], s[static_cast<std::size_t>(a)]);
        h(a, b) = v;
        h(b, a) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return es;
  };

  ax.clear();
  for (auto& v : x) {
    v.symmetrize();
    SpectralField av = op.apply(v);
    av.symmetrize();
    ax.push_back(std::move(av));
  }
  {
    auto es = rayleigh_ritz(x, ax);
    std::vector<SpectralField> nx, nax;
    for (std::size_t j = 0; j < x.size(); ++j) {
      SpectralField v(basis), av(basis);
      for (std::size_t a = 0; a < x.size(); ++a) {
        const double c = es.eigenvectors()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
        v.axpy(c, x[a]);
        av.axpy(c, ax[a]);
      }
      theta[j] = es.eigenvalues()(static_cast<Eigen::Index>(j));
      nx.push_back(std::move(v));
      nax.push_back(std::move(av));
    }
    x = std::move(nx);
    ax = std::move(nax);
  }

  for (int it = 0; it < cfg.max_iter; ++it) {
    out.iterations = it + 1;
    std::vector<SpectralField> w;
    out.residuals.assign(static_cast<std::size_t>(nev), 0.0);
    bool done = true;
    for (std::size_t j = 0; j < x.size(); ++j) {
      SpectralField r = ax[j];
      r.axpy(-theta[j], x[j]);
      const double res = hminus1_norm(r);
      if (j < static_cast<std::size_t>(nev)) {
        out.residuals[j] = res;
        if (res > cfg.tol) done = false;
      }
      SpectralField t = detail::diagonal_precondition(op, r);
      t.symmetrize();
      w.push_back(std::move(t));
    }
    if (done) {
      out.converged = true;
      break;
    }
    std::vector<SpectralField> s = x;
    for (auto& v : w) s.push_back(std::move(v));
    for (auto& v : p) s.push_back(v);
    s = detail::orthonormalize(std::move(s), x.size());
    std::vector<SpectralField> as;
    as.reserve(s.size());
    for (const auto& v : s) {
      SpectralField av = op.apply(v);
      av.symmetrize();
      as.push_back(std::move(av));
    }
    auto es = rayleigh_ritz(s, as);
    std::vector<SpectralField> nx, nax, np;
    for (std::size_t j = 0; j < x.size(); ++j) {
      SpectralField v(basis), av(basis), pv(basis);
      for (std::size_t a = 0; a < s.size(); ++a) {
        const double c = es.eigenvectors()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
        v.axpy(c, s[a]);
        av.axpy(c, as[a]);
        if (a >= x.size()) pv.axpy(c, s[a]);
      }
      theta[j] = es.eigenvalues()(static_cast<Eigen::Index>(j));
      nx.push_back(std::move(v));
      nax.push_back(std::move(av));
      np.push_back(std::move(pv));
    }
    x = std::move(nx);
    ax = std::move(nax);
    p = std::move(np);
    // Refresh A x occasionally to shed accumulated round-off.
    if ((it + 1) % 20 == 0) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        ax[j] = op.apply(x[j]);
        ax[j].symmetrize();
      }
    }
  }

  for (int j = 0; j < nev; ++j) {
    out.values.push_back(theta[static_cast<std::size_t>(j)]);
    out.vectors.push_back(x[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace gpspec
