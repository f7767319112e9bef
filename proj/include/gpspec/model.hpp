#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gpspec/basis.hpp"
#include "gpspec/error.hpp"
#include "gpspec/field.hpp"

namespace gpspec {

/// Power-law nonlinearity G(t) = t^p / p, so g(t) = t^{p-1} and g'(t) = (p-1) t^{p-2}.
/// p = 2 is the cubic Gross-Pitaevskii case g(t) = t.
struct PowerNonlinearity {
  double p = 2.0;

  bool is_cubic() const noexcept { return p == 2.0; }

  double G(double t) const {
    t = std::max(t, 0.0);
    return is_cubic() ? 0.5 * t * t : std::pow(t, p) / p;
  }
  double g(double t) const {
    t = std::max(t, 0.0);
    return is_cubic() ? t : std::pow(t, p - 1.0);
  }
  /// g'(t) * t, finite at t = 0 for every p in (1, 3).
  double gprime_times_t(double t) const {
    t = std::max(t, 0.0);
    return is_cubic() ? t : (p - 1.0) * std::pow(t, p - 1.0);
  }

  void validate() const {
    if (!(p > 1.0 && p < 3.0)) {
      throw Error(ErrorCode::kInvalidArgument, "power exponent must lie in (1, 3), got " + std::to_string(p));
    }
  }
};

/// How the potential was specified; kept with the problem for reporting and cache keys.
struct PotentialSpec {
  enum class Kind { kZero, kCosine, kCosineSeries, kCoefficients };
  Kind kind = Kind::kZero;
  double amplitude = 1.0;  ///< cosine: A sum_i cos(x_i); cosine_series: A sum_i sum_k r^k cos(k x_i)
  double ratio = 0.5;      ///< geometric ratio r of cosine_series
  double shift = 0.0;      ///< constant added to V
  int cutoff = 1;          ///< potential cutoff M_V
  std::string source;      ///< coefficient file path when kind == kCoefficients
};

inline std::string to_string(PotentialSpec::Kind kind) {
  switch (kind) {
    case PotentialSpec::Kind::kZero: return "zero";
    case PotentialSpec::Kind::kCosine: return "cosine";
    case PotentialSpec::Kind::kCosineSeries: return "cosine_series";
    case PotentialSpec::Kind::kCoefficients: return "coefficients";
  }
  return "unknown";
}

/// Energy E(v) = 1/2 [a0 |grad v|^2 + int V v^2] + mu/2 int G(v^2) on (0, 2pi)^d.
struct Problem {
  int dim = 1;
  double a0 = 1.0;
  double mu = 1.0;
  PowerNonlinearity nonlinearity;
  PotentialSpec potential_spec;
  SpectralField potential;  ///< real-valued, on its own cutoff M_V

  int potential_cutoff() const { return potential.spec().cutoff(); }

  bool potential_is_zero() const {
    return std::all_of(potential.coeffs().begin(), potential.coeffs().end(),
                       [](const Complex& c) { return c == Complex(0.0); });
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw Error(ErrorCode::kInvalidArgument, "problem dimension must be 1, 2 or 3");
    if (!(a0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "diffusion coefficient a0 must be positive");
    if (!(mu >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "nonlinearity strength mu must be nonnegative");
    nonlinearity.validate();
    if (!potential.basis() || potential.spec().dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "potential dimension does not match the problem");
    }
    if (potential.symmetry_defect() > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument, "potential must be real-valued (conjugate-symmetric coefficients)");
    }
  }
};

namespace detail {

/// Sample a closed-form potential on a generous grid and project onto cutoff M_V.
inline SpectralField sample_potential(int dim, int cutoff, const std::function<double(double)>& profile,
                                      double shift) {
  Basis vb = make_basis(dim, cutoff);
  const int n = efficient_fft_length(std::max(8 * cutoff + 2, 16));
  const std::size_t total = detail::grid_total(dim, n);
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) axis[static_cast<std::size_t>(j)] = profile(2.0 * std::numbers::pi * j / n);
  GridField g{vb, n, std::vector<Complex>(total)};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double value = shift;
    for (int i = 0; i < dim; ++i) {
      value += axis[rem % static_cast<std::size_t>(n)];
      rem /= static_cast<std::size_t>(n);
    }
    g.values[flat] = value;
  }
  SpectralField v = from_grid(g, vb);
  v.symmetrize();
  return v;
}

}  // namespace detail

inline Problem make_problem(int dim, double a0, double mu, PowerNonlinearity nl, PotentialSpec spec) {
  Problem p;
  p.dim = dim;
  p.a0 = a0;
  p.mu = mu;
  p.nonlinearity = nl;
  switch (spec.kind) {
    case PotentialSpec::Kind::kZero:
      spec.cutoff = 0;
      p.potential = detail::sample_potential(dim, 0, [](double) { return 0.0; }, spec.shift);
      break;
    case PotentialSpec::Kind::kCosine: {
      spec.cutoff = 1;
      const double amp = spec.amplitude;
      p.potential = detail::sample_potential(dim, 1, [amp](double x) { return amp * std::cos(x); }, spec.shift);
      break;
    }
    case PotentialSpec::Kind::kCosineSeries: {
      if (!(std::abs(spec.ratio) < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "cosine_series ratio must satisfy |r| < 1");
      }
      if (spec.cutoff < 1) throw Error(ErrorCode::kInvalidArgument, "cosine_series cutoff must be >= 1");
      const double amp = spec.amplitude;
      const double r = spec.ratio;
      // sum_{k>=1} r^k cos(kx) = (r cos x - r^2) / (1 - 2 r cos x + r^2)
      auto profile = [amp, r](double x) {
        const double c = std::cos(x);
        return amp * (r * c - r * r) / (1.0 - 2.0 * r * c + r * r);
      };
      p.potential = detail::sample_potential(dim, spec.cutoff, profile, spec.shift);
      break;
    }
    case PotentialSpec::Kind::kCoefficients:
      throw Error(ErrorCode::kInvalidArgument, "coefficient potentials are built with make_problem_from_field");
  }
  p.potential_spec = spec;
  p.validate();
  return p;
}

inline Problem make_problem_from_field(double a0, double mu, PowerNonlinearity nl, SpectralField potential,
                                       std::string source = {}) {
  Problem p;
  p.dim = potential.spec().dim();
  p.a0 = a0;
  p.mu = mu;
  p.nonlinearity = nl;
  p.potential_spec.kind = PotentialSpec::Kind::kCoefficients;
  p.potential_spec.cutoff = potential.spec().cutoff();
  p.potential_spec.source = std::move(source);
  p.potential = std::move(potential);
  p.validate();
  return p;
}

/// Default test problems: V = cos(x) in 1-D, cos(x) + cos(y) in 2-D.
inline Problem cosine_problem(int dim = 1, double mu = 1.0, double amplitude = 1.0, double shift = 0.0) {
  PotentialSpec s;
  s.kind = PotentialSpec::Kind::kCosine;
  s.amplitude = amplitude;
  s.shift = shift;
  return make_problem(dim, 1.0, mu, {}, s);
}

/// V = 0: the normalized constant is the exact ground state for every cutoff.
inline Problem free_problem(int dim = 1, double mu = 1.0) {
  return make_problem(dim, 1.0, mu, {}, PotentialSpec{});
}

/// Grid size on which products of cutoff-M fields with V and with cubic terms project exactly.
inline int work_grid(const Problem& p, const BasisSpec& b) {
  const int m = b.cutoff();
  return efficient_fft_length(std::max({b.grid(), 4 * m + 2, 2 * m + p.potential_cutoff() + 1}));
}

/// Discrete ground state of the constrained minimization on X_M.
struct GroundState {
  Basis basis;
  SpectralField u;
  double lambda = 0.0;
  double energy = 0.0;
  double residual_dual_norm = 0.0;  ///< measured on a fine basis
  int residual_cutoff = 0;          ///< cutoff of that fine basis
  double lambda2 = std::numeric_limits<double>::quiet_NaN();  ///< second eigenvalue of the frozen operator
  int iterations = 0;
  bool converged = false;
};

/// Frozen operator v -> a0 (-Delta) v + P_M(W v) - shift v for a fixed real multiplier W
/// sampled on a dealiasing work grid. Fock, linearized and bare Schroedinger operators are
/// all of this form.
class LocalOperator {
 public:
  LocalOperator(Basis basis, double a0, int points, std::vector<double> multiplier, double shift)
      : basis_(std::move(basis)), a0_(a0), points_(points), multiplier_(std::move(multiplier)), shift_(shift) {
    double acc = 0.0;
    for (double w : multiplier_) acc += w;
    mean_multiplier_ = multiplier_.empty() ? 0.0 : acc / static_cast<double>(multiplier_.size());
  }

  const Basis& basis() const noexcept { return basis_; }
  double a0() const noexcept { return a0_; }
  double shift() const noexcept { return shift_; }
  int points() const noexcept { return points_; }
  const std::vector<double>& multiplier() const noexcept { return multiplier_; }
  /// Spatial mean of W (diagonal of the multiplication part in planewaves).
  double mean_multiplier() const noexcept { return mean_multiplier_; }

  SpectralField apply(const SpectralField& v) const {
    require_same_space(*basis_, v.spec());
    GridField g = to_grid(v, points_);
    for (std::size_t j = 0; j < g.values.size(); ++j) g.values[j] *= multiplier_[j];
    SpectralField out = from_grid(g, basis_);
    const auto& b = *basis_;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += (a0_ * b.norm2(i) - shift_) * v[i];
    return out;
  }

  SpectralField operator()(const SpectralField& v) const { return apply(v); }

  /// Diagonal entry a0|k|^2 + mean(W) - shift of the i-th mode.
  double diagonal(std::size_t i) const { return a0_ * basis_->norm2(i) + mean_multiplier_ - shift_; }

 private:
  Basis basis_;
  double a0_;
  int points_;
  std::vector<double> multiplier_;
  double shift_;
  double mean_multiplier_ = 0.0;
};

namespace detail {

// The work grid may be coarser than 2 M_V + 1; the folded samples still give exact
// projected products because only modes |k| <= M are read back.
inline std::vector<double> potential_on_grid(const Problem& p, int points) {
  return real_values(to_grid_aliased(p.potential, points));
}

}  // namespace detail

/// A = -a0 Delta + V on `basis`.
inline LocalOperator bare_operator(const Problem& p, const Basis& basis) {
  const int n = work_grid(p, *basis);
  return LocalOperator(basis, p.a0, n, detail::potential_on_grid(p, n), 0.0);
}

/// Fock operator A_u = -a0 Delta + V + mu g(u^2), on the basis of u.
inline LocalOperator fock_operator(const Problem& p, const SpectralField& u) {
  const int n = work_grid(p, u.spec());
  std::vector<double> w = detail::potential_on_grid(p, n);
  const std::vector<double> uu = real_values(to_grid(u, n));
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += p.mu * p.nonlinearity.g(uu[j] * uu[j]);
  return LocalOperator(u.basis(), p.a0, n, std::move(w), 0.0);
}

/// Linearized operator -a0 Delta + V + mu [2 g'(u^2) u^2 + g(u^2)] - lambda, on the basis of u.
inline LocalOperator linearized_operator(const Problem& p, const SpectralField& u, double lambda) {
  const int n = work_grid(p, u.spec());
  std::vector<double> w = detail::potential_on_grid(p, n);
  const std::vector<double> uu = real_values(to_grid(u, n));
  const auto& nl = p.nonlinearity;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double t = uu[j] * uu[j];
    w[j] += p.mu * (2.0 * nl.gprime_times_t(t) + nl.g(t));
  }
  return LocalOperator(u.basis(), p.a0, n, std::move(w), lambda);
}

/// E(v) = 1/2 a(v, v) + mu/2 int G(v^2), by quadrature on the dealiasing grid.
inline double energy(const Problem& p, const SpectralField& v) {
  const auto& b = v.spec();
  if (b.dim() != p.dim) throw Error(ErrorCode::kDimensionMismatch, "field and problem dimensions differ");
  double kinetic = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) kinetic += b.norm2(i) * std::norm(v[i]);
  const int n = work_grid(p, b);
  const std::vector<double> vv = real_values(to_grid(v, n));
  const std::vector<double> pot = detail::potential_on_grid(p, n);
  const double cell = std::pow(2.0 * std::numbers::pi / n, b.dim());
  double potential = 0.0;
  double interaction = 0.0;
  for (std::size_t j = 0; j < vv.size(); ++j) {
    const double t = vv[j] * vv[j];
    potential += pot[j] * t;
    interaction += p.nonlinearity.G(t);
  }
  return 0.5 * (p.a0 * kinetic + cell * potential) + 0.5 * p.mu * cell * interaction;
}

/// P_M(A_u v), with u and v on a common basis.
inline SpectralField apply_fock(const Problem& p, const SpectralField& u, const SpectralField& v) {
  require_same_space(u.spec(), v.spec());
  return fock_operator(p, u).apply(v);
}

/// P_M((A + mu[2 g'(u^2)u^2 + g(u^2)] - lambda) v); lambda is taken as given.
inline SpectralField apply_linearized(const Problem& p, const SpectralField& u, double lambda,
                                      const SpectralField& v) {
  require_same_space(u.spec(), v.spec());
  return linearized_operator(p, u, lambda).apply(v);
}

/// <A_v v, v> / |v|^2.
inline double rayleigh(const Problem& p, const SpectralField& v) {
  const double vv = l2_inner(v, v);
  if (!(vv > 0.0)) throw Error(ErrorCode::kDegenerateProjector, "Rayleigh quotient of a zero field");
  return l2_inner(apply_fock(p, v, v), v) / vv;
}

/// Fine-space representation of A_{u} u - lambda u for the ground state.
inline SpectralField residual(const Problem& p, const GroundState& gs, const Basis& fine) {
  if (fine->cutoff() < gs.basis->cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "residual basis must contain the ground-state basis");
  }
  const SpectralField uf = prolong(gs.u, fine);
  SpectralField r = fock_operator(p, uf).apply(uf);
  r.axpy(-gs.lambda, uf);
  return r;
}

}  // namespace gpspec
