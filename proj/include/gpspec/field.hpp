#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "gpspec/basis.hpp"
#include "gpspec/error.hpp"
#include "gpspec/fft.hpp"

namespace gpspec {

using Complex = std::complex<double>;

/// Trigonometric polynomial on (0, 2pi)^d stored by its coefficients against
/// e_k(x) = (2pi)^{-d/2} exp(i k.x), one per mode of the basis.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(Basis basis) : basis_(std::move(basis)), coeffs_(basis_->size()) {}
  SpectralField(Basis basis, std::vector<Complex> coeffs)
      : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_->size()) {
      throw Error(ErrorCode::kInvalidArgument, "coefficient count does not match basis size");
    }
  }

  const Basis& basis() const noexcept { return basis_; }
  const BasisSpec& spec() const { return *basis_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }

  /// Coefficient of the k = 0 mode (the mean times (2pi)^{d/2}).
  Complex mean_coeff() const { return coeffs_[static_cast<std::size_t>(basis_->index_of({0, 0, 0}))]; }

  SpectralField& operator+=(const SpectralField& o) {
    check(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o) {
    check(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
    return *this;
  }

  /// Replace the coefficients by their conjugate-symmetric (real-valued) part.
  void symmetrize() {
    const auto& b = *basis_;
    std::vector<Complex> out(coeffs_.size());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      out[i] = 0.5 * (coeffs_[i] + std::conj(coeffs_[b.negated(i)]));
    }
    coeffs_ = std::move(out);
  }

  /// Largest violation of coeff(-k) = conj(coeff(k)).
  double symmetry_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      worst = std::max(worst, std::abs(coeffs_[i] - std::conj(coeffs_[basis_->negated(i)])));
    }
    return worst;
  }

 private:
  void check(const SpectralField& o) const { require_same_space(*basis_, *o.basis_); }

  Basis basis_;
  std::vector<Complex> coeffs_;
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// Samples on the uniform n^d grid x_j = 2pi j / n, row-major with the last axis fastest.
struct GridField {
  Basis basis;
  int points = 0;
  std::vector<Complex> values;

  std::size_t total() const { return values.size(); }
};

namespace detail {

inline std::size_t grid_total(int dim, int n) {
  std::size_t t = 1;
  for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(n);
  return t;
}

inline std::size_t grid_slot(const WaveVector& k, int dim, int n) {
  std::size_t idx = 0;
  for (int i = 0; i < dim; ++i) {
    const int w = ((k[i] % n) + n) % n;
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(w);
  }
  return idx;
}

inline double planewave_norm(int dim) { return std::pow(2.0 * std::numbers::pi, -0.5 * dim); }

}  // namespace detail

/// Samples of v on an n^d grid for any n >= 1; modes beyond the grid's Nyquist range alias.
inline GridField to_grid_aliased(const SpectralField& v, int n) {
  const auto& b = v.spec();
  GridField g{v.basis(), n, std::vector<Complex>(detail::grid_total(b.dim(), n))};
  const double scale = detail::planewave_norm(b.dim());
  for (std::size_t i = 0; i < b.size(); ++i) g.values[detail::grid_slot(b.mode(i), b.dim(), n)] += v[i] * scale;
  fft::transform(g.values, b.dim(), n, fft::Direction::kBackward);
  return g;
}

/// Evaluate v at the nodes of an n^d grid; n defaults to the basis grid.
/// Requires n >= 2M + 1 so that every mode has its own grid frequency.
inline GridField to_grid(const SpectralField& v, int n = 0) {
  const auto& b = v.spec();
  if (n == 0) n = b.grid();
  if (n < 2 * b.cutoff() + 1) {
    throw Error(ErrorCode::kAliasingUnresolvable,
                "grid of " + std::to_string(n) + " points cannot hold cutoff " + std::to_string(b.cutoff()));
  }
  GridField g{v.basis(), n, std::vector<Complex>(detail::grid_total(b.dim(), n))};
  const double scale = detail::planewave_norm(b.dim());
  for (std::size_t i = 0; i < b.size(); ++i) g.values[detail::grid_slot(b.mode(i), b.dim(), n)] = v[i] * scale;
  fft::transform(g.values, b.dim(), n, fft::Direction::kBackward);
  return g;
}

/// L2 projection onto the cutoff-M basis of the trigonometric interpolant of g.
inline SpectralField from_grid(const GridField& g, const Basis& basis) {
  const auto& b = *basis;
  if (g.points < 2 * b.cutoff() + 1) {
    throw Error(ErrorCode::kAliasingUnresolvable, "grid of " + std::to_string(g.points) +
                                                      " points cannot resolve cutoff " +
                                                      std::to_string(b.cutoff()));
  }
  if (detail::grid_total(b.dim(), g.points) != g.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "grid data does not match the basis dimension");
  }
  std::vector<Complex> work = g.values;
  fft::transform(work, b.dim(), g.points, fft::Direction::kForward);
  const double cell = std::pow(2.0 * std::numbers::pi / g.points, b.dim());
  const double scale = cell * detail::planewave_norm(b.dim());
  SpectralField out(basis);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = work[detail::grid_slot(b.mode(i), b.dim(), g.points)] * scale;
  return out;
}

/// Real-part Sobolev product sum_k (1 + |k|^2)^s v_k conj(w_k).
inline double sobolev_inner(const SpectralField& v, const SpectralField& w, double s) {
  require_same_space(v.spec(), w.spec());
  const auto& b = v.spec();
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double weight = (s == 0.0) ? 1.0 : std::pow(1.0 + b.norm2(i), s);
    acc += weight * (v[i] * std::conj(w[i])).real();
  }
  return acc;
}

inline double sobolev_norm(const SpectralField& v, double s) {
  return std::sqrt(std::max(0.0, sobolev_inner(v, v, s)));
}

inline double l2_inner(const SpectralField& v, const SpectralField& w) { return sobolev_inner(v, w, 0.0); }
inline double l2_norm(const SpectralField& v) { return sobolev_norm(v, 0.0); }
inline double h1_norm(const SpectralField& v) { return sobolev_norm(v, 1.0); }
inline double hminus1_norm(const SpectralField& v) { return sobolev_norm(v, -1.0); }

/// Zero-padding embedding into a larger cutoff.
inline SpectralField prolong(const SpectralField& v, const Basis& fine) {
  const auto& src = v.spec();
  if (src.dim() != fine->dim()) throw Error(ErrorCode::kDimensionMismatch, "prolong across dimensions");
  if (fine->cutoff() < src.cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "prolong target cutoff is smaller than the source cutoff");
  }
  SpectralField out(fine);
  for (std::size_t i = 0; i < src.size(); ++i) out[static_cast<std::size_t>(fine->index_of(src.mode(i)))] = v[i];
  return out;
}

/// Truncation to a smaller cutoff (L2 projection).
inline SpectralField restrict_to(const SpectralField& v, const Basis& coarse) {
  const auto& src = v.spec();
  if (src.dim() != coarse->dim()) throw Error(ErrorCode::kDimensionMismatch, "restrict across dimensions");
  if (coarse->cutoff() > src.cutoff()) {
    throw Error(ErrorCode::kInvalidArgument, "restrict target cutoff is larger than the source cutoff");
  }
  SpectralField out(coarse);
  for (std::size_t i = 0; i < coarse->size(); ++i) out[i] = v[static_cast<std::size_t>(src.index_of(coarse->mode(i)))];
  return out;
}

/// Move v onto `target`, padding or truncating as needed.
inline SpectralField transfer(const SpectralField& v, const Basis& target) {
  if (target->cutoff() >= v.spec().cutoff()) return prolong(v, target);
  return restrict_to(v, target);
}

/// v - (v,u)/(u,u) u : the L2-orthogonal projection onto the complement of u.
inline SpectralField project_orthogonal(const SpectralField& v, const SpectralField& u) {
  const double uu = l2_inner(u, u);
  if (!(uu > 0.0)) throw Error(ErrorCode::kDegenerateProjector, "cannot project against a zero field");
  SpectralField out = v;
  out.axpy(-l2_inner(v, u) / uu, u);
  return out;
}

inline SpectralField normalized(SpectralField v) {
  const double n = l2_norm(v);
  if (!(n > 0.0)) throw Error(ErrorCode::kDegenerateProjector, "cannot normalize a zero field");
  v *= 1.0 / n;
  return v;
}

/// Field with the single coefficient `value` at wave-vector k.
inline SpectralField single_mode(const Basis& basis, const WaveVector& k, Complex value = 1.0) {
  SpectralField out(basis);
  const int idx = basis->index_of(k);
  if (idx < 0) throw Error(ErrorCode::kInvalidArgument, "wave-vector outside the cutoff ball");
  out[static_cast<std::size_t>(idx)] = value;
  return out;
}

/// Constant field of unit L2 norm.
inline SpectralField unit_constant(const Basis& basis) { return single_mode(basis, {0, 0, 0}, 1.0); }

/// Random real-valued field; coefficient magnitudes scaled by (1 + |k|^2)^{-decay/2}.
template <class Rng>
SpectralField random_real_field(const Basis& basis, Rng& rng, double decay = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField out(basis);
  const auto& b = *basis;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = std::pow(1.0 + b.norm2(i), -0.5 * decay);
    out[i] = Complex(normal(rng), normal(rng)) * w;
  }
  out.symmetrize();
  return out;
}

/// Real parts of the grid samples.
inline std::vector<double> real_values(const GridField& g) {
  std::vector<double> out(g.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.values[i].real();
  return out;
}

}  // namespace gpspec
