#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gpspec/gpspec.hpp"

namespace testing_support {

using gpspec::Complex;
using gpspec::SpectralField;

inline constexpr double kPi = std::numbers::pi;

inline std::mt19937_64 rng(std::uint64_t seed = 42) { return std::mt19937_64(seed); }

/// Direct evaluation sum_k v_k e_k(x) at one point, no transforms.
inline Complex evaluate(const SpectralField& v, const std::array<double, 3>& x) {
  const auto& b = v.spec();
  Complex acc = 0.0;
  const double c = std::pow(2.0 * kPi, -0.5 * b.dim());
  for (std::size_t i = 0; i < b.size(); ++i) {
    double phase = 0.0;
    for (int a = 0; a < b.dim(); ++a) phase += b.mode(i)[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    acc += v[i] * c * std::exp(Complex(0.0, phase));
  }
  return acc;
}

/// Trapezoidal quadrature of |v|^2 over (0, 2pi) in d = 1 with n nodes, evaluated pointwise.
inline double quadrature_l2_squared_1d(const SpectralField& v, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += std::norm(evaluate(v, {2.0 * kPi * j / n, 0.0, 0.0}));
  return acc * 2.0 * kPi / n;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline SpectralField constant_state(const gpspec::Basis& b) {
  return gpspec::normalized(gpspec::unit_constant(b));
}

inline gpspec::GroundState exact_constant_state(const gpspec::Basis& b, double mu = 1.0) {
  gpspec::GroundState gs;
  gs.basis = b;
  gs.u = constant_state(b);
  const double rho = 1.0 / std::pow(2.0 * kPi, b->dim());
  gs.lambda = mu * rho;
  gs.energy = 0.25 * mu * rho;
  gs.converged = true;
  return gs;
}

#define EXPECT_ERROR_CODE(stmt, expected)                                  \
  do {                                                                     \
    try {                                                                  \
      stmt;                                                                \
      ADD_FAILURE() << "expected " << gpspec::to_string(expected);         \
    } catch (const gpspec::Error& e_) {                                    \
      EXPECT_EQ(e_.code(), expected) << e_.what();                         \
    }                                                                      \
  } while (0)

}  // namespace testing_support
