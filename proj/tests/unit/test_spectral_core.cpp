#include "helpers.hpp"

using namespace gpspec;
using namespace testing_support;

namespace {

int brute_force_count(int d, int m) {
  int count = 0;
  const int lo = -m, hi = m;
  for (int a = lo; a <= hi; ++a) {
    for (int b = (d > 1 ? lo : 0); b <= (d > 1 ? hi : 0); ++b) {
      for (int c = (d > 2 ? lo : 0); c <= (d > 2 ? hi : 0); ++c) {
        if (a * a + b * b + c * c <= m * m) ++count;
      }
    }
  }
  return count;
}

}  // namespace

TEST(Basis, OriginOnly) {
  const Basis b = make_basis(1, 0);
  EXPECT_EQ(b->size(), 1u);
  EXPECT_EQ(b->mode(0), (WaveVector{0, 0, 0}));
  EXPECT_GE(b->grid(), 2);
}

TEST(Basis, OneDimensionalCount) {
  const Basis b = make_basis(1, 4);
  ASSERT_EQ(b->size(), 9u);
  for (int k = -4; k <= 4; ++k) EXPECT_GE(b->index_of({k, 0, 0}), 0);
  EXPECT_EQ(b->index_of({5, 0, 0}), -1);
}

TEST(Basis, LatticeCountsMatchEnumeration) {
  EXPECT_EQ(make_basis(2, 2)->size(), 13u);
  for (int d = 1; d <= 3; ++d) {
    for (int m : {0, 1, 2, 3, 5, 7}) {
      EXPECT_EQ(make_basis(d, m)->size(), static_cast<std::size_t>(brute_force_count(d, m))) << d << " " << m;
    }
  }
}

TEST(Basis, ClosedUnderNegationAndGridLargeEnough) {
  for (int d = 1; d <= 3; ++d) {
    const Basis b = make_basis(d, 4);
    EXPECT_GE(b->grid(), 4 * 4 + 2);
    for (std::size_t i = 0; i < b->size(); ++i) {
      const auto& k = b->mode(i);
      const auto j = b->negated(i);
      EXPECT_EQ(b->mode(j), (WaveVector{-k[0], -k[1], -k[2]}));
    }
  }
}

TEST(Basis, RejectsBadArguments) {
  EXPECT_ERROR_CODE(make_basis(0, 4), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(make_basis(4, 4), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(make_basis(3, 4000), ErrorCode::kBasisTooLarge);
}

TEST(Transform, ConstantFieldIsFlat) {
  for (int d = 1; d <= 3; ++d) {
    const Basis b = make_basis(d, 3);
    const GridField g = to_grid(unit_constant(b));
    const double expected = std::pow(2.0 * kPi, -0.5 * d);
    for (const auto& v : g.values) EXPECT_NEAR(std::abs(v - expected), 0.0, 1e-14);
  }
}

TEST(Transform, CosineSamplesGiveHalfRootTwoPi) {
  const Basis b = make_basis(1, 5);
  GridField g{b, b->grid(), std::vector<Complex>(static_cast<std::size_t>(b->grid()))};
  for (int j = 0; j < g.points; ++j) g.values[static_cast<std::size_t>(j)] = std::cos(2.0 * kPi * j / g.points);
  const SpectralField v = from_grid(g, b);
  for (std::size_t i = 0; i < b->size(); ++i) {
    const int k = b->mode(i)[0];
    const double expected = std::abs(k) == 1 ? std::sqrt(2.0 * kPi) * 0.5 : 0.0;
    EXPECT_NEAR(std::abs(v[i] - expected), 0.0, 1e-13) << "k=" << k;
  }
}

TEST(Transform, RoundTripRandomSymmetric) {
  auto gen = rng(1);
  for (int d = 1; d <= 3; ++d) {
    const Basis b = make_basis(d, d == 3 ? 4 : 8);
    const SpectralField v = random_real_field(b, gen);
    const SpectralField w = from_grid(to_grid(v), b);
    EXPECT_LT(max_abs_diff(v, w), 1e-12 * std::max(1.0, l2_norm(v)));
    for (const auto& x : to_grid(v).values) EXPECT_LT(std::abs(x.imag()), 1e-12);
  }
}

TEST(Transform, GridValuesMatchDirectSummation) {
  auto gen = rng(2);
  const Basis b = make_basis(2, 3);
  const SpectralField v = random_real_field(b, gen);
  const GridField g = to_grid(v);
  const int n = g.points;
  for (int i : {0, 1, 5}) {
    for (int j : {0, 3, n - 1}) {
      const Complex direct = evaluate(v, {2.0 * kPi * i / n, 2.0 * kPi * j / n, 0.0});
      EXPECT_LT(std::abs(direct - g.values[static_cast<std::size_t>(i * n + j)]), 1e-12);
    }
  }
}

TEST(Transform, ParsevalAgainstQuadrature) {
  auto gen = rng(3);
  const Basis b = make_basis(1, 8);
  const SpectralField v = random_real_field(b, gen, 0.0);
  const double coeff = l2_inner(v, v);
  const double quad = quadrature_l2_squared_1d(v, 4 * 8 + 2);
  EXPECT_LT(std::abs(coeff - quad) / coeff, 1e-12);
}

TEST(Transform, ParsevalOnGrid) {
  auto gen = rng(4);
  for (int d = 1; d <= 2; ++d) {
    const Basis b = make_basis(d, 6);
    const SpectralField v = random_real_field(b, gen);
    const GridField g = to_grid(v);
    double acc = 0.0;
    for (const auto& x : g.values) acc += std::norm(x);
    acc *= std::pow(2.0 * kPi / g.points, d);
    EXPECT_LT(std::abs(acc - l2_inner(v, v)) / l2_inner(v, v), 1e-12);
  }
}

TEST(Transform, UnresolvableGridRejected) {
  const Basis b = make_basis(1, 8);
  EXPECT_ERROR_CODE(to_grid(unit_constant(b), 10), ErrorCode::kAliasingUnresolvable);
  GridField g{b, 10, std::vector<Complex>(10)};
  EXPECT_ERROR_CODE(from_grid(g, b), ErrorCode::kAliasingUnresolvable);
}

TEST(Sobolev, ConstantHasUnitNormForAnyExponent) {
  const Basis b = make_basis(2, 3);
  const SpectralField u = unit_constant(b);
  for (double s : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}) EXPECT_DOUBLE_EQ(sobolev_inner(u, u, s), 1.0);
}

TEST(Sobolev, SingleModeWeight) {
  const Basis b = make_basis(2, 3);
  const SpectralField v = single_mode(b, {1, 0, 0});
  EXPECT_DOUBLE_EQ(sobolev_inner(v, v, 1.0), 2.0);
}

TEST(Sobolev, NormsAreOrdered) {
  auto gen = rng(5);
  const Basis b = make_basis(1, 12);
  for (int t = 0; t < 5; ++t) {
    const SpectralField v = random_real_field(b, gen, 0.0);
    EXPECT_GE(h1_norm(v), l2_norm(v));
    EXPECT_GE(l2_norm(v), hminus1_norm(v));
  }
}

TEST(Sobolev, MismatchedBasesRejected) {
  const SpectralField a = unit_constant(make_basis(1, 3));
  const SpectralField b = unit_constant(make_basis(1, 4));
  EXPECT_ERROR_CODE(sobolev_inner(a, b, 0.0), ErrorCode::kBasisMismatch);
}

TEST(Transfer, ProlongRestrictIsIdentity) {
  auto gen = rng(6);
  const Basis coarse = make_basis(2, 4);
  const Basis fine = make_basis(2, 9);
  const SpectralField v = random_real_field(coarse, gen);
  EXPECT_EQ(max_abs_diff(restrict_to(prolong(v, fine), coarse), v), 0.0);
}

TEST(Transfer, RestrictDropsOutsideModes) {
  const Basis coarse = make_basis(1, 4);
  const Basis fine = make_basis(1, 8);
  const SpectralField v = single_mode(fine, {6, 0, 0});
  EXPECT_EQ(l2_norm(restrict_to(v, coarse)), 0.0);
}

TEST(Transfer, ProlongIsometryRestrictContraction) {
  auto gen = rng(7);
  const Basis coarse = make_basis(1, 5);
  const Basis fine = make_basis(1, 20);
  const SpectralField v = random_real_field(coarse, gen);
  const SpectralField w = random_real_field(fine, gen);
  for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    EXPECT_NEAR(sobolev_norm(prolong(v, fine), s), sobolev_norm(v, s), 1e-14 * sobolev_norm(v, s));
    EXPECT_LE(sobolev_norm(restrict_to(w, coarse), s), sobolev_norm(w, s));
  }
}

TEST(Transfer, DimensionMismatch) {
  EXPECT_ERROR_CODE(prolong(unit_constant(make_basis(1, 2)), make_basis(2, 4)), ErrorCode::kDimensionMismatch);
  EXPECT_ERROR_CODE(restrict_to(unit_constant(make_basis(2, 4)), make_basis(1, 2)), ErrorCode::kDimensionMismatch);
}

TEST(Projector, AnnihilatesDirectionAndIsIdempotent) {
  auto gen = rng(8);
  const Basis b = make_basis(1, 10);
  const SpectralField u = normalized(random_real_field(b, gen));
  EXPECT_LT(l2_norm(project_orthogonal(u, u)), 1e-15);
  const SpectralField v = random_real_field(b, gen);
  const SpectralField pv = project_orthogonal(v, u);
  EXPECT_LT(max_abs_diff(project_orthogonal(pv, u), pv), 1e-12);
}

TEST(Projector, SelfAdjoint) {
  auto gen = rng(9);
  const Basis b = make_basis(2, 5);
  for (int t = 0; t < 5; ++t) {
    const SpectralField u = random_real_field(b, gen);
    const SpectralField v = random_real_field(b, gen);
    const SpectralField w = random_real_field(b, gen);
    const double lhs = l2_inner(project_orthogonal(v, u), w);
    const double rhs = l2_inner(v, project_orthogonal(w, u));
    EXPECT_NEAR(lhs, rhs, 1e-12 * l2_norm(v) * l2_norm(w));
  }
}

TEST(Projector, OrthogonalInputUnchanged) {
  const Basis b = make_basis(1, 4);
  const SpectralField u = unit_constant(b);
  const SpectralField v = single_mode(b, {2, 0, 0}) + single_mode(b, {-2, 0, 0});
  EXPECT_EQ(max_abs_diff(project_orthogonal(v, u), v), 0.0);
}

TEST(Projector, ZeroDirectionRejected) {
  const Basis b = make_basis(1, 4);
  EXPECT_ERROR_CODE(project_orthogonal(unit_constant(b), SpectralField(b)), ErrorCode::kDegenerateProjector);
}

TEST(Symmetry, OperationsPreserveRealness) {
  auto gen = rng(10);
  const Basis b = make_basis(1, 6);
  const Basis fine = make_basis(1, 12);
  const SpectralField u = random_real_field(b, gen);
  const SpectralField v = random_real_field(b, gen);
  EXPECT_LT(project_orthogonal(v, u).symmetry_defect(), 1e-15);
  EXPECT_LT(prolong(v, fine).symmetry_defect(), 1e-15);
  EXPECT_LT(from_grid(to_grid(v), b).symmetry_defect(), 1e-14);
  EXPECT_LT((u + v).symmetry_defect(), 1e-15);
}
