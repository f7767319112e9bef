#include "helpers.hpp"

using namespace gpspec;
using namespace testing_support;

namespace {

const Scheme kAllSchemes[] = {Scheme::kNewton, Scheme::kTwoGrid1, Scheme::kTwoGrid2a, Scheme::kTwoGrid2b,
                              Scheme::kPerturbation};

GroundState converged(const Problem& p, int m) {
  SolverConfig cfg;
  cfg.tol_residual = 1e-12;
  return solve_ground_state(p, make_basis(p.dim, m), cfg);
}

}  // namespace

TEST(Normalization, AffineExample) {
  const Basis b = make_basis(1, 3);
  const SpectralField u = unit_constant(b);
  const SpectralField w = (0.6 / std::sqrt(2.0)) * (single_mode(b, {1, 0, 0}) + single_mode(b, {-1, 0, 0}));
  const NormalizedCorrection nc = normalize_correction(u, w, Normalization::kAffine);
  EXPECT_NEAR(nc.alpha_star, 0.2, 1e-15);
  EXPECT_NEAR(l2_norm(nc.u_hat), 1.0, 1e-15);
  EXPECT_NEAR(l2_inner(nc.u_hat, u), 0.8, 1e-15);
}

TEST(Normalization, RadialExample) {
  const Basis b = make_basis(1, 3);
  const SpectralField u = unit_constant(b);
  const SpectralField w = (0.75 / std::sqrt(2.0)) * (single_mode(b, {2, 0, 0}) + single_mode(b, {-2, 0, 0}));
  const NormalizedCorrection nc = normalize_correction(u, w, Normalization::kRadial);
  EXPECT_NEAR(nc.beta_star, 0.8, 1e-15);
  EXPECT_NEAR(nc.alpha_star, 0.2, 1e-15);
  EXPECT_NEAR(l2_norm(nc.u_hat), 1.0, 1e-15);
}

TEST(Normalization, ZeroCorrectionIsIdentity) {
  const Basis b = make_basis(2, 3);
  const SpectralField u = unit_constant(b);
  for (auto mode : {Normalization::kAffine, Normalization::kRadial}) {
    const NormalizedCorrection nc = normalize_correction(u, SpectralField(b), mode);
    EXPECT_EQ(nc.alpha_star, 0.0);
    EXPECT_EQ(max_abs_diff(nc.u_hat, u), 0.0);
  }
}

TEST(Normalization, UnitNormForRandomCorrections) {
  auto gen = rng(31);
  const Basis b = make_basis(1, 8);
  const SpectralField u = normalized(random_real_field(b, gen));
  for (int t = 0; t < 5; ++t) {
    SpectralField w = project_orthogonal(random_real_field(b, gen), u);
    w *= 0.9 * (t + 1) / 5.0 / l2_norm(w);
    for (auto mode : {Normalization::kAffine, Normalization::kRadial}) {
      EXPECT_NEAR(l2_norm(normalize_correction(u, w, mode).u_hat), 1.0, 1e-14);
    }
  }
}

TEST(Normalization, AffineRejectsLargeCorrection) {
  const Basis b = make_basis(1, 3);
  const SpectralField u = unit_constant(b);
  const SpectralField w = 1.2 * single_mode(b, {1, 0, 0});
  EXPECT_ERROR_CODE(normalize_correction(u, w, Normalization::kAffine), ErrorCode::kCorrectionTooLarge);
  EXPECT_NEAR(l2_norm(normalize_correction(u, w, Normalization::kRadial).u_hat), 1.0, 1e-15);
}

TEST(Schemes, ExactConstantIsFixedPoint) {
  const Problem p = free_problem(1, 1.0);
  const GroundState gs = exact_constant_state(make_basis(1, 4));
  const Basis fine = make_basis(1, 16);
  for (Scheme s : kAllSchemes) {
    const Correction c = apply_scheme(s, p, gs, fine);
    EXPECT_LT(max_abs_diff(c.u_hat, prolong(gs.u, fine)), 1e-12) << to_string(s);
    EXPECT_NEAR(c.lambda_hat, gs.lambda, 1e-12) << to_string(s);
    EXPECT_NEAR(c.energy_hat, gs.energy, 1e-12) << to_string(s);
  }
}

TEST(Schemes, PostProcessedStatesAreNormalizedAndImprove) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 16);
  const GroundState ref = oracle::solve(p, make_basis(1, 48)).gs;
  const double coarse_err = h1_norm(prolong(gs.u, ref.basis) - ref.u);
  for (Scheme s : kAllSchemes) {
    const Correction c = apply_scheme(s, p, gs, fine);
    EXPECT_NEAR(l2_norm(c.u_hat), 1.0, 1e-12) << to_string(s);
    EXPECT_LT(c.u_hat.symmetry_defect(), 1e-13) << to_string(s);
    const SpectralField uh = align_sign(prolong(c.u_hat, ref.basis), ref.u);
    EXPECT_LT(h1_norm(uh - ref.u), coarse_err) << to_string(s);
  }
}

TEST(Newton, MatchesDenseBorderedSolve) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 32);
  LinSolveConfig lin;
  lin.tol = 1e-14;
  const Correction c = reconstructed_error(p, gs, fine, lin);
  const SpectralField ref = oracle::complement_solve(p, gs, fine);
  EXPECT_LT(h1_norm(c.w_hat - ref), 1e-9);
  EXPECT_GT(h1_norm(ref), 1e-6);
}

TEST(Newton, CorrectionOrthogonalAndEquivalentToResidual) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 16);
  const Correction c = reconstructed_error(p, gs, fine);
  const SpectralField uf = prolong(gs.u, fine);
  EXPECT_LT(std::abs(l2_inner(c.w_hat, uf)), 1e-13);
  const double ratio = h1_norm(c.w_hat) / hminus1_norm(residual(p, gs, fine));
  EXPECT_GT(ratio, 0.1);
  EXPECT_LT(ratio, 10.0);
  const double a_ww = l2_inner(apply_linearized(p, uf, gs.lambda, c.w_hat), c.w_hat);
  EXPECT_NEAR(c.a_ww, a_ww, 1e-12 * std::max(1.0, std::abs(a_ww)));
}

TEST(Newton, RequiresFineRatio) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 8);
  EXPECT_ERROR_CODE(reconstructed_error(p, gs, make_basis(1, 12)), ErrorCode::kInvalidArgument);
}

TEST(Perturbation, SingleModeResidual) {
  SpectralField vcoef(make_basis(1, 3));
  vcoef[static_cast<std::size_t>(vcoef.spec().index_of({3, 0, 0}))] = 0.1;
  vcoef[static_cast<std::size_t>(vcoef.spec().index_of({-3, 0, 0}))] = 0.1;
  const Problem q = make_problem_from_field(1.0, 0.0, {}, vcoef);
  const GroundState gs = exact_constant_state(make_basis(1, 1), 0.0);
  const Basis fine = make_basis(1, 8);
  const SpectralField r = residual(q, gs, fine);
  const Correction c = perturbation_correction(q, gs, fine);
  for (int k : {3, -3}) {
    const std::size_t i = static_cast<std::size_t>(fine->index_of({k, 0, 0}));
    ASSERT_GT(std::abs(r[i]), 0.0);
    EXPECT_NEAR(std::abs(c.w_hat[i] - (-1.0 / 9.0) * r[i]), 0.0, 1e-15);
  }
  for (int k : {-1, 0, 1}) EXPECT_EQ(c.w_hat[static_cast<std::size_t>(fine->index_of({k, 0, 0}))], Complex(0.0));
}

TEST(Perturbation, DiagonalNotInvertible) {
  const Problem p = cosine_problem(1, 0.0, 1.0, 5.0);
  const GroundState gs = converged(p, 1);
  ASSERT_GE(gs.lambda, 1.0);
  EXPECT_ERROR_CODE(perturbation_correction(p, gs, make_basis(1, 4)), ErrorCode::kDiagonalNotInvertible);
}

TEST(TwoGrid1, EqualsFineFrozenEigenvector) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 12);
  const Correction c = two_grid_scheme1(p, gs, fine);
  const SpectralField uf = prolong(gs.u, fine);
  SpectralField res = fock_operator(p, uf).apply(c.u_hat);
  res.axpy(-c.smallest_ritz, c.u_hat);
  EXPECT_LT(hminus1_norm(res), 1e-10);
  EXPECT_NEAR(c.smallest_ritz, oracle::fock_eigenvalues(p, uf, *fine).front(), 1e-10);
}

TEST(TwoGrid2a, SolvesBoundaryValueProblem) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 12);
  const Correction c = two_grid_scheme2a(p, gs, fine);
  EXPECT_FALSE(c.regularized);
  const SpectralField uf = prolong(gs.u, fine);
  const oracle::Vector x = oracle::fock_matrix(p, uf, *fine).lu().solve(gs.lambda * oracle::to_vector(uf));
  const SpectralField ref = normalized(oracle::to_field(x, fine));
  EXPECT_LT(h1_norm(align_sign(c.u_hat, ref) - ref), 1e-9);
}

TEST(TwoGrid2b, NonzeroPotentialSolvesBareSystem) {
  const Problem p = cosine_problem(1, 1.0, 1.0, 2.0);
  const GroundState gs = converged(p, 4);
  const Basis fine = make_basis(1, 12);
  const Correction c = two_grid_scheme2b(p, gs, fine);
  EXPECT_GT(c.smallest_ritz, 0.0);
  EXPECT_NEAR(l2_norm(c.u_hat), 1.0, 1e-12);
  const GroundState ref = oracle::solve(p, make_basis(1, 48)).gs;
  EXPECT_LT(h1_norm(align_sign(prolong(c.u_hat, ref.basis), ref.u) - ref.u),
            h1_norm(prolong(gs.u, ref.basis) - ref.u));
}

TEST(TwoGrid2b, ZeroPotentialKeepsMean) {
  const Problem p = free_problem(1, 2.0);
  const GroundState gs = exact_constant_state(make_basis(1, 3), 2.0);
  const Correction c = two_grid_scheme2b(p, gs, make_basis(1, 9));
  EXPECT_EQ(c.smallest_ritz, 0.0);
  EXPECT_LT(max_abs_diff(c.u_hat, prolong(gs.u, make_basis(1, 9))), 1e-14);
}

TEST(Corrections, FineBasisMustContainCoarse) {
  const Problem p = cosine_problem(1, 1.0);
  const GroundState gs = converged(p, 6);
  for (Scheme s : kAllSchemes) {
    EXPECT_ERROR_CODE(apply_scheme(s, p, gs, make_basis(1, 4)), ErrorCode::kInvalidArgument);
  }
}

TEST(Corrections, SchemeNamesRoundTrip) {
  for (Scheme s : kAllSchemes) EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_ERROR_CODE(scheme_from_string("bogus"), ErrorCode::kInvalidArgument);
}
