#include "helpers.hpp"

using namespace gpspec;
using namespace testing_support;

namespace {

SolverConfig tight(SolverConfig::Method m = SolverConfig::Method::kScf) {
  SolverConfig cfg;
  cfg.method = m;
  cfg.tol_residual = 1e-12;
  return cfg;
}

}  // namespace

TEST(GroundState, FreeProblemIsConstant) {
  const Problem p = free_problem(1, 1.0);
  for (int m : {0, 1, 2, 5, 8}) {
    const GroundState gs = solve_ground_state(p, make_basis(1, m), tight());
    EXPECT_NEAR(gs.lambda, 1.0 / (2.0 * kPi), 1e-11) << m;
    EXPECT_NEAR(gs.energy, 1.0 / (8.0 * kPi), 1e-11) << m;
    EXPECT_LT(max_abs_diff(gs.u, constant_state(gs.basis)), 1e-11) << m;
  }
}

TEST(GroundState, LinearLaplacian) {
  const Problem p = free_problem(1, 0.0);
  const GroundState gs = solve_ground_state(p, make_basis(1, 6), tight());
  EXPECT_NEAR(gs.lambda, 0.0, 1e-11);
  EXPECT_LT(max_abs_diff(gs.u, constant_state(gs.basis)), 1e-11);
}

TEST(GroundState, MatchesDenseOracle) {
  const Problem p = cosine_problem(1, 1.0);
  const Basis b = make_basis(1, 16);
  const oracle::OracleResult ref = oracle::solve(p, b);
  EXPECT_NEAR(ref.gs.lambda, -0.10977457151895369, 1e-12);
  EXPECT_NEAR(ref.gs.energy, -0.12044214689058474, 1e-12);
  for (auto method : {SolverConfig::Method::kScf, SolverConfig::Method::kGradientFlow}) {
    const GroundState gs = solve_ground_state(p, b, tight(method));
    EXPECT_LT(max_abs_diff(gs.u, ref.gs.u), 1e-10) << to_string(method);
    EXPECT_NEAR(gs.lambda, ref.gs.lambda, 1e-10);
    EXPECT_NEAR(gs.energy, ref.gs.energy, 1e-10);
  }
}

TEST(GroundState, NormalizedAndSignPinned) {
  const Problem p = cosine_problem(2, 1.0);
  const GroundState gs = solve_ground_state(p, make_basis(2, 6), SolverConfig{});
  EXPECT_NEAR(l2_norm(gs.u), 1.0, 1e-12);
  EXPECT_GT(gs.u.mean_coeff().real(), 0.0);
  EXPECT_LT(gs.u.symmetry_defect(), 1e-14);
  EXPECT_GT(gs.lambda2, gs.lambda);
}

TEST(GroundState, MethodsAgree) {
  const Problem p = cosine_problem(1, 1.0);
  const Basis b = make_basis(1, 16);
  const GroundState a = solve_ground_state(p, b, tight(SolverConfig::Method::kScf));
  const GroundState g = solve_ground_state(p, b, tight(SolverConfig::Method::kGradientFlow));
  EXPECT_LT(h1_norm(a.u - g.u), 1e-9);
}

TEST(GroundState, EnergyNonincreasingInCutoff) {
  const Problem p = cosine_problem(1, 2.0, 3.0);
  double prev = INFINITY;
  for (int m : {1, 2, 3, 4, 6, 8}) {
    const GroundState gs = solve_ground_state(p, make_basis(1, m), tight());
    EXPECT_LE(gs.energy, prev + 1e-14) << m;
    prev = gs.energy;
  }
}

TEST(GroundState, NonconvergenceCarriesResidual) {
  const Problem p = cosine_problem(1, 1.0);
  SolverConfig cfg;
  cfg.max_outer = 2;
  try {
    solve_ground_state(p, make_basis(1, 8), cfg);
    FAIL() << "expected nonconvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonconvergence);
    EXPECT_GT(e.value(), cfg.tol_residual);
  }
}

TEST(GroundState, DimensionMismatch) {
  EXPECT_ERROR_CODE(solve_ground_state(cosine_problem(1), make_basis(2, 3), SolverConfig{}),
                    ErrorCode::kDimensionMismatch);
}

TEST(GroundState, TraceRecordsIterations) {
  std::vector<TraceRow> trace;
  const GroundState gs = solve_ground_state(cosine_problem(1), make_basis(1, 8), SolverConfig{}, &trace);
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace.back().iteration, gs.iterations);
  EXPECT_LE(trace.back().residual, SolverConfig{}.tol_residual);
}

TEST(ScfStep, FixedPointAtExactSolution) {
  const Problem p = free_problem(1, 1.0);
  const Basis b = make_basis(1, 6);
  const SpectralField u = constant_state(b);
  const ScfStep s = scf_step(p, u, SolverConfig{});
  EXPECT_LT(max_abs_diff(s.u_next, u), 1e-12);
  EXPECT_NEAR(s.lambda_next, 1.0 / (2.0 * kPi), 1e-12);
}

TEST(ScfStep, UndampedLinearStepIsExact) {
  const Problem p = cosine_problem(1, 0.0);
  const Basis b = make_basis(1, 10);
  SolverConfig cfg;
  cfg.damping = 1.0;
  auto gen = rng(21);
  const SpectralField u0 = normalized(constant_state(b) + 0.05 * random_real_field(b, gen));
  const ScfStep s = scf_step(p, u0, cfg);
  const oracle::OracleResult ref = oracle::solve(p, b);
  EXPECT_NEAR(s.lambda_next, ref.gs.lambda, 1e-11);
  EXPECT_LT(l2_norm(align_sign(s.u_next, ref.gs.u) - ref.gs.u), 1e-9);
}

TEST(ScfStep, CosineThirtyStepsRegression) {
  const Problem p = cosine_problem(1, 1.0);
  const Basis b = make_basis(1, 8);
  const SolverConfig cfg;
  SpectralField u = initial_guess(b, cfg.seed);
  for (int i = 0; i < 30; ++i) u = pin_sign(scf_step(p, u, cfg).u_next);
  EXPECT_LE(projected_residual(p, u).first, 1e-10);
}

TEST(GradientFlow, FixedPointAtExactSolution) {
  const Problem p = free_problem(1, 1.0);
  const SpectralField u = constant_state(make_basis(1, 6));
  EXPECT_LT(max_abs_diff(gradient_flow_step(p, u, SolverConfig{}), u), 1e-14);
}

TEST(GradientFlow, EnergyDecreasesMonotonicallyToKnownMinimum) {
  const Problem p = free_problem(1, 1.0);
  const Basis b = make_basis(1, 8);
  auto gen = rng(22);
  SpectralField u = normalized(random_real_field(b, gen));
  SolverConfig cfg;
  cfg.method = SolverConfig::Method::kGradientFlow;
  double e = energy(p, u);
  for (int i = 0; i < 400; ++i) {
    u = pin_sign(gradient_flow_step(p, u, cfg));
    const double next = energy(p, u);
    ASSERT_LE(next, e + 1e-14 * std::max(1.0, std::abs(e))) << "step " << i;
    EXPECT_NEAR(l2_norm(u), 1.0, 1e-12);
    e = next;
  }
  EXPECT_NEAR(e, 1.0 / (8.0 * kPi), 1e-10);
}

TEST(InitialGuess, SeededAndNormalized) {
  const Basis b = make_basis(2, 4);
  const SpectralField a = initial_guess(b, 5);
  const SpectralField c = initial_guess(b, 5);
  const SpectralField d = initial_guess(b, 6);
  EXPECT_EQ(max_abs_diff(a, c), 0.0);
  EXPECT_GT(max_abs_diff(a, d), 0.0);
  EXPECT_NEAR(l2_norm(a), 1.0, 1e-14);
  EXPECT_LT(a.symmetry_defect(), 1e-15);
}

TEST(Eigensolver, LaplacianSpectrum) {
  const Problem p = free_problem(1, 0.0);
  for (int m : {4, 200}) {
    const Basis b = make_basis(1, m);
    const EigenPairs ep = lowest_eigenpairs(bare_operator(p, b), 5, EigConfig{});
    ASSERT_TRUE(ep.converged);
    const double expected[] = {0, 1, 1, 4, 4};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(ep.values[static_cast<std::size_t>(i)], expected[i], 1e-9) << m;
  }
}

TEST(Eigensolver, IterativeMatchesDense) {
  const Problem p = cosine_problem(1, 1.0, 2.0);
  const Basis b = make_basis(1, 160);
  const LocalOperator op = bare_operator(p, b);
  EigConfig dense;
  EigConfig iterative;
  iterative.dense_limit = 0;
  const EigenPairs a = lowest_eigenpairs(op, 3, dense);
  const EigenPairs c = lowest_eigenpairs(op, 3, iterative);
  ASSERT_TRUE(c.converged);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.values[static_cast<std::size_t>(i)], c.values[static_cast<std::size_t>(i)], 1e-10);
}
