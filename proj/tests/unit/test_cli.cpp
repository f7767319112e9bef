#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "helpers.hpp"

using namespace gpspec;
using namespace gpspec::cli;

namespace {

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml, "run.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gpspec-cli-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GPSPEC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

io::Json without_metadata(io::Json j) {
  j.erase("metadata");
  if (j.contains("config")) j["config"].erase("output");
  return j;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig cfg = parse_config("{}", "run.yaml");
  EXPECT_EQ(cfg.cutoff, 16);
  EXPECT_EQ(cfg.fine_factor, 4);
  EXPECT_EQ(cfg.problem.d, 1);
  EXPECT_EQ(cfg.schemes.size(), 1u);
  EXPECT_EQ(cfg.solver.method, SolverConfig::Method::kScf);
}

TEST(Config, ParsesAllSections) {
  const RunConfig cfg = parse_config(R"(problem:
  d: 2
  a0: 0.5
  mu: 3
  nonlinearity: {power: 1.5}
  potential: {kind: cosine, amplitude: 2, shift: 1}
basis: {M: 6, fine_factor: 3}
solver: {method: gradient_flow, tol: 1.0e-9, max_outer: 50}
schemes: [newton, tg2a, pert]
normalization: radial
estimator: {certificate: off, gap: false}
study: {M: [2, 3, 4], M_ref: 16, threads: 2}
output: somewhere
seed: 9
)",
                                     "run.yaml");
  EXPECT_EQ(cfg.problem.d, 2);
  EXPECT_DOUBLE_EQ(cfg.problem.a0, 0.5);
  EXPECT_DOUBLE_EQ(cfg.problem.mu, 3.0);
  EXPECT_DOUBLE_EQ(cfg.problem.power, 1.5);
  EXPECT_DOUBLE_EQ(cfg.problem.potential.amplitude, 2.0);
  EXPECT_EQ(cfg.cutoff, 6);
  EXPECT_EQ(cfg.fine_factor, 3);
  EXPECT_EQ(cfg.solver.method, SolverConfig::Method::kGradientFlow);
  EXPECT_DOUBLE_EQ(cfg.solver.tol_residual, 1e-9);
  EXPECT_EQ(cfg.solver.max_outer, 50);
  ASSERT_EQ(cfg.schemes.size(), 3u);
  EXPECT_EQ(cfg.schemes[1], Scheme::kTwoGrid2a);
  EXPECT_EQ(cfg.normalization, Normalization::kRadial);
  EXPECT_EQ(cfg.estimator.certificate, EstimatorSection::Certificate::kOff);
  EXPECT_FALSE(cfg.estimator.gap);
  EXPECT_EQ(cfg.study.cutoffs, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(cfg.study.reference_cutoff, 16);
  EXPECT_EQ(cfg.output, "somewhere");
  EXPECT_EQ(cfg.seed, 9u);
}

TEST(Config, UnknownKeyReportsLineAndColumn) {
  const std::string msg = config_error("basis:\n  M: 4\n  fine_factr: 2\n");
  EXPECT_EQ(msg.rfind("run.yaml:3:3: error:", 0), 0u) << msg;
  EXPECT_NE(msg.find("fine_factr"), std::string::npos);
  EXPECT_NE(msg.find("fine_factor"), std::string::npos);
}

TEST(Config, WrongTypeReportsLocation) {
  const std::string msg = config_error("problem:\n  mu: lots\n");
  EXPECT_EQ(msg.rfind("run.yaml:2:7: error:", 0), 0u) << msg;
}

TEST(Config, RangeErrors) {
  EXPECT_NE(config_error("problem: {mu: -1}\n"), "");
  EXPECT_NE(config_error("problem: {d: 4}\n"), "");
  EXPECT_NE(config_error("schemes: [newton, bogus]\n"), "");
  EXPECT_NE(config_error("normalization: sideways\n"), "");
  EXPECT_NE(config_error("solver: {method: magic}\n"), "");
  EXPECT_NE(config_error("problem: [1, 2]\n"), "");
  EXPECT_NE(config_error("basis: {M: 4\n"), "");
}

TEST(Config, CrossFieldValidation) {
  EXPECT_THROW(parse_config("study: {M: [8, 16], M_ref: 32}\n", "run.yaml"), ConfigError);
  RunConfig cfg = parse_config("basis: {M: 8}\nstudy: {M: [4], M_ref: 16}\n", "run.yaml");
  cfg.fine_factor = 1;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.fine_factor = 8;
  EXPECT_THROW(validate(cfg), ConfigError);
  EXPECT_NO_THROW(validate(parse_config("{}", "run.yaml")));
}

TEST(Config, CoefficientFileRelativeToConfig) {
  const auto dir = scratch("coeff");
  io::Json coeff = io::field_to_json(0.5 * (single_mode(make_basis(1, 2), {2, 0, 0}) +
                                            single_mode(make_basis(1, 2), {-2, 0, 0})));
  io::write_json(dir / "v.json", coeff);
  std::ofstream(dir / "run.yaml") << "problem:\n  potential: {kind: coefficients, file: v.json}\n";
  const RunConfig cfg = load_config(dir / "run.yaml");
  const Problem p = build_problem(cfg);
  EXPECT_NEAR(p.potential[static_cast<std::size_t>(p.potential.spec().index_of({2, 0, 0}))].real(), 0.5, 1e-15);

  std::ofstream(dir / "bad.yaml") << "problem:\n  potential: {kind: coefficients, file: missing.json}\n";
  EXPECT_THROW(build_problem(load_config(dir / "bad.yaml")), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ConfigError("x")), 2);
  EXPECT_EQ(exit_code(Error(ErrorCode::kInvalidArgument, "x")), 2);
  EXPECT_EQ(exit_code(Error(ErrorCode::kBasisTooLarge, "x")), 2);
  EXPECT_EQ(exit_code(Error(ErrorCode::kNonconvergence, "x")), 3);
  EXPECT_EQ(exit_code(Error(ErrorCode::kStagnation, "x")), 3);
  EXPECT_EQ(exit_code(Error(ErrorCode::kCertificateUnsupported, "x")), 4);
  EXPECT_EQ(exit_code(Error(ErrorCode::kCoercivityViolated, "x")), 4);
  EXPECT_EQ(exit_code(std::runtime_error("x")), 1);
}

TEST(Commands, SolveWritesDeterministicOutputs) {
  const auto dir = scratch("solve");
  RunConfig cfg = parse_config("basis: {M: 8}\n", "run.yaml");
  std::ostringstream sink;
  cfg.output = dir / "a";
  EXPECT_EQ(cmd_solve(cfg, sink), 0);
  cfg.output = dir / "b";
  EXPECT_EQ(cmd_solve(cfg, sink), 0);
  for (const char* f : {"ground_state.json", "u.json"}) {
    const io::Json a = io::read_json(dir / "a" / f);
    const io::Json b = io::read_json(dir / "b" / f);
    EXPECT_EQ(without_metadata(a).dump(), without_metadata(b).dump()) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "trace.csv"));
  const io::Json gs = io::read_json(dir / "a" / "ground_state.json");
  EXPECT_NEAR(io::to_double(gs.at("result").at("lambda")), -0.10977457151895369, 1e-9);
  std::filesystem::remove_all(dir);
}

TEST(Commands, PostprocessReusesState) {
  const auto dir = scratch("post");
  RunConfig cfg = parse_config("basis: {M: 4}\nschemes: [newton, pert]\n", "run.yaml");
  cfg.output = dir;
  std::ostringstream sink;
  ASSERT_EQ(cmd_solve(cfg, sink), 0);
  EXPECT_EQ(cmd_postprocess(cfg, dir / "ground_state.json", sink), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "correction_newton.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "correction_pert.json"));

  RunConfig other = cfg;
  other.cutoff = 5;
  EXPECT_THROW(cmd_postprocess(other, dir / "ground_state.json", sink), std::exception);
  std::filesystem::remove_all(dir);
}

TEST(Commands, CertificateRequestedOnUnsupportedProblem) {
  RunConfig cfg = parse_config("problem: {d: 2}\nbasis: {M: 3}\nestimator: {certificate: on}\n", "run.yaml");
  cfg.output = scratch("cert");
  std::ostringstream sink;
  try {
    cmd_estimate(cfg, std::nullopt, sink);
    FAIL() << "expected certificate-unsupported";
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code(e), 4);
  }
  std::filesystem::remove_all(cfg.output);
}

TEST(Binary, ExitCodesAndPrecedence) {
  const auto dir = scratch("bin");
  std::ofstream(dir / "run.yaml") << "basis: {M: 6}\noutput: " << (dir / "from-file").string() << "\n";
  std::ofstream(dir / "broken.yaml") << "basis: {M: 6, bogus: 1}\n";
  EXPECT_EQ(run_cli("solve -c " + (dir / "run.yaml").string()), 0);
  EXPECT_EQ(io::read_json(dir / "from-file" / "ground_state.json").at("config").at("basis").at("M").get<int>(), 6);

  const auto flagged = dir / "from-flag";
  EXPECT_EQ(run_cli("solve -c " + (dir / "run.yaml").string() + " --M 4 -o " + flagged.string()), 0);
  EXPECT_EQ(io::read_json(flagged / "ground_state.json").at("config").at("basis").at("M").get<int>(), 4);

  EXPECT_EQ(run_cli("solve -c " + (dir / "broken.yaml").string()), 2);
  EXPECT_EQ(run_cli("solve --M -3 -o " + (dir / "neg").string()), 2);
  EXPECT_EQ(run_cli("solve --bogus"), 2);
  std::ofstream(dir / "short.yaml") << "solver: {max_outer: 1}\n";
  EXPECT_EQ(run_cli("solve -c " + (dir / "short.yaml").string() + " -o " + (dir / "short").string()), 3);
  EXPECT_EQ(run_cli("oracle --M 150 -o " + (dir / "big").string()), 4);
  std::filesystem::remove_all(dir);
}
