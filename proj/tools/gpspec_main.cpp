// gpspec: ground states of the periodic Gross-Pitaevskii problem and their post-processing.
//
// Precedence: built-in defaults < --config file < command-line flags.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<int> cutoff;
  std::optional<int> fine_factor;
  std::optional<double> mu;
  std::vector<std::string> schemes;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> tol;
  std::optional<int> threads;
  std::optional<std::string> state;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "YAML run configuration");
  cmd->add_option("--M", f.cutoff, "basis cutoff M");
  cmd->add_option("--fine-factor", f.fine_factor, "fine cutoff = factor x M");
  cmd->add_option("--mu", f.mu, "nonlinearity strength");
  cmd->add_option("--output,-o", f.output, "output directory");
  cmd->add_option("--seed", f.seed, "initial-guess seed");
  cmd->add_option("--method", f.method, "ground-state solver")->check(CLI::IsMember({"scf", "gradient_flow"}));
  cmd->add_option("--tol", f.tol, "residual tolerance of the ground-state solver");
}

void add_schemes(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scheme", f.schemes, "post-processing scheme (repeatable)")
      ->check(CLI::IsMember({"newton", "tg1", "tg2a", "tg2b", "pert"}));
}

gpspec::cli::RunConfig resolve(const Flags& f) {
  using namespace gpspec;
  cli::RunConfig cfg = f.config.empty() ? cli::RunConfig{} : cli::load_config(f.config);
  if (f.cutoff) cfg.cutoff = *f.cutoff;
  if (f.fine_factor) cfg.fine_factor = *f.fine_factor;
  if (f.mu) cfg.problem.mu = *f.mu;
  if (!f.schemes.empty()) {
    cfg.schemes.clear();
    for (const auto& s : f.schemes) cfg.schemes.push_back(scheme_from_string(s));
  }
  if (f.output) cfg.output = *f.output;
  if (f.seed) cfg.seed = *f.seed;
  cfg.solver.seed = cfg.seed;
  if (f.method) cfg.solver.method = *f.method == "scf" ? SolverConfig::Method::kScf : SolverConfig::Method::kGradientFlow;
  if (f.tol) cfg.solver.tol_residual = *f.tol;
  if (f.threads) cfg.study.threads = *f.threads;
  if (f.mu && !(*f.mu >= 0.0)) throw cli::ConfigError("--mu: error: must be nonnegative");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Gross-Pitaevskii ground states with a posteriori post-processing"};
  app.require_subcommand(1);
  Flags f;

  auto* solve = app.add_subcommand("solve", "ground state on X_M");
  add_common(solve, f);
  auto* post = app.add_subcommand("postprocess", "correct a ground state on the fine space");
  add_common(post, f);
  add_schemes(post, f);
  post->add_option("--state", f.state, "ground_state.json from a previous solve");
  auto* est = app.add_subcommand("estimate", "residual, energy bounds, gap and certificate");
  add_common(est, f);
  est->add_option("--state", f.state, "ground_state.json from a previous solve");
  auto* stud = app.add_subcommand("study", "convergence study against a reference solution");
  add_common(stud, f);
  add_schemes(stud, f);
  stud->add_option("--threads", f.threads, "concurrent study points");
  auto* orc = app.add_subcommand("oracle", "dense brute-force solve (at most 200 modes)");
  add_common(orc, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto cfg = resolve(f);
    std::optional<std::filesystem::path> state;
    if (f.state) state = *f.state;
    if (solve->parsed()) return gpspec::cli::cmd_solve(cfg, std::cout);
    if (post->parsed()) return gpspec::cli::cmd_postprocess(cfg, state, std::cout);
    if (est->parsed()) return gpspec::cli::cmd_estimate(cfg, state, std::cout);
    if (stud->parsed()) return gpspec::cli::cmd_study(cfg, std::cout);
    if (orc->parsed()) return gpspec::cli::cmd_oracle(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return gpspec::cli::exit_code(e);
  }
  return 1;
}
