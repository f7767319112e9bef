#include "cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace gpspec::cli {

namespace {

using io::Json;
using io::number;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json metadata(const std::string& command, double seconds) {
  return Json{{"tool", "gpspec"}, {"command", command}, {"timestamp", timestamp()}, {"elapsed_seconds", seconds}};
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Prepared {
  Problem problem;
  Basis coarse;
  Basis fine;
};

Prepared prepare(const RunConfig& cfg) {
  validate(cfg);
  Prepared p{build_problem(cfg), make_basis(cfg.problem.d, cfg.cutoff),
             make_basis(cfg.problem.d, cfg.fine_factor * cfg.cutoff)};
  return p;
}

LinSolveConfig lin_for(const RunConfig& cfg) {
  LinSolveConfig lin = cfg.lin;
  lin.min_fine_ratio = std::min(lin.min_fine_ratio, cfg.fine_factor);
  return lin;
}

std::filesystem::path field_path_for(const std::filesystem::path& state) {
  return state.parent_path() / "u.json";
}

/// Ground state from a previous `solve` run, checked against the current configuration.
GroundState load_state(const RunConfig& cfg, const Problem& p, const std::filesystem::path& state) {
  const Json doc = io::read_json(state);
  if (!doc.contains("result") || !doc.contains("problem")) {
    throw ConfigError(state.string() + ": error: not a ground_state.json written by 'solve'");
  }
  if (doc.at("problem") != study::problem_to_json(p)) {
    throw ConfigError(state.string() + ": error: stored ground state belongs to a different problem");
  }
  const auto field = state.parent_path() / doc.at("field").get<std::string>();
  GroundState gs = io::ground_state_from_json(doc.at("result"), io::read_json(field));
  if (gs.basis->cutoff() != cfg.cutoff) {
    throw ConfigError(state.string() + ": error: stored ground state has M = " + std::to_string(gs.basis->cutoff()) +
                      " but the configuration asks for M = " + std::to_string(cfg.cutoff));
  }
  return gs;
}

GroundState obtain_state(const RunConfig& cfg, const Prepared& prep,
                         const std::optional<std::filesystem::path>& state) {
  if (state) return load_state(cfg, prep.problem, *state);
  return solve_ground_state(prep.problem, prep.coarse, cfg.solver);
}

Json solver_json(const SolverConfig& s) {
  return Json{{"method", to_string(s.method)}, {"tol", s.tol_residual}, {"max_outer", s.max_outer},
              {"damping", s.damping},           {"flow_step", s.flow_step}, {"inner_tol", s.inner_tol},
              {"seed", s.seed}};
}

Json errors_json(const study::Errors& e) {
  Json j{{"ok", e.ok},
         {"err_h1", number(e.err_h1)},
         {"err_l2", number(e.err_l2)},
         {"err_lambda", number(e.err_lambda)},
         {"err_energy", number(e.err_energy)}};
  if (!e.ok) j["failure"] = e.failure;
  return j;
}

Json estimates_json(const study::Estimates& e) {
  Json j{{"ok", e.ok},
         {"residual_dual", number(e.residual_dual)},
         {"energy_lower", number(e.energy_lower)},
         {"energy_upper", number(e.energy_upper)},
         {"a_ww", number(e.a_ww)},
         {"gap", number(e.gap)},
         {"certificate_supported", e.certificate_supported},
         {"certified", e.certified},
         {"validity_alpha", number(e.validity_alpha)},
         {"eps", number(e.eps)},
         {"gamma", number(e.gamma)},
         {"error_bound_h1", number(e.error_bound_h1)},
         {"error_bound_residual", number(e.error_bound_residual)}};
  if (!e.ok) j["failure"] = e.failure;
  return j;
}

Json record_json(const study::StudyRecord& r) {
  Json schemes = Json::object();
  for (const auto& [s, e] : r.schemes) schemes[to_string(s)] = errors_json(e);
  return Json{{"M", r.M},
              {"fine_M", r.fine_M},
              {"lambda", number(r.gs.lambda)},
              {"energy", number(r.gs.energy)},
              {"coarse", errors_json(r.coarse)},
              {"schemes", schemes},
              {"estimates", estimates_json(r.est)}};
}

void print_row(std::ostream& out, const std::string& label, double value) {
  out << "  " << std::left << std::setw(24) << label << std::setprecision(10) << value << "\n";
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TraceRow> trace;
  const GroundState gs = solve_ground_state(prep.problem, prep.coarse, cfg.solver, &trace);
  const double secs = since(t0);

  Json doc{{"metadata", metadata("solve", secs)},
           {"config", config_to_json(cfg)},
           {"problem", study::problem_to_json(prep.problem)},
           {"solver", solver_json(cfg.solver)},
           {"result", io::ground_state_to_json(gs)},
           {"field", "u.json"}};
  io::write_json(cfg.output / "u.json", io::field_to_json(gs.u));
  io::write_json(cfg.output / "ground_state.json", doc);

  std::string csv = "iteration,energy,residual,lambda\n";
  for (const auto& r : trace) {
    csv += std::to_string(r.iteration) + "," + g17(r.energy) + "," + g17(r.residual) + "," + g17(r.lambda) + "\n";
  }
  io::write_text_atomic(cfg.output / "trace.csv", csv);

  out << "solve: M=" << cfg.cutoff << " modes=" << gs.basis->size() << " iterations=" << gs.iterations << "\n";
  print_row(out, "lambda", gs.lambda);
  print_row(out, "energy", gs.energy);
  print_row(out, "residual (H^-1)", gs.residual_dual_norm);
  out << "wrote " << (cfg.output / "ground_state.json").string() << "\n";
  return 0;
}

int cmd_postprocess(const RunConfig& cfg, const std::optional<std::filesystem::path>& state, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const GroundState gs = obtain_state(cfg, prep, state);
  const LinSolveConfig lin = lin_for(cfg);
  out << "postprocess: M=" << cfg.cutoff << " fine M=" << prep.fine->cutoff() << "\n";
  for (Scheme s : cfg.schemes) {
    const auto t1 = std::chrono::steady_clock::now();
    const Correction c = apply_scheme(s, prep.problem, gs, prep.fine, lin, EigConfig{}, cfg.normalization);
    Json doc{{"metadata", metadata("postprocess", since(t1))},
             {"config", config_to_json(cfg)},
             {"problem", study::problem_to_json(prep.problem)},
             {"ground_state", io::ground_state_to_json(gs)},
             {"normalization", to_string(cfg.normalization)},
             {"correction", io::correction_to_json(c)},
             {"u_hat", io::field_to_json(c.u_hat)}};
    const auto path = cfg.output / ("correction_" + to_string(s) + ".json");
    io::write_json(path, doc);
    out << "  " << std::left << std::setw(7) << to_string(s) << " lambda_hat=" << std::setprecision(15)
        << c.lambda_hat << " energy_hat=" << c.energy_hat << " |w|_H1=" << std::setprecision(4) << h1_norm(c.w_hat)
        << "  -> " << path.string() << "\n";
  }
  out << "elapsed " << std::setprecision(3) << since(t0) << " s\n";
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::optional<std::filesystem::path>& state, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  const bool supported = prep.problem.dim == 1 && prep.problem.nonlinearity.is_cubic();
  using Cert = EstimatorSection::Certificate;
  if (cfg.estimator.certificate == Cert::kOn && !supported) {
    throw Error(ErrorCode::kCertificateUnsupported, "certificate requested for d = " +
                                                         std::to_string(prep.problem.dim) + ", power " +
                                                         g17(prep.problem.nonlinearity.p));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const GroundState gs = obtain_state(cfg, prep, state);
  const EstimateReport rep = estimate(prep.problem, gs, prep.fine, lin_for(cfg), EigConfig{},
                                      cfg.estimator.certificate != Cert::kOff, cfg.estimator.gap);
  Json doc{{"metadata", metadata("estimate", since(t0))},
           {"config", config_to_json(cfg)},
           {"problem", study::problem_to_json(prep.problem)},
           {"ground_state", io::ground_state_to_json(gs)},
           {"estimate", io::estimate_to_json(rep)}};
  io::write_json(cfg.output / "estimate.json", doc);

  out << "estimate: M=" << cfg.cutoff << " fine M=" << rep.fine_cutoff << "\n";
  print_row(out, "residual (H^-1)", rep.residual_dual);
  print_row(out, "energy upper", rep.energy_upper);
  print_row(out, "energy lower", rep.energy_lower);
  print_row(out, "energy best", rep.energy_best);
  if (cfg.estimator.gap) {
    print_row(out, "lambda1", rep.lambda1);
    print_row(out, "lambda2", rep.lambda2);
    print_row(out, "gap", rep.gap);
  }
  if (rep.certificate_supported) {
    print_row(out, "gamma", rep.gamma);
    print_row(out, "eps", rep.eps);
    print_row(out, "2 gamma L(2 eps)", rep.validity_alpha);
    out << "  " << std::left << std::setw(24) << "certified" << (rep.certified ? "yes" : "no") << "\n";
    print_row(out, "error bound (H1)", rep.error_bound_h1);
  } else {
    out << "  certificate             not computed\n";
  }
  out << "wrote " << (cfg.output / "estimate.json").string() << "\n";
  return 0;
}

std::string study_csv(const study::StudyReport& rep) {
  std::ostringstream os;
  os << "M,fine_M,lambda,energy,err_h1,err_l2,err_lambda,err_energy,seconds";
  for (Scheme s : rep.config.schemes) {
    const auto n = to_string(s);
    os << "," << n << "_err_h1," << n << "_err_l2," << n << "_err_lambda," << n << "_err_energy," << n << "_seconds";
  }
  os << ",residual_dual,energy_lower,energy_upper,a_ww,gap,certified,validity_alpha,eps,gamma,error_bound_h1,"
        "error_bound_residual\n";
  for (const auto& r : rep.records) {
    os << r.M << "," << r.fine_M << "," << g17(r.gs.lambda) << "," << g17(r.gs.energy) << "," << g17(r.coarse.err_h1)
       << "," << g17(r.coarse.err_l2) << "," << g17(r.coarse.err_lambda) << "," << g17(r.coarse.err_energy) << ","
       << g17(r.coarse.seconds);
    for (Scheme s : rep.config.schemes) {
      const study::Errors* e = r.scheme(s);
      if (e == nullptr || !e->ok) {
        os << ",nan,nan,nan,nan," << (e ? g17(e->seconds) : "nan");
      } else {
        os << "," << g17(e->err_h1) << "," << g17(e->err_l2) << "," << g17(e->err_lambda) << ","
           << g17(e->err_energy) << "," << g17(e->seconds);
      }
    }
    const auto& e = r.est;
    os << "," << g17(e.residual_dual) << "," << g17(e.energy_lower) << "," << g17(e.energy_upper) << ","
       << g17(e.a_ww) << "," << g17(e.gap) << "," << (e.certified ? 1 : 0) << "," << g17(e.validity_alpha) << ","
       << g17(e.eps) << "," << g17(e.gamma) << "," << g17(e.error_bound_h1) << "," << g17(e.error_bound_residual)
       << "\n";
  }
  return os.str();
}

io::Json study_report_json(const study::StudyReport& rep) {
  Json records = Json::array();
  for (const auto& r : rep.records) records.push_back(record_json(r));
  Json fits = Json::object();
  for (const auto& [name, f] : rep.fits) {
    fits[name] = Json{{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"r2", number(f.r2)},
                      {"points", f.points}};
  }
  Json rules = Json::array();
  int passed = 0;
  for (const auto& r : rep.rules) {
    passed += r.pass ? 1 : 0;
    rules.push_back(Json{{"name", r.name},
                         {"pass", r.pass},
                         {"value", number(r.value)},
                         {"lo", number(r.lo)},
                         {"hi", number(r.hi)},
                         {"r2", number(r.r2)},
                         {"detail", r.detail}});
  }
  Json schemes = Json::array();
  for (Scheme s : rep.config.schemes) schemes.push_back(to_string(s));
  Json doc{{"problem", study::problem_to_json(rep.problem)},
           {"study",
            Json{{"M", rep.config.cutoffs},
                 {"M_ref", rep.config.reference_cutoff},
                 {"fine_factor", rep.config.fine_factor},
                 {"schemes", schemes},
                 {"solver", solver_json(rep.config.solver)}}},
           {"reference",
            Json{{"M", rep.config.reference_cutoff},
                 {"key", rep.reference.key},
                 {"lambda", number(rep.reference.gs.lambda)},
                 {"energy", number(rep.reference.gs.energy)},
                 {"residual_dual_norm", number(rep.reference.gs.residual_dual_norm)}}},
           {"records", records}};
  if (rep.coarse_certificate) doc["coarse_certificate"] = record_json(*rep.coarse_certificate);
  doc["fits"] = fits;
  doc["rules"] = rules;
  doc["summary"] = Json{{"passed", passed}, {"failed", static_cast<int>(rep.rules.size()) - passed}};
  return doc;
}

std::string plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Log-log figures from study.csv (run next to the file or pass its path)."""
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).with_name("study.csv"))
rows = list(csv.DictReader(path.open()))


def col(name, absolute=True):
    out = []
    for r in rows:
        v = float(r.get(name, "nan"))
        out.append(abs(v) if absolute else v)
    return out


def positive(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


M = col("M")
h1 = col("err_h1")
schemes = sorted({k[: -len("_err_h1")] for k in rows[0] if k.endswith("_err_h1") and k != "err_h1"})

fig, ax = plt.subplots(1, 3, figsize=(15, 4.5))

for name, label in (("err_lambda", "|lambda - lambda_ref|"), ("err_energy", "|E - E_ref|")):
    x, y = positive(h1, col(name))
    ax[0].loglog(x, y, "o-", label=label)
x, _ = positive(h1, h1)
if x:
    ax[0].loglog(x, [v * v for v in x], "k--", label="slope 2")
ax[0].set_xlabel("coarse H1 error")
ax[0].set_title("eigenvalue / energy vs H1 error")
ax[0].legend()

for s in schemes:
    x, y = positive(h1, col(s + "_err_h1"))
    ax[1].loglog(x, y, "o-", label=s)
ax[1].set_xlabel("coarse H1 error")
ax[1].set_ylabel("post-processed H1 error")
ax[1].set_title("post-processing")
ax[1].legend()

for s in schemes:
    ratio = [p / c if c > 0 else float("nan") for p, c in zip(col(s + "_err_h1"), h1)]
    x, y = positive(M, ratio)
    ax[2].loglog(x, y, "o-", label=s)
ax[2].set_xlabel("M")
ax[2].set_ylabel("post / coarse H1 error")
ax[2].set_title("improvement ratio")
ax[2].legend()

fig.tight_layout()
target = path.with_name("study.png")
fig.savefig(target, dpi=120)
print(f"wrote {target}")
)PY";
}

int cmd_study(const RunConfig& cfg, std::ostream& out) {
  const Prepared prep = prepare(cfg);
  study::StudyConfig sc;
  sc.cutoffs = cfg.study.cutoffs;
  sc.reference_cutoff = cfg.study.reference_cutoff;
  sc.fine_factor = cfg.fine_factor;
  sc.solver = cfg.solver;
  sc.solver.tol_residual = std::min(cfg.solver.tol_residual, 1e-12);
  sc.lin = cfg.lin;
  sc.schemes = cfg.schemes;
  sc.estimators = true;
  sc.coarse_certificate_cutoff = cfg.study.coarse_certificate_cutoff;
  sc.threads = cfg.study.threads;
  try {
    sc.validate();
  } catch (const Error& e) {
    throw ConfigError(cfg.source + ": error: " + e.what());
  }

  const auto t0 = std::chrono::steady_clock::now();
  const study::StudyReport rep = study::run_study(prep.problem, sc);
  const double secs = since(t0);

  Json meta = metadata("study", secs);
  meta["reference_cache_hit"] = rep.reference.cache_hit;
  meta["reference_file"] = rep.reference.file.string();
  Json timings = Json::object();
  for (const auto& r : rep.records) {
    Json t{{"coarse", r.coarse.seconds}};
    for (const auto& [s, e] : r.schemes) t[to_string(s)] = e.seconds;
    timings[std::to_string(r.M)] = t;
  }
  meta["point_seconds"] = timings;

  Json doc{{"metadata", meta}, {"config", config_to_json(cfg)}};
  const Json body = study_report_json(rep);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  io::write_json(cfg.output / "report.json", doc);
  io::write_text_atomic(cfg.output / "study.csv", study_csv(rep));
  io::write_text_atomic(cfg.output / "plot_study.py", plot_script());

  out << "study: M = {";
  for (std::size_t i = 0; i < sc.cutoffs.size(); ++i) out << (i ? "," : "") << sc.cutoffs[i];
  out << "}, M_ref = " << sc.reference_cutoff << (rep.reference.cache_hit ? " (cached)" : "") << "\n";
  for (const auto& r : rep.rules) {
    out << "  " << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name << " value="
        << study::format_g(r.value);
    if (std::isfinite(r.lo) || std::isfinite(r.hi)) out << " range=[" << study::format_g(r.lo) << ", " << study::format_g(r.hi) << "]";
    if (std::isfinite(r.r2)) out << " r2=" << study::format_g(r.r2);
    if (!r.detail.empty()) out << "  " << r.detail;
    out << "\n";
  }
  out << "wrote " << (cfg.output / "study.csv").string() << ", report.json, plot_study.py (" << std::setprecision(3)
      << secs << " s)\n";
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const Problem p = build_problem(cfg);
  const Basis basis = make_basis(cfg.problem.d, cfg.cutoff);
  oracle::require_dense(p, *basis);
  const auto t0 = std::chrono::steady_clock::now();
  const oracle::OracleResult res = oracle::solve(p, basis);
  const auto spectrum = oracle::fock_eigenvalues(p, res.gs.u, *basis);
  Json spec = Json::array();
  for (double v : spectrum) spec.push_back(number(v));
  Json doc{{"metadata", metadata("oracle", since(t0))},
           {"config", config_to_json(cfg)},
           {"problem", study::problem_to_json(p)},
           {"result", io::ground_state_to_json(res.gs)},
           {"field", "u.json"},
           {"oracle",
            Json{{"scf_iterations", res.scf_iterations},
                 {"newton_iterations", res.newton_iterations},
                 {"final_residual", number(res.final_residual)},
                 {"fock_spectrum", spec}}}};
  io::write_json(cfg.output / "u.json", io::field_to_json(res.gs.u));
  io::write_json(cfg.output / "oracle.json", doc);
  out << "oracle: M=" << cfg.cutoff << " modes=" << basis->size() << "\n";
  print_row(out, "lambda", res.gs.lambda);
  print_row(out, "energy", res.gs.energy);
  print_row(out, "residual (H^-1)", res.final_residual);
  out << "  lowest Fock eigenvalues ";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, spectrum.size()); ++i) out << std::setprecision(8) << spectrum[i] << " ";
  out << "\nwrote " << (cfg.output / "oracle.json").string() << "\n";
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::kInvalidArgument:
      case ErrorCode::kBasisTooLarge:
      case ErrorCode::kDimensionMismatch:
      case ErrorCode::kIo:
        return 2;
      case ErrorCode::kNonconvergence:
      case ErrorCode::kStagnation:
        return 3;
      default:
        return 4;
    }
  }
  return 1;
}

}  // namespace gpspec::cli
