#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpspec/corrector.hpp"
#include "gpspec/error.hpp"
#include "gpspec/estimator.hpp"
#include "gpspec/field.hpp"
#include "gpspec/ground_solver.hpp"
#include "gpspec/io.hpp"
#include "gpspec/model.hpp"

namespace gpspec::study {

/// Canonical description of a problem: parameters plus the potential coefficients.
inline io::Json problem_to_json(const Problem& p) {
  const auto& s = p.potential_spec;
  return io::Json{{"d", p.dim},
                  {"a0", p.a0},
                  {"mu", p.mu},
                  {"nonlinearity", io::Json{{"family", "power"}, {"p", p.nonlinearity.p}}},
                  {"potential",
                   io::Json{{"kind", to_string(s.kind)},
                            {"amplitude", s.amplitude},
                            {"ratio", s.ratio},
                            {"shift", s.shift},
                            {"cutoff", p.potential_cutoff()},
                            {"source", s.source}}}};
}

// ---------------------------------------------------------------- reference cache

inline std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("GPSPEC_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::temp_directory_path() / "gpspec-cache";
}

struct Reference {
  GroundState gs;
  bool cache_hit = false;
  std::string key;
  std::filesystem::path file;
};

inline std::string reference_key(const Problem& p, int cutoff, const SolverConfig& cfg) {
  const io::Json key{{"problem", problem_to_json(p)},
                     {"potential_coefficients", io::field_to_json(p.potential)},
                     {"M_ref", cutoff},
                     {"solver",
                      io::Json{{"method", to_string(cfg.method)},
                               {"tol_residual", cfg.tol_residual},
                               {"damping", cfg.damping},
                               {"flow_step", cfg.flow_step},
                               {"inner_tol", cfg.inner_tol},
                               {"seed", cfg.seed}}}};
  return io::hex(io::fnv1a(key.dump()));
}

/// Tightly converged ground state on cutoff M_ref, cached on disk under a content hash.
/// A record whose stored checksum does not match its payload is recomputed.
inline Reference reference_solution(const Problem& p, int cutoff, SolverConfig cfg,
                                    std::optional<std::filesystem::path> cache_dir = std::nullopt) {
  cfg.tol_residual = std::min(cfg.tol_residual, 1e-12);
  cfg.inner_tol = std::min(cfg.inner_tol, 1e-13);
  Reference ref;
  ref.key = reference_key(p, cutoff, cfg);
  const auto dir = cache_dir.value_or(default_cache_dir());
  ref.file = dir / ("reference-" + ref.key + ".json");

  if (std::filesystem::exists(ref.file)) {
    try {
      const io::Json j = io::read_json(ref.file);
      const std::string payload = j.at("field").dump() + j.at("summary").dump();
      if (j.at("key").get<std::string>() == ref.key &&
          j.at("checksum").get<std::string>() == io::hex(io::fnv1a(payload))) {
        ref.gs = io::ground_state_from_json(j.at("summary"), j.at("field"));
        ref.cache_hit = true;
        return ref;
      }
    } catch (const std::exception&) {
      // fall through and recompute
    }
  }
  ref.gs = solve_ground_state(p, make_basis(p.dim, cutoff), cfg);
  io::Json j;
  j["key"] = ref.key;
  j["summary"] = io::ground_state_to_json(ref.gs);
  j["field"] = io::field_to_json(ref.gs.u);
  j["checksum"] = io::hex(io::fnv1a(j["field"].dump() + j["summary"].dump()));
  try {
    io::write_text_atomic(ref.file, j.dump() + "\n");
  } catch (const std::exception&) {
    // a read-only cache location only costs recomputation
  }
  return ref;
}

// ---------------------------------------------------------------- measurement

struct Errors {
  double err_h1 = 0.0;
  double err_l2 = 0.0;
  double err_lambda = 0.0;
  double err_energy = 0.0;  ///< signed E - E_ref
  double seconds = 0.0;
  bool ok = true;
  std::string failure;
};

/// Errors of (u, lambda, energy) against the reference after prolongation and sign alignment.
inline Errors measure(const SpectralField& u, double lambda, double e, const GroundState& ref) {
  if (u.spec().dim() != ref.basis->dim()) throw Error(ErrorCode::kDimensionMismatch, "candidate dimension differs");
  if (u.spec().cutoff() > ref.basis->cutoff()) {
    throw Error(ErrorCode::kBasisMismatch, "candidate basis is larger than the reference basis");
  }
  const SpectralField v = align_sign(prolong(u, ref.basis), ref.u);
  SpectralField diff = v;
  diff -= ref.u;
  Errors out;
  out.err_h1 = h1_norm(diff);
  out.err_l2 = l2_norm(diff);
  out.err_lambda = std::abs(lambda - ref.lambda);
  out.err_energy = e - ref.energy;
  return out;
}

inline Errors measure(const GroundState& gs, const GroundState& ref) { return measure(gs.u, gs.lambda, gs.energy, ref); }
inline Errors measure(const Correction& c, const GroundState& ref) {
  return measure(c.u_hat, c.lambda_hat, c.energy_hat, ref);
}

// ---------------------------------------------------------------- rate fitting

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log x, log y).
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) throw Error(ErrorCode::kInvalidArgument, "rate fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> lg;
  for (const auto& [x, y] : pts) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "rate fit needs positive data", x > 0.0 ? y : x);
    }
    lg.emplace_back(std::log(x), std::log(y));
    sx += lg.back().first;
    sy += lg.back().second;
  }
  const double n = static_cast<double>(lg.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : lg) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate fit needs distinct abscissae");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.points = lg.size();
  return f;
}

// ---------------------------------------------------------------- study driver

struct StudyConfig {
  std::vector<int> cutoffs{8, 12, 16, 24, 32};
  int reference_cutoff = 256;
  int fine_factor = 4;
  SolverConfig solver;
  LinSolveConfig lin;
  EigConfig eig;
  std::vector<Scheme> schemes{Scheme::kNewton, Scheme::kTwoGrid1, Scheme::kTwoGrid2a, Scheme::kTwoGrid2b,
                              Scheme::kPerturbation};
  bool estimators = true;
  int coarse_certificate_cutoff = 2;  ///< extra certificate point outside the asymptotic regime; < 0 disables
  int threads = 1;
  std::optional<std::filesystem::path> cache_dir;

  StudyConfig() { solver.tol_residual = 1e-12; }

  void validate() const {
    if (cutoffs.empty()) throw Error(ErrorCode::kInvalidArgument, "study needs at least one cutoff");
    for (int m : cutoffs) {
      if (m < 1) throw Error(ErrorCode::kInvalidArgument, "study cutoffs must be positive");
    }
    const int mmax = *std::max_element(cutoffs.begin(), cutoffs.end());
    if (reference_cutoff < 4 * mmax) {
      throw Error(ErrorCode::kInvalidArgument, "reference cutoff must be at least 4 x the largest study cutoff");
    }
    if (fine_factor < 2) throw Error(ErrorCode::kInvalidArgument, "fine factor must be at least 2");
    if (mmax * fine_factor > reference_cutoff) {
      throw Error(ErrorCode::kInvalidArgument, "fine spaces must fit inside the reference space");
    }
    solver.validate();
    lin.validate();
  }
};

struct Estimates {
  bool ok = true;
  std::string failure;
  double residual_dual = kNaN;
  double energy_lower = kNaN;
  double energy_upper = kNaN;
  double a_ww = kNaN;
  double gap = kNaN;
  bool certificate_supported = false;
  bool certified = false;
  double validity_alpha = kNaN;
  double eps = kNaN;
  double gamma = kNaN;
  double error_bound_h1 = kInfinity;
  double error_bound_residual = kInfinity;
};

struct StudyRecord {
  int M = 0;
  int fine_M = 0;
  GroundState gs;
  Errors coarse;
  std::vector<std::pair<Scheme, Errors>> schemes;
  Estimates est;

  const Errors* scheme(Scheme s) const {
    for (const auto& [k, e] : schemes) {
      if (k == s) return &e;
    }
    return nullptr;
  }
};

struct Rule {
  std::string name;
  bool pass = false;
  double value = kNaN;
  double lo = kNaN;
  double hi = kNaN;
  double r2 = kNaN;
  std::string detail;
};

struct StudyReport {
  Problem problem;
  StudyConfig config;
  Reference reference;
  std::vector<StudyRecord> records;
  std::optional<StudyRecord> coarse_certificate;  ///< record at coarse_certificate_cutoff
  std::vector<std::pair<std::string, RateFit>> fits;
  std::vector<Rule> rules;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Estimates run_estimators(const Problem& p, const GroundState& gs, const Basis& fine,
                                const StudyConfig& cfg, const Correction* newton) {
  Estimates e;
  try {
    e.residual_dual = residual_dual_norm(p, gs, fine);
    if (newton != nullptr) {
      const EnergyBounds b = energy_bounds(p, gs, *newton);
      e.energy_lower = b.lower;
      e.energy_upper = b.upper;
      e.a_ww = b.a_ww;
    }
    e.gap = spectral_gap(p, gs, fine, cfg.eig).gap;
    if (p.dim == 1 && p.nonlinearity.is_cubic()) {
      const EstimateReport rep = kantorovich_certificate(p, gs, fine);
      e.certificate_supported = true;
      e.certified = rep.certified;
      e.validity_alpha = rep.validity_alpha;
      e.eps = rep.eps;
      e.gamma = rep.gamma;
      e.error_bound_h1 = rep.error_bound_h1;
      e.error_bound_residual = rep.error_bound_residual;
    }
  } catch (const Error& err) {
    e.ok = false;
    e.failure = err.what();
  }
  return e;
}

}  // namespace detail

/// Coarse solve, every selected scheme on the fine space and the estimators at one cutoff.
inline StudyRecord run_point(const Problem& p, int m, const StudyConfig& cfg, const GroundState& ref) {
  StudyRecord rec;
  rec.M = m;
  const Basis coarse = make_basis(p.dim, m);
  const Basis fine = make_basis(p.dim, cfg.fine_factor * m);
  rec.fine_M = fine->cutoff();
  auto t0 = std::chrono::steady_clock::now();
  rec.gs = solve_ground_state(p, coarse, cfg.solver);
  rec.coarse = measure(rec.gs, ref);
  rec.coarse.seconds = detail::seconds_since(t0);

  std::optional<Correction> newton;
  for (Scheme s : cfg.schemes) {
    t0 = std::chrono::steady_clock::now();
    Errors e;
    try {
      LinSolveConfig lin = cfg.lin;
      lin.min_fine_ratio = std::min(lin.min_fine_ratio, cfg.fine_factor);
      const Correction c = apply_scheme(s, p, rec.gs, fine, lin, cfg.eig);
      e = measure(c, ref);
      if (s == Scheme::kNewton) newton = c;
    } catch (const Error& err) {
      e.ok = false;
      e.failure = err.what();
    }
    e.seconds = detail::seconds_since(t0);
    rec.schemes.emplace_back(s, e);
  }
  if (cfg.estimators) rec.est = detail::run_estimators(p, rec.gs, fine, cfg, newton ? &*newton : nullptr);
  return rec;
}

// ---------------------------------------------------------------- acceptance rules

inline std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

/// Floating-point resolution of energy comparisons: 64 ulp of |E|.
inline double energy_roundoff(double e) { return 64.0 * std::numeric_limits<double>::epsilon() * std::abs(e); }

inline Rule slope_rule(const std::string& name, const std::vector<std::pair<double, double>>& pts, double lo,
                       double hi, double min_r2, std::vector<std::pair<std::string, RateFit>>* fits) {
  Rule r;
  r.name = name;
  r.lo = lo;
  r.hi = hi;
  try {
    const RateFit f = fit_rate(pts);
    if (fits != nullptr) fits->emplace_back(name, f);
    r.value = f.slope;
    r.r2 = f.r2;
    r.pass = f.slope >= lo && f.slope <= hi && f.r2 >= min_r2;
    r.detail = "slope " + format_g(f.slope) + ", R^2 " + format_g(f.r2);
  } catch (const Error& err) {
    r.pass = false;
    r.detail = err.what();
    std::vector<std::pair<double, double>> positive;
    for (const auto& pt : pts) {
      if (pt.first > 0.0 && pt.second > 0.0) positive.push_back(pt);
    }
    if (positive.size() >= 3 && positive.size() < pts.size()) {
      const RateFit f = fit_rate(positive);
      r.detail += "; over the " + std::to_string(positive.size()) + " resolvable points slope " +
                  format_g(f.slope) + ", R^2 " + format_g(f.r2);
    }
  }
  return r;
}

/// Error-vs-error relations, sandwich, residual equivalence and certificate soundness.
inline std::vector<Rule> evaluate_rules(const StudyReport& rep, std::vector<std::pair<std::string, RateFit>>* fits) {
  std::vector<Rule> rules;
  const auto& recs = rep.records;
  std::vector<std::pair<double, double>> lam, en, nh1, nen, pert;
  for (const auto& r : recs) {
    lam.emplace_back(r.coarse.err_h1, r.coarse.err_lambda);
    en.emplace_back(r.coarse.err_h1, r.coarse.err_energy);
    if (const Errors* e = r.scheme(Scheme::kNewton); e != nullptr && e->ok) {
      nh1.emplace_back(r.coarse.err_h1, e->err_h1);
      nen.emplace_back(r.coarse.err_h1, e->err_energy);
    }
    if (const Errors* e = r.scheme(Scheme::kPerturbation); e != nullptr && e->ok) {
      pert.emplace_back(static_cast<double>(r.M), e->err_h1 / r.coarse.err_h1);
    }
  }
  rules.push_back(slope_rule("lambda_vs_h1", lam, 1.7, 2.3, 0.95, fits));
  rules.push_back(slope_rule("energy_vs_h1", en, 1.7, 2.3, 0.95, fits));
  rules.push_back(slope_rule("newton_h1_vs_h1", nh1, 1.7, 2.5, 0.0, fits));
  rules.push_back(slope_rule("newton_energy_vs_h1", nen, 3.4, 4.6, 0.0, fits));
  rules.push_back(slope_rule("perturbation_ratio_vs_M", pert, -2.6, -1.4, 0.0, fits));

  {
    Rule r;
    r.name = "energy_sandwich";
    r.pass = !recs.empty();
    const double eref = rep.reference.gs.energy;
    const double slack = energy_roundoff(eref);
    std::string bad;
    for (const auto& rec : recs) {
      if (rec.M < 12) continue;
      if (!rec.est.ok || std::isnan(rec.est.energy_lower)) {
        r.pass = false;
        bad += " M=" + std::to_string(rec.M) + " (no bounds)";
        continue;
      }
      if (!(rec.est.energy_lower <= eref + slack && eref <= rec.est.energy_upper + slack)) {
        r.pass = false;
        bad += " M=" + std::to_string(rec.M);
      }
    }
    if (!recs.empty()) {
      const auto& last = recs.back();
      const double gap_lower = std::abs(eref - last.est.energy_lower);
      const double gap_upper = last.est.energy_upper - eref;
      r.value = gap_upper > 0.0 ? gap_lower / gap_upper : kInfinity;
      r.hi = 0.2;
      if (!(r.value <= 0.2)) r.pass = false;
    }
    r.detail = (bad.empty() ? "lower <= E_ref <= upper for M >= 12" : "violated at" + bad) +
               ", round-off slack " + format_g(slack);
    rules.push_back(r);
  }
  {
    Rule r;
    r.name = "residual_equivalence";
    if (recs.size() >= 3) {
      double lo = kInfinity, hi = 0.0;
      for (std::size_t i = recs.size() - 3; i < recs.size(); ++i) {
        const double ratio = recs[i].coarse.err_h1 / recs[i].est.residual_dual;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      r.value = (hi - lo) / lo;
      r.hi = 0.2;
      r.pass = r.value < 0.2;
      r.detail = "ratio err_h1/residual in [" + format_g(lo) + ", " + format_g(hi) + "]";
    } else {
      r.detail = "needs three study points";
    }
    rules.push_back(r);
  }
  {
    Rule r;
    r.name = "certificate_soundness";
    r.pass = true;
    int certified = 0;
    for (const auto& rec : recs) {
      if (!rec.est.certificate_supported || !rec.est.certified) continue;
      ++certified;
      if (!(rec.coarse.err_h1 <= rec.est.error_bound_h1)) {
        r.pass = false;
        r.detail += " unsound at M=" + std::to_string(rec.M);
      }
    }
    if (rep.coarse_certificate) {
      const auto& c = *rep.coarse_certificate;
      if (!c.est.ok || !c.est.certificate_supported) {
        r.pass = false;
        r.detail += " coarse certificate unavailable: " + c.est.failure;
      } else if (c.est.certified) {
        r.pass = false;
        r.detail += " certified at M=" + std::to_string(c.M) + " (validity " + format_g(c.est.validity_alpha) + ")";
      }
      r.value = c.est.validity_alpha;
    } else {
      r.pass = false;
      r.detail += " no coarse certificate point";
    }
    r.detail = std::to_string(certified) + " certified points;" + (r.detail.empty() ? " sound" : r.detail);
    rules.push_back(r);
  }
  return rules;
}

/// Reference, study points (optionally concurrent), coarse certificate point, fits and rules.
inline StudyReport run_study(const Problem& p, const StudyConfig& cfg) {
  cfg.validate();
  StudyReport rep;
  rep.problem = p;
  rep.config = cfg;
  rep.reference = reference_solution(p, cfg.reference_cutoff, cfg.solver, cfg.cache_dir);
  const GroundState& ref = rep.reference.gs;

  if (cfg.threads > 1) {
    std::vector<std::future<StudyRecord>> jobs;
    for (int m : cfg.cutoffs) {
      jobs.push_back(std::async(std::launch::async, [&p, m, &cfg, &ref] { return run_point(p, m, cfg, ref); }));
    }
    for (auto& j : jobs) rep.records.push_back(j.get());
  } else {
    for (int m : cfg.cutoffs) rep.records.push_back(run_point(p, m, cfg, ref));
  }

  if (cfg.coarse_certificate_cutoff > 0 && p.dim == 1 && p.nonlinearity.is_cubic()) {
    StudyConfig small = cfg;
    small.schemes.clear();
    try {
      rep.coarse_certificate = run_point(p, cfg.coarse_certificate_cutoff, small, ref);
    } catch (const Error& err) {
      StudyRecord failed;
      failed.M = cfg.coarse_certificate_cutoff;
      failed.est.ok = false;
      failed.est.failure = err.what();
      rep.coarse_certificate = failed;
    }
  }
  rep.rules = evaluate_rules(rep, &rep.fits);
  return rep;
}

}  // namespace gpspec::study
