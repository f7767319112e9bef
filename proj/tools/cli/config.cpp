#include "cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace gpspec::cli {

namespace {

struct Ctx {
  std::string source;
  std::filesystem::path base;
};

[[noreturn]] void fail(const Ctx& c, const YAML::Mark& m, const std::string& msg) {
  if (m.is_null()) throw ConfigError(c.source + ": error: " + msg);
  throw ConfigError(c.source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) +
                    ": error: " + msg);
}

void require_map(const Ctx& c, const YAML::Node& n, const std::string& what) {
  if (!n.IsMap()) fail(c, n.Mark(), "'" + what + "' must be a mapping");
}

void check_keys(const Ctx& c, const YAML::Node& n, const std::set<std::string>& allowed, const std::string& what) {
  require_map(c, n, what);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(c, kv.first.Mark(), "unknown key '" + key + "' in " + what + " (expected one of: " + list + ")");
    }
  }
}

template <class T>
T scalar(const Ctx& c, const YAML::Node& n, const std::string& key, const char* type) {
  if (!n.IsScalar()) fail(c, n.Mark(), "'" + key + "' must be " + type);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(c, n.Mark(), "'" + key + "' must be " + type + ", got '" + n.Scalar() + "'");
  }
}

double real(const Ctx& c, const YAML::Node& n, const std::string& key) { return scalar<double>(c, n, key, "a number"); }
int integer(const Ctx& c, const YAML::Node& n, const std::string& key) { return scalar<int>(c, n, key, "an integer"); }
std::string text(const Ctx& c, const YAML::Node& n, const std::string& key) {
  return scalar<std::string>(c, n, key, "a string");
}

void positive(const Ctx& c, const YAML::Node& n, const std::string& key, double v) {
  if (!(v > 0.0)) fail(c, n.Mark(), "'" + key + "' must be positive");
}

PotentialSpec::Kind potential_kind(const Ctx& c, const YAML::Node& n) {
  const auto s = text(c, n, "kind");
  if (s == "zero") return PotentialSpec::Kind::kZero;
  if (s == "cosine") return PotentialSpec::Kind::kCosine;
  if (s == "cosine_series") return PotentialSpec::Kind::kCosineSeries;
  if (s == "coefficients") return PotentialSpec::Kind::kCoefficients;
  fail(c, n.Mark(), "unknown potential kind '" + s + "' (zero, cosine, cosine_series, coefficients)");
}

void parse_problem(const Ctx& c, const YAML::Node& n, ProblemSection& p) {
  check_keys(c, n, {"d", "a0", "mu", "nonlinearity", "potential"}, "problem");
  if (n["d"]) {
    p.d = integer(c, n["d"], "d");
    if (p.d < 1 || p.d > 3) fail(c, n["d"].Mark(), "'d' must be 1, 2 or 3");
  }
  if (n["a0"]) {
    p.a0 = real(c, n["a0"], "a0");
    positive(c, n["a0"], "a0", p.a0);
  }
  if (n["mu"]) {
    p.mu = real(c, n["mu"], "mu");
    if (!(p.mu >= 0.0)) fail(c, n["mu"].Mark(), "'mu' must be nonnegative");
  }
  if (const auto nl = n["nonlinearity"]) {
    check_keys(c, nl, {"power"}, "problem.nonlinearity");
    if (nl["power"]) {
      p.power = real(c, nl["power"], "power");
      if (!(p.power > 1.0 && p.power < 3.0)) fail(c, nl["power"].Mark(), "'power' must lie in (1, 3)");
    }
  }
  if (const auto v = n["potential"]) {
    check_keys(c, v, {"kind", "amplitude", "ratio", "shift", "cutoff", "file"}, "problem.potential");
    if (v["kind"]) p.potential.kind = potential_kind(c, v["kind"]);
    if (v["amplitude"]) p.potential.amplitude = real(c, v["amplitude"], "amplitude");
    if (v["ratio"]) {
      p.potential.ratio = real(c, v["ratio"], "ratio");
      if (!(std::abs(p.potential.ratio) < 1.0)) fail(c, v["ratio"].Mark(), "'ratio' must satisfy |r| < 1");
    }
    if (v["shift"]) p.potential.shift = real(c, v["shift"], "shift");
    if (v["cutoff"]) {
      p.potential.cutoff = integer(c, v["cutoff"], "cutoff");
      if (p.potential.cutoff < 1) fail(c, v["cutoff"].Mark(), "'cutoff' must be >= 1");
    }
    if (v["file"]) {
      const auto f = std::filesystem::path(text(c, v["file"], "file"));
      p.potential.source = (f.is_absolute() ? f : c.base / f).string();
      if (!std::filesystem::exists(p.potential.source)) {
        fail(c, v["file"].Mark(), "coefficient file '" + p.potential.source + "' does not exist");
      }
    }
    if (p.potential.kind == PotentialSpec::Kind::kCoefficients && p.potential.source.empty()) {
      fail(c, v.Mark(), "potential kind 'coefficients' needs a 'file'");
    }
  }
}

SolverConfig::Method solver_method(const Ctx& c, const YAML::Node& n) {
  const auto s = text(c, n, "method");
  if (s == "scf") return SolverConfig::Method::kScf;
  if (s == "gradient_flow") return SolverConfig::Method::kGradientFlow;
  fail(c, n.Mark(), "unknown solver method '" + s + "' (scf, gradient_flow)");
}

void parse_solver(const Ctx& c, const YAML::Node& n, SolverConfig& s, LinSolveConfig& lin) {
  check_keys(c, n, {"method", "tol", "max_outer", "damping", "flow_step", "inner_tol", "linear_tol", "linear_max_iter"},
             "solver");
  if (n["method"]) s.method = solver_method(c, n["method"]);
  if (n["tol"]) {
    s.tol_residual = real(c, n["tol"], "tol");
    positive(c, n["tol"], "tol", s.tol_residual);
  }
  if (n["max_outer"]) {
    s.max_outer = integer(c, n["max_outer"], "max_outer");
    if (s.max_outer < 1) fail(c, n["max_outer"].Mark(), "'max_outer' must be >= 1");
  }
  if (n["damping"]) {
    s.damping = real(c, n["damping"], "damping");
    if (!(s.damping > 0.0 && s.damping <= 1.0)) fail(c, n["damping"].Mark(), "'damping' must lie in (0, 1]");
  }
  if (n["flow_step"]) {
    s.flow_step = real(c, n["flow_step"], "flow_step");
    positive(c, n["flow_step"], "flow_step", s.flow_step);
  }
  if (n["inner_tol"]) {
    s.inner_tol = real(c, n["inner_tol"], "inner_tol");
    positive(c, n["inner_tol"], "inner_tol", s.inner_tol);
  }
  if (n["linear_tol"]) {
    lin.tol = real(c, n["linear_tol"], "linear_tol");
    positive(c, n["linear_tol"], "linear_tol", lin.tol);
  }
  if (n["linear_max_iter"]) {
    lin.max_iter = integer(c, n["linear_max_iter"], "linear_max_iter");
    if (lin.max_iter < 1) fail(c, n["linear_max_iter"].Mark(), "'linear_max_iter' must be >= 1");
  }
}

Scheme scheme(const Ctx& c, const YAML::Node& n) {
  try {
    return scheme_from_string(text(c, n, "schemes"));
  } catch (const Error& e) {
    fail(c, n.Mark(), e.what());
  }
}

std::vector<int> int_list(const Ctx& c, const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() == 0) fail(c, n.Mark(), "'" + key + "' must be a non-empty list of integers");
  std::vector<int> out;
  for (const auto& item : n) {
    out.push_back(integer(c, item, key));
    if (out.back() < 1) fail(c, item.Mark(), "entries of '" + key + "' must be positive");
  }
  return out;
}

RunConfig parse_node(const YAML::Node& root, const Ctx& c) {
  RunConfig cfg;
  cfg.source = c.source;
  if (root.IsNull()) return cfg;
  check_keys(c, root,
             {"problem", "basis", "solver", "schemes", "normalization", "estimator", "study", "output", "seed"},
             "the top level");
  if (root["problem"]) parse_problem(c, root["problem"], cfg.problem);
  if (const auto b = root["basis"]) {
    check_keys(c, b, {"M", "fine_factor"}, "basis");
    if (b["M"]) {
      cfg.cutoff = integer(c, b["M"], "M");
      if (cfg.cutoff < 0) fail(c, b["M"].Mark(), "'M' must be nonnegative");
    }
    if (b["fine_factor"]) {
      cfg.fine_factor = integer(c, b["fine_factor"], "fine_factor");
      if (cfg.fine_factor < 2) fail(c, b["fine_factor"].Mark(), "'fine_factor' must be at least 2");
    }
  }
  if (root["solver"]) parse_solver(c, root["solver"], cfg.solver, cfg.lin);
  if (const auto s = root["schemes"]) {
    cfg.schemes.clear();
    if (s.IsScalar()) {
      cfg.schemes.push_back(scheme(c, s));
    } else if (s.IsSequence() && s.size() > 0) {
      for (const auto& item : s) cfg.schemes.push_back(scheme(c, item));
    } else {
      fail(c, s.Mark(), "'schemes' must be a scheme name or a non-empty list");
    }
  }
  if (const auto n = root["normalization"]) {
    const auto s = text(c, n, "normalization");
    if (s == "affine") {
      cfg.normalization = Normalization::kAffine;
    } else if (s == "radial") {
      cfg.normalization = Normalization::kRadial;
    } else {
      fail(c, n.Mark(), "unknown normalization '" + s + "' (affine, radial)");
    }
  }
  if (const auto e = root["estimator"]) {
    check_keys(c, e, {"certificate", "gap"}, "estimator");
    if (const auto cert = e["certificate"]) {
      const auto s = text(c, cert, "certificate");
      if (s == "auto") {
        cfg.estimator.certificate = EstimatorSection::Certificate::kAuto;
      } else if (s == "true" || s == "on") {
        cfg.estimator.certificate = EstimatorSection::Certificate::kOn;
      } else if (s == "false" || s == "off") {
        cfg.estimator.certificate = EstimatorSection::Certificate::kOff;
      } else {
        fail(c, cert.Mark(), "'certificate' must be auto, true or false");
      }
    }
    if (e["gap"]) cfg.estimator.gap = scalar<bool>(c, e["gap"], "gap", "a boolean");
  }
  if (const auto s = root["study"]) {
    check_keys(c, s, {"M", "M_ref", "threads", "coarse_certificate_M"}, "study");
    if (s["M"]) cfg.study.cutoffs = int_list(c, s["M"], "M");
    if (s["M_ref"]) cfg.study.reference_cutoff = integer(c, s["M_ref"], "M_ref");
    if (s["threads"]) {
      cfg.study.threads = integer(c, s["threads"], "threads");
      if (cfg.study.threads < 1) fail(c, s["threads"].Mark(), "'threads' must be >= 1");
    }
    if (s["coarse_certificate_M"]) cfg.study.coarse_certificate_cutoff = integer(c, s["coarse_certificate_M"], "coarse_certificate_M");
    const int mmax = *std::max_element(cfg.study.cutoffs.begin(), cfg.study.cutoffs.end());
    if (cfg.study.reference_cutoff < 4 * mmax) {
      fail(c, s["M_ref"] ? s["M_ref"].Mark() : s.Mark(),
           "'M_ref' must be at least 4 x the largest study cutoff (" + std::to_string(4 * mmax) + ")");
    }
  }
  if (root["output"]) cfg.output = text(c, root["output"], "output");
  if (root["seed"]) {
    const auto n = root["seed"];
    cfg.seed = scalar<std::uint64_t>(c, n, "seed", "a nonnegative integer");
  }
  cfg.solver.seed = cfg.seed;
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  Ctx c{source, std::filesystem::current_path()};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(c, e.mark, e.msg);
  }
  return parse_node(root, c);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": error: cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  Ctx c{path.string(), path.has_parent_path() ? path.parent_path() : std::filesystem::current_path()};
  YAML::Node root;
  try {
    root = YAML::Load(ss.str());
  } catch (const YAML::ParserException& e) {
    fail(c, e.mark, e.msg);
  }
  return parse_node(root, c);
}

void validate(const RunConfig& cfg) {
  const std::string where = cfg.source + ": error: ";
  if (cfg.cutoff < 0) throw ConfigError(where + "basis cutoff M must be nonnegative");
  if (cfg.fine_factor < 2) throw ConfigError(where + "fine factor must be at least 2");
  if (cfg.schemes.empty()) throw ConfigError(where + "at least one scheme is required");
  if (cfg.study.cutoffs.empty()) throw ConfigError(where + "study needs at least one cutoff");
  const int mmax = *std::max_element(cfg.study.cutoffs.begin(), cfg.study.cutoffs.end());
  if (cfg.study.reference_cutoff < 4 * mmax) {
    throw ConfigError(where + "study M_ref must be at least 4 x the largest study cutoff");
  }
  if (cfg.study.reference_cutoff < cfg.fine_factor * mmax) {
    throw ConfigError(where + "study M_ref must contain the fine spaces (fine_factor x M)");
  }
  try {
    cfg.solver.validate();
    cfg.lin.validate();
    make_basis(cfg.problem.d, cfg.cutoff * cfg.fine_factor);
  } catch (const Error& e) {
    throw ConfigError(where + e.what());
  }
}

Problem build_problem(const RunConfig& cfg) {
  const auto& ps = cfg.problem;
  PowerNonlinearity nl{ps.power};
  if (ps.potential.kind == PotentialSpec::Kind::kCoefficients) {
    SpectralField v;
    try {
      v = io::field_from_json(io::read_json(ps.potential.source));
    } catch (const Error& e) {
      throw ConfigError(ps.potential.source + ": error: " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(ps.potential.source + ": error: " + e.what());
    }
    if (v.spec().dim() != ps.d) throw ConfigError(ps.potential.source + ": error: potential dimension differs from d");
    if (v.symmetry_defect() > 1e-12) {
      throw ConfigError(ps.potential.source + ": error: potential coefficients are not conjugate-symmetric");
    }
    return make_problem_from_field(ps.a0, ps.mu, nl, std::move(v), ps.potential.source);
  }
  try {
    return make_problem(ps.d, ps.a0, ps.mu, nl, ps.potential);
  } catch (const Error& e) {
    throw ConfigError(cfg.source + ": error: " + e.what());
  }
}

io::Json config_to_json(const RunConfig& cfg) {
  io::Json schemes = io::Json::array();
  for (Scheme s : cfg.schemes) schemes.push_back(to_string(s));
  const char* cert = cfg.estimator.certificate == EstimatorSection::Certificate::kAuto ? "auto"
                     : cfg.estimator.certificate == EstimatorSection::Certificate::kOn ? "true"
                                                                                      : "false";
  return io::Json{
      {"problem",
       io::Json{{"d", cfg.problem.d},
                {"a0", cfg.problem.a0},
                {"mu", cfg.problem.mu},
                {"nonlinearity", io::Json{{"power", cfg.problem.power}}},
                {"potential",
                 io::Json{{"kind", to_string(cfg.problem.potential.kind)},
                          {"amplitude", cfg.problem.potential.amplitude},
                          {"ratio", cfg.problem.potential.ratio},
                          {"shift", cfg.problem.potential.shift},
                          {"cutoff", cfg.problem.potential.cutoff},
                          {"file", cfg.problem.potential.source}}}}},
      {"basis", io::Json{{"M", cfg.cutoff}, {"fine_factor", cfg.fine_factor}}},
      {"solver",
       io::Json{{"method", to_string(cfg.solver.method)},
                {"tol", cfg.solver.tol_residual},
                {"max_outer", cfg.solver.max_outer},
                {"damping", cfg.solver.damping},
                {"flow_step", cfg.solver.flow_step},
                {"inner_tol", cfg.solver.inner_tol},
                {"linear_tol", cfg.lin.tol},
                {"linear_max_iter", cfg.lin.max_iter}}},
      {"schemes", schemes},
      {"normalization", to_string(cfg.normalization)},
      {"estimator", io::Json{{"certificate", cert}, {"gap", cfg.estimator.gap}}},
      {"study",
       io::Json{{"M", cfg.study.cutoffs},
                {"M_ref", cfg.study.reference_cutoff},
                {"threads", cfg.study.threads},
                {"coarse_certificate_M", cfg.study.coarse_certificate_cutoff}}},
      {"output", cfg.output.string()},
      {"seed", cfg.seed}};
}

}  // namespace gpspec::cli
