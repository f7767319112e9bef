#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gpspec/basis.hpp"
#include "gpspec/corrector.hpp"
#include "gpspec/error.hpp"
#include "gpspec/estimator.hpp"
#include "gpspec/field.hpp"
#include "gpspec/model.hpp"

namespace gpspec::io {

using Json = nlohmann::ordered_json;

/// Finite doubles as numbers, the rest as "nan" / "inf" / "-inf".
inline Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw Error(ErrorCode::kIo, "expected a number, got '" + s + "'");
}

/// {d, M, modes: [[k..., re, im], ...]} in basis enumeration order.
inline Json field_to_json(const SpectralField& v) {
  const auto& b = v.spec();
  Json modes = Json::array();
  for (std::size_t i = 0; i < b.size(); ++i) {
    Json row = Json::array();
    for (int a = 0; a < b.dim(); ++a) row.push_back(b.mode(i)[static_cast<std::size_t>(a)]);
    row.push_back(v[i].real());
    row.push_back(v[i].imag());
    modes.push_back(std::move(row));
  }
  return Json{{"d", b.dim()}, {"M", b.cutoff()}, {"modes", std::move(modes)}};
}

/// Inverse of field_to_json; modes may come in any order, missing ones are zero.
inline SpectralField field_from_json(const Json& j) {
  const int d = j.at("d").get<int>();
  const int m = j.at("M").get<int>();
  Basis basis = make_basis(d, m);
  SpectralField v(basis);
  for (const auto& row : j.at("modes")) {
    if (row.size() != static_cast<std::size_t>(d) + 2) throw Error(ErrorCode::kIo, "malformed mode row");
    WaveVector k{0, 0, 0};
    for (int a = 0; a < d; ++a) k[static_cast<std::size_t>(a)] = row[static_cast<std::size_t>(a)].get<int>();
    const int idx = basis->index_of(k);
    if (idx < 0) throw Error(ErrorCode::kIo, "mode outside the cutoff ball in field record");
    v[static_cast<std::size_t>(idx)] = Complex(row[static_cast<std::size_t>(d)].get<double>(),
                                                row[static_cast<std::size_t>(d) + 1].get<double>());
  }
  return v;
}

inline Json ground_state_to_json(const GroundState& gs) {
  return Json{{"d", gs.basis->dim()},
              {"M", gs.basis->cutoff()},
              {"modes", gs.basis->size()},
              {"lambda", number(gs.lambda)},
              {"energy", number(gs.energy)},
              {"residual_dual_norm", number(gs.residual_dual_norm)},
              {"residual_cutoff", gs.residual_cutoff},
              {"lambda2", number(gs.lambda2)},
              {"iterations", gs.iterations},
              {"converged", gs.converged}};
}

inline GroundState ground_state_from_json(const Json& summary, const Json& field) {
  GroundState gs;
  gs.u = field_from_json(field);
  gs.basis = gs.u.basis();
  gs.lambda = to_double(summary.at("lambda"));
  gs.energy = to_double(summary.at("energy"));
  gs.residual_dual_norm = to_double(summary.at("residual_dual_norm"));
  gs.residual_cutoff = summary.at("residual_cutoff").get<int>();
  gs.lambda2 = to_double(summary.at("lambda2"));
  gs.iterations = summary.at("iterations").get<int>();
  gs.converged = summary.at("converged").get<bool>();
  return gs;
}

inline Json correction_to_json(const Correction& c) {
  return Json{{"scheme", to_string(c.scheme)},
              {"fine_M", c.fine->cutoff()},
              {"alpha_star", number(c.alpha_star)},
              {"beta_star", number(c.beta_star)},
              {"w_hat_l2", number(l2_norm(c.w_hat))},
              {"w_hat_h1", number(h1_norm(c.w_hat))},
              {"lambda_hat", number(c.lambda_hat)},
              {"energy_hat", number(c.energy_hat)},
              {"a_ww", number(c.a_ww)},
              {"linsolve_iterations", c.linsolve_iterations},
              {"linsolve_residual", number(c.linsolve_residual)},
              {"regularized", c.regularized},
              {"smallest_ritz", number(c.smallest_ritz)}};
}

inline Json estimate_to_json(const EstimateReport& r) {
  return Json{{"fine_M", r.fine_cutoff},
              {"residual_dual", number(r.residual_dual)},
              {"energy_upper", number(r.energy_upper)},
              {"energy_lower", number(r.energy_lower)},
              {"energy_best", number(r.energy_best)},
              {"a_ww", number(r.a_ww)},
              {"lambda1", number(r.lambda1)},
              {"lambda2", number(r.lambda2)},
              {"gap", number(r.gap)},
              {"certificate",
               Json{{"supported", r.certificate_supported},
                    {"kind", "discrete-certified"},
                    {"gamma", number(r.gamma)},
                    {"eps", number(r.eps)},
                    {"nu", number(r.nu)},
                    {"u_sup_bound", number(r.u_sup)},
                    {"L_of_2eps", number(r.L_of_2eps)},
                    {"validity_alpha", number(r.validity_alpha)},
                    {"certified", r.certified},
                    {"error_bound_h1", number(r.error_bound_h1)},
                    {"error_bound_residual", number(r.error_bound_residual)}}}};
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

/// Write to a temporary sibling, then rename over the target.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + hex(fnv1a(text + path.string()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

}  // namespace gpspec::io
