#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subgrad/flow.hpp"
#include "subgrad/instances.hpp"
#include "subgrad/landscape.hpp"
#include "subgrad/objective.hpp"
#include "subgrad/rip.hpp"
#include "subgrad/run.hpp"

namespace subgrad {

/// All emitted reals use 17 significant digits so round-tripping is exact and
/// outputs are byte-stable.
inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_real_array(const Vec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_real(v[i]);
  }
  out += "]";
  return out;
}

/// Write with a temp-file rename so partially written artifacts never appear
/// under the final name.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV records

inline std::string run_record_csv(const RunRecord& rec) {
  std::string out = "k,alpha,f,x_norm,step_norm,tie_dist\n";
  for (std::size_t k = 0; k < rec.steps(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += fmt_real(rec.alpha[k]);
    out += ',';
    out += fmt_real(rec.f[k]);
    out += ',';
    out += fmt_real(rec.x_norm[k]);
    out += ',';
    out += fmt_real(rec.step_norm[k]);
    out += ',';
    out += fmt_real(rec.tie_dist[k]);
    out += '\n';
  }
  return out;
}

inline std::string flow_record_csv(const FlowRecord& rec) {
  std::string out = "t,f,x_norm,length,energy,monitor1,monitor2\n";
  for (std::size_t j = 0; j < rec.size(); ++j) {
    out += fmt_real(rec.t[j]);
    out += ',';
    out += fmt_real(rec.f[j]);
    out += ',';
    out += fmt_real(rec.x_norm[j]);
    out += ',';
    out += fmt_real(rec.length[j]);
    out += ',';
    out += fmt_real(rec.energy[j]);
    out += ',';
    out += fmt_real(rec.monitor1[j]);
    out += ',';
    out += fmt_real(rec.monitor2[j]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON reports (hand-assembled so the real formatting stays at 17 digits)

inline std::string convergence_report_json(const ConvergenceReport& rep) {
  std::string out = "{\n";
  out += "  \"status\": \"" + std::string(to_string(rep.status)) + "\",\n";
  out += "  \"trailing_displacement\": " + fmt_real(rep.trailing_displacement) + ",\n";
  out += "  \"limit_estimate\": " + fmt_real_array(rep.limit_estimate) + "\n";
  out += "}\n";
  return out;
}

inline std::string rip_certificate_json(const RipCertificate& cert) {
  return "{\n  \"c\": " + fmt_real(cert.c) + ",\n  \"method\": \"" + cert.method + "\"\n}\n";
}

inline std::string landscape_report_json(const Vec& u, const Vec& x, double tau) {
  const CriticalClass cls = classify_critical(u, x, tau);
  double dp2 = 0.0, dm2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dp2 += (x[i] - u[i]) * (x[i] - u[i]);
    dm2 += (x[i] + u[i]) * (x[i] + u[i]);
  }
  std::string out = "{\n";
  out += "  \"class\": \"" + std::string(to_string(cls.tag)) + "\",\n";
  out += "  \"distance_to_A\": " + fmt_real(project_to_A(u, x).second) + ",\n";
  out += "  \"distance_to_plus_u\": " + fmt_real(std::sqrt(dp2)) + ",\n";
  out += "  \"distance_to_minus_u\": " + fmt_real(std::sqrt(dm2)) + ",\n";
  out += "  \"wedge_member\": " + std::string(u.size() >= 2 && wedge_membership(x) ? "true" : "false") + "\n";
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Instance serialization: {kind, dims, entries, b, r, seed}, reals at 17
// significant digits. entries is a list of row-major arrays: the single M for
// rpca, the a_i for phase, the A_i for sensing, u for symrankone. Fields that
// do not apply to a kind are omitted.

namespace detail {
inline std::string entries_block(const std::vector<const Vec*>& rows) {
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ",";
    out += fmt_real_array(*rows[i]);
  }
  out += "]";
  return out;
}
}  // namespace detail

inline std::string instance_to_json(const RpcaInstance& inst) {
  std::string out = "{\n  \"kind\": \"rpca\",\n";
  out += "  \"dims\": [" + std::to_string(inst.m()) + "," + std::to_string(inst.n()) + "],\n";
  out += "  \"entries\": " + detail::entries_block({&inst.M.a}) + ",\n";
  out += "  \"r\": " + std::to_string(inst.r);
  if (inst.provenance) out += ",\n  \"seed\": " + std::to_string(inst.provenance->seed);
  out += "\n}\n";
  return out;
}

inline std::string instance_to_json(const PhaseInstance& inst) {
  std::string out = "{\n  \"kind\": \"phase\",\n";
  out += "  \"dims\": [" + std::to_string(inst.n()) + "," + std::to_string(inst.count()) + "],\n";
  std::vector<const Vec*> rows;
  for (const Vec& ai : inst.a) rows.push_back(&ai);
  out += "  \"entries\": " + detail::entries_block(rows) + ",\n";
  out += "  \"b\": " + fmt_real_array(inst.b);
  if (inst.provenance) out += ",\n  \"seed\": " + std::to_string(inst.provenance->seed);
  out += "\n}\n";
  return out;
}

inline std::string instance_to_json(const SensingInstance& inst) {
  std::string out = "{\n  \"kind\": \"sensing\",\n";
  out += "  \"dims\": [" + std::to_string(inst.m()) + "," + std::to_string(inst.n()) + "," +
         std::to_string(inst.count()) + "],\n";
  std::vector<const Vec*> rows;
  for (const DenseMatrix& Ai : inst.A) rows.push_back(&Ai.a);
  out += "  \"entries\": " + detail::entries_block(rows) + ",\n";
  out += "  \"b\": " + fmt_real_array(inst.b) + ",\n";
  out += "  \"r\": " + std::to_string(inst.r);
  if (inst.provenance) out += ",\n  \"seed\": " + std::to_string(inst.provenance->seed);
  out += "\n}\n";
  return out;
}

inline std::string instance_to_json(const SymRankOne& sym) {
  std::string out = "{\n  \"kind\": \"symrankone\",\n";
  out += "  \"dims\": [" + std::to_string(sym.u.size()) + "],\n";
  out += "  \"entries\": " + detail::entries_block({&sym.u}) + "\n}\n";
  return out;
}

inline std::string objective_to_json(const Objective& obj) {
  if (obj.is_rpca()) return instance_to_json(obj.rpca());
  if (obj.is_phase()) return instance_to_json(obj.phase());
  if (obj.is_sensing()) return instance_to_json(obj.sensing());
  return instance_to_json(obj.sym());
}

// ---------------------------------------------------------------------------
// Instance parsing (strict: unknown keys rejected)

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ParameterError(where + ": unknown key '" + it.key() + "'");
  }
}

inline Vec json_real_array(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw ParameterError(where + ": expected an array");
  Vec out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ParameterError(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline Objective objective_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("instance: expected a JSON object");
  reject_unknown_keys(j, {"kind", "dims", "entries", "b", "r", "seed"}, "instance");
  const std::string kind = j.at("kind").get<std::string>();
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  const auto& entries = j.at("entries");
  if (!entries.is_array()) throw ParameterError("instance: entries must be an array of arrays");

  if (kind == "rpca") {
    if (dims.size() != 2) throw ParameterError("instance: rpca dims must be [m,n]");
    if (entries.size() != 1) throw ParameterError("instance: rpca expects a single entries array");
    RpcaInstance inst;
    inst.M = DenseMatrix(dims[0], dims[1], json_real_array(entries[0], "instance.entries"));
    inst.r = j.at("r").get<std::size_t>();
    if (inst.r < 1 || inst.r > std::min(dims[0], dims[1])) throw ParameterError("instance: invalid rank");
    return Objective(std::move(inst));
  }
  if (kind == "phase") {
    if (dims.size() != 2) throw ParameterError("instance: phase dims must be [n,N]");
    if (entries.size() != dims[1]) throw ParameterError("instance: phase expects N entry arrays");
    PhaseInstance inst;
    for (const auto& row : entries) {
      inst.a.push_back(json_real_array(row, "instance.entries"));
      if (inst.a.back().size() != dims[0]) throw ParameterError("instance: vector length mismatch");
    }
    inst.b = json_real_array(j.at("b"), "instance.b");
    if (inst.b.size() != dims[1]) throw ParameterError("instance: b length mismatch");
    return Objective(std::move(inst));
  }
  if (kind == "sensing") {
    if (dims.size() != 3) throw ParameterError("instance: sensing dims must be [m,n,N]");
    if (entries.size() != dims[2]) throw ParameterError("instance: sensing expects N entry arrays");
    SensingInstance inst;
    for (const auto& row : entries)
      inst.A.emplace_back(dims[0], dims[1], json_real_array(row, "instance.entries"));
    inst.b = json_real_array(j.at("b"), "instance.b");
    if (inst.b.size() != dims[2]) throw ParameterError("instance: b length mismatch");
    inst.r = j.at("r").get<std::size_t>();
    if (inst.r < 1 || inst.r > std::min(dims[0], dims[1])) throw ParameterError("instance: invalid rank");
    return Objective(std::move(inst));
  }
  if (kind == "symrankone") {
    if (dims.size() != 1) throw ParameterError("instance: symrankone dims must be [n]");
    if (entries.size() != 1) throw ParameterError("instance: symrankone expects a single entries array");
    SymRankOne sym{json_real_array(entries[0], "instance.entries")};
    if (sym.u.size() != dims[0]) throw ParameterError("instance: u length mismatch");
    return Objective(std::move(sym));
  }
  throw ParameterError("instance: unknown kind '" + kind + "'");
}

}  // namespace subgrad
