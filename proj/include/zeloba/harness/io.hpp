#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "zeloba/errors.hpp"
#include "zeloba/oracle.hpp"
#include "zeloba/solver.hpp"
#include "zeloba/types.hpp"

namespace zeloba::harness {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Writes `contents` to a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

/// Exact objective and max-constraint at a trace point, as written to the trace CSV.
struct TruthAt {
  double objective = 0.0;
  double max_constraint = 0.0;
};

inline TruthAt truth_at(const ProblemSpec& problem, const Vector& x) {
  const auto v = problem.values(x);
  double fc = v[1];
  for (std::size_t i = 2; i < v.size(); ++i) fc = std::max(fc, v[i]);
  return {v[0], fc};
}

/// Columns: k, x_1..x_d, alpha_hat, g_norm, gamma_k, weight, true_objective, true_max_constraint.
inline std::string trace_csv(const ProblemSpec& problem, const RunResult& result) {
  std::string out = "k";
  for (std::size_t c = 1; c <= problem.dim; ++c) out += ",x_" + std::to_string(c);
  out += ",alpha_hat,g_norm,gamma_k,weight,true_objective,true_max_constraint\n";
  for (const auto& rec : result.trace) {
    const auto truth = truth_at(problem, rec.x);
    out += std::to_string(rec.k);
    for (Eigen::Index c = 0; c < rec.x.size(); ++c) out += "," + format_double(rec.x[c]);
    out += "," + format_double(rec.alpha_hat) + "," + format_double(rec.g_norm) + "," +
           format_double(rec.gamma) + "," + format_double(rec.weight) + "," +
           format_double(truth.objective) + "," + format_double(truth.max_constraint) + "\n";
  }
  return out;
}

/// Columns: k, tag, p_1..p_d, true_fc, violated.
inline std::string audit_csv(std::size_t dim, const SafetyAudit& audit) {
  std::string out = "k,tag";
  for (std::size_t c = 1; c <= dim; ++c) out += ",p_" + std::to_string(c);
  out += ",true_fc,violated\n";
  for (const auto& e : audit.entries) {
    out += std::to_string(e.k);
    out += e.tag == AuditTag::kBase ? ",base" : ",perturbed";
    for (Eigen::Index c = 0; c < e.point.size(); ++c) out += "," + format_double(e.point[c]);
    out += "," + format_double(e.true_fc) + (e.violated() ? ",1\n" : ",0\n");
  }
  return out;
}

}  // namespace zeloba::harness
