#include "oradius/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oradius/error.hpp"

namespace oradius {

using nlohmann::json;

ComplexMatrix parse_matrix_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::out_of_range& e) {
    throw Error(ErrorKind::NonFinite, std::string("matrix JSON: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("matrix JSON: ") + e.what());
  }
  auto bad = [](const std::string& m) { throw Error(ErrorKind::ParseError, "matrix JSON: " + m); };
  if (!doc.is_object()) bad("top level must be an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) bad("missing integer 'n'");
  if (!doc.contains("entries") || !doc["entries"].is_array()) bad("missing array 'entries'");
  const long n = doc["n"].get<long>();
  if (n < 1 || n > 4096) bad("'n' must be positive");
  const json& rows = doc["entries"];
  if (static_cast<long>(rows.size()) != n) bad("expected " + std::to_string(n) + " rows");
  Eigen::MatrixXcd m(n, n);
  for (long i = 0; i < n; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<long>(row.size()) != n)
      bad("row " + std::to_string(i) + " must hold " + std::to_string(n) + " entries");
    for (long j = 0; j < n; ++j) {
      const json& e = row[j];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        bad("entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be [re, im]");
      const double re = e[0].get<double>(), im = e[1].get<double>();
      if (!std::isfinite(re) || !std::isfinite(im))
        throw Error(ErrorKind::NonFinite,
                    "matrix JSON: entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
      m(i, j) = cplx(re, im);
    }
  }
  return ComplexMatrix(std::move(m));
}

std::string matrix_to_json(const ComplexMatrix& m) {
  std::string s = "{\"n\": " + std::to_string(m.dim()) + ", \"entries\": [";
  for (int i = 0; i < m.dim(); ++i) {
    s += i ? ",\n  [" : "\n  [";
    for (int j = 0; j < m.dim(); ++j) {
      if (j) s += ", ";
      s += "[" + format_double(m(i, j).real()) + ", " + format_double(m(i, j).imag()) + "]";
    }
    s += "]";
  }
  s += "\n]}\n";
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::IoError, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot rename onto '" + path + "'");
  }
}

ComplexMatrix read_matrix_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_matrix_json(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + std::string(e.what()).substr(kind_name(e.kind()).size() + 2));
  }
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_header() { return "bound_id,n,alpha,r,phi,lhs,rhs,slack,budget,verdict\n"; }

std::string csv_row(const BoundReport& r) {
  std::string s = r.bound_id + "," + std::to_string(r.n) + ",";
  if (r.alpha) s += format_double(*r.alpha);
  s += ",";
  if (r.r) s += format_double(*r.r);
  s += "," + r.phi + "," + format_double(r.lhs) + "," + format_double(r.rhs) + "," +
       format_double(r.slack) + "," + format_double(r.error_budget) + "," +
       std::string(verdict_name(r.verdict)) + "\n";
  return s;
}

std::string campaign_csv(const CampaignReport& rep) {
  std::string s = csv_header();
  for (const auto& row : rep.rows) s += csv_row(row.report);
  return s;
}

std::string summary_json(const CampaignReport& rep) {
  json doc = json::object();
  for (const auto& [id, a] : rep.bounds) {
    json b;
    b["min_slack"] = a.evaluations ? json(a.min_slack) : json(nullptr);
    b["mean_slack"] = a.evaluations ? json(a.mean_slack()) : json(nullptr);
    b["evaluations"] = a.evaluations;
    b["tight_count"] = a.tight_count;
    b["overflow_count"] = a.overflow_count;
    b["violation_count"] = a.violation_count;
    b["skipped_count"] = a.skipped_count;
    b["error_count"] = a.error_count;
    b["worst_input_ref"] = a.worst_input_ref;
    doc[id] = std::move(b);
  }
  json meta;
  meta["seed"] = rep.master_seed;
  meta["version"] = rep.version;
  meta["violation_count"] = rep.total_violations();
  meta["check_failures"] = rep.check_failures();
  json checks = json::object();
  for (const auto& [name, c] : rep.checks)
    checks[name] = {{"checks", c.checks}, {"failures", c.failures}, {"worst_gap", c.worst_gap},
                    {"worst_ref", c.worst_ref}};
  meta["checks"] = std::move(checks);
  meta["errors"] = rep.errors;
  doc["_meta"] = std::move(meta);
  return doc.dump(2) + "\n";
}

}  // namespace oradius
