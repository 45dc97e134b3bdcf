#include "fitzcert/report.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace fitzcert {

using ordered = nlohmann::ordered_json;

namespace {

ordered num(double x) {
  if (std::isnan(x)) { return "nan"; }
  if (std::isinf(x)) { return x > 0 ? "inf" : "-inf"; }
  return x;
}

ordered opt_num(const std::optional<double>& x) { return x ? num(*x) : ordered(nullptr); }

ordered vec(const Eigen::VectorXd& v) {
  ordered a = ordered::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) { a.push_back(num(v[i])); }
  return a;
}

ordered record_object(const CertificateRecord& r) {
  ordered j;
  j["type"] = "record";
  j["kind"] = std::string(to_string(r.kind));
  j["T"] = r.t_name;
  j["B"] = r.b_name ? ordered(*r.b_name) : ordered(nullptr);
  j["p"] = num(r.p);
  j["lambda"] = opt_num(r.lambda);
  j["x"] = vec(r.x);
  j["v"] = vec(r.v);
  j["rhs"] = num(r.rhs);
  j["gap_est"] = num(r.gap_est);
  j["gap_exact"] = opt_num(r.gap_exact);
  j["slack"] = num(r.slack);
  j["tol"] = num(r.tol);
  j["pass"] = r.pass;
  j["residual"] = num(r.residual);
  j["optimality_gap"] = opt_num(r.optimality_gap);
  j["method"] = r.method ? ordered(*r.method) : ordered(nullptr);
  j["iterations"] = r.iterations;
  if (r.distance_sq) {
    j["distance_sq"] = num(*r.distance_sq);
    j["quarter_rhs"] = opt_num(r.quarter_rhs);
    j["quarter_slack"] = opt_num(r.quarter_slack);
  }
  if (r.error) { j["error"] = *r.error; }
  return j;
}

ordered row_object(const SummaryRow& s) {
  ordered j;
  j["kind"] = std::string(to_string(s.kind));
  j["T"] = s.t_name;
  j["B"] = s.b_name;
  j["p"] = num(s.p);
  j["lambda"] = opt_num(s.lambda);
  j["count"] = s.count;
  j["min_slack"] = num(s.min_slack);
  j["passes"] = s.passes;
  j["fails"] = s.fails;
  j["max_residual"] = num(s.max_residual);
  j["iterations"] = s.iterations;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) { return s; }
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') { out += '"'; }
    out += c;
  }
  return out + "\"";
}

std::string csv_num(double x) {
  if (std::isnan(x)) { return "nan"; }
  if (std::isinf(x)) { return x > 0 ? "inf" : "-inf"; }
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

} // namespace

std::string record_json(const CertificateRecord& r) { return record_object(r).dump(); }

void write_jsonl(std::ostream& out, const Report& report) {
  ordered header;
  header["type"] = "header";
  header["schema_version"] = kReportSchemaVersion;
  header["command"] = report.command;
  header["scenario"] = report.scenario;
  out << header.dump() << '\n';
  for (const auto& r : report.records) { out << record_json(r) << '\n'; }
  ordered summary;
  summary["type"] = "summary";
  summary["records"] = report.records.size();
  summary["all_pass"] = report.all_pass();
  ordered cells = ordered::array();
  for (const auto& row : report.summary) { cells.push_back(row_object(row)); }
  summary["cells"] = std::move(cells);
  summary["wall_time_s"] = report.wall_time_s;
  out << summary.dump() << '\n';
}

void write_csv(std::ostream& out, const Report& report) {
  out << "kind,T,B,p,lambda,count,min_slack,passes,fails\n";
  for (const auto& s : report.summary) {
    out << to_string(s.kind) << ',' << csv_field(s.t_name) << ',' << csv_field(s.b_name) << ',' << csv_num(s.p) << ','
        << (s.lambda ? csv_num(*s.lambda) : std::string{}) << ',' << s.count << ',' << csv_num(s.min_slack) << ','
        << s.passes << ',' << s.fails << '\n';
  }
}

void write_oracle_jsonl(std::ostream& out, const OracleReport& report) {
  ordered header;
  header["type"] = "header";
  header["schema_version"] = kReportSchemaVersion;
  header["command"] = "oracle";
  header["scenario"] = report.scenario;
  out << header.dump() << '\n';
  for (const auto& c : report.checks) {
    ordered j;
    j["type"] = "oracle";
    j["check"] = c.name;
    j["count"] = c.count;
    j["max_error"] = num(c.max_error);
    j["max_diff"] = num(c.max_diff);
    j["tolerance"] = num(c.tolerance);
    j["pass"] = c.pass;
    j["skipped"] = c.skipped;
    j["detail"] = c.detail;
    out << j.dump() << '\n';
  }
  ordered summary;
  summary["type"] = "summary";
  summary["all_pass"] = report.all_pass();
  summary["wall_time_s"] = report.wall_time_s;
  out << summary.dump() << '\n';
}

} // namespace fitzcert
