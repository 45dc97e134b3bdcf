#pragma once

#include "fitzcert/scenario.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fitzcert {

struct RunOptions {
  unsigned jobs = 1;
  std::optional<double> tol; // overrides both abs and rel certificate tolerance
};

/// Aggregate over the records sharing (kind, T, B, p, lambda).
struct SummaryRow {
  CertificateKind kind;
  std::string t_name;
  std::string b_name; // empty when the kind has no B
  double p;
  std::optional<double> lambda;
  std::size_t count = 0;
  std::size_t passes = 0;
  std::size_t fails = 0;
  double min_slack;
  double max_residual = 0.0;
  long long iterations = 0;
};

struct Report {
  std::string command; // "verify" or "sweep"
  std::string scenario;
  std::vector<CertificateRecord> records;
  std::vector<SummaryRow> summary;
  double wall_time_s = 0.0;

  bool all_pass() const;
};

/// Every requested certificate over the scenario's point and lambda grid.
/// Records come out in scenario order: kind, then lambda, then point index.
Report run_verify(const Scenario& sc, const RunOptions& opts = {});

/// Cross product of `ps` x `lambdas` applied to the scenario text; each p
/// re-parses the scenario with space.p replaced, so p defaults follow the sweep.
/// An empty lambda list yields a report with zero cells.
Report run_sweep(std::string_view scenario_text, const std::vector<double>& lambdas, const std::vector<double>& ps,
                 const RunOptions& opts = {});

/// Group records in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<CertificateRecord>& records);

} // namespace fitzcert
