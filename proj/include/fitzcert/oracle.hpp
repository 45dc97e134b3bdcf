#pragma once

#include "fitzcert/runner.hpp"

#include <string>
#include <vector>

namespace fitzcert {

/// Outcome of one brute-force cross-validation family.
struct OracleCheck {
  std::string name;
  std::size_t count = 0;  // points compared
  double max_error = 0.0; // worst violation beyond the allowed bound (0 when within it)
  double max_diff = 0.0;  // worst raw |closed form - brute force|
  double tolerance = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string detail; // worst case, or why the check was skipped
};

struct OracleReport {
  std::string scenario;
  std::vector<OracleCheck> checks;
  double wall_time_s = 0.0;

  bool all_pass() const;
};

/// Grid-based cross-validation of the closed forms used by the certificates:
/// fitz_exact against a grid sup, conjugates against brute-force maximization,
/// subgradients against finite differences, prox maps against 1-D scans and
/// graph distances against grid minimization. Checks that do not apply to the
/// scenario's operator (or its dimension) are reported as skipped.
OracleReport run_oracle(const Scenario& sc);

/// Maximize h over the box [lo, hi] by repeated grid refinement (k points per
/// axis, zooming to +-2 cells around the incumbent). Returns (argmax, max).
template <typename H>
std::pair<Vector, double> zoom_maximize(H&& h, const Vector& lo, const Vector& hi, int k = 41, double stop = 1e-11);

} // namespace fitzcert

#include "fitzcert/detail/zoom.hpp"
