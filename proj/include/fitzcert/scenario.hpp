#pragma once

#include "fitzcert/certificate.hpp"
#include "fitzcert/error.hpp"
#include "fitzcert/operator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fitzcert {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Schema violation; `where` is a JSON pointer or "line N" for syntax errors.
class ScenarioError : public ValidationError {
public:
  ScenarioError(std::string where, const std::string& what)
      : ValidationError(where + ": " + what), where_{std::move(where)} {}
  const std::string& where() const { return where_; }

private:
  std::string where_;
};

struct PointSource {
  std::uint64_t seed = 0;
  std::size_t count = 1;
  double lo = -1.0;
  double hi = 1.0;
};

struct SampleSettings {
  Region region;
  int grid_per_dim = 3;
};

struct StrongConvexitySpec {
  FunctionSpec f;
  double m;
};

struct OracleSettings {
  Region region;
  int grid_per_dim = 201;
  std::size_t count = 100;
};

struct Scenario {
  std::string name;
  Space space;
  OperatorSpec T;
  std::optional<OperatorSpec> B;
  PointSource points;
  std::vector<double> lambda_grid;
  std::vector<CertificateKind> kinds;
  CertificateOptions options;
  std::optional<SampleSettings> graph_sample;
  std::optional<StrongConvexitySpec> strong_convexity;
  std::optional<OracleSettings> oracle;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Throws ScenarioError when a requested kind does not apply to the scenario
/// (Hilbert-only kinds at p != 2, gci without B, prop_strmono without f).
void validate_kinds(const Scenario& sc);

/// Point k of the scenario's point source: x from stream 0, v from stream 1.
std::pair<Vector, DualVector> scenario_point(const Scenario& sc, std::size_t k);

/// Pairs (x, y) for strong monotonicity probes: streams 2 and 3.
std::vector<std::pair<Vector, Vector>> scenario_pairs(const Scenario& sc);

} // namespace fitzcert
