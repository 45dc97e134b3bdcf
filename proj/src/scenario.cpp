#include "fitzcert/scenario.hpp"

#include "fitzcert/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fitzcert {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) { return base + "/" + key; }

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ScenarioError(where, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) { fail(where, "expected an object"); }
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(join(where, key), "unknown field");
    }
  }
}

const json& required(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) { fail(join(where, key), "missing required field"); }
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) { fail(where, "expected a number"); }
  const double x = j.get<double>();
  if (!std::isfinite(x)) { fail(where, "must be finite"); }
  return x;
}

double positive(const json& j, const std::string& where) {
  const double x = number(j, where);
  if (!(x > 0.0)) { fail(where, "must be > 0"); }
  return x;
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) { fail(where, "expected an integer"); }
  return j.get<std::int64_t>();
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) { fail(where, "expected a string"); }
  return j.get<std::string>();
}

double exponent(const json& j, const std::string& where) {
  const double p = number(j, where);
  if (!(p > 1.0 && p <= 2.0)) { fail(where, "p must lie in (1, 2]"); }
  return p;
}

Vector vec(const json& j, const std::string& where) {
  if (!j.is_array()) { fail(where, "expected an array of numbers"); }
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = number(j[i], join(where, std::to_string(i)));
  }
  return out;
}

// Scalar broadcast to dim, or an array of exactly dim entries.
Vector vec_or_scalar(const json& j, const std::string& where, std::size_t n) {
  if (j.is_number()) { return Vector::Constant(static_cast<Eigen::Index>(n), number(j, where)); }
  Vector v = vec(j, where);
  if (static_cast<std::size_t>(v.size()) != n) {
    fail(where, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

// Diagonal entries tiled cyclically up to dim.
Vector cyclic_diag(const json& j, const std::string& where, std::size_t n) {
  const Vector d = vec(j, where);
  if (d.size() == 0) { fail(where, "must not be empty"); }
  Vector out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) { out[i] = d[i % d.size()]; }
  return out;
}

Matrix mat(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array() || j.size() != n) { fail(where, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix"); }
  const auto N = static_cast<Eigen::Index>(n);
  Matrix M(N, N);
  for (std::size_t r = 0; r < n; ++r) {
    const std::string row_where = join(where, std::to_string(r));
    const Vector row = vec(j[r], row_where);
    if (static_cast<std::size_t>(row.size()) != n) { fail(row_where, "row has wrong length"); }
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

Matrix matrix_or_diag(const json& j, const std::string& where, std::size_t n) {
  const bool has_m = j.contains("matrix");
  const bool has_d = j.contains("diag");
  if (has_m == has_d) { fail(where, "exactly one of 'matrix' or 'diag' is required"); }
  if (has_m) { return mat(j.at("matrix"), join(where, "matrix"), n); }
  return cyclic_diag(j.at("diag"), join(where, "diag"), n).asDiagonal();
}

template <typename F> auto guarded(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

FunctionSpec parse_function(const json& j, const std::string& where, const Space& s) {
  if (!j.is_object()) { fail(where, "expected an object"); }
  const std::string type = string(required(j, where, "type"), join(where, "type"));
  const std::size_t n = s.dim();
  if (type == "quadratic") {
    only_keys(j, where, {"type", "matrix", "diag", "b"});
    const Matrix Q = matrix_or_diag(j, where, n);
    const Vector b = j.contains("b") ? vec_or_scalar(j.at("b"), join(where, "b"), n)
                                     : Vector::Zero(static_cast<Eigen::Index>(n));
    return guarded(where, [&] { return FunctionSpec::quadratic(Q, b); });
  }
  if (type == "scaled_l1") {
    only_keys(j, where, {"type", "alpha"});
    const double alpha = j.contains("alpha") ? number(j.at("alpha"), join(where, "alpha")) : 1.0;
    return guarded(where, [&] { return FunctionSpec::scaled_l1(alpha); });
  }
  if (type == "box_indicator") {
    only_keys(j, where, {"type", "lo", "hi"});
    const Vector lo = vec_or_scalar(required(j, where, "lo"), join(where, "lo"), n);
    const Vector hi = vec_or_scalar(required(j, where, "hi"), join(where, "hi"), n);
    return guarded(where, [&] { return FunctionSpec::box_indicator(lo, hi); });
  }
  if (type == "half_p_norm_sq") {
    only_keys(j, where, {"type", "p"});
    const double p = j.contains("p") ? exponent(j.at("p"), join(where, "p")) : s.p();
    return guarded(where, [&] { return FunctionSpec::half_p_norm_sq(p); });
  }
  if (type == "strongly_convex_shift") {
    only_keys(j, where, {"type", "base", "m", "p"});
    FunctionSpec base = parse_function(required(j, where, "base"), join(where, "base"), s);
    const double m = positive(required(j, where, "m"), join(where, "m"));
    const double p = j.contains("p") ? exponent(j.at("p"), join(where, "p")) : s.p();
    return guarded(where, [&] { return FunctionSpec::strongly_convex_shift(std::move(base), m, p); });
  }
  fail(join(where, "type"), "unknown function type '" + type + "'");
}

OperatorSpec parse_operator(const json& j, const std::string& where, const Space& s) {
  if (!j.is_object()) { fail(where, "expected an object"); }
  const std::string type = string(required(j, where, "type"), join(where, "type"));
  const std::size_t n = s.dim();
  if (type == "identity") {
    only_keys(j, where, {"type"});
    return OperatorSpec::identity();
  }
  if (type == "zero") {
    only_keys(j, where, {"type"});
    return OperatorSpec::zero();
  }
  if (type == "linear_psd") {
    only_keys(j, where, {"type", "matrix", "diag"});
    const Matrix A = matrix_or_diag(j, where, n);
    return guarded(where, [&] { return OperatorSpec::linear_psd(A); });
  }
  if (type == "subdifferential") {
    only_keys(j, where, {"type", "f"});
    FunctionSpec f = parse_function(required(j, where, "f"), join(where, "f"), s);
    return guarded(where, [&] { return OperatorSpec::subdifferential(std::move(f)); });
  }
  if (type == "normal_cone_box") {
    only_keys(j, where, {"type", "lo", "hi"});
    const Vector lo = vec_or_scalar(required(j, where, "lo"), join(where, "lo"), n);
    const Vector hi = vec_or_scalar(required(j, where, "hi"), join(where, "hi"), n);
    return guarded(where, [&] { return OperatorSpec::normal_cone_box(lo, hi); });
  }
  if (type == "duality_map") {
    only_keys(j, where, {"type", "p"});
    const double p = j.contains("p") ? exponent(j.at("p"), join(where, "p")) : s.p();
    return guarded(where, [&] { return OperatorSpec::duality_map(p); });
  }
  fail(join(where, "type"), "unknown operator type '" + type + "'");
}

// [lo, hi] shorthand (same interval on every axis) or {"lo": ..., "hi": ...}.
Region parse_region(const json& j, const std::string& where, std::size_t n) {
  Region r;
  if (j.is_array()) {
    if (j.size() != 2) { fail(where, "expected [lo, hi]"); }
    r.lo = Vector::Constant(static_cast<Eigen::Index>(n), number(j[0], join(where, "0")));
    r.hi = Vector::Constant(static_cast<Eigen::Index>(n), number(j[1], join(where, "1")));
  } else {
    only_keys(j, where, {"lo", "hi"});
    r.lo = vec_or_scalar(required(j, where, "lo"), join(where, "lo"), n);
    r.hi = vec_or_scalar(required(j, where, "hi"), join(where, "hi"), n);
  }
  if ((r.lo.array() > r.hi.array()).any()) { fail(where, "lo must not exceed hi"); }
  return r;
}

Space parse_space(const json& j, const std::string& where) {
  only_keys(j, where, {"dim", "p"});
  const auto dim = integer(required(j, where, "dim"), join(where, "dim"));
  if (dim < 1 || dim > 64) { fail(join(where, "dim"), "must be between 1 and 64"); }
  const double p = exponent(required(j, where, "p"), join(where, "p"));
  return Space(static_cast<std::size_t>(dim), p);
}

PointSource parse_points(const json& j, const std::string& where) {
  only_keys(j, where, {"seed", "count", "range"});
  PointSource out;
  const auto seed = integer(required(j, where, "seed"), join(where, "seed"));
  if (seed < 0) { fail(join(where, "seed"), "must be >= 0"); }
  out.seed = static_cast<std::uint64_t>(seed);
  const auto count = integer(required(j, where, "count"), join(where, "count"));
  if (count < 1) { fail(join(where, "count"), "must be >= 1"); }
  out.count = static_cast<std::size_t>(count);
  if (j.contains("range")) {
    const auto& r = j.at("range");
    const std::string rw = join(where, "range");
    if (!r.is_array() || r.size() != 2) { fail(rw, "expected [lo, hi]"); }
    out.lo = number(r[0], join(rw, "0"));
    out.hi = number(r[1], join(rw, "1"));
    if (!(out.lo < out.hi)) { fail(rw, "lo must be < hi"); }
  }
  return out;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    fail("line " + std::to_string(line_of(text, at)), "malformed JSON");
  }
  const std::string root;
  only_keys(j, root, {"schema_version", "name", "space", "T", "B", "points", "lambda_grid", "kinds", "tolerances",
                      "cap", "graph_sample", "strong_convexity", "oracle"});

  const auto version = integer(required(j, root, "schema_version"), "/schema_version");
  if (version != kScenarioSchemaVersion) {
    fail("/schema_version", "unsupported schema version " + std::to_string(version));
  }

  Space space = parse_space(required(j, root, "space"), "/space");
  OperatorSpec T = parse_operator(required(j, root, "T"), "/T", space);
  Scenario sc{.name = j.contains("name") ? string(j.at("name"), "/name") : std::string{},
              .space = space,
              .T = std::move(T),
              .B = std::nullopt,
              .points = parse_points(required(j, root, "points"), "/points"),
              .lambda_grid = {},
              .kinds = {},
              .options = {},
              .graph_sample = std::nullopt,
              .strong_convexity = std::nullopt,
              .oracle = std::nullopt};
  if (j.contains("B")) { sc.B = parse_operator(j.at("B"), "/B", space); }

  const json& grid = required(j, root, "lambda_grid");
  if (!grid.is_array() || grid.empty()) { fail("/lambda_grid", "expected a nonempty array"); }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sc.lambda_grid.push_back(positive(grid[i], "/lambda_grid/" + std::to_string(i)));
  }

  const json& kinds = required(j, root, "kinds");
  if (!kinds.is_array() || kinds.empty()) { fail("/kinds", "expected a nonempty array"); }
  std::set<CertificateKind> seen;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const std::string where = "/kinds/" + std::to_string(i);
    const std::string name = string(kinds[i], where);
    const auto k = parse_kind(name);
    if (!k) { fail(where, "unknown certificate kind '" + name + "'"); }
    if (!seen.insert(*k).second) { fail(where, "duplicate kind '" + name + "'"); }
    sc.kinds.push_back(*k);
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    only_keys(t, "/tolerances", {"abs", "rel", "closed_form", "iterative", "max_iterations"});
    if (t.contains("abs")) { sc.options.abs_tol = positive(t.at("abs"), "/tolerances/abs"); }
    if (t.contains("rel")) { sc.options.rel_tol = positive(t.at("rel"), "/tolerances/rel"); }
    if (t.contains("closed_form")) {
      sc.options.solver.closed_form_tol = positive(t.at("closed_form"), "/tolerances/closed_form");
    }
    if (t.contains("iterative")) { sc.options.solver.iterative_tol = positive(t.at("iterative"), "/tolerances/iterative"); }
    if (t.contains("max_iterations")) {
      const auto it = integer(t.at("max_iterations"), "/tolerances/max_iterations");
      if (it < 1) { fail("/tolerances/max_iterations", "must be >= 1"); }
      sc.options.solver.max_iterations = static_cast<int>(std::min<std::int64_t>(it, 100000000));
    }
  }

  if (j.contains("cap")) {
    const auto cap = integer(j.at("cap"), "/cap");
    if (cap < 1) { fail("/cap", "must be >= 1"); }
    sc.options.cap = static_cast<std::size_t>(cap);
  }

  const std::size_t n = space.dim();
  if (j.contains("graph_sample")) {
    const json& g = j.at("graph_sample");
    only_keys(g, "/graph_sample", {"region", "grid_per_dim"});
    SampleSettings gs;
    gs.region = g.contains("region")
                    ? parse_region(g.at("region"), "/graph_sample/region", n)
                    : Region{Vector::Constant(static_cast<Eigen::Index>(n), sc.points.lo),
                             Vector::Constant(static_cast<Eigen::Index>(n), sc.points.hi)};
    if (g.contains("grid_per_dim")) {
      const auto k = integer(g.at("grid_per_dim"), "/graph_sample/grid_per_dim");
      if (k < 2) { fail("/graph_sample/grid_per_dim", "must be >= 2"); }
      if (std::pow(static_cast<double>(k), static_cast<double>(n)) > 2e6) {
        fail("/graph_sample/grid_per_dim", "grid has more than 2e6 points");
      }
      gs.grid_per_dim = static_cast<int>(k);
    }
    sc.graph_sample = gs;
  }

  if (j.contains("strong_convexity")) {
    const json& f = j.at("strong_convexity");
    only_keys(f, "/strong_convexity", {"f", "m"});
    FunctionSpec fn = parse_function(required(f, "/strong_convexity", "f"), "/strong_convexity/f", space);
    const double m = positive(required(f, "/strong_convexity", "m"), "/strong_convexity/m");
    sc.strong_convexity = StrongConvexitySpec{std::move(fn), m};
  }

  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    only_keys(o, "/oracle", {"region", "grid_per_dim", "count"});
    OracleSettings os;
    os.region = o.contains("region") ? parse_region(o.at("region"), "/oracle/region", n)
                                     : Region{Vector::Constant(static_cast<Eigen::Index>(n), -2.0),
                                              Vector::Constant(static_cast<Eigen::Index>(n), 2.0)};
    if (o.contains("grid_per_dim")) {
      const auto k = integer(o.at("grid_per_dim"), "/oracle/grid_per_dim");
      if (k < 3) { fail("/oracle/grid_per_dim", "must be >= 3"); }
      os.grid_per_dim = static_cast<int>(k);
    }
    if (o.contains("count")) {
      const auto c = integer(o.at("count"), "/oracle/count");
      if (c < 1) { fail("/oracle/count", "must be >= 1"); }
      os.count = static_cast<std::size_t>(c);
    }
    sc.oracle = os;
  }

  validate_kinds(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw ScenarioError(path.string(), "cannot open scenario file"); }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void validate_kinds(const Scenario& sc) {
  for (std::size_t i = 0; i < sc.kinds.size(); ++i) {
    const std::string where = "/kinds/" + std::to_string(i);
    const auto k = sc.kinds[i];
    const bool hilbert_only = k == CertificateKind::carlier_hilbert || k == CertificateKind::sfi_chain ||
                              k == CertificateKind::sfi_distance;
    if (hilbert_only && !sc.space.is_hilbert()) { fail(where, std::string(to_string(k)) + " requires p = 2"); }
    if (k == CertificateKind::gci) {
      if (!sc.B) { fail(where, "gci requires an operator B"); }
      if (!(strong_monotonicity_constant(*sc.B, sc.space) > 0.0)) {
        fail("/B", sc.B->name() + " is not certified strongly monotone");
      }
    }
    if (k == CertificateKind::sfi_distance && !graph_distance_sq(sc.T, Vector::Zero(static_cast<Eigen::Index>(sc.space.dim())),
                                                                 Vector::Zero(static_cast<Eigen::Index>(sc.space.dim())))) {
      fail(where, "sfi_distance has no exact graph distance for " + sc.T.name() + "; use sfi_chain");
    }
    if (k == CertificateKind::prop_strmono) {
      if (!sc.strong_convexity) { fail(where, "prop_strmono requires 'strong_convexity'"); }
      const double certified = certified_strong_convexity(sc.strong_convexity->f, sc.space);
      if (certified < sc.strong_convexity->m) {
        fail("/strong_convexity", sc.strong_convexity->f.name() + " is not certified strongly convex with constant " +
                                      std::to_string(sc.strong_convexity->m) + " at p = " + std::to_string(sc.space.p()));
      }
    }
  }
}

std::pair<Vector, DualVector> scenario_point(const Scenario& sc, std::size_t k) {
  const CounterRng rng(sc.points.seed);
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  Vector x(n);
  DualVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint64_t c = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
    x[i] = rng.uniform(0, c, sc.points.lo, sc.points.hi);
    v[i] = rng.uniform(1, c, sc.points.lo, sc.points.hi);
  }
  return {x, v};
}

std::vector<std::pair<Vector, Vector>> scenario_pairs(const Scenario& sc) {
  const CounterRng rng(sc.points.seed);
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  std::vector<std::pair<Vector, Vector>> out;
  out.reserve(sc.points.count);
  for (std::size_t k = 0; k < sc.points.count; ++k) {
    Vector x(n);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::uint64_t c = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
      x[i] = rng.uniform(2, c, sc.points.lo, sc.points.hi);
      y[i] = rng.uniform(3, c, sc.points.lo, sc.points.hi);
    }
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

} // namespace fitzcert
