#include "fitzcert/operator.hpp"

#include "fitzcert/error.hpp"

#include "detail.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fitzcert {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

using detail::kInf;
using detail::overloaded;

OperatorSpec OperatorSpec::identity() { return OperatorSpec{Identity{}}; }

OperatorSpec OperatorSpec::zero() { return OperatorSpec{Zero{}}; }

OperatorSpec OperatorSpec::linear_psd(Matrix A) {
  if (A.rows() != A.cols()) { throw DimensionError("linear_psd: matrix must be square"); }
  if (!A.allFinite()) { throw ValidationError("linear_psd: non-finite matrix"); }
  if (A.size() > 0) {
    const Matrix sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw ValidationError("linear_psd: A + A' must be positive semidefinite");
    }
  }
  return OperatorSpec{LinearPSD{std::move(A)}};
}

OperatorSpec OperatorSpec::subdifferential(FunctionSpec f) { return OperatorSpec{Subdifferential{std::move(f)}}; }

OperatorSpec OperatorSpec::normal_cone_box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) { throw DimensionError("normal_cone_box: lo and hi differ in length"); }
  if (!lo.allFinite() || !hi.allFinite()) { throw ValidationError("normal_cone_box: non-finite bounds"); }
  if ((lo.array() > hi.array()).any()) { throw ValidationError("normal_cone_box: requires lo <= hi"); }
  return OperatorSpec{NormalConeBox{std::move(lo), std::move(hi)}};
}

OperatorSpec OperatorSpec::duality_map(double p) {
  if (!std::isfinite(p) || !(p > 1.0) || p > 2.0) { throw ValidationError("duality_map: p must lie in (1, 2]"); }
  return OperatorSpec{DualityMap{p}};
}

std::string OperatorSpec::name() const {
  return std::visit(overloaded{
                        [](const Identity&) -> std::string { return "identity"; },
                        [](const Zero&) -> std::string { return "zero"; },
                        [](const LinearPSD&) -> std::string { return "linear_psd"; },
                        [](const Subdifferential& s) -> std::string { return "subdifferential(" + s.f.name() + ")"; },
                        [](const NormalConeBox&) -> std::string { return "normal_cone_box"; },
                        [](const DualityMap&) -> std::string { return "duality_map"; },
                    },
                    v_);
}

void OperatorSpec::check_dim(std::size_t n) const {
  const auto fail = [&](Eigen::Index got) {
    throw DimensionError(name() + ": data of dimension " + std::to_string(got) + " used in dimension " +
                         std::to_string(n));
  };
  std::visit(overloaded{
                 [&](const LinearPSD& l) {
                   if (static_cast<std::size_t>(l.A.rows()) != n) { fail(l.A.rows()); }
                 },
                 [&](const Subdifferential& s) { s.f.check_dim(n); },
                 [&](const NormalConeBox& b) {
                   if (static_cast<std::size_t>(b.lo.size()) != n) { fail(b.lo.size()); }
                 },
                 [](const auto&) {},
             },
             v_);
}

namespace {

void add_linear(MonotoneParts& parts, const Matrix& A) {
  if (parts.linear) {
    *parts.linear += A;
  } else {
    parts.linear = A;
  }
}

void add_pnorm(MonotoneParts& parts, double coef, double p, std::size_t n) {
  if (p == 2.0) {
    add_linear(parts, coef * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  } else {
    parts.pnorm.emplace_back(coef, p);
  }
}

void add_box(MonotoneParts& parts, const Vector& lo, const Vector& hi) {
  if (parts.lo) {
    *parts.lo = parts.lo->cwiseMax(lo);
    *parts.hi = parts.hi->cwiseMin(hi);
    if ((parts.lo->array() > parts.hi->array()).any()) { throw ValidationError("empty box intersection"); }
  } else {
    parts.lo = lo;
    parts.hi = hi;
  }
}

void add_function(MonotoneParts& parts, const FunctionSpec& f, std::size_t n) {
  std::visit(overloaded{
                 [&](const FunctionSpec::Quadratic& q) {
                   add_linear(parts, q.Q);
                   parts.offset += q.b;
                 },
                 [&](const FunctionSpec::ScaledL1& l) { parts.l1 += l.alpha; },
                 [&](const FunctionSpec::BoxIndicator& b) { add_box(parts, b.lo, b.hi); },
                 [&](const FunctionSpec::HalfPNormSq& h) { add_pnorm(parts, 1.0, h.p, n); },
                 [&](const FunctionSpec::StronglyConvexShift& s) {
                   add_function(parts, *s.base, n);
                   add_pnorm(parts, s.m, s.p, n);
                 },
             },
             f.variant());
}

} // namespace

MonotoneParts decompose(const OperatorSpec& T, std::size_t n) {
  T.check_dim(n);
  MonotoneParts parts;
  parts.offset = DualVector::Zero(static_cast<Eigen::Index>(n));
  std::visit(overloaded{
                 [&](const OperatorSpec::Identity&) { add_pnorm(parts, 1.0, 2.0, n); },
                 [](const OperatorSpec::Zero&) {},
                 [&](const OperatorSpec::LinearPSD& l) { add_linear(parts, l.A); },
                 [&](const OperatorSpec::Subdifferential& s) { add_function(parts, s.f, n); },
                 [&](const OperatorSpec::NormalConeBox& b) { add_box(parts, b.lo, b.hi); },
                 [&](const OperatorSpec::DualityMap& d) { add_pnorm(parts, 1.0, d.p, n); },
             },
             T.variant());
  return parts;
}

bool MonotoneParts::in_domain(const Vector& x) const {
  if (!lo) { return true; }
  return (x.array() >= lo->array()).all() && (x.array() <= hi->array()).all();
}

DualVector MonotoneParts::smooth(const Vector& x) const {
  DualVector g = offset;
  if (linear) { g.noalias() += *linear * x; }
  for (const auto& [coef, p] : pnorm) {
    g += coef * duality_map(Space(static_cast<std::size_t>(x.size()), p), x);
  }
  return g;
}

std::pair<double, double> MonotoneParts::interval(const Vector& x, Eigen::Index i) const {
  double a = 0.0;
  double b = 0.0;
  if (l1 > 0.0) {
    if (x[i] > 0.0) {
      a = b = l1;
    } else if (x[i] < 0.0) {
      a = b = -l1;
    } else {
      a = -l1;
      b = l1;
    }
  }
  if (lo) {
    const double l = (*lo)[i];
    const double h = (*hi)[i];
    if (l == h) {
      a = -kInf;
      b = kInf;
    } else if (x[i] == l) {
      a = -kInf;
    } else if (x[i] == h) {
      b = kInf;
    }
  }
  return {a, b};
}

namespace {

std::vector<double> coordinate_candidates(double a, double b) {
  std::vector<double> out;
  if (std::isfinite(a) && std::isfinite(b)) {
    out.push_back(a);
    if (b != a) { out.push_back(b); }
  } else if (std::isfinite(b)) {
    for (auto it = kRayLadder.rbegin(); it != kRayLadder.rend(); ++it) { out.push_back(b - *it); }
  } else if (std::isfinite(a)) {
    for (double t : kRayLadder) { out.push_back(a + t); }
  } else {
    for (auto it = kRayLadder.rbegin(); it != kRayLadder.rend(); ++it) {
      if (*it != 0.0) { out.push_back(-*it); }
    }
    for (double t : kRayLadder) { out.push_back(t); }
  }
  return out;
}

void require_domain(const OperatorSpec& T, const MonotoneParts& parts, const Vector& x) {
  if (!parts.in_domain(x)) { throw DomainError(T.name() + ": point outside the domain"); }
}

} // namespace

std::vector<DualVector> representatives(const OperatorSpec& T, const Vector& x, std::size_t cap) {
  if (cap == 0) { throw ValidationError("representatives: cap must be positive"); }
  const auto n = static_cast<std::size_t>(x.size());
  const MonotoneParts parts = decompose(T, n);
  require_domain(T, parts, x);
  const DualVector g = parts.smooth(x);

  std::vector<std::vector<double>> cands(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = parts.interval(x, static_cast<Eigen::Index>(i));
    cands[i] = coordinate_candidates(a, b);
  }

  // Odometer over candidate indices, first coordinate most significant.
  std::vector<DualVector> out;
  std::vector<std::size_t> idx(n, 0);
  while (out.size() < cap) {
    DualVector u = g;
    for (std::size_t i = 0; i < n; ++i) { u[static_cast<Eigen::Index>(i)] += cands[i][idx[i]]; }
    out.push_back(std::move(u));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < cands[k].size()) { break; }
      idx[k] = 0;
      if (k == 0) { return out; }
    }
    if (n == 0) { break; }
  }
  return out;
}

bool contains(const OperatorSpec& T, const Vector& x, const DualVector& w, double tol) {
  if (x.size() != w.size()) { throw DimensionError("contains: x and w differ in length"); }
  const MonotoneParts parts = decompose(T, static_cast<std::size_t>(x.size()));
  if (!parts.in_domain(x)) { return false; }
  const DualVector g = parts.smooth(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto [a, b] = parts.interval(x, i);
    const double u = w[i] - g[i];
    // A few ulps absorb the rounding of w - g itself.
    const double slack = tol * (1.0 + std::abs(w[i])) + 4.0 * kEps * (std::abs(w[i]) + std::abs(g[i]));
    if (u < a - slack || u > b + slack) { return false; }
  }
  return true;
}

DualVector project_onto_values(const OperatorSpec& T, const Vector& x, const DualVector& u) {
  if (x.size() != u.size()) { throw DimensionError("project_onto_values: x and u differ in length"); }
  const MonotoneParts parts = decompose(T, static_cast<std::size_t>(x.size()));
  require_domain(T, parts, x);
  const DualVector g = parts.smooth(x);
  DualVector out(u.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto [a, b] = parts.interval(x, i);
    out[i] = g[i] + std::clamp(u[i] - g[i], a, b);
  }
  return out;
}

double distance_to_values(const OperatorSpec& T, const Vector& x, const DualVector& u, double r) {
  if (x.size() != u.size()) { throw DimensionError("distance_to_values: x and u differ in length"); }
  const MonotoneParts parts = decompose(T, static_cast<std::size_t>(x.size()));
  if (!parts.in_domain(x)) { return kInf; }
  const DualVector g = parts.smooth(x);
  DualVector d(u.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto [a, b] = parts.interval(x, i);
    const double e = u[i] - g[i];
    d[i] = e - std::clamp(e, a, b);
  }
  return lp_norm(d, r);
}

GraphSample graph_sample(const OperatorSpec& T, const Region& region, int grid_per_dim, std::size_t cap,
                         const std::vector<std::pair<Vector, DualVector>>& extra) {
  if (grid_per_dim < 2) { throw ValidationError("graph_sample: grid_per_dim must be >= 2"); }
  if (region.lo.size() != region.hi.size()) { throw DimensionError("graph_sample: region bounds differ in length"); }
  if ((region.lo.array() > region.hi.array()).any()) { throw ValidationError("graph_sample: region requires lo <= hi"); }
  const auto n = static_cast<std::size_t>(region.lo.size());
  const MonotoneParts parts = decompose(T, n);

  double total = std::pow(static_cast<double>(grid_per_dim), static_cast<double>(n));
  if (total > 2e6) { throw ValidationError("graph_sample: grid of " + std::to_string(total) + " points is too large"); }

  GraphSample sample;
  std::vector<int> idx(n, 0);
  const auto coord = [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (idx[i] == grid_per_dim - 1) { return region.hi[k]; }
    const double t = static_cast<double>(idx[i]) / static_cast<double>(grid_per_dim - 1);
    return region.lo[k] + t * (region.hi[k] - region.lo[k]);
  };
  for (;;) {
    Vector z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) { z[static_cast<Eigen::Index>(i)] = coord(i); }
    if (parts.in_domain(z)) {
      for (auto& w : representatives(T, z, cap)) { sample.pairs.push_back({z, std::move(w), Provenance::grid}); }
    }
    std::size_t k = n;
    bool done = true;
    while (k > 0) {
      --k;
      if (++idx[k] < grid_per_dim) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) { break; }
  }

  for (std::size_t j = 0; j < extra.size(); ++j) {
    const auto& [z, w] = extra[j];
    if (static_cast<std::size_t>(z.size()) != n || static_cast<std::size_t>(w.size()) != n) {
      throw DimensionError("graph_sample: extra pair " + std::to_string(j) + " has wrong dimension");
    }
    if (!contains(T, z, w)) {
      const double d = distance_to_values(T, z, w, 2.0);
      throw ValidationError("graph_sample: extra pair " + std::to_string(j) + " is not in the graph of " + T.name() +
                            " (distance " + std::to_string(d) + ")");
    }
    sample.pairs.push_back({z, w, Provenance::user});
  }
  return sample;
}

double strong_mono_probe(const OperatorSpec& B, const std::vector<std::pair<Vector, Vector>>& pairs, const Space& s,
                         std::size_t cap) {
  double best = kInf;
  bool any = false;
  for (const auto& [x, y] : pairs) {
    s.check(x);
    s.check(y);
    const Vector d = x - y;
    const double nd = norm_primal(s, d);
    if (nd == 0.0) { continue; }
    any = true;
    const auto ux = representatives(B, x, cap);
    const auto vy = representatives(B, y, cap);
    for (const auto& u : ux) {
      for (const auto& v : vy) { best = std::min(best, d.dot(u - v) / (nd * nd)); }
    }
  }
  if (!any) { throw ValidationError("strong_mono_probe: all pairs are coincident"); }
  return best;
}

double strong_monotonicity_constant(const OperatorSpec& B, const Space& s) {
  const auto n = static_cast<double>(s.dim());
  // ||d||_2^2 >= n^{1 - 2/p} ||d||_p^2 for p <= 2.
  const double norm_factor = std::pow(n, 1.0 - 2.0 / s.p());
  const double mu = convexity_constant(s);
  const auto min_sym_eig = [](const Matrix& A) {
    if (A.size() == 0) { return 0.0; }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  return std::visit(overloaded{
                        [&](const OperatorSpec::Identity&) { return norm_factor; },
                        [&](const OperatorSpec::LinearPSD& l) { return std::max(0.0, min_sym_eig(l.A)) * norm_factor; },
                        [&](const OperatorSpec::DualityMap& d) { return d.p == s.p() ? 0.5 * mu : 0.0; },
                        [&](const OperatorSpec::Subdifferential& sd) {
                          if (const auto* q = sd.f.get<FunctionSpec::Quadratic>()) {
                            return std::max(0.0, min_sym_eig(q->Q)) * norm_factor;
                          }
                          return certified_strong_convexity(sd.f, s) * mu / 2.0;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    B.variant());
}

std::optional<FunctionSpec> as_subdifferential(const OperatorSpec& T, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return std::visit(overloaded{
                        [&](const OperatorSpec::Identity&) -> std::optional<FunctionSpec> {
                          return FunctionSpec::half_p_norm_sq(2.0);
                        },
                        [&](const OperatorSpec::Zero&) -> std::optional<FunctionSpec> {
                          return FunctionSpec::quadratic(Matrix::Zero(dim, dim), DualVector::Zero(dim));
                        },
                        [&](const OperatorSpec::LinearPSD& l) -> std::optional<FunctionSpec> {
                          const double scale = std::max(1.0, l.A.cwiseAbs().maxCoeff());
                          if ((l.A - l.A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) { return std::nullopt; }
                          return FunctionSpec::quadratic(0.5 * (l.A + l.A.transpose()), DualVector::Zero(dim));
                        },
                        [](const OperatorSpec::Subdifferential& s) -> std::optional<FunctionSpec> { return s.f; },
                        [](const OperatorSpec::NormalConeBox& b) -> std::optional<FunctionSpec> {
                          return FunctionSpec::box_indicator(b.lo, b.hi);
                        },
                        [](const OperatorSpec::DualityMap& d) -> std::optional<FunctionSpec> {
                          return FunctionSpec::half_p_norm_sq(d.p);
                        },
                    },
                    T.variant());
}

} // namespace fitzcert
