#include "fitzcert/oracle.hpp"

#include "fitzcert/fitzpatrick.hpp"
#include "fitzcert/resolvent.hpp"

#include "detail.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace fitzcert {

using detail::kInf;

namespace {

std::string describe(const Vector& x, const DualVector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "x=[";
  for (Eigen::Index i = 0; i < x.size(); ++i) { os << (i ? "," : "") << x[i]; }
  os << "] v=[";
  for (Eigen::Index i = 0; i < v.size(); ++i) { os << (i ? "," : "") << v[i]; }
  os << "]";
  return os.str();
}

// Search box intersected with dom f, so the first grid already sees feasible points.
std::pair<Vector, Vector> clip_to_domain(const OperatorSpec& T, std::size_t n, Vector lo, Vector hi) {
  const MonotoneParts parts = decompose(T, n);
  if (parts.has_box()) {
    lo = lo.cwiseMax(*parts.lo);
    hi = hi.cwiseMin(*parts.hi);
  }
  return {lo, hi};
}

OracleCheck skipped(std::string name, std::string why) {
  OracleCheck c;
  c.name = std::move(name);
  c.skipped = true;
  c.detail = std::move(why);
  return c;
}

void record(OracleCheck& c, double error, double diff, const std::string& where) {
  ++c.count;
  c.max_diff = std::max(c.max_diff, diff);
  if (error > c.max_error || (!std::isfinite(error) && c.pass)) {
    c.max_error = error;
    c.detail = where;
  }
  if (!(error <= 0.0)) { c.pass = false; }
}

std::size_t oracle_count(const Scenario& sc, std::size_t limit) {
  const std::size_t want = sc.oracle ? sc.oracle->count : 100;
  return std::min({want, sc.points.count, limit});
}

// sup over a product grid of <x - y, T y - v> for T = identity, zero or linear.
OracleCheck fitz_exact_vs_grid(const Scenario& sc) {
  const char* name = "fitz_exact_vs_grid";
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  Matrix A;
  if (sc.T.get<OperatorSpec::Identity>()) {
    A = Matrix::Identity(n, n);
  } else if (sc.T.get<OperatorSpec::Zero>()) {
    A = Matrix::Zero(n, n);
  } else if (const auto* l = sc.T.get<OperatorSpec::LinearPSD>()) {
    A = l->A;
  } else {
    return skipped(name, "no closed-form Fitzpatrick function for " + sc.T.name());
  }
  const bool zero = sc.T.get<OperatorSpec::Zero>() != nullptr;
  const Region region = sc.oracle ? sc.oracle->region
                                  : Region{Vector::Constant(n, -2.0), Vector::Constant(n, 2.0)};
  const int k = sc.oracle ? sc.oracle->grid_per_dim : 201;
  const double total = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (total > 2e6) { return skipped(name, "grid would exceed 2e6 points"); }

  const Matrix S = A + A.transpose();
  const double smax = zero ? 0.0 : Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().maxCoeff();
  const auto lu = S.fullPivLu();
  if (!zero && !lu.isInvertible()) { return skipped(name, "A + A' is singular"); }

  // Grid once; the sup of the concave quadratic is then a scan.
  std::vector<Vector> grid;
  std::vector<Vector> images;
  grid.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const Vector cell = (region.hi - region.lo) / static_cast<double>(k - 1);
  for (;;) {
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = idx[static_cast<std::size_t>(i)];
      y[i] = j == k - 1 ? region.hi[i] : region.lo[i] + j * cell[i];
    }
    images.push_back(A * y);
    grid.push_back(std::move(y));
    Eigen::Index i = 0;
    while (i < n && ++idx[static_cast<std::size_t>(i)] == k) {
      idx[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) { break; }
  }

  OracleCheck c;
  c.name = name;
  c.tolerance = 1e-6;
  const std::size_t count = oracle_count(sc, 100);
  for (std::size_t p = 0; p < count; ++p) {
    auto [x, v] = scenario_point(sc, p);
    if (zero) { v.setZero(); }
    double sup = -kInf;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      sup = std::max(sup, (x - grid[g]).dot(images[g] - v));
    }
    const auto exact = fitz_exact_gap(sc.T, x, v);
    double bound = 0.0;
    if (!zero) {
      // g(y*) - g(y) = 1/2 (y - y*)' S (y - y*) for the grid point nearest y*.
      const Vector ystar = lu.solve(A.transpose() * x + v);
      Vector nearest(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = std::round((std::clamp(ystar[i], region.lo[i], region.hi[i]) - region.lo[i]) / cell[i]);
        nearest[i] = std::min(region.hi[i], region.lo[i] + t * cell[i]);
      }
      bound = 0.5 * smax * (nearest - ystar).squaredNorm();
    }
    const double diff = *exact - sup;
    const double error = std::max(-diff - c.tolerance, diff - bound - c.tolerance);
    std::ostringstream where;
    where.precision(17);
    where << describe(x, v) << " exact=" << *exact << " grid=" << sup << " bound=" << bound;
    record(c, error, std::abs(diff), where.str());
  }
  return c;
}

OracleCheck conjugate_vs_brute_force(const Scenario& sc, const std::optional<FunctionSpec>& f) {
  const char* name = "conjugate_vs_brute_force";
  if (!f) { return skipped(name, sc.T.name() + " is not a catalog subdifferential"); }
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  if (n > 2) { return skipped(name, "brute force limited to dim <= 2"); }
  OracleCheck c;
  c.name = name;
  c.tolerance = 1e-6;
  const double R = 50.0;
  const std::size_t count = oracle_count(sc, 20);
  for (std::size_t p = 0; p < count; ++p) {
    const DualVector v = scenario_point(sc, p).second;
    auto h = [&](const Vector& x) { return x.dot(v) - value(*f, x); };
    const double closed = conjugate(*f, v);
    const auto [lo, hi] = clip_to_domain(sc.T, sc.space.dim(), Vector::Constant(n, -R), Vector::Constant(n, R));
    const double near = zoom_maximize(h, lo, hi).second;
    std::ostringstream where;
    where.precision(17);
    where << describe(Vector::Zero(n), v) << " closed=" << closed << " brute=" << near;
    if (std::isinf(closed)) {
      // An unbounded sup keeps growing with the search radius.
      const auto [flo, fhi] =
          clip_to_domain(sc.T, sc.space.dim(), Vector::Constant(n, -2 * R), Vector::Constant(n, 2 * R));
      const double far = zoom_maximize(h, flo, fhi).second;
      record(c, far > near + 1e-9 ? 0.0 : kInf, 0.0, where.str());
      continue;
    }
    const double diff = std::abs(closed - near);
    record(c, diff - c.tolerance * std::max(1.0, std::abs(closed)), diff, where.str());
  }
  return c;
}

OracleCheck subgradient_vs_finite_difference(const Scenario& sc, const std::optional<FunctionSpec>& f) {
  const char* name = "subgradient_vs_finite_difference";
  if (!f) { return skipped(name, sc.T.name() + " is not a catalog subdifferential"); }
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  const MonotoneParts parts = decompose(sc.T, sc.space.dim());
  OracleCheck c;
  c.name = name;
  c.tolerance = 1e-6;
  const std::size_t count = oracle_count(sc, 100);
  for (std::size_t p = 0; p < count; ++p) {
    Vector x = scenario_point(sc, p).first;
    if (parts.has_box()) { x = x.cwiseMax(*parts.lo).cwiseMin(*parts.hi); }
    const auto reps = representatives(sc.T, x, 8);
    if (reps.size() == 1 && !parts.has_box()) {
      // Central differences on the smooth part.
      const DualVector& g = reps.front();
      DualVector fd(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        Vector a = x;
        Vector b = x;
        a[i] += h;
        b[i] -= h;
        fd[i] = (value(*f, a) - value(*f, b)) / (2 * h);
      }
      const double diff = (g - fd).lpNorm<Eigen::Infinity>();
      record(c, diff - c.tolerance * std::max(1.0, g.lpNorm<Eigen::Infinity>()), diff,
             describe(x, g) + " fd error=" + std::to_string(diff));
      continue;
    }
    // Set-valued points: every representative satisfies the subgradient inequality.
    const double fx = value(*f, x);
    double worst = 0.0;
    for (const auto& u : reps) {
      for (int d = 0; d < 2 * n; ++d) {
        for (const double step : {1e-3, 1e-1, 1.0}) {
          Vector y = x;
          y[d / 2] += (d % 2 == 0 ? step : -step);
          const double fy = value(*f, y);
          if (std::isinf(fy)) { continue; }
          worst = std::max(worst, fx + u.dot(y - x) - fy);
        }
      }
    }
    record(c, worst - 1e-9 * std::max(1.0, std::abs(fx)), worst, describe(x, reps.front()) + " subgradient inequality");
  }
  return c;
}

bool separable(const FunctionSpec& f) {
  if (f.get<FunctionSpec::ScaledL1>() || f.get<FunctionSpec::BoxIndicator>()) { return true; }
  if (const auto* q = f.get<FunctionSpec::Quadratic>()) { return q->Q.isDiagonal(0.0); }
  if (const auto* h = f.get<FunctionSpec::HalfPNormSq>()) { return h->p == 2.0; }
  if (const auto* s = f.get<FunctionSpec::StronglyConvexShift>()) { return s->p == 2.0 && separable(*s->base); }
  return false;
}

OracleCheck prox_vs_brute_force(const Scenario& sc, const std::optional<FunctionSpec>& f) {
  const char* name = "prox_vs_brute_force";
  if (!f) { return skipped(name, sc.T.name() + " is not a catalog subdifferential"); }
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  const bool sep = separable(*f);
  if (!sep && n > 2) { return skipped(name, "non-separable brute force limited to dim <= 2"); }
  const Space hilbert(sc.space.dim(), 2.0);
  OracleCheck c;
  c.name = name;
  c.tolerance = 1e-6;
  const std::size_t count = oracle_count(sc, sep ? 100 : 20);
  for (const double lambda : sc.lambda_grid) {
    for (std::size_t p = 0; p < count; ++p) {
      const auto [x, v] = scenario_point(sc, p);
      const DualVector y = x + lambda * v;
      const Vector w = resolvent(OperatorSpec::identity(), sc.T, hilbert, lambda, y, sc.options.solver).w;
      Vector brute(n);
      const double R = 100.0 + 2.0 * y.lpNorm<Eigen::Infinity>();
      if (sep) {
        // Each coordinate minimizes 1/2 (t - y_i)^2 + lambda f_i(t); the other
        // coordinates only shift f by a constant.
        for (Eigen::Index i = 0; i < n; ++i) {
          auto h = [&](const Vector& t) {
            Vector z = w;
            z[i] = t[0];
            return -(0.5 * (t[0] - y[i]) * (t[0] - y[i]) + lambda * value(*f, z));
          };
          const auto [lo, hi] = clip_to_domain(sc.T, sc.space.dim(), (y.array() - R).matrix(), (y.array() + R).matrix());
          brute[i] = zoom_maximize(h, Vector::Constant(1, lo[i]), Vector::Constant(1, hi[i])).first[0];
        }
      } else {
        auto h = [&](const Vector& z) { return -(0.5 * (z - y).squaredNorm() + lambda * value(*f, z)); };
        const auto [lo, hi] = clip_to_domain(sc.T, sc.space.dim(), (y.array() - R).matrix(), (y.array() + R).matrix());
        brute = zoom_maximize(h, lo, hi).first;
      }
      const double diff = (w - brute).lpNorm<Eigen::Infinity>();
      record(c, diff - c.tolerance * std::max(1.0, w.lpNorm<Eigen::Infinity>()), diff,
             describe(x, v) + " lambda=" + std::to_string(lambda) + " error=" + std::to_string(diff));
    }
  }
  return c;
}

OracleCheck graph_distance_vs_grid(const Scenario& sc) {
  const char* name = "graph_distance_vs_grid";
  const auto n = static_cast<Eigen::Index>(sc.space.dim());
  const Vector zero = Vector::Zero(n);
  if (!graph_distance_sq(sc.T, zero, zero)) { return skipped(name, "no exact graph distance for " + sc.T.name()); }
  const auto* box = sc.T.get<OperatorSpec::NormalConeBox>();
  if (!box && n > 2) { return skipped(name, "brute force limited to dim <= 2"); }
  OracleCheck c;
  c.name = name;
  c.tolerance = 1e-6;
  const std::size_t count = oracle_count(sc, 100);
  for (std::size_t p = 0; p < count; ++p) {
    const auto [x, v] = scenario_point(sc, p);
    const double closed = *graph_distance_sq(sc.T, x, v);
    double brute = 0.0;
    const double R = 10.0 + 2.0 * std::max(x.lpNorm<Eigen::Infinity>(), v.lpNorm<Eigen::Infinity>());
    if (box) {
      // Scan each of the three branches of the 1-D graph per coordinate.
      for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = box->lo[i];
        const double hi = box->hi[i];
        auto seg = [&](const Vector& t) { return -(std::pow(x[i] - t[0], 2) + v[i] * v[i]); };
        auto lower = [&](const Vector& s) { return -(std::pow(x[i] - lo, 2) + std::pow(v[i] + s[0], 2)); };
        auto upper = [&](const Vector& s) { return -(std::pow(x[i] - hi, 2) + std::pow(v[i] - s[0], 2)); };
        const Vector one0 = Vector::Zero(1);
        const double best = std::max({zoom_maximize(seg, Vector::Constant(1, lo), Vector::Constant(1, hi)).second,
                                      zoom_maximize(lower, one0, Vector::Constant(1, R)).second,
                                      zoom_maximize(upper, one0, Vector::Constant(1, R)).second});
        brute += -best;
      }
    } else {
      Matrix A = Matrix::Zero(n, n);
      if (sc.T.get<OperatorSpec::Identity>()) { A = Matrix::Identity(n, n); }
      if (const auto* l = sc.T.get<OperatorSpec::LinearPSD>()) { A = l->A; }
      auto h = [&](const Vector& w) { return -((x - w).squaredNorm() + (v - A * w).squaredNorm()); };
      brute = -zoom_maximize(h, Vector::Constant(n, -R), Vector::Constant(n, R)).second;
    }
    const double diff = std::abs(closed - brute);
    std::ostringstream where;
    where.precision(17);
    where << describe(x, v) << " closed=" << closed << " brute=" << brute;
    record(c, diff - c.tolerance * std::max(1.0, closed), diff, where.str());
  }
  return c;
}

} // namespace

bool OracleReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.pass; });
}

OracleReport run_oracle(const Scenario& sc) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  rep.scenario = sc.name;
  const auto f = as_subdifferential(sc.T, sc.space.dim());
  rep.checks.push_back(fitz_exact_vs_grid(sc));
  rep.checks.push_back(conjugate_vs_brute_force(sc, f));
  rep.checks.push_back(subgradient_vs_finite_difference(sc, f));
  rep.checks.push_back(prox_vs_brute_force(sc, f));
  rep.checks.push_back(graph_distance_vs_grid(sc));
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

} // namespace fitzcert
