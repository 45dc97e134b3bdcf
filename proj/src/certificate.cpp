#include "fitzcert/certificate.hpp"

#include "fitzcert/error.hpp"
#include "fitzcert/fitzpatrick.hpp"

#include "detail.hpp"

#include <array>
#include <cmath>

namespace fitzcert {

using detail::kInf;

namespace {

constexpr std::array<std::pair<CertificateKind, std::string_view>, 6> kKindNames{{
    {CertificateKind::carlier_hilbert, "carlier_hilbert"},
    {CertificateKind::gci, "gci"},
    {CertificateKind::two_uc, "two_uc"},
    {CertificateKind::sfi_chain, "sfi_chain"},
    {CertificateKind::sfi_distance, "sfi_distance"},
    {CertificateKind::prop_strmono, "prop_strmono"},
}};

double dist_sq(const Space& s, const Vector& d) {
  if (s.is_hilbert()) { return d.dot(d); }
  const double n = lp_norm(d, s.p());
  return n * n;
}

void require_hilbert(const Space& s, CertificateKind k) {
  if (!s.is_hilbert()) { throw ValidationError(std::string(to_string(k)) + " requires p = 2"); }
}

void check_point(const Space& s, const Vector& x, const DualVector& v, double lambda) {
  s.check(x);
  s.check(v);
  if (!std::isfinite(lambda) || !(lambda > 0.0)) { throw ValidationError("certificate: lambda must be > 0"); }
}

void finish(CertificateRecord& r, const CertificateOptions& opts) {
  const double gap = r.gap_exact ? *r.gap_exact : r.gap_est;
  r.slack = gap - r.rhs;
  r.tol = opts.abs_tol + (std::isfinite(gap) ? opts.rel_tol * std::max(1.0, std::abs(gap)) : 0.0);
  r.pass = r.slack >= -r.tol;
}

double sampled_gap(const Vector& x, const DualVector& v, const GraphSample* sample) {
  if (sample == nullptr || sample->pairs.empty()) { return -kInf; }
  return fitz_lower(x, v, *sample).gap;
}

struct WitnessTerm {
  ResolventResult res;
  DualVector x_prime;
  Vector d;     // x - w
  double dsq;   // ||x - w||^2
  double value; // <x - w, z - v> for z = (x' - w') / lambda + v in T(w)
};

WitnessTerm witness_term(const OperatorSpec& B, const OperatorSpec& T, const Space& s, const Vector& x,
                         const DualVector& v, double lambda, const DualVector& x_prime,
                         const CertificateOptions& opts) {
  WitnessTerm out;
  out.x_prime = x_prime;
  out.res = resolvent(B, T, s, lambda, x_prime + lambda * v, opts.solver);
  out.d = x - out.res.w;
  out.dsq = dist_sq(s, out.d);
  // z - v = (x' - w') / lambda, paired with x - w.
  out.value = out.d.dot(x_prime - out.res.w_prime) / lambda;
  return out;
}

void absorb_solver(CertificateRecord& r, const ResolventResult& res) {
  r.residual = std::max(r.residual, res.residual);
  r.iterations += res.iterations;
  r.method = std::string(to_string(res.method));
  if (res.optimality_gap) { r.optimality_gap = std::max(r.optimality_gap.value_or(0.0), *res.optimality_gap); }
}

CertificateRecord resolvent_bound(CertificateKind kind, const OperatorSpec& B, const OperatorSpec& T, const Space& s,
                                  const Vector& x, const DualVector& v, double lambda, const CertificateOptions& opts,
                                  const GraphSample* sample) {
  check_point(s, x, v, lambda);
  const double c = strong_monotonicity_constant(B, s);
  if (!(c > 0.0)) { throw ValidationError(B.name() + " is not certified strongly monotone"); }

  CertificateRecord r;
  r.kind = kind;
  r.t_name = T.name();
  r.b_name = B.name();
  r.p = s.p();
  r.x = x;
  r.v = v;
  r.lambda = lambda;
  r.rhs = -kInf;

  double witness = -kInf;
  for (const auto& xp : representatives(B, x, opts.cap)) {
    const WitnessTerm term = witness_term(B, T, s, x, v, lambda, xp, opts);
    absorb_solver(r, term.res);
    r.rhs = std::max(r.rhs, c * term.dsq / lambda);
    witness = std::max(witness, term.value);
  }
  r.gap_est = std::max(witness, sampled_gap(x, v, sample));
  r.gap_exact = fitz_exact_gap(T, x, v);
  finish(r, opts);
  return r;
}

} // namespace

std::string_view to_string(CertificateKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) { return name; }
  }
  return "unknown";
}

std::optional<CertificateKind> parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) { return kind; }
  }
  return std::nullopt;
}

CertificateRecord carlier_hilbert(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                                  double lambda, const CertificateOptions& opts, const GraphSample* sample) {
  require_hilbert(s, CertificateKind::carlier_hilbert);
  return resolvent_bound(CertificateKind::carlier_hilbert, OperatorSpec::identity(), T, s, x, v, lambda, opts, sample);
}

CertificateRecord gci(const OperatorSpec& B, const OperatorSpec& T, const Space& s, const Vector& x,
                      const DualVector& v, double lambda, const CertificateOptions& opts, const GraphSample* sample) {
  return resolvent_bound(CertificateKind::gci, B, T, s, x, v, lambda, opts, sample);
}

CertificateRecord two_uc(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v, double lambda,
                         const CertificateOptions& opts, const GraphSample* sample) {
  return resolvent_bound(CertificateKind::two_uc, OperatorSpec::duality_map(s.p()), T, s, x, v, lambda, opts, sample);
}

CertificateRecord sfi_chain(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                            double lambda, const CertificateOptions& opts, const GraphSample* sample) {
  require_hilbert(s, CertificateKind::sfi_chain);
  check_point(s, x, v, lambda);
  const OperatorSpec B = OperatorSpec::identity();
  const WitnessTerm term = witness_term(B, T, s, x, v, lambda, x, opts);

  CertificateRecord r;
  r.kind = CertificateKind::sfi_chain;
  r.t_name = T.name();
  r.b_name = B.name();
  r.p = s.p();
  r.x = x;
  r.v = v;
  r.lambda = lambda;
  absorb_solver(r, term.res);
  const Vector z_minus_v = (x - term.res.w_prime) / lambda;
  r.rhs = lambda / (1.0 + lambda * lambda) * (term.dsq + z_minus_v.dot(z_minus_v));
  r.gap_est = std::max(term.value, sampled_gap(x, v, sample));
  r.gap_exact = fitz_exact_gap(T, x, v);
  finish(r, opts);
  return r;
}

std::optional<double> graph_distance_sq(const OperatorSpec& T, const Vector& x, const DualVector& v) {
  if (x.size() != v.size()) { throw DimensionError("graph_distance_sq: x and v differ in length"); }
  T.check_dim(static_cast<std::size_t>(x.size()));
  if (T.get<OperatorSpec::Identity>()) {
    const Vector w = 0.5 * (x + v);
    return (x - w).squaredNorm() + (v - w).squaredNorm();
  }
  if (T.get<OperatorSpec::Zero>()) { return v.squaredNorm(); }
  if (const auto* l = T.get<OperatorSpec::LinearPSD>()) {
    const auto n = x.size();
    const Matrix M = Matrix::Identity(n, n) + l->A.transpose() * l->A;
    const Vector w = M.llt().solve(x + l->A.transpose() * v);
    return (x - w).squaredNorm() + (v - l->A * w).squaredNorm();
  }
  if (const auto* b = T.get<OperatorSpec::NormalConeBox>()) {
    // Graph of the 1-D normal cone: {(w, 0): lo < w < hi} u {lo} x (-inf, 0] u {hi} x [0, inf).
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double lo = b->lo[i];
      const double hi = b->hi[i];
      const double xi = x[i];
      const double vi = v[i];
      const double interior = std::pow(xi - std::clamp(xi, lo, hi), 2) + vi * vi;
      const double lower = std::pow(xi - lo, 2) + std::pow(std::max(vi, 0.0), 2);
      const double upper = std::pow(xi - hi, 2) + std::pow(std::min(vi, 0.0), 2);
      total += std::min({interior, lower, upper});
    }
    return total;
  }
  return std::nullopt;
}

CertificateRecord sfi_distance(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                               const CertificateOptions& opts, const GraphSample* sample) {
  require_hilbert(s, CertificateKind::sfi_distance);
  check_point(s, x, v, 1.0);
  const auto d2 = graph_distance_sq(T, x, v);
  if (!d2) {
    throw ValidationError("sfi_distance: no exact graph distance for " + T.name() + "; use sfi_chain instead");
  }
  CertificateRecord r;
  r.kind = CertificateKind::sfi_distance;
  r.t_name = T.name();
  r.p = s.p();
  r.x = x;
  r.v = v;
  r.distance_sq = *d2;
  r.rhs = 0.5 * *d2;
  r.gap_exact = fitz_exact_gap(T, x, v);
  // The lambda = 1 resolvent witness alone already dominates 1/2 dist^2.
  const WitnessTerm term = witness_term(OperatorSpec::identity(), T, s, x, v, 1.0, x, opts);
  absorb_solver(r, term.res);
  r.b_name = "identity";
  r.lambda = 1.0;
  r.gap_est = std::max(term.value, sampled_gap(x, v, sample));
  finish(r, opts);
  const double gap = r.gap_exact ? *r.gap_exact : r.gap_est;
  r.quarter_rhs = 0.25 * *d2;
  r.quarter_slack = gap - *r.quarter_rhs;
  return r;
}

CertificateRecord prop_strmono(const FunctionSpec& f, const Space& s, double m,
                               const std::vector<std::pair<Vector, Vector>>& pairs, const CertificateOptions& opts) {
  if (!std::isfinite(m) || !(m > 0.0)) { throw ValidationError("prop_strmono: m must be > 0"); }
  const double certified = certified_strong_convexity(f, s);
  if (certified < m) {
    throw ValidationError("prop_strmono: " + f.name() + " is not certified strongly convex with constant " +
                          std::to_string(m) + " on this space");
  }
  CertificateRecord r;
  r.kind = CertificateKind::prop_strmono;
  const OperatorSpec T = OperatorSpec::subdifferential(f);
  r.t_name = T.name();
  r.p = s.p();
  r.rhs = m * convexity_constant(s) / 2.0;
  r.gap_est = strong_mono_probe(T, pairs, s, opts.cap);
  finish(r, opts);
  return r;
}

} // namespace fitzcert
