#include "fitzcert/function.hpp"

#include "fitzcert/error.hpp"
#include "fitzcert/operator.hpp"
#include "fitzcert/resolvent.hpp"

#include "detail.hpp"

#include <cmath>
#include <limits>

namespace fitzcert {

namespace {

using detail::kInf;
using detail::overloaded;

void check_exponent(double p, const char* what) {
  if (!std::isfinite(p) || !(p > 1.0) || p > 2.0) {
    throw ValidationError(std::string(what) + ": exponent must lie in (1, 2]");
  }
}

} // namespace

FunctionSpec FunctionSpec::quadratic(Matrix Q, DualVector b) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size()) {
    throw DimensionError("quadratic: Q must be square with size matching b");
  }
  if (!Q.allFinite() || !b.allFinite()) { throw ValidationError("quadratic: non-finite data"); }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("quadratic: Q must be symmetric");
  }
  if (Q.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw ValidationError("quadratic: Q must be positive semidefinite");
    }
  }
  return FunctionSpec{Quadratic{std::move(Q), std::move(b)}};
}

FunctionSpec FunctionSpec::scaled_l1(double alpha) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) { throw ValidationError("scaled_l1: alpha must be > 0"); }
  return FunctionSpec{ScaledL1{alpha}};
}

FunctionSpec FunctionSpec::box_indicator(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) { throw DimensionError("box_indicator: lo and hi differ in length"); }
  if (!lo.allFinite() || !hi.allFinite()) { throw ValidationError("box_indicator: non-finite bounds"); }
  if ((lo.array() > hi.array()).any()) { throw ValidationError("box_indicator: requires lo <= hi"); }
  return FunctionSpec{BoxIndicator{std::move(lo), std::move(hi)}};
}

FunctionSpec FunctionSpec::half_p_norm_sq(double p) {
  check_exponent(p, "half_p_norm_sq");
  return FunctionSpec{HalfPNormSq{p}};
}

FunctionSpec FunctionSpec::strongly_convex_shift(FunctionSpec base, double m, double p) {
  if (!std::isfinite(m) || !(m > 0.0)) { throw ValidationError("strongly_convex_shift: m must be > 0"); }
  check_exponent(p, "strongly_convex_shift");
  return FunctionSpec{StronglyConvexShift{std::make_shared<const FunctionSpec>(std::move(base)), m, p}};
}

std::string FunctionSpec::name() const {
  return std::visit(overloaded{
                        [](const Quadratic&) -> std::string { return "quadratic"; },
                        [](const ScaledL1&) -> std::string { return "scaled_l1"; },
                        [](const BoxIndicator&) -> std::string { return "box_indicator"; },
                        [](const HalfPNormSq&) -> std::string { return "half_p_norm_sq"; },
                        [](const StronglyConvexShift& s) -> std::string {
                          return "strongly_convex_shift(" + s.base->name() + ")";
                        },
                    },
                    v_);
}

void FunctionSpec::check_dim(std::size_t n) const {
  const auto fail = [&](Eigen::Index got) {
    throw DimensionError(name() + ": data of dimension " + std::to_string(got) + " used in dimension " +
                         std::to_string(n));
  };
  std::visit(overloaded{
                 [&](const Quadratic& q) {
                   if (static_cast<std::size_t>(q.b.size()) != n) { fail(q.b.size()); }
                 },
                 [&](const BoxIndicator& b) {
                   if (static_cast<std::size_t>(b.lo.size()) != n) { fail(b.lo.size()); }
                 },
                 [&](const StronglyConvexShift& s) { s.base->check_dim(n); },
                 [](const auto&) {},
             },
             v_);
}

double value(const FunctionSpec& f, const Vector& x) {
  f.check_dim(static_cast<std::size_t>(x.size()));
  return std::visit(overloaded{
                        [&](const FunctionSpec::Quadratic& q) { return 0.5 * x.dot(q.Q * x) + q.b.dot(x); },
                        [&](const FunctionSpec::ScaledL1& l) { return l.alpha * x.lpNorm<1>(); },
                        [&](const FunctionSpec::BoxIndicator& b) {
                          const bool inside = (x.array() >= b.lo.array()).all() && (x.array() <= b.hi.array()).all();
                          return inside ? 0.0 : kInf;
                        },
                        [&](const FunctionSpec::HalfPNormSq& h) {
                          const double n = lp_norm(x, h.p);
                          return 0.5 * n * n;
                        },
                        [&](const FunctionSpec::StronglyConvexShift& s) {
                          const double n = lp_norm(x, s.p);
                          return value(*s.base, x) + 0.5 * s.m * n * n;
                        },
                    },
                    f.variant());
}

namespace {

double quadratic_conjugate(const FunctionSpec::Quadratic& q, const DualVector& v) {
  const DualVector r = v - q.b;
  if (q.Q.size() == 0) { return 0.0; }
  Eigen::SelfAdjointEigenSolver<Matrix> es(q.Q);
  const auto& evals = es.eigenvalues();
  const double eig_tol = 1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());
  const Vector coords = es.eigenvectors().transpose() * r;
  const double range_tol = 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff());
  double out = 0.0;
  for (Eigen::Index k = 0; k < evals.size(); ++k) {
    if (evals[k] <= eig_tol) {
      if (std::abs(coords[k]) > range_tol) { return kInf; }
      continue;
    }
    out += coords[k] * coords[k] / evals[k];
  }
  return 0.5 * out;
}

double shift_conjugate(const FunctionSpec::StronglyConvexShift& s, const DualVector& v) {
  // Maximizer x of <x, v> - base(x) - (m/2)||x||_p^2 solves v in m J_p(x) + d base(x),
  // i.e. x = (J_p + (1/m) d base)^{-1}(v / m).
  const auto n = static_cast<std::size_t>(v.size());
  const Space space(n, s.p);
  const OperatorSpec B = s.p == 2.0 ? OperatorSpec::identity() : OperatorSpec::duality_map(s.p);
  const auto res = resolvent(B, OperatorSpec::subdifferential(*s.base), space, 1.0 / s.m, v / s.m);
  const double nrm = lp_norm(res.w, s.p);
  return v.dot(res.w) - value(*s.base, res.w) - 0.5 * s.m * nrm * nrm;
}

} // namespace

double conjugate(const FunctionSpec& f, const DualVector& v) {
  f.check_dim(static_cast<std::size_t>(v.size()));
  if (!v.allFinite()) { throw ValidationError("conjugate: non-finite argument"); }
  return std::visit(overloaded{
                        [&](const FunctionSpec::Quadratic& q) { return quadratic_conjugate(q, v); },
                        [&](const FunctionSpec::ScaledL1& l) {
                          return v.cwiseAbs().maxCoeff() <= l.alpha ? 0.0 : kInf;
                        },
                        [&](const FunctionSpec::BoxIndicator& b) {
                          double out = 0.0;
                          for (Eigen::Index i = 0; i < v.size(); ++i) {
                            out += std::max(b.lo[i] * v[i], b.hi[i] * v[i]);
                          }
                          return out;
                        },
                        [&](const FunctionSpec::HalfPNormSq& h) {
                          const double n = lp_norm(v, h.p / (h.p - 1.0));
                          return 0.5 * n * n;
                        },
                        [&](const FunctionSpec::StronglyConvexShift& s) { return shift_conjugate(s, v); },
                    },
                    f.variant());
}

double certified_strong_convexity(const FunctionSpec& f, const Space& s) {
  return std::visit(overloaded{
                        [&](const FunctionSpec::Quadratic& q) {
                          if (!s.is_hilbert() || q.Q.size() == 0) { return 0.0; }
                          Eigen::SelfAdjointEigenSolver<Matrix> es(q.Q, Eigen::EigenvaluesOnly);
                          return std::max(0.0, es.eigenvalues().minCoeff());
                        },
                        [&](const FunctionSpec::HalfPNormSq& h) { return h.p == s.p() ? 1.0 : 0.0; },
                        [&](const FunctionSpec::StronglyConvexShift& sh) {
                          return sh.p == s.p() ? sh.m + certified_strong_convexity(*sh.base, s) : 0.0;
                        },
                        [](const auto&) { return 0.0; },
                    },
                    f.variant());
}

} // namespace fitzcert
