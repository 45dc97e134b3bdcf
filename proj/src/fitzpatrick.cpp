#include "fitzcert/fitzpatrick.hpp"

#include "fitzcert/error.hpp"

#include "detail.hpp"

namespace fitzcert {

using detail::kInf;
using detail::overloaded;

std::optional<double> fitz_exact(const OperatorSpec& T, const Vector& x, const DualVector& v) {
  if (x.size() != v.size()) { throw DimensionError("fitz_exact: x and v differ in length"); }
  T.check_dim(static_cast<std::size_t>(x.size()));
  return std::visit(overloaded{
                        [&](const OperatorSpec::Identity&) -> std::optional<double> {
                          return 0.25 * (x + v).squaredNorm();
                        },
                        [&](const OperatorSpec::Zero&) -> std::optional<double> {
                          return v.isZero(0.0) ? std::optional<double>{0.0} : std::optional<double>{kInf};
                        },
                        [&](const OperatorSpec::LinearPSD& l) -> std::optional<double> {
                          // sup_y <x - y, A y - v> is a concave quadratic in y with Hessian -(A + A').
                          const Matrix S = l.A + l.A.transpose();
                          const auto lu = S.fullPivLu();
                          if (!lu.isInvertible()) { return std::nullopt; }
                          const DualVector u = l.A.transpose() * x + v;
                          return 0.5 * u.dot(lu.solve(u));
                        },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    T.variant());
}

std::optional<double> fitz_exact_gap(const OperatorSpec& T, const Vector& x, const DualVector& v) {
  if (T.get<OperatorSpec::Identity>()) {
    if (x.size() != v.size()) { throw DimensionError("fitz_exact_gap: x and v differ in length"); }
    return 0.25 * (x - v).squaredNorm();
  }
  if (T.get<OperatorSpec::Zero>()) { return fitz_exact(T, x, v); }
  const auto f = fitz_exact(T, x, v);
  if (!f) { return std::nullopt; }
  return *f - x.dot(v);
}

std::optional<double> fitz_upper(const OperatorSpec& T, const Vector& x, const DualVector& v) {
  if (x.size() != v.size()) { throw DimensionError("fitz_upper: x and v differ in length"); }
  const auto f = as_subdifferential(T, static_cast<std::size_t>(x.size()));
  if (!f) { return std::nullopt; }
  const double fx = value(*f, x);
  if (fx == kInf) { return kInf; }
  return fx + conjugate(*f, v);
}

LowerBound fitz_lower(const Vector& x, const DualVector& v, const GraphSample& sample) {
  if (sample.pairs.empty()) { throw ValidationError("fitz_lower: empty graph sample"); }
  const GraphPair* best = nullptr;
  double best_gap = -kInf;
  for (const auto& pair : sample.pairs) {
    if (pair.z.size() != x.size() || pair.w.size() != v.size()) {
      throw DimensionError("fitz_lower: sample pair of wrong dimension");
    }
    const double g = (x - pair.z).dot(pair.w - v);
    if (g > best_gap) {
      best_gap = g;
      best = &pair;
    }
  }
  return {x.dot(v) + best_gap, best_gap, *best};
}

FitzpatrickBounds fitz_bounds(const OperatorSpec& T, const Vector& x, const DualVector& v, const GraphSample& sample) {
  FitzpatrickBounds out;
  const auto lower = fitz_lower(x, v, sample);
  out.lower = lower.value;
  out.gap_lower = lower.gap;
  out.witness = lower.witness;
  out.exact = fitz_exact(T, x, v);
  out.upper = fitz_upper(T, x, v);
  return out;
}

} // namespace fitzcert
