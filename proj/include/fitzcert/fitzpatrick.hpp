#pragma once

#include "fitzcert/operator.hpp"

#include <optional>

namespace fitzcert {

/// Three-sided estimate of the Fitzpatrick function
///
///   F_T(x, v) = <x, v> + sup_{(y, w) in G(T)} <x - y, w - v>.
struct FitzpatrickBounds {
  double lower = 0.0;
  std::optional<double> exact;
  std::optional<double> upper;
  double gap_lower = 0.0; // lower - <x, v>
  std::optional<GraphPair> witness;
};

/// Closed forms: identity -> 1/4 ||x + v||^2; zero -> <x, v> if v = 0 else +inf;
/// x -> A x with A + A' invertible -> 1/2 (A'x + v)' (A + A')^{-1} (A'x + v).
/// Absent for every other operator.
std::optional<double> fitz_exact(const OperatorSpec& T, const Vector& x, const DualVector& v);

/// F_T(x, v) - <x, v> from the same closed forms, evaluated without cancellation
/// where possible (identity: 1/4 ||x - v||^2).
std::optional<double> fitz_exact_gap(const OperatorSpec& T, const Vector& x, const DualVector& v);

/// f(x) + f*(v) for T = df; absent when T is not a catalog subdifferential.
std::optional<double> fitz_upper(const OperatorSpec& T, const Vector& x, const DualVector& v);

struct LowerBound {
  double value;
  double gap; // max of <x - y, w - v>, i.e. value - <x, v> without the cancellation
  GraphPair witness;
};

/// <x, v> + max over the sample of <x - y, w - v>. Throws ValidationError on an empty sample.
LowerBound fitz_lower(const Vector& x, const DualVector& v, const GraphSample& sample);

FitzpatrickBounds fitz_bounds(const OperatorSpec& T, const Vector& x, const DualVector& v, const GraphSample& sample);

} // namespace fitzcert
