#pragma once

#include "fitzcert/space.hpp"

#include <memory>
#include <string>
#include <variant>

namespace fitzcert {

/// Closed, proper, convex functions with closed-form conjugates.
class FunctionSpec {
public:
  /// 1/2 x'Qx + <b, x>, Q symmetric PSD.
  struct Quadratic {
    Matrix Q;
    DualVector b;
  };
  /// alpha * ||x||_1.
  struct ScaledL1 {
    double alpha;
  };
  /// Indicator of the box [lo, hi].
  struct BoxIndicator {
    Vector lo;
    Vector hi;
  };
  /// 1/2 ||x||_p^2.
  struct HalfPNormSq {
    double p;
  };
  /// base + (m/2) ||x||_p^2, strongly convex with constant m for the l^p norm.
  struct StronglyConvexShift {
    std::shared_ptr<const FunctionSpec> base;
    double m;
    double p;
  };

  using Variant = std::variant<Quadratic, ScaledL1, BoxIndicator, HalfPNormSq, StronglyConvexShift>;

  static FunctionSpec quadratic(Matrix Q, DualVector b);
  static FunctionSpec scaled_l1(double alpha);
  static FunctionSpec box_indicator(Vector lo, Vector hi);
  static FunctionSpec half_p_norm_sq(double p);
  static FunctionSpec strongly_convex_shift(FunctionSpec base, double m, double p = 2.0);

  const Variant& variant() const { return v_; }

  template <typename T> const T* get() const { return std::get_if<T>(&v_); }

  std::string name() const;

  // Throws DimensionError when the function carries data of another dimension.
  void check_dim(std::size_t n) const;

private:
  explicit FunctionSpec(Variant v) : v_{std::move(v)} {}
  Variant v_;
};

/// f(x); +infinity only for box indicators outside the box.
double value(const FunctionSpec& f, const Vector& x);

/// f*(v) = sup_x { <x, v> - f(x) }, +infinity outside the conjugate domain.
///
/// StronglyConvexShift is evaluated at its maximizer, which solves the
/// inclusion v in m J_p(x) + d base(x) and is computed as a generalized resolvent.
double conjugate(const FunctionSpec& f, const DualVector& v);

/// Strong convexity constant of f for the norm of `s` that the catalog can
/// certify; 0 when none is known.
double certified_strong_convexity(const FunctionSpec& f, const Space& s);

} // namespace fitzcert
