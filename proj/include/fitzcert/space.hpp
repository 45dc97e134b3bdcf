#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace fitzcert {

// Points of X and of its dual X* are both stored as coordinate vectors; the
// pairing is the coordinate dot product and the dual norm is the l^q norm.
using Vector = Eigen::VectorXd;
using DualVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// R^n equipped with the l^p norm, 1 < p <= 2.
///
/// The dual exponent q = p / (p - 1) is always derived from p. p = 2 is the
/// Hilbert case, where the duality map is the identity.
class Space {
public:
  Space(std::size_t dim, double p);

  std::size_t dim() const { return dim_; }
  double p() const { return p_; }
  double q() const { return p_ / (p_ - 1.0); }
  bool is_hilbert() const { return p_ == 2.0; }

  // Throws DimensionError on length mismatch, ValidationError on non-finite entries.
  void check(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
  std::size_t dim_;
  double p_;
};

double norm_primal(const Space& s, const Vector& x);
double norm_dual(const Space& s, const DualVector& v);

// Plain l^r norm for any r > 1 (no dimension check).
double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& x, double r);

/// <x, v> = sum x_i v_i.
double pairing(const Vector& x, const DualVector& v);

/// Normalized duality map J(x) = grad of 1/2 ||x||_p^2.
///
/// Single-valued for 1 < p <= 2 on R^n: v_i = ||x||^{2-p} sign(x_i) |x_i|^{p-1},
/// with J(0) = 0. Satisfies <x, J x> = ||x||^2 and ||J x||_* = ||x||.
DualVector duality_map(const Space& s, const Vector& x);

/// 2-uniform convexity constant mu = (p - 1) / 8.
double convexity_constant(const Space& s);

} // namespace fitzcert
