#include "fitzcert/space.hpp"

#include "fitzcert/error.hpp"

#include <cmath>
#include <string>

namespace fitzcert {

Space::Space(std::size_t dim, double p) : dim_{dim}, p_{p} {
  if (dim == 0) { throw ValidationError("space dimension must be positive"); }
  if (!std::isfinite(p) || !(p > 1.0) || p > 2.0) {
    throw ValidationError("space exponent p must lie in (1, 2], got " + std::to_string(p));
  }
}

void Space::check(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw DimensionError("vector of length " + std::to_string(x.size()) +
                         " does not match space dimension " + std::to_string(dim_));
  }
  if (!x.allFinite()) { throw ValidationError("vector has non-finite entries"); }
}

double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& x, double r) {
  if (r == 2.0) { return std::sqrt(x.dot(x)); }
  // Scale by the max entry so that |x_i|^r neither underflows nor overflows.
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0 || x.size() == 0) { return 0.0; }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) { sum += std::pow(std::abs(x[i]) / scale, r); }
  return scale * std::pow(sum, 1.0 / r);
}

double norm_primal(const Space& s, const Vector& x) {
  s.check(x);
  return lp_norm(x, s.p());
}

double norm_dual(const Space& s, const DualVector& v) {
  s.check(v);
  return lp_norm(v, s.q());
}

double pairing(const Vector& x, const DualVector& v) {
  if (x.size() != v.size()) {
    throw DimensionError("pairing of vectors with lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(v.size()));
  }
  return x.dot(v);
}

DualVector duality_map(const Space& s, const Vector& x) {
  s.check(x);
  if (s.is_hilbert()) { return x; }
  const double p = s.p();
  const double nrm = lp_norm(x, p);
  DualVector v = DualVector::Zero(x.size());
  if (nrm == 0.0) { return v; }
  // ||x||^{2-p} |x_i|^{p-1} = ||x|| (|x_i| / ||x||)^{p-1}, which stays in range.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) { continue; }
    v[i] = std::copysign(nrm * std::pow(std::abs(x[i]) / nrm, p - 1.0), x[i]);
  }
  return v;
}

double convexity_constant(const Space& s) { return (s.p() - 1.0) / 8.0; }

} // namespace fitzcert
