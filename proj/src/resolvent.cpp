#include "fitzcert/resolvent.hpp"

#include "detail.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace fitzcert {


std::string_view to_string(ResolventMethod m) {
  switch (m) {
  case ResolventMethod::closed_form: return "closed_form";
  case ResolventMethod::linear_solve: return "linear_solve";
  case ResolventMethod::convex_min: return "convex_min";
  case ResolventMethod::scalar_newton: return "scalar_newton";
  }
  return "unknown";
}

namespace {

// Root of a continuous, strictly increasing scalar function, to full double precision.
template <class F> double increasing_root(F f, double guess) {
  double f0 = f(guess);
  if (f0 == 0.0) { return guess; }
  double step = std::max(1.0, std::abs(guess));
  double lo = guess;
  double hi = guess;
  double flo = f0;
  double fhi = f0;
  if (f0 < 0.0) {
    for (int k = 0; k < 2100 && fhi < 0.0; ++k) {
      lo = hi;
      flo = fhi;
      hi = lo + step;
      step *= 2.0;
      fhi = f(hi);
    }
  } else {
    for (int k = 0; k < 2100 && flo > 0.0; ++k) {
      hi = lo;
      fhi = flo;
      lo = hi - step;
      step *= 2.0;
      flo = f(lo);
    }
  }
  if (flo == 0.0) { return lo; }
  if (fhi == 0.0) { return hi; }
  if (!(flo < 0.0 && fhi > 0.0)) { throw SolverError("increasing_root: failed to bracket a root"); }
  std::uintmax_t iters = 300;
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(53), iters);
  return a + 0.5 * (b - a);
}

// Newton's method kept inside the bracket [lo, hi] (f(lo) <= 0 <= f(hi), f increasing);
// steps that leave the bracket or fail to halve |f| fall back to bisection.
template <class F, class DF> double safeguarded_newton(F f, DF df, double lo, double hi) {
  double x = hi;
  double fx = f(x);
  for (int k = 0; k < 200 && fx != 0.0; ++k) {
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (!(hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::abs(hi))) { break; }
    const double d = df(x);
    double next = x - fx / d;
    if (!std::isfinite(next) || next <= lo || next >= hi) { next = lo + 0.5 * (hi - lo); }
    const double fnext = f(next);
    if (std::abs(fnext) > 0.5 * std::abs(fx)) {
      const double mid = lo + 0.5 * (hi - lo);
      if (next != mid) {
        x = next;
        fx = fnext;
        if (fx < 0.0) {
          lo = x;
        } else {
          hi = x;
        }
        next = lo + 0.5 * (hi - lo);
        x = next;
        fx = f(x);
        continue;
      }
    }
    x = next;
    fx = fnext;
  }
  return x;
}

// Strongly convex coordinate-separable-plus-smooth objective
//
//   1/2 w'Qw + c'w + a sum |w_i|^p / p + sum_k gamma_k 1/2 ||w||_{p_k}^2 + l1 ||w||_1 + box(w)
//
// minimized by exact coordinate descent.
struct Objective {
  Matrix Q;
  DualVector c;
  double a = 0.0;
  double p = 2.0;
  std::vector<std::pair<double, double>> pnorm;
  double l1 = 0.0;
  std::optional<Vector> lo;
  std::optional<Vector> hi;
};

double coordinate_minimizer(const Objective& obj, const Vector& w, Eigen::Index i) {
  const Eigen::Index n = w.size();
  const double qii = obj.Q(i, i);
  const double r = obj.c[i] + obj.Q.row(i).dot(w) - qii * w[i];

  std::vector<double> rest(obj.pnorm.size(), 0.0);
  for (std::size_t k = 0; k < obj.pnorm.size(); ++k) {
    const double pk = obj.pnorm[k].second;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) { rest[k] += std::pow(std::abs(w[j]), pk); }
    }
  }
  const bool affine = obj.a == 0.0 && obj.pnorm.empty();

  const auto deriv = [&](double s) {
    double d = qii * s + r;
    if (s != 0.0) {
      const double as = std::abs(s);
      if (obj.a != 0.0) { d += std::copysign(obj.a * std::pow(as, obj.p - 1.0), s); }
      for (std::size_t k = 0; k < obj.pnorm.size(); ++k) {
        const auto [gamma, pk] = obj.pnorm[k];
        const double nrm = std::pow(rest[k] + std::pow(as, pk), 1.0 / pk);
        d += std::copysign(gamma * nrm * std::pow(as / nrm, pk - 1.0), s);
      }
    }
    return d;
  };
  const auto solve = [&](double shift) {
    if (affine) { return -(r + shift) / qii; }
    return increasing_root([&](double s) { return deriv(s) + shift; }, w[i]);
  };

  double s = 0.0;
  if (obj.l1 > 0.0) {
    const double d0 = deriv(0.0);
    // s < 0 solves deriv(s) = l1, s > 0 solves deriv(s) = -l1.
    if (d0 > obj.l1) {
      s = solve(-obj.l1);
    } else if (d0 < -obj.l1) {
      s = solve(obj.l1);
    }
  } else {
    s = solve(0.0);
  }
  if (obj.lo) { s = std::clamp(s, (*obj.lo)[i], (*obj.hi)[i]); }
  return s;
}

int coordinate_descent(const Objective& obj, Vector& w, int max_sweeps) {
  if (obj.lo) { w = w.cwiseMax(*obj.lo).cwiseMin(*obj.hi); }
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double s = coordinate_minimizer(obj, w, i);
      change = std::max(change, std::abs(s - w[i]));
      w[i] = s;
    }
    if (change <= 1e-15 * w.cwiseAbs().maxCoeff() || change == 0.0) { return sweep; }
  }
  return max_sweeps;
}

bool is_symmetric(const Matrix& A) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

bool is_identity(const Matrix& A) { return A.isIdentity(0.0); }

struct BStructure {
  bool power = false;   // B = J_p with p < 2
  Matrix A;             // linear B: w -> A w + c
  DualVector c;
};

BStructure classify_b(const OperatorSpec& B, const Space& s) {
  const auto n = static_cast<Eigen::Index>(s.dim());
  const MonotoneParts parts = decompose(B, s.dim());
  if (parts.l1 != 0.0 || parts.has_box()) {
    throw ValidationError("resolvent: B = " + B.name() + " must be single-valued");
  }
  if (strong_monotonicity_constant(B, s) <= 0.0) {
    throw ValidationError("resolvent: B = " + B.name() + " is not certified strongly monotone on this space");
  }
  BStructure out;
  out.c = parts.offset;
  if (!parts.pnorm.empty()) {
    if (parts.linear || parts.pnorm.size() != 1 || parts.pnorm[0].first != 1.0 || parts.pnorm[0].second != s.p() ||
        !parts.offset.isZero(0.0)) {
      throw ValidationError("resolvent: unsupported B = " + B.name());
    }
    out.power = true;
    return out;
  }
  out.A = parts.linear ? *parts.linear : Matrix::Zero(n, n);
  return out;
}

Vector linear_solve(const Matrix& M, const DualVector& rhs) {
  const auto lu = M.fullPivLu();
  Vector w = lu.solve(rhs);
  w += lu.solve(rhs - M * w);
  return w;
}

Vector soft_threshold(const DualVector& y, double thresh) {
  Vector w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = std::abs(y[i]) - thresh;
    w[i] = m > 0.0 ? std::copysign(m, y[i]) : 0.0;
  }
  return w;
}

// Solves w + kappa J_r(w) = y for kappa > 0, 1 < r < 2: coordinates keep the sign of y and
// |w_i| solves s + kappa t^{2-r} s^{r-1} = |y_i| with t = ||w||_r found by an outer scalar search.
Vector pnorm_prox(const DualVector& y, double kappa, double r, int& iterations) {
  const Eigen::Index n = y.size();
  Vector mag(n);
  const auto inner = [&](double t) {
    const double k = kappa * std::pow(t, 2.0 - r);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double target = std::abs(y[i]);
      if (target == 0.0 || k == 0.0) {
        mag[i] = target;
        continue;
      }
      const auto fn = [&](double s) { return s + k * std::pow(s, r - 1.0) - target; };
      const auto dfn = [&](double s) { return 1.0 + k * (r - 1.0) * std::pow(s, r - 2.0); };
      mag[i] = safeguarded_newton(fn, dfn, 0.0, target);
    }
    return lp_norm(mag, r);
  };
  const double hi = lp_norm(y, r);
  Vector w = Vector::Zero(n);
  if (hi == 0.0) { return w; }
  const auto phi = [&](double t) {
    ++iterations;
    return inner(t) - t;
  };
  double lo = 0.0;
  double flo = phi(lo);
  double fhi = phi(hi);
  double t = hi;
  if (fhi < 0.0 && flo > 0.0) {
    std::uintmax_t iters = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(phi, lo, hi, flo, fhi,
                                                          boost::math::tools::eps_tolerance<double>(53), iters);
    t = a + 0.5 * (b - a);
  }
  inner(t);
  for (Eigen::Index i = 0; i < n; ++i) { w[i] = std::copysign(mag[i], y[i]); }
  return w;
}

// (J_p + lambda T)^{-1}(y): for fixed t, replacing ||w||^{2-p} by t^{2-p} turns the problem into a
// separable-power objective; ||w(t)||_p - t is strictly decreasing in t and its root gives the solution.
Vector power_b_solve(Objective obj, const Space& s, int max_sweeps, int& iterations) {
  const double p = s.p();
  obj.p = p;
  Vector w = Vector::Zero(static_cast<Eigen::Index>(s.dim()));
  const auto solve_at = [&](double t) {
    obj.a = std::pow(t, 2.0 - p);
    iterations += coordinate_descent(obj, w, max_sweeps);
    return lp_norm(w, p);
  };
  const auto phi = [&](double t) { return solve_at(t) - t; };

  double hi = 1.0;
  double fhi = phi(hi);
  for (int k = 0; k < 2000 && fhi > 0.0; ++k) {
    hi *= 2.0;
    fhi = phi(hi);
  }
  double lo = hi;
  double flo = fhi;
  if (fhi == 0.0) { return w; }
  for (int k = 0; k < 2000 && flo <= 0.0 && lo > 1e-300; ++k) {
    hi = lo;
    fhi = flo;
    lo *= 0.5;
    flo = phi(lo);
  }
  if (flo <= 0.0) {
    solve_at(lo);
    return w;
  }
  if (fhi > 0.0) { throw SolverError("resolvent: failed to bracket ||w||"); }
  std::uintmax_t iters = 300;
  const auto [a, b] =
      boost::math::tools::toms748_solve(phi, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(53), iters);
  solve_at(a + 0.5 * (b - a));
  return w;
}

DualVector dual_duality_map(const DualVector& y, double q) {
  const double nrm = lp_norm(y, q);
  DualVector w = DualVector::Zero(y.size());
  if (nrm == 0.0) { return w; }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0) { w[i] = std::copysign(nrm * std::pow(std::abs(y[i]) / nrm, q - 1.0), y[i]); }
  }
  return w;
}

} // namespace

DualVector apply_single_valued(const OperatorSpec& B, const Space& s, const Vector& w) {
  s.check(w);
  const MonotoneParts parts = decompose(B, s.dim());
  if (parts.l1 != 0.0 || parts.has_box()) { throw ValidationError(B.name() + " is not single-valued"); }
  return parts.smooth(w);
}

double residual_of(const OperatorSpec& B, const OperatorSpec& T, const Space& s, double lambda, const DualVector& y,
                   const Vector& w) {
  s.check(y);
  s.check(w);
  const DualVector wp = apply_single_valued(B, s, w);
  const DualVector t = (y - wp) / lambda;
  return lambda * distance_to_values(T, w, t, s.q());
}

ResolventResult resolvent(const OperatorSpec& B, const OperatorSpec& T, const Space& s, double lambda,
                          const DualVector& y, const ResolventOptions& opts) {
  if (!std::isfinite(lambda) || !(lambda > 0.0)) { throw ValidationError("resolvent: lambda must be > 0"); }
  s.check(y);
  const auto n = static_cast<Eigen::Index>(s.dim());
  const BStructure bs = classify_b(B, s);
  const MonotoneParts tp = decompose(T, s.dim());

  ResolventResult res;
  const bool b_identity = !bs.power && is_identity(bs.A) && bs.c.isZero(0.0);
  const bool t_zero = !tp.linear && tp.is_linear() && tp.offset.isZero(0.0);
  const bool t_only_pnorm = !tp.linear && tp.offset.isZero(0.0) && tp.l1 == 0.0 && !tp.has_box() && tp.pnorm.size() == 1;
  const bool t_only_l1 = !tp.linear && tp.offset.isZero(0.0) && tp.pnorm.empty() && tp.l1 > 0.0 && !tp.has_box();
  const bool t_only_box = !tp.linear && tp.offset.isZero(0.0) && tp.pnorm.empty() && tp.l1 == 0.0 && tp.has_box();

  if (b_identity && t_zero) {
    res.w = y;
    res.method = ResolventMethod::closed_form;
  } else if (b_identity && tp.is_linear() && tp.linear && is_identity(*tp.linear) && tp.offset.isZero(0.0)) {
    res.w = y / (1.0 + lambda);
    res.method = ResolventMethod::closed_form;
  } else if (b_identity && t_only_l1) {
    res.w = soft_threshold(y, lambda * tp.l1);
    res.method = ResolventMethod::closed_form;
  } else if (b_identity && t_only_box) {
    res.w = y.cwiseMax(*tp.lo).cwiseMin(*tp.hi);
    res.method = ResolventMethod::closed_form;
  } else if (b_identity && t_only_pnorm) {
    const auto [coef, r] = tp.pnorm.front();
    res.w = pnorm_prox(y, lambda * coef, r, res.iterations);
    res.method = ResolventMethod::scalar_newton;
  } else if (bs.power && t_zero) {
    res.w = dual_duality_map(y, s.q());
    res.method = ResolventMethod::closed_form;
  } else if (!bs.power && tp.is_linear()) {
    const Matrix M = tp.linear ? Matrix(bs.A + lambda * *tp.linear) : bs.A;
    res.w = linear_solve(M, y - bs.c - lambda * tp.offset);
    res.method = ResolventMethod::linear_solve;
  } else {
    if (tp.linear && !is_symmetric(*tp.linear)) {
      throw ValidationError("resolvent: nonsymmetric linear part of T = " + T.name() + " needs a linear B and linear T");
    }
    if (!bs.power && !is_symmetric(bs.A)) {
      throw ValidationError("resolvent: nonsymmetric B = " + B.name() + " is only supported with linear T");
    }
    Objective obj;
    obj.Q = bs.power ? Matrix::Zero(n, n) : bs.A;
    if (tp.linear) { obj.Q += lambda * *tp.linear; }
    obj.c = bs.c + lambda * tp.offset - y;
    for (const auto& [coef, r] : tp.pnorm) { obj.pnorm.emplace_back(lambda * coef, r); }
    obj.l1 = lambda * tp.l1;
    obj.lo = tp.lo;
    obj.hi = tp.hi;
    if (bs.power) {
      res.w = power_b_solve(std::move(obj), s, opts.max_iterations, res.iterations);
    } else {
      res.w = Vector::Zero(n);
      res.iterations = coordinate_descent(obj, res.w, opts.max_iterations);
    }
    res.method = ResolventMethod::convex_min;
  }

  res.w_prime = apply_single_valued(B, s, res.w);
  res.t_element = (y - res.w_prime) / lambda;
  res.residual = lambda * distance_to_values(T, res.w, res.t_element, s.q());
  if (res.method == ResolventMethod::convex_min) {
    const double c = strong_monotonicity_constant(B, s);
    res.optimality_gap = res.residual * res.residual / (2.0 * c);
  }

  const bool iterative = res.method == ResolventMethod::convex_min || res.method == ResolventMethod::scalar_newton;
  // Relative to the data: y - w' carries rounding of order eps * ||y||.
  const double tol = (iterative ? opts.iterative_tol : opts.closed_form_tol) * std::max(1.0, norm_dual(s, y));
  if (!(res.residual <= tol)) {
    throw ResolventFailure("resolvent (" + B.name() + " + lambda " + T.name() + ") via " +
                               std::string(to_string(res.method)) + " has residual " + std::to_string(res.residual) +
                               " above tolerance",
                           res);
  }
  return res;
}

} // namespace fitzcert
