#pragma once

#include "fitzcert/error.hpp"
#include "fitzcert/operator.hpp"
#include "fitzcert/space.hpp"

#include <optional>
#include <string_view>

namespace fitzcert {

enum class ResolventMethod { closed_form, linear_solve, convex_min, scalar_newton };

std::string_view to_string(ResolventMethod m);

struct ResolventResult {
  Vector w;
  DualVector w_prime;   // element of B(w) used
  DualVector t_element; // (y - w_prime) / lambda, an element of T(w) up to the residual
  double residual = 0.0;
  int iterations = 0;
  ResolventMethod method = ResolventMethod::closed_form;
  // residual^2 / (2c) bound on g(w) - min g for the convex_min path.
  std::optional<double> optimality_gap;
};

// Residual tolerances are scaled by max(1, ||y||_*).
struct ResolventOptions {
  double closed_form_tol = 1e-10;
  double iterative_tol = 1e-8;
  int max_iterations = 100000;
};

class ResolventFailure : public SolverError {
public:
  ResolventFailure(const std::string& what, ResolventResult best)
      : SolverError(what), best_{std::move(best)} {}
  const ResolventResult& best() const { return best_; }

private:
  ResolventResult best_;
};

/// w = (B + lambda T)^{-1}(y), i.e. the unique w with y in B w + lambda T w.
///
/// B must be strongly monotone and either linear (identity, LinearPSD,
/// subdifferential of a quadratic) or the duality map of `s`. Closed forms
/// are used for B = I with the simple catalog operators; everything else is
/// solved as the minimization of the strongly convex potential whose
/// optimality condition is the inclusion.
ResolventResult resolvent(const OperatorSpec& B, const OperatorSpec& T, const Space& s, double lambda,
                          const DualVector& y, const ResolventOptions& opts = {});

/// Dual-norm distance from y to B w + lambda T(w); +infinity if w is outside dom T.
double residual_of(const OperatorSpec& B, const OperatorSpec& T, const Space& s, double lambda,
                   const DualVector& y, const Vector& w);

/// Element of B(w) for the single-valued operators admissible as B.
DualVector apply_single_valued(const OperatorSpec& B, const Space& s, const Vector& w);

} // namespace fitzcert
