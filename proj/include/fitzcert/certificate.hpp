#pragma once

#include "fitzcert/operator.hpp"
#include "fitzcert/resolvent.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace fitzcert {

enum class CertificateKind { carlier_hilbert, gci, two_uc, sfi_chain, sfi_distance, prop_strmono };

std::string_view to_string(CertificateKind k);
std::optional<CertificateKind> parse_kind(std::string_view s);

/// One machine-checked instance of a lower bound on the Fitzpatrick gap
/// F_T(x, v) - <x, v> (or, for prop_strmono, on a strong monotonicity ratio).
struct CertificateRecord {
  CertificateKind kind = CertificateKind::carlier_hilbert;
  std::string t_name;
  std::optional<std::string> b_name;
  double p = 2.0;
  Vector x;
  DualVector v;
  std::optional<double> lambda;
  double rhs = 0.0;
  double gap_est = 0.0;
  std::optional<double> gap_exact;
  double slack = 0.0;
  bool pass = false;
  double tol = 0.0;
  double residual = 0.0; // largest resolvent residual behind rhs
  std::optional<double> optimality_gap;
  std::optional<std::string> method;
  int iterations = 0;
  // sfi_distance only: squared graph distance and the 1/4-coefficient comparison bound.
  std::optional<double> distance_sq;
  std::optional<double> quarter_rhs;
  std::optional<double> quarter_slack;
  // Set when the evaluation failed (the record then never passes).
  std::optional<std::string> error;
};

struct CertificateOptions {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  std::size_t cap = 16;
  ResolventOptions solver;
};

/// Fitzpatrick gap >= (1/lambda) ||x - (I + lambda T)^{-1}(x + lambda v)||^2 (Hilbert space only).
CertificateRecord carlier_hilbert(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                                  double lambda, const CertificateOptions& opts = {},
                                  const GraphSample* sample = nullptr);

/// Fitzpatrick gap >= (c/lambda) max_{x' in Bx} ||x - (B + lambda T)^{-1}(x' + lambda v)||^2
/// with c the catalog strong monotonicity constant of B.
CertificateRecord gci(const OperatorSpec& B, const OperatorSpec& T, const Space& s, const Vector& x,
                      const DualVector& v, double lambda, const CertificateOptions& opts = {},
                      const GraphSample* sample = nullptr);

/// gci with B = J_p and c = mu / 2, mu = (p - 1) / 8.
CertificateRecord two_uc(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v, double lambda,
                         const CertificateOptions& opts = {}, const GraphSample* sample = nullptr);

/// Fitzpatrick gap >= lambda / (1 + lambda^2) (||x - w||^2 + ||z - v||^2) with w the resolvent
/// point and z = (x - w) / lambda + v in T(w) (Hilbert space only).
CertificateRecord sfi_chain(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                            double lambda, const CertificateOptions& opts = {}, const GraphSample* sample = nullptr);

/// Fitzpatrick gap >= 1/2 dist((x, v), G(T))^2 for operators with an exact graph distance
/// (identity, zero, linear, box normal cone). Also reports the 1/4-coefficient bound.
CertificateRecord sfi_distance(const OperatorSpec& T, const Space& s, const Vector& x, const DualVector& v,
                               const CertificateOptions& opts = {}, const GraphSample* sample = nullptr);

/// Exact squared distance from (x, v) to the graph of T; absent for unsupported families.
std::optional<double> graph_distance_sq(const OperatorSpec& T, const Vector& x, const DualVector& v);

/// <x - y, u - v> >= (m mu / 2) ||x - y||^2 over the sampled pairs, for f strongly convex
/// with constant m. rhs = m mu / 2 and gap_est = the probed minimum ratio.
CertificateRecord prop_strmono(const FunctionSpec& f, const Space& s, double m,
                               const std::vector<std::pair<Vector, Vector>>& pairs,
                               const CertificateOptions& opts = {});

} // namespace fitzcert
