#pragma once

#include "fitzcert/function.hpp"
#include "fitzcert/space.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fitzcert {

/// Maximally monotone operators X => X* with an exact membership test.
class OperatorSpec {
public:
  struct Identity {};
  struct Zero {};
  /// x -> A x with A + A' positive semidefinite.
  struct LinearPSD {
    Matrix A;
  };
  struct Subdifferential {
    FunctionSpec f;
  };
  struct NormalConeBox {
    Vector lo;
    Vector hi;
  };
  /// Normalized duality map of l^p, i.e. the subdifferential of 1/2 ||.||_p^2.
  struct DualityMap {
    double p;
  };

  using Variant = std::variant<Identity, Zero, LinearPSD, Subdifferential, NormalConeBox, DualityMap>;

  static OperatorSpec identity();
  static OperatorSpec zero();
  static OperatorSpec linear_psd(Matrix A);
  static OperatorSpec subdifferential(FunctionSpec f);
  static OperatorSpec normal_cone_box(Vector lo, Vector hi);
  static OperatorSpec duality_map(double p);

  const Variant& variant() const { return v_; }

  template <typename T> const T* get() const { return std::get_if<T>(&v_); }

  std::string name() const;
  void check_dim(std::size_t n) const;

private:
  explicit OperatorSpec(Variant v) : v_{std::move(v)} {}
  Variant v_;
};

/// Graph structure shared by every catalog operator:
///
///   T(x) = A x + c + sum_k coef_k J_{p_k}(x) + prod_i I_i(x)
///
/// where the interval I_i(x) collects the l1 subdifferential and the box
/// normal cone in coordinate i. dom T is the box (all of R^n without one).
struct MonotoneParts {
  std::optional<Matrix> linear;
  DualVector offset;
  std::vector<std::pair<double, double>> pnorm; // (coef, p), p < 2
  double l1 = 0.0;
  std::optional<Vector> lo;
  std::optional<Vector> hi;

  bool has_box() const { return lo.has_value(); }
  bool is_linear() const { return pnorm.empty() && l1 == 0.0 && !has_box(); }
  bool in_domain(const Vector& x) const;

  /// Single-valued part A x + c + sum coef J_p(x).
  DualVector smooth(const Vector& x) const;
  /// Closed interval I_i(x) (endpoints may be infinite). Requires x in domain.
  std::pair<double, double> interval(const Vector& x, Eigen::Index i) const;
};

MonotoneParts decompose(const OperatorSpec& T, std::size_t n);

/// Ray ladder used to sample unbounded normal-cone directions.
inline constexpr std::array<double, 5> kRayLadder{0.0, 0.5, 1.0, 2.0, 4.0};

/// Finite list of exact members of T(x), ordered lexicographically and truncated to `cap`.
///
/// Single-valued operators give a singleton. Bounded set-valued coordinates
/// contribute their two endpoints; half-line coordinates (normal cone faces)
/// contribute the endpoint shifted by the ray ladder. Throws DomainError when
/// x is outside dom T.
std::vector<DualVector> representatives(const OperatorSpec& T, const Vector& x, std::size_t cap);

/// Membership w in T(x), exact up to the rounding of w - (single-valued part);
/// tol adds a relative slack on top.
bool contains(const OperatorSpec& T, const Vector& x, const DualVector& w, double tol = 0.0);

/// l^r distance from u to the set T(x); +infinity outside dom T.
double distance_to_values(const OperatorSpec& T, const Vector& x, const DualVector& u, double r);

/// Nearest point of T(x) to u (coordinatewise clamp onto the interval product).
DualVector project_onto_values(const OperatorSpec& T, const Vector& x, const DualVector& u);

enum class Provenance { grid, witness, user };

struct GraphPair {
  Vector z;
  DualVector w;
  Provenance tag;
};

struct GraphSample {
  std::vector<GraphPair> pairs;
};

struct Region {
  Vector lo;
  Vector hi;
};

/// Grid over `region` (grid_per_dim points per axis, endpoints included),
/// each grid point in dom T paired with its representatives; `extra` pairs are
/// appended after an exact membership check (ValidationError on failure).
GraphSample graph_sample(const OperatorSpec& T, const Region& region, int grid_per_dim,
                         std::size_t cap, const std::vector<std::pair<Vector, DualVector>>& extra = {});

/// min over pairs and representative selections of <x - y, u - v> / ||x - y||^2.
/// Coincident pairs are skipped; throws ValidationError if all are coincident.
double strong_mono_probe(const OperatorSpec& B, const std::vector<std::pair<Vector, Vector>>& pairs,
                         const Space& s, std::size_t cap = 64);

/// Strong monotonicity constant the catalog certifies for B on `s`
/// (0 when B is not known to be strongly monotone).
double strong_monotonicity_constant(const OperatorSpec& B, const Space& s);

/// f with T = df, when T has that form (identity and symmetric linear maps included).
std::optional<FunctionSpec> as_subdifferential(const OperatorSpec& T, std::size_t n);

} // namespace fitzcert
