#include "oracles.hpp"

#include <doctest.h>

#include "fitzcert/error.hpp"
#include "fitzcert/certificate.hpp"

using namespace fitzcert;

namespace {

const Space H2(2, 2.0);

Vector v2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

} // namespace

TEST_CASE("carlier on the identity is an equality at lambda = 1") {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::uniform(gen, 2, -5, 5);
    const Vector v = oracle::uniform(gen, 2, -5, 5);
    const auto r = carlier_hilbert(OperatorSpec::identity(), H2, x, v, 1.0);
    CHECK(r.rhs == doctest::Approx(0.25 * (x - v).squaredNorm()).epsilon(1e-14));
    CHECK(std::abs(r.slack) <= 1e-10);
    CHECK(r.pass);
  }
}

TEST_CASE("carlier on the zero operator at v = 0") {
  const auto r = carlier_hilbert(OperatorSpec::zero(), H2, v2(1, -2), Vector::Zero(2), 0.5);
  CHECK(r.rhs == 0.0);
  CHECK(*r.gap_exact == 0.0);
  CHECK(r.pass);
}

TEST_CASE("hilbert-only certificates reject p != 2") {
  const Space s(2, 1.5);
  CHECK_THROWS_AS(carlier_hilbert(OperatorSpec::identity(), s, v2(1, 0), v2(0, 1), 1.0), ValidationError);
  CHECK_THROWS_AS(sfi_chain(OperatorSpec::identity(), s, v2(1, 0), v2(0, 1), 1.0), ValidationError);
  CHECK_THROWS_AS(sfi_distance(OperatorSpec::identity(), s, v2(1, 0), v2(0, 1)), ValidationError);
  CHECK_THROWS_AS(carlier_hilbert(OperatorSpec::identity(), H2, v2(1, 0), v2(0, 1), 0.0), ValidationError);
}

TEST_CASE("gci with B = I reproduces carlier bitwise") {
  std::mt19937_64 gen(2);
  const auto T = OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1.0));
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::uniform(gen, 2, -5, 5);
    const Vector v = oracle::uniform(gen, 2, -5, 5);
    const auto a = carlier_hilbert(T, H2, x, v, 0.5);
    const auto b = gci(OperatorSpec::identity(), T, H2, x, v, 0.5);
    CHECK(a.rhs == b.rhs);
    CHECK(a.gap_est == b.gap_est);
    CHECK(a.slack == b.slack);
  }
}

TEST_CASE("gci rejects B that is not strongly monotone") {
  CHECK_THROWS_AS(gci(OperatorSpec::zero(), OperatorSpec::identity(), H2, v2(1, 0), v2(0, 1), 1.0), ValidationError);
}

TEST_CASE("two_uc at p = 2 is carlier divided by 16") {
  std::mt19937_64 gen(3);
  const auto T = OperatorSpec::subdifferential(
      FunctionSpec::quadratic((Matrix(2, 2) << 2, 0.5, 0.5, 1).finished(), v2(0.1, -0.2)));
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::uniform(gen, 2, -5, 5);
    const Vector v = oracle::uniform(gen, 2, -5, 5);
    const auto c = carlier_hilbert(T, H2, x, v, 2.0);
    const auto t = two_uc(T, H2, x, v, 2.0);
    CHECK(std::abs(t.rhs - c.rhs / 16) <= 1e-12 * std::max(c.rhs / 16, 1e-300));
    CHECK(t.pass);
  }
}

TEST_CASE("two_uc at a graph point has zero bound") {
  const Space s(2, 1.5);
  const auto T = OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1.0));
  const Vector x = v2(0.5, -1.0);
  const DualVector u = representatives(T, x, 1).front();
  const auto r = two_uc(T, s, x, u, 1.0);
  CHECK(r.rhs <= 1e-16);
  CHECK(r.pass);
}

TEST_CASE("sfi_chain equality at lambda = 1 and decay for large lambda") {
  std::mt19937_64 gen(4);
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::uniform(gen, 2, -5, 5);
    const Vector v = oracle::uniform(gen, 2, -5, 5);
    const auto r = sfi_chain(OperatorSpec::identity(), H2, x, v, 1.0);
    CHECK(std::abs(r.slack) <= 1e-10);
    const auto big = sfi_chain(OperatorSpec::identity(), H2, x, v, 1e6);
    CHECK(big.rhs < 1e-5 * (1.0 + (x - v).squaredNorm()));
    CHECK(big.pass);
  }
}

TEST_CASE("sfi_distance tightness for the identity and the quarter comparison") {
  std::mt19937_64 gen(5);
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::uniform(gen, 3, -5, 5);
    const Vector v = oracle::uniform(gen, 3, -5, 5);
    const auto r = sfi_distance(OperatorSpec::identity(), Space(3, 2.0), x, v);
    CHECK(std::abs(r.slack) <= 1e-10);
    CHECK(std::abs(*r.quarter_slack - 0.125 * (x - v).squaredNorm()) <= 1e-10);
  }
  const auto graph = sfi_distance(OperatorSpec::identity(), H2, v2(1, 2), v2(1, 2));
  CHECK(*graph.distance_sq == 0.0);
  CHECK(graph.rhs == 0.0);
}

TEST_CASE("graph distances against branch scans and grid minimization") {
  std::mt19937_64 gen(6);
  const Vector lo = v2(-1, 0);
  const Vector hi = v2(1, 2);
  const auto box = OperatorSpec::normal_cone_box(lo, hi);
  Matrix A(2, 2);
  A << 2, 1, -1, 3;
  for (int k = 0; k < 100; ++k) {
    const Vector x = oracle::uniform(gen, 2, -5, 5);
    const Vector v = oracle::uniform(gen, 2, -5, 5);
    double want = 0.0;
    for (int i = 0; i < 2; ++i) { want += oracle::box_graph_dist_sq_1d(x[i], v[i], lo[i], hi[i]); }
    CHECK(*graph_distance_sq(box, x, v) == doctest::Approx(want).epsilon(1e-9));

    const auto lin = [&](const oracle::Vec& w) { return (x - w).squaredNorm() + (v - A * w).squaredNorm(); };
    const double brute = lin(oracle::argmin_2d(lin, x, 20.0));
    CHECK(*graph_distance_sq(OperatorSpec::linear_psd(A), x, v) == doctest::Approx(brute).epsilon(1e-9));
    CHECK(*graph_distance_sq(OperatorSpec::zero(), x, v) == doctest::Approx(v.squaredNorm()));
  }
  CHECK_FALSE(graph_distance_sq(OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1)), v2(0, 0), v2(0, 0)));
  CHECK_THROWS_AS(sfi_distance(OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1)), H2, v2(0, 0), v2(0, 0)),
                  ValidationError);
}

TEST_CASE("points outside the domain are legal") {
  const auto box = OperatorSpec::normal_cone_box(v2(-1, -1), v2(1, 1));
  const auto r = carlier_hilbert(box, H2, v2(3, -4), v2(0.5, 0.5), 1.0);
  CHECK(r.pass);
  CHECK(r.rhs > 0.0);
  CHECK(sfi_distance(box, H2, v2(3, -4), v2(0.5, 0.5)).pass);
}

TEST_CASE("witness dominance holds structurally") {
  std::mt19937_64 gen(7);
  const Space s(3, 1.5);
  const auto T = OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1.0));
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::uniform(gen, 3, -5, 5);
    const Vector v = oracle::uniform(gen, 3, -5, 5);
    for (const double lambda : {0.1, 1.0, 10.0}) {
      const auto r = two_uc(T, s, x, v, lambda);
      CHECK(r.gap_est >= r.rhs - 10 * r.residual);
      CHECK(r.residual <= 1e-8);
    }
  }
}

TEST_CASE("slack sign and tolerance") {
  const auto r = carlier_hilbert(OperatorSpec::identity(), H2, v2(1, 2), v2(3, -1), 0.25);
  CHECK(r.pass == (r.slack >= -r.tol));
  CHECK(r.tol == doctest::Approx(1e-6 + 1e-6 * std::max(1.0, std::abs(*r.gap_exact))));
  CHECK(*r.gap_exact >= r.gap_est - r.tol);
}

TEST_CASE("prop_strmono") {
  std::mt19937_64 gen(8);
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int k = 0; k < 500; ++k) { pairs.emplace_back(oracle::uniform(gen, 2, -3, 3), oracle::uniform(gen, 2, -3, 3)); }

  const auto hilbert = prop_strmono(FunctionSpec::half_p_norm_sq(2.0), H2, 1.0, pairs);
  CHECK(hilbert.rhs == 1.0 / 16);
  CHECK(hilbert.gap_est == doctest::Approx(1.0));
  CHECK(hilbert.pass);

  const auto lp = prop_strmono(FunctionSpec::half_p_norm_sq(1.5), Space(2, 1.5), 1.0, pairs);
  CHECK(lp.rhs == 0.03125);
  CHECK(lp.pass);

  const auto shift =
      prop_strmono(FunctionSpec::strongly_convex_shift(FunctionSpec::scaled_l1(1.0), 2.0), H2, 2.0, pairs);
  CHECK(shift.rhs == 0.125);
  CHECK(shift.pass);

  CHECK_THROWS_AS(prop_strmono(FunctionSpec::scaled_l1(1.0), H2, 1.0, pairs), ValidationError);
  CHECK_THROWS_AS(prop_strmono(FunctionSpec::half_p_norm_sq(2.0), H2, 2.0, pairs), ValidationError);
}
