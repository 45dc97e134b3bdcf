// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
// usage: acceptance [path/to/fitzcert]

#include "oracles.hpp"

#include "fitzcert/fitzpatrick.hpp"
#include "fitzcert/report.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace fitzcert;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) { detail = why; }
    pass = false;
  }
};

// Records behind the witness-dominance criterion, collected while the other criteria run.
std::vector<CertificateRecord> g_witness_records;

void collect(const Report& rep) {
  for (const auto& r : rep.records) {
    if (r.kind == CertificateKind::carlier_hilbert || r.kind == CertificateKind::gci ||
        r.kind == CertificateKind::two_uc || r.kind == CertificateKind::sfi_chain) {
      g_witness_records.push_back(r);
    }
  }
}

json cyclic(std::initializer_list<double> pattern, int n) {
  json a = json::array();
  const std::vector<double> p(pattern);
  for (int i = 0; i < n; ++i) { a.push_back(p[static_cast<std::size_t>(i) % p.size()]); }
  return a;
}

// 0.5^|i-j| is positive definite (Kac-Murdock-Szego).
json kms(int n) {
  json m = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int j = 0; j < n; ++j) { row.push_back(std::pow(0.5, std::abs(i - j))); }
    m.push_back(row);
  }
  return m;
}

std::vector<std::pair<std::string, json>> carlier_family(int n) {
  return {
      {"identity", {{"type", "identity"}}},
      {"zero", {{"type", "zero"}}},
      {"linear_psd(diag(2,3))", {{"type", "linear_psd"}, {"diag", {2, 3}}}},
      {"d quadratic",
       {{"type", "subdifferential"}, {"f", {{"type", "quadratic"}, {"matrix", kms(n)}, {"b", cyclic({0.5, -0.25}, n)}}}}},
      {"d scaled_l1", {{"type", "subdifferential"}, {"f", {{"type", "scaled_l1"}, {"alpha", 1.0}}}}},
      {"normal_cone_box", {{"type", "normal_cone_box"}, {"lo", -1.0}, {"hi", cyclic({1, 2}, n)}}},
  };
}

json scenario(int n, double p, const json& T, std::uint64_t seed, int count, const json& lambdas,
              const std::vector<std::string>& kinds) {
  return {{"schema_version", 1},
          {"space", {{"dim", n}, {"p", p}}},
          {"T", T},
          {"points", {{"seed", seed}, {"count", count}, {"range", {-5, 5}}}},
          {"lambda_grid", lambdas},
          {"kinds", kinds}};
}

Report verify(const json& j) { return run_verify(parse_scenario(j.dump())); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

Outcome carlier_soundness() {
  Outcome o;
  std::size_t records = 0;
  double worst = oracle::inf;
  for (const int n : {1, 2, 4, 8}) {
    for (const auto& [name, T] : carlier_family(n)) {
      const Report rep = verify(scenario(n, 2.0, T, 1000 + n, 1000, {0.1, 0.5, 1, 2, 10}, {"carlier_hilbert"}));
      collect(rep);
      for (const auto& r : rep.records) {
        ++records;
        worst = std::min(worst, r.slack);
        if (!(r.slack >= -1e-6)) { o.fail(name + " n=" + std::to_string(n) + " slack " + fmt(r.slack)); }
      }
    }
  }
  if (records != 4 * 6 * 1000 * 5) { o.fail("unexpected record count " + std::to_string(records)); }
  o.detail = o.pass ? std::to_string(records) + " records, min slack " + fmt(worst) : o.detail;
  return o;
}

Outcome equality_cases() {
  Outcome o;
  std::size_t checked = 0;
  for (const int n : {1, 2, 4, 8}) {
    const json T = {{"type", "identity"}};
    const Report rep = verify(scenario(n, 2.0, T, 2000 + n, 1000, {1}, {"carlier_hilbert", "sfi_distance"}));
    collect(rep);
    for (const auto& r : rep.records) {
      ++checked;
      if (!(std::abs(r.slack) <= 1e-10)) {
        o.fail(std::string(to_string(r.kind)) + " n=" + std::to_string(n) + " |slack| " + fmt(std::abs(r.slack)));
      }
      if (r.kind == CertificateKind::sfi_distance) {
        const double eighth = 0.125 * (r.x - r.v).squaredNorm();
        if (!(std::abs(*r.quarter_slack - eighth) <= 1e-10)) {
          o.fail("quarter slack off by " + fmt(std::abs(*r.quarter_slack - eighth)));
        }
      }
    }
  }
  if (o.pass) { o.detail = std::to_string(checked) + " records with |slack| <= 1e-10"; }
  return o;
}

Outcome gci_generalization() {
  Outcome o;
  std::size_t records = 0;
  double max_res = 0.0;
  const auto check_records = [&](const Report& rep, const std::string& what) {
    collect(rep);
    for (const auto& r : rep.records) {
      ++records;
      max_res = std::max(max_res, r.residual);
      if (!r.pass) { o.fail(what + " " + r.t_name + " slack " + fmt(r.slack) + (r.error ? " " + *r.error : "")); }
      if (!(r.residual <= 1e-8)) { o.fail(what + " residual " + fmt(r.residual)); }
    }
  };

  // B = I against carlier, record by record.
  for (const auto& [name, T] : carlier_family(2)) {
    json j = scenario(2, 2.0, T, 3001, 500, {0.1, 1, 10}, {"carlier_hilbert", "gci"});
    j["B"] = {{"type", "identity"}};
    const Report rep = verify(j);
    const std::size_t half = rep.records.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const auto& a = rep.records[i];
      const auto& b = rep.records[half + i];
      const bool same = a.rhs == b.rhs && a.gap_est == b.gap_est && a.slack == b.slack &&
                        a.gap_exact == b.gap_exact && a.residual == b.residual && a.x == b.x && a.v == b.v;
      if (!same) { o.fail("gci(B=I) differs from carlier on " + name); }
    }
    check_records(rep, "B=I");
  }

  // B = diag(2, 3): constant 2.
  {
    const Space s(2, 2.0);
    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 2, 3;
    if (strong_monotonicity_constant(OperatorSpec::linear_psd(D), s) != 2.0) { o.fail("c(diag(2,3)) != 2"); }
    std::vector<std::pair<std::string, json>> ts = carlier_family(2);
    ts.push_back({"linear_psd(skew)", {{"type", "linear_psd"}, {"matrix", {{2, 1}, {-1, 3}}}}});
    for (const auto& [name, T] : ts) {
      json j = scenario(2, 2.0, T, 3002, 500, {0.1, 1, 10}, {"gci"});
      j["B"] = {{"type", "linear_psd"}, {"diag", {2, 3}}};
      check_records(verify(j), "B=diag(2,3)");
    }
  }

  // B = J_p at p = 1.5: constant 1/32.
  {
    const Space s(2, 1.5);
    if (std::abs(strong_monotonicity_constant(OperatorSpec::duality_map(1.5), s) - 1.0 / 32) > 1e-15) {
      o.fail("c(J_1.5) != 1/32");
    }
    for (const int n : {2, 4}) {
      for (const auto& [name, T] : carlier_family(n)) {
        if (name.rfind("linear_psd", 0) == 0) { continue; }
        json j = scenario(n, 1.5, T, 3003, 500, {0.1, 1, 10}, {"gci"});
        j["B"] = {{"type", "duality_map"}};
        check_records(verify(j), "B=J_1.5");
      }
    }
  }
  if (o.pass) { o.detail = std::to_string(records) + " records, max residual " + fmt(max_res); }
  return o;
}

Outcome two_uc_theorem() {
  Outcome o;
  std::size_t records = 0;
  for (const double p : {1.25, 1.5, 1.75, 2.0}) {
    for (const int n : {2, 4}) {
      const auto fam = carlier_family(n);
      for (const auto& [name, T] : {fam[3], fam[4]}) {
        const Report rep = verify(scenario(n, p, T, 4000 + n, 500, {0.1, 1, 10}, {"two_uc"}));
        collect(rep);
        for (const auto& r : rep.records) {
          ++records;
          if (!r.pass) { o.fail(name + " p=" + fmt(p) + " slack " + fmt(r.slack) + (r.error ? " " + *r.error : "")); }
        }
      }
    }
  }
  // p = 2: rhs is exactly the carlier rhs over 16.
  for (const auto& [name, T] : carlier_family(2)) {
    const Report rep = verify(scenario(2, 2.0, T, 4100, 500, {0.1, 1, 10}, {"carlier_hilbert", "two_uc"}));
    const std::size_t half = rep.records.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const double c = rep.records[i].rhs / 16;
      const double t = rep.records[half + i].rhs;
      if (!(std::abs(t - c) <= 1e-12 * std::abs(c))) { o.fail(name + ": two_uc rhs != carlier rhs / 16"); }
    }
  }
  if (o.pass) { o.detail = std::to_string(records) + " records pass; p = 2 ratio exact to 1e-12"; }
  return o;
}

Outcome proposition() {
  Outcome o;
  const auto run = [&](double p, const json& f, double m) {
    json j = scenario(3, p, {{"type", "subdifferential"}, {"f", f}}, 5000, 10000, {1}, {"prop_strmono"});
    j["strong_convexity"] = {{"f", f}, {"m", m}};
    const Report rep = verify(j);
    const auto& r = rep.records.front();
    if (!(r.slack >= -1e-10)) { o.fail("prop_strmono p=" + fmt(p) + " slack " + fmt(r.slack)); }
    return r;
  };
  const auto a = run(1.5, {{"type", "half_p_norm_sq"}}, 1.0);
  const auto b = run(2.0, {{"type", "half_p_norm_sq"}}, 1.0);
  const auto c = run(2.0, {{"type", "strongly_convex_shift"}, {"base", {{"type", "scaled_l1"}}}, {"m", 2}}, 2.0);
  if (a.rhs != 0.03125 || b.rhs != 0.0625 || c.rhs != 0.125) { o.fail("unexpected bound m mu / 2"); }

  std::mt19937_64 gen(5001);
  double worst = 0.0;
  for (const double p : {1.25, 1.5, 1.75, 2.0}) {
    const Space s(4, p);
    for (int k = 0; k < 10000; ++k) {
      const Vector x = oracle::uniform(gen, 4, -5, 5);
      const double nx = oracle::lp(x, p);
      const DualVector jx = duality_map(s, x);
      worst = std::max({worst, std::abs(x.dot(jx) - nx * nx) / (nx * nx), std::abs(oracle::lp(jx, s.q()) - nx) / nx});
    }
  }
  if (!(worst <= 1e-12)) { o.fail("duality map identity off by " + fmt(worst) + " relative"); }
  if (o.pass) {
    o.detail = "probe minima " + fmt(a.gap_est) + ", " + fmt(b.gap_est) + ", " + fmt(c.gap_est) +
               "; duality identities to " + fmt(worst);
  }
  return o;
}

Outcome witness_dominance() {
  Outcome o;
  std::size_t bad = 0;
  for (const auto& r : g_witness_records) {
    if (!(r.gap_est >= r.rhs - 10 * r.residual)) {
      if (bad++ == 0) {
        o.fail(std::string(to_string(r.kind)) + " " + r.t_name + ": gap_est " + fmt(r.gap_est) + " < rhs " + fmt(r.rhs));
      }
    }
  }
  if (g_witness_records.empty()) { o.fail("no records collected"); }
  o.detail = o.pass ? std::to_string(g_witness_records.size()) + " records, zero exceptions"
                    : std::to_string(bad) + " exceptions; first: " + o.detail;
  return o;
}

Outcome sandwich_and_oracles() {
  Outcome o;
  std::mt19937_64 gen(7001);
  Matrix D = Matrix::Zero(2, 2);
  D.diagonal() << 2, 3;
  Matrix A(2, 2);
  A << 2, 1, -1, 3;
  const Region region{Vector::Constant(2, -3), Vector::Constant(2, 3)};

  // Sandwich on every operator with two or more sides.
  std::size_t sandwiches = 0;
  for (const auto& T : {OperatorSpec::identity(), OperatorSpec::zero(), OperatorSpec::linear_psd(D)}) {
    const GraphSample sample = graph_sample(T, region, 31, 4);
    for (int k = 0; k < 1000; ++k) {
      const Vector x = oracle::uniform(gen, 2, -5, 5);
      Vector v = oracle::uniform(gen, 2, -5, 5);
      if (T.get<OperatorSpec::Zero>() && k % 2 == 0) { v.setZero(); }
      const auto b = fitz_bounds(T, x, v, sample);
      const double tol = 1e-9 * std::max(1.0, std::abs(x.dot(v)) + std::abs(b.gap_lower));
      if (b.exact && !(b.lower <= *b.exact + tol)) { o.fail(T.name() + ": lower > exact"); }
      if (b.exact && b.upper && !(*b.exact <= *b.upper + tol)) { o.fail(T.name() + ": exact > upper"); }
      ++sandwiches;
    }
  }

  // Closed forms against the grid sup on [-2, 2]^2 with 201 points per axis.
  double max_grid_gap = 0.0;
  for (const Matrix& M : {Matrix(Matrix::Identity(2, 2)), A}) {
    const OperatorSpec T = M.isIdentity(0.0) ? OperatorSpec::identity() : OperatorSpec::linear_psd(M);
    const Matrix S = M + M.transpose();
    const double smax = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().maxCoeff();
    // Every point of the box is within half a cell (0.01) of the grid per axis.
    const double bound = 0.5 * smax * 2 * 0.01 * 0.01;
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::uniform(gen, 2, -1, 1);
      const Vector v = oracle::uniform(gen, 2, -1, 1);
      const double g = oracle::grid_gap([&](const oracle::Vec& y) { return oracle::Vec(M * y); }, x, v, -2, 2, 201);
      const double exact = *fitz_exact_gap(T, x, v);
      max_grid_gap = std::max(max_grid_gap, exact - g);
      if (!(exact >= g - 1e-6 && exact - g <= bound + 1e-6)) {
        o.fail(T.name() + ": closed form " + fmt(exact) + " vs grid " + fmt(g));
      }
    }
  }

  // Prox maps against 1-D scans (2-D for the non-separable p-norm).
  double max_prox = 0.0;
  const Space h(2, 2.0);
  const auto I = OperatorSpec::identity();
  struct Prox {
    OperatorSpec T;
    std::function<double(double)> h; // separable potential
    double lo = -100, hi = 100;         // effective domain
  };
  const std::vector<Prox> sep{
      {OperatorSpec::subdifferential(FunctionSpec::scaled_l1(1.0)), [](double t) { return std::abs(t); }},
      {OperatorSpec::normal_cone_box(Vector::Constant(2, -1), Vector::Constant(2, 2)),
       [](double) { return 0.0; }, -1, 2},
      {OperatorSpec::identity(), [](double t) { return 0.5 * t * t; }},
      {OperatorSpec::zero(), [](double) { return 0.0; }},
  };
  for (const double lambda : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    for (int k = 0; k < 100; ++k) {
      const Vector y = oracle::uniform(gen, 2, -5, 5);
      for (const auto& pr : sep) {
        const Vector w = resolvent(I, pr.T, h, lambda, y).w;
        for (Eigen::Index i = 0; i < 2; ++i) {
          const double b = oracle::argmin_1d(
              [&](double t) { return 0.5 * (t - y[i]) * (t - y[i]) + lambda * pr.h(t); }, pr.lo, pr.hi);
          max_prox = std::max(max_prox, std::abs(w[i] - b));
        }
      }
      const auto pn = OperatorSpec::subdifferential(FunctionSpec::half_p_norm_sq(1.5));
      const Vector w = resolvent(I, pn, h, lambda, y).w;
      const auto obj = [&](const oracle::Vec& z) {
        return 0.5 * (z - y).squaredNorm() + lambda * 0.5 * std::pow(oracle::lp(z, 1.5), 2);
      };
      max_prox = std::max(max_prox, (w - oracle::argmin_2d(obj, y, 20.0)).lpNorm<Eigen::Infinity>());
    }
  }
  if (!(max_prox <= 1e-6)) { o.fail("prox disagrees with brute force by " + fmt(max_prox)); }
  if (o.pass) {
    o.detail = std::to_string(sandwiches) + " sandwiches; grid gap <= " + fmt(max_grid_gap) + "; prox error " +
               fmt(max_prox);
  }
  return o;
}

Outcome lambda_prefactor() {
  Outcome o;
  const json j = scenario(2, 2.0, {{"type", "identity"}}, 8001, 500, {1}, {"sfi_chain"});
  const Report rep = run_sweep(j.dump(), {0.25, 0.5, 1, 2, 4}, {});
  collect(rep);
  const SummaryRow* best = nullptr;
  for (const auto& row : rep.summary) {
    if (best == nullptr || row.min_slack < best->min_slack) { best = &row; }
  }
  if (rep.summary.size() != 5 || best == nullptr) {
    o.fail("expected 5 cells");
    return o;
  }
  if (*best->lambda != 1.0 || !(std::abs(best->min_slack) <= 1e-10)) {
    o.fail("min slack " + fmt(best->min_slack) + " at lambda " + fmt(*best->lambda));
  }
  for (const auto& row : rep.summary) {
    if (*row.lambda != 1.0 && !(row.min_slack > 1e-10)) { o.fail("cell lambda " + fmt(*row.lambda) + " not positive"); }
    if (row.fails != 0) { o.fail("failing records at lambda " + fmt(*row.lambda)); }
  }
  if (o.pass) {
    std::string cells;
    for (const auto& row : rep.summary) { cells += " " + fmt(*row.lambda) + ":" + fmt(row.min_slack); }
    o.detail = "min slack per lambda" + cells;
  }
  return o;
}

std::vector<std::string> lines_without_summary(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (line.find("\"type\":\"summary\"") == std::string::npos) { out.push_back(line); }
  }
  return out;
}

Outcome reproducibility(const std::string& cli) {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("fitzcert_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  json j = scenario(2, 2.0, carlier_family(2)[5].second, 9001, 300, {0.1, 1, 10},
                    {"carlier_hilbert", "sfi_chain", "sfi_distance"});
  j["graph_sample"] = {{"region", {-3, 3}}, {"grid_per_dim", 7}};
  const fs::path file = dir / "scenario.json";
  std::ofstream(file) << j.dump(2);

  std::vector<std::vector<std::string>> runs;
  if (!cli.empty()) {
    for (const char* jobs : {"1", "3"}) {
      const fs::path out = dir / (std::string("run") + jobs + ".jsonl");
      const std::string cmd = "\"" + cli + "\" verify \"" + file.string() + "\" --out \"" + out.string() +
                              "\" --jobs " + jobs;
      if (std::system(cmd.c_str()) != 0) { o.fail("cli run failed: " + cmd); }
      runs.push_back(lines_without_summary(out));
    }
  }
  for (int rep = 0; rep < 2; ++rep) {
    const Report r = run_verify(load_scenario(file), RunOptions{rep == 0 ? 1u : 2u, std::nullopt});
    const fs::path out = dir / ("lib" + std::to_string(rep) + ".jsonl");
    std::ofstream os(out);
    write_jsonl(os, r);
    os.close();
    runs.push_back(lines_without_summary(out));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i] != runs[0]) { o.fail("run " + std::to_string(i) + " differs from run 0"); }
  }
  if (runs.front().size() != 1 + 300 * 3 + 300 * 3 + 300) { o.fail("unexpected line count"); }
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = std::to_string(runs.size()) + " runs" + (cli.empty() ? " (library only)" : " (cli and library)") +
               ", " + std::to_string(runs.front().size()) + " identical lines each";
  }
  return o;
}

} // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"carlier soundness", carlier_soundness},
      {"equality cases", equality_cases},
      {"gci generalization", gci_generalization},
      {"two_uc theorem", two_uc_theorem},
      {"strong monotonicity proposition", proposition},
      {"witness dominance", witness_dominance},
      {"sandwich and oracle agreement", sandwich_and_oracles},
      {"lambda prefactor", lambda_prefactor},
      {"reproducibility", [&] { return reproducibility(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].name << ": " << o.detail << " ["
              << fmt(secs) << "s]" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
