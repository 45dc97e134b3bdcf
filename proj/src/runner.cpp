#include "fitzcert/runner.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

namespace fitzcert {

namespace {

struct Cell {
  CertificateKind kind;
  std::optional<double> lambda;
  std::size_t point;
};

bool lambda_free(CertificateKind k) { return k == CertificateKind::sfi_distance || k == CertificateKind::prop_strmono; }

std::vector<Cell> plan(const Scenario& sc) {
  std::vector<Cell> cells;
  for (const auto kind : sc.kinds) {
    if (kind == CertificateKind::prop_strmono) {
      cells.push_back({kind, std::nullopt, 0});
    } else if (lambda_free(kind)) {
      for (std::size_t k = 0; k < sc.points.count; ++k) { cells.push_back({kind, std::nullopt, k}); }
    } else {
      for (const double lambda : sc.lambda_grid) {
        for (std::size_t k = 0; k < sc.points.count; ++k) { cells.push_back({kind, lambda, k}); }
      }
    }
  }
  return cells;
}

struct Context {
  const Scenario& sc;
  CertificateOptions opts;
  std::optional<GraphSample> sample;
  std::vector<std::pair<Vector, Vector>> pairs;
};

CertificateRecord failed(const Context& ctx, const Cell& cell, const std::string& what) {
  CertificateRecord r;
  r.kind = cell.kind;
  r.t_name = ctx.sc.T.name();
  if (cell.kind == CertificateKind::gci && ctx.sc.B) { r.b_name = ctx.sc.B->name(); }
  if (cell.kind == CertificateKind::two_uc) { r.b_name = OperatorSpec::duality_map(ctx.sc.space.p()).name(); }
  if (cell.kind == CertificateKind::carlier_hilbert || cell.kind == CertificateKind::sfi_chain ||
      cell.kind == CertificateKind::sfi_distance) {
    r.b_name = OperatorSpec::identity().name();
  }
  r.p = ctx.sc.space.p();
  if (cell.kind != CertificateKind::prop_strmono) {
    auto [x, v] = scenario_point(ctx.sc, cell.point);
    r.x = std::move(x);
    r.v = std::move(v);
  }
  r.lambda = cell.lambda;
  r.rhs = std::numeric_limits<double>::quiet_NaN();
  r.gap_est = std::numeric_limits<double>::quiet_NaN();
  r.slack = -std::numeric_limits<double>::infinity();
  r.pass = false;
  r.error = what;
  return r;
}

CertificateRecord evaluate(const Context& ctx, const Cell& cell) {
  const Scenario& sc = ctx.sc;
  const GraphSample* sample = ctx.sample ? &*ctx.sample : nullptr;
  try {
    if (cell.kind == CertificateKind::prop_strmono) {
      return prop_strmono(sc.strong_convexity->f, sc.space, sc.strong_convexity->m, ctx.pairs, ctx.opts);
    }
    const auto [x, v] = scenario_point(sc, cell.point);
    switch (cell.kind) {
    case CertificateKind::carlier_hilbert:
      return carlier_hilbert(sc.T, sc.space, x, v, *cell.lambda, ctx.opts, sample);
    case CertificateKind::gci:
      return gci(*sc.B, sc.T, sc.space, x, v, *cell.lambda, ctx.opts, sample);
    case CertificateKind::two_uc:
      return two_uc(sc.T, sc.space, x, v, *cell.lambda, ctx.opts, sample);
    case CertificateKind::sfi_chain:
      return sfi_chain(sc.T, sc.space, x, v, *cell.lambda, ctx.opts, sample);
    case CertificateKind::sfi_distance:
      return sfi_distance(sc.T, sc.space, x, v, ctx.opts, sample);
    case CertificateKind::prop_strmono:
      break;
    }
  } catch (const ResolventFailure& e) {
    CertificateRecord r = failed(ctx, cell, e.what());
    r.residual = e.best().residual;
    r.iterations = e.best().iterations;
    r.method = std::string(to_string(e.best().method));
    return r;
  } catch (const std::exception& e) {
    return failed(ctx, cell, e.what());
  }
  return failed(ctx, cell, "unknown certificate kind");
}

template <typename F> void parallel_for(std::size_t count, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) { body(i); }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) { body(i); }
    });
  }
  for (auto& w : workers) { w.join(); }
}

std::vector<CertificateRecord> run_cells(const Scenario& sc, const RunOptions& run) {
  Context ctx{sc, sc.options, std::nullopt, {}};
  if (run.tol) {
    ctx.opts.abs_tol = *run.tol;
    ctx.opts.rel_tol = *run.tol;
  }
  if (sc.graph_sample) {
    ctx.sample = graph_sample(sc.T, sc.graph_sample->region, sc.graph_sample->grid_per_dim, sc.options.cap);
  }
  for (const auto k : sc.kinds) {
    if (k == CertificateKind::prop_strmono) { ctx.pairs = scenario_pairs(sc); }
  }
  const auto cells = plan(sc);
  std::vector<CertificateRecord> out(cells.size());
  parallel_for(cells.size(), run.jobs, [&](std::size_t i) { out[i] = evaluate(ctx, cells[i]); });
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

bool Report::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const CertificateRecord& r) { return r.pass; });
}

std::vector<SummaryRow> summarize(const std::vector<CertificateRecord>& records) {
  using Key = std::tuple<CertificateKind, std::string, std::string, double, bool, double>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> rows;
  for (const auto& r : records) {
    const Key key{r.kind, r.t_name, r.b_name.value_or(""), r.p, r.lambda.has_value(), r.lambda.value_or(0.0)};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      SummaryRow row{.kind = r.kind,
                     .t_name = r.t_name,
                     .b_name = r.b_name.value_or(""),
                     .p = r.p,
                     .lambda = r.lambda,
                     .min_slack = std::numeric_limits<double>::infinity()};
      rows.push_back(std::move(row));
    }
    SummaryRow& row = rows[it->second];
    ++row.count;
    (r.pass ? row.passes : row.fails) += 1;
    row.min_slack = std::min(row.min_slack, r.slack);
    row.max_residual = std::max(row.max_residual, r.residual);
    row.iterations += r.iterations;
  }
  return rows;
}

Report run_verify(const Scenario& sc, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.command = "verify";
  rep.scenario = sc.name;
  rep.records = run_cells(sc, opts);
  rep.summary = summarize(rep.records);
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

Report run_sweep(std::string_view scenario_text, const std::vector<double>& lambdas, const std::vector<double>& ps,
                 const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const double l : lambdas) {
    if (!std::isfinite(l) || !(l > 0.0)) { throw ScenarioError("--lambda", "sweep values must be > 0"); }
  }
  for (const double p : ps) {
    if (!(p > 1.0 && p <= 2.0)) { throw ScenarioError("--p", "sweep values must lie in (1, 2]"); }
  }
  const Scenario base = parse_scenario(scenario_text);
  Report rep;
  rep.command = "sweep";
  rep.scenario = base.name;

  std::vector<Scenario> per_p;
  if (ps.empty()) {
    per_p.push_back(base);
  } else {
    auto j = nlohmann::json::parse(scenario_text.begin(), scenario_text.end());
    for (const double p : ps) {
      j["space"]["p"] = p;
      per_p.push_back(parse_scenario(j.dump()));
    }
  }
  for (Scenario sc : per_p) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      sc.lambda_grid = {lambdas[i]};
      // lambda-free kinds run once per p.
      if (i == 1) { std::erase_if(sc.kinds, lambda_free); }
      if (sc.kinds.empty()) { break; }
      auto recs = run_cells(sc, opts);
      rep.records.insert(rep.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
  }
  rep.summary = summarize(rep.records);
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

} // namespace fitzcert
