#pragma once

// Corpus benchmark: generate provable formulas (plus ρ_G for edgeless
// digraphs), run the certification pipeline on each, and summarize the
// compression bounds and the growth of checker work.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mlnd/compressor.hpp"
#include "mlnd/encodings.hpp"
#include "mlnd/generators.hpp"
#include "mlnd/json_io.hpp"
#include "mlnd/lm_prover.hpp"

namespace mlnd {

inline constexpr int kBenchSchema = 1;

struct BenchConfig {
  std::uint64_t seed = 7;
  std::size_t count = 100;
  std::size_t max_weight = 40;
  std::size_t max_n = 4;
  std::size_t bound_mult = 2;
  std::size_t rho_budget = 50'000;
};

struct BenchRecord {
  std::size_t index = 0;
  std::string source;
  std::string formula;
  std::size_t weight = 0;
  std::string status;  // "verified", "unverified", "unproved", "budget_exceeded", "error"
  std::size_t h_lm = 0;
  CertificationMetrics metrics;
  bool verify_ok = false;
  std::string error;
  double wall_time = 0;
};

struct LogLogFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::vector<double> residuals;
  std::size_t points = 0;
};

/// Least squares of log y on log x over points with x, y > 0.
inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  LogLogFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  fit.points = lx.size();
  if (fit.points < 2) return fit;
  const double n = static_cast<double>(fit.points);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r2 = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

struct RhoRow {
  std::size_t n = 0;
  std::size_t alpha_size = 0;
  std::size_t rho_weight = 0;
  bool satisfiable = false;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  LogLogFit fit;
  std::vector<RhoRow> rho_table;
  double verify_fraction = 0;
  double bound_fraction = 0;
};

namespace detail {

inline void run_instance(FormulaTable& table, Formula f, const ProveOptions& opts, BenchRecord& r) {
  const auto start = std::chrono::steady_clock::now();
  r.formula = table.format(f);
  r.weight = table.weight(f);
  try {
    const ProveResult pr = prove_lm(table, f, opts);
    if (pr.status == ProveStatus::BudgetExceeded) {
      r.status = "budget_exceeded";
    } else if (pr.status == ProveStatus::Unproved) {
      r.status = "unproved";
    } else {
      r.h_lm = pr.proof->height();
      const TreeDeduction tree = translate_lm_to_nd(table, *pr.proof);
      const Certified c = compress_and_certify(table, tree);
      r.metrics = c.metrics;
      r.verify_ok = c.verified;
      r.status = c.verified ? "verified" : "unverified";
    }
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

inline BenchReport run_bench(const BenchConfig& cfg) {
  BenchReport report;
  FormulaTable table;
  ProveOptions opts;
  opts.bound_mult = cfg.bound_mult;

  for (const CorpusEntry& e : provable_corpus(table, cfg.seed, cfg.count, cfg.max_weight, opts)) {
    BenchRecord r;
    r.index = report.records.size();
    r.source = "random";
    detail::run_instance(table, e.formula, opts, r);
    report.records.push_back(std::move(r));
  }

  ProveOptions rho_opts = opts;
  rho_opts.node_budget = cfg.rho_budget;
  for (std::size_t n = 1; n <= cfg.max_n; ++n) {
    const DiGraph g = DiGraph::with_vertices(n);
    FullTable ft;
    const HamEncoding enc = encode_alpha(ft, g);
    const Formula rho = rho_g(g, table);
    RhoRow row{n, ft.size(enc.alpha), table.weight(rho), false};
    row.satisfiable = n * n <= kMaxSatVariables && classical_sat(ft, enc.alpha);
    report.rho_table.push_back(row);

    BenchRecord r;
    r.index = report.records.size();
    r.source = "rho_g edgeless n=" + std::to_string(n);
    detail::run_instance(table, rho, rho_opts, r);
    report.records.push_back(std::move(r));
  }

  std::vector<double> w, steps;
  std::size_t proved = 0, verified = 0, bounded = 0;
  for (const BenchRecord& r : report.records) {
    if (r.status != "verified" && r.status != "unverified") continue;
    ++proved;
    verified += r.verify_ok;
    bounded += r.metrics.bound_ok();
    w.push_back(static_cast<double>(r.metrics.w_cert));
    steps.push_back(static_cast<double>(r.metrics.checker_steps));
  }
  report.fit = fit_loglog(w, steps);
  report.verify_fraction = proved ? static_cast<double>(verified) / proved : 0;
  report.bound_fraction = proved ? static_cast<double>(bounded) / proved : 0;
  return report;
}

inline Json record_to_json(const BenchRecord& r) {
  Json j{{"schema", kBenchSchema}, {"index", r.index},   {"source", r.source},
         {"formula", r.formula},   {"weight", r.weight}, {"status", r.status}};
  if (r.status == "verified" || r.status == "unverified") {
    j["h_lm"] = r.h_lm;
    const Json m = metrics_to_json(r.metrics);
    for (auto& [k, v] : m.items()) j[k] = v;
    j["verify_ok"] = r.verify_ok;
  }
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline Json summary_to_json(const BenchConfig& cfg, const BenchReport& rep) {
  Json fitted = Json::array();
  std::size_t k = 0;
  for (const BenchRecord& r : rep.records) {
    if (r.status != "verified" && r.status != "unverified") continue;
    if (r.metrics.w_cert == 0 || r.metrics.checker_steps == 0) continue;
    const double x = static_cast<double>(r.metrics.w_cert);
    fitted.push_back(Json{{"index", r.index},
                          {"w_dag", r.metrics.w_cert},
                          {"checker_steps", r.metrics.checker_steps},
                          {"fitted_steps", std::exp(rep.fit.intercept) * std::pow(x, rep.fit.slope)},
                          {"residual", rep.fit.residuals.at(k++)}});
  }
  Json rho = Json::array();
  for (const RhoRow& row : rep.rho_table)
    rho.push_back(Json{{"n", row.n},
                       {"alpha_size", row.alpha_size},
                       {"rho_weight", row.rho_weight},
                       {"alpha_satisfiable", row.satisfiable}});
  std::size_t by_status[5] = {0, 0, 0, 0, 0};
  const char* names[5] = {"verified", "unverified", "unproved", "budget_exceeded", "error"};
  for (const BenchRecord& r : rep.records)
    for (int i = 0; i < 5; ++i)
      if (r.status == names[i]) ++by_status[i];
  Json counts;
  for (int i = 0; i < 5; ++i) counts[names[i]] = by_status[i];
  return Json{{"schema", kBenchSchema},
              {"config",
               {{"seed", cfg.seed},
                {"count", cfg.count},
                {"max_weight", cfg.max_weight},
                {"max_n", cfg.max_n},
                {"bound_mult", cfg.bound_mult}}},
              {"instances", rep.records.size()},
              {"status_counts", counts},
              {"verify_fraction", rep.verify_fraction},
              {"bound_fraction", rep.bound_fraction},
              {"fit",
               {{"x", "checked dag weight"},
                {"y", "checker steps"},
                {"slope", rep.fit.slope},
                {"intercept", rep.fit.intercept},
                {"r2", rep.fit.r2},
                {"points", rep.fit.points}}},
              {"fitted_curve", fitted},
              {"rho_table", rho}};
}

}  // namespace mlnd
