#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mlnd/bench.hpp"
#include "mlnd/compressor.hpp"
#include "mlnd/encodings.hpp"
#include "mlnd/generators.hpp"
#include "mlnd/json_io.hpp"
#include "mlnd/lm_prover.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"

using namespace mlnd;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kCorpusSize = 100;
constexpr std::size_t kMaxWeight = 40;
constexpr std::size_t kMinDags = 1000;
constexpr std::size_t kMaxDagNodes = 30;
constexpr double kC1Seconds = 60;
constexpr double kC2Seconds = 120;
constexpr double kC4Seconds = 300;
constexpr std::size_t kRandomGraphs = 50;
constexpr std::size_t kStatmanFormulas = 500;
constexpr std::size_t kStatmanMaxSize = 40;
constexpr double kMaxSlope = 4.0;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::map<int, std::pair<bool, std::string>> results;

void report(int id, bool ok, const std::string& detail) { results[id] = {ok, detail}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool pure(const TreeDeduction& t) {
  for (const TreeNode& n : t.nodes)
    if (n.rule.kind == TreeRuleKind::Rep) return false;
  return true;
}

struct CorpusRun {
  FormulaTable table;
  std::vector<Certified> certified;
};

void c2(CorpusRun& run) {
  const auto start = Clock::now();
  ProveOptions opts;
  std::size_t verified = 0, height_ok = 0, weight_ok = 0;
  std::vector<CorpusEntry> corpus;
  try {
    corpus = provable_corpus(run.table, kSeed, kCorpusSize, kMaxWeight, opts);
  } catch (const std::exception& e) {
    report(2, false, std::string("corpus generation failed: ") + e.what());
    return;
  }
  for (const CorpusEntry& e : corpus) {
    try {
      Certified c = compress_and_certify(run.table, e.tree);
      verified += c.verified;
      height_ok += c.metrics.height_bound_ok;
      weight_ok += c.metrics.weight_bound_ok;
      run.certified.push_back(std::move(c));
    } catch (const std::exception& ex) {
      std::printf("  C2 %s: %s\n", run.table.format(e.formula).c_str(), ex.what());
    }
  }
  const double secs = since(start);
  const std::size_t n = corpus.size();
  report(2, verified == n && height_ok == n && weight_ok == n && secs < kC2Seconds,
         fmt("verified %zu/%zu, h*<=2h %zu/%zu, w*<=h*phi^2 %zu/%zu, %.2fs (limit %.0fs)", verified, n, height_ok, n,
             weight_ok, n, secs, kC2Seconds));
}

void c1(CorpusRun& run) {
  const auto start = Clock::now();
  std::size_t checked = 0, disagreements = 0, proving = 0, oversized = 0;
  auto check = [&](const FormulaTable& t, const DagDeduction& d) {
    const bool a = verify_dag(t, d);
    const bool b = verify_by_threads(t, d);
    ++checked;
    proving += a;
    if (a != b) ++disagreements;
  };
  for (const Certified& c : run.certified) {
    if (c.dag.nodes.size() > kMaxDagNodes) ++oversized;
    check(run.table, c.dag);
  }
  FormulaTable t;
  Rng rng(kSeed);
  std::size_t attempts = 0;
  while (checked < kMinDags && attempts < 200 * kMinDags) {
    ++attempts;
    if (auto d = random_af_correct_dag(t, rng, kMaxDagNodes)) check(t, *d);
  }
  const double secs = since(start);
  report(1, checked >= kMinDags && disagreements == 0 && secs < kC1Seconds,
         fmt("%zu dags (%zu corpus, %zu of them over %zu nodes; %zu proving), %zu disagreements, %.2fs (limit %.0fs)",
             checked, run.certified.size(), oversized, kMaxDagNodes, proving, disagreements, secs, kC1Seconds));
}

void c3(CorpusRun& run) {
  std::size_t ok = 0, tried = 0;
  for (const Certified& c : run.certified) {
    if (!c.verified) continue;
    ++tried;
    try {
      const TreeDeduction u = unfold_dag(run.table, c.dag);
      const TreeDeduction p = eliminate_repetitions(u);
      const Formula goal = c.dag.nodes.at(c.dag.root).label;
      if (check_tree(run.table, u).locally_correct && proves_tree(u) && u.conclusion() == goal &&
          check_tree(run.table, p).locally_correct && proves_tree(p) && p.conclusion() == goal && pure(p))
        ++ok;
    } catch (const std::exception& e) {
      std::printf("  C3 unfold failed: %s\n", e.what());
    }
  }
  report(3, tried == kCorpusSize && ok == tried, fmt("%zu/%zu certified dags round-trip to pure tree proofs", ok, tried));
}

std::vector<DiGraph> graph_corpus() {
  std::vector<DiGraph> graphs = all_digraphs(3);
  Rng rng(kSeed);
  for (std::size_t i = 0; i < kRandomGraphs; ++i) graphs.push_back(random_digraph(rng, 4 + i % 2));
  return graphs;
}

void c4(const std::vector<DiGraph>& graphs) {
  const auto start = Clock::now();
  std::size_t disagreements = 0, hamiltonian = 0;
  for (const DiGraph& g : graphs) {
    FullTable ft;
    const HamEncoding enc = encode_alpha(ft, g);
    const bool h = hamiltonicity_oracle(g);
    hamiltonian += h;
    if (h != classical_sat(ft, enc.alpha)) ++disagreements;
  }
  const double secs = since(start);
  report(4, disagreements == 0 && secs < kC4Seconds,
         fmt("%zu graphs (%zu hamiltonian), %zu disagreements, %.2fs (limit %.0fs)", graphs.size(), hamiltonian,
             disagreements, secs, kC4Seconds));
}

void c5() {
  FormulaTable t;
  ProveOptions opts;
  opts.bound_mult = 2;
  std::size_t good = 0, total = 0;
  std::string bad;
  for (const char* text : {"p->p", "p->(q->p)", "(p->(q->r))->((p->q)->(p->r))"}) {
    ++total;
    const Formula f = t.parse(text);
    const ProveResult r = prove_lm(t, f, opts);
    bool ok = r.status == ProveStatus::Proved && check_lm(t, *r.proof);
    if (ok) {
      const TreeDeduction tree = translate_lm_to_nd(t, *r.proof);
      ok = check_tree(t, tree).locally_correct && proves_tree(tree) && tree.conclusion() == f;
    }
    if (ok) ++good;
    else bad += std::string(" ") + text;
  }
  for (const char* text : {"p", "((p->q)->p)->p"}) {
    ++total;
    const ProveResult r = prove_lm(t, t.parse(text), opts);
    if (r.status == ProveStatus::Unproved) ++good;
    else bad += std::string(" ") + text;
  }
  report(5, good == total, fmt("%zu/%zu as expected%s%s", good, total, bad.empty() ? "" : "; wrong:", bad.c_str()));
}

void c6(const std::vector<DiGraph>& graphs) {
  std::size_t checked = 0, violations = 0;
  double worst = 0;
  auto check = [&](const FullTable& src, FullFormula f) {
    FormulaTable out;
    const StatmanMap m = statman_translate(src, f, out);
    const double s = static_cast<double>(src.size(f));
    const double w = static_cast<double>(out.weight(m.result));
    worst = std::max(worst, w / (s * s * s));
    ++checked;
    if (w > s * s * s) ++violations;
  };
  FullTable src;
  Rng rng(kSeed);
  for (std::size_t i = 0; i < kStatmanFormulas; ++i) check(src, random_full_formula(src, rng, kStatmanMaxSize));
  std::size_t graph_checks = 0;
  for (std::size_t n = 1; n <= 2; ++n)
    for (const DiGraph& g : all_digraphs(n)) {
      FullTable ft;
      check(ft, ft.imp(encode_alpha(ft, g).alpha, ft.falsum()));
      ++graph_checks;
    }
  for (const DiGraph& g : graphs) {
    if (g.size() > 4) continue;
    FullTable ft;
    check(ft, ft.imp(encode_alpha(ft, g).alpha, ft.falsum()));
    ++graph_checks;
  }
  report(6, violations == 0,
         fmt("%zu formulas (%zu graph encodings), %zu violations, max size*/size^3 = %.4f", checked, graph_checks,
             violations, worst));
}

void c7(const std::string& out_path) {
  BenchConfig cfg;
  cfg.seed = kSeed;
  cfg.count = kCorpusSize;
  cfg.max_weight = kMaxWeight;
  const BenchReport rep = run_bench(cfg);
  const Json summary = summary_to_json(cfg, rep);
  std::ofstream(out_path) << summary.dump(2) << "\n";
  for (const Json& row : summary["fitted_curve"])
    std::printf("  C7 w=%-6s steps=%-8s fitted=%-12.1f residual=%+.4f\n", row["w_dag"].dump().c_str(),
                row["checker_steps"].dump().c_str(), row["fitted_steps"].get<double>(), row["residual"].get<double>());
  report(7, rep.fit.points >= 2 && rep.fit.slope <= kMaxSlope,
         fmt("slope %.4f (limit %.1f), intercept %.4f, r2 %.4f over %zu points; report in %s", rep.fit.slope, kMaxSlope,
             rep.fit.intercept, rep.fit.r2, rep.fit.points, out_path.c_str()));
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "acceptance_bench.json";
  CorpusRun run;
  guarded(2, [&] { c2(run); });
  guarded(1, [&] { c1(run); });
  guarded(3, [&] { c3(run); });
  const std::vector<DiGraph> graphs = graph_corpus();
  guarded(4, [&] { c4(graphs); });
  guarded(5, [&] { c5(); });
  guarded(6, [&] { c6(graphs); });
  guarded(7, [&] { c7(out); });
  int failures = 0;
  for (int id = 1; id <= 7; ++id) {
    const auto it = results.find(id);
    const bool ok = it != results.end() && it->second.first;
    std::printf("%s C%d %s\n", ok ? "PASS" : "FAIL", id, it == results.end() ? "not run" : it->second.second.c_str());
    failures += !ok;
  }
  std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
