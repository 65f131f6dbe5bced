#pragma once

// Seeded random instances: implicational formulas, provable corpora,
// digraphs, full formulas, and random dags with random f for oracle tests.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mlnd/compressor.hpp"
#include "mlnd/encodings.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/full_formula.hpp"
#include "mlnd/lm_prover.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"

namespace mlnd {

/// mt19937_64 reduced with `%`, so a seed gives the same stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  bool coin(std::uint64_t num = 1, std::uint64_t den = 2) { return below(den) < num; }

 private:
  std::mt19937_64 engine_;
};

inline const std::vector<std::string>& default_alphabet() {
  static const std::vector<std::string> names{"p", "q", "r", "s"};
  return names;
}

/// Random implication tree of exactly `weight` symbols (rounded down to odd).
inline Formula random_formula_of_weight(FormulaTable& table, Rng& rng, std::size_t weight,
                                        std::size_t alphabet = 4) {
  if (weight <= 2) return table.atom(default_alphabet()[rng.below(alphabet)]);
  const std::size_t pairs = (weight - 1) / 2;  // weight - 1 = wa + wb, both odd
  const std::size_t left_pairs = rng.below(pairs);
  const Formula a = random_formula_of_weight(table, rng, 2 * left_pairs + 1, alphabet);
  const Formula b = random_formula_of_weight(table, rng, 2 * (pairs - 1 - left_pairs) + 1, alphabet);
  return table.imp(a, b);
}

inline Formula random_formula(FormulaTable& table, Rng& rng, std::size_t max_weight, std::size_t alphabet = 4) {
  const std::size_t max_pairs = max_weight >= 1 ? (max_weight - 1) / 2 : 0;
  return random_formula_of_weight(table, rng, 2 * rng.below(max_pairs + 1) + 1, alphabet);
}

struct CorpusEntry {
  Formula formula;
  LmProof proof;
  TreeDeduction tree;
};

/// Distinct random formulas with 5 <= weight <= max_weight that the prover
/// establishes at the default bound, with their translated tree proofs.
inline std::vector<CorpusEntry> provable_corpus(FormulaTable& table, std::uint64_t seed, std::size_t count,
                                                std::size_t max_weight, const ProveOptions& opts = {},
                                                std::size_t max_attempts = 1'000'000) {
  Rng rng(seed);
  std::vector<CorpusEntry> out;
  std::set<Formula> seen;
  for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
    const Formula f = random_formula(table, rng, max_weight);
    if (table.weight(f) < 5 || !seen.insert(f).second) continue;
    ProveResult r = prove_lm(table, f, opts);
    if (r.status != ProveStatus::Proved) continue;
    TreeDeduction tree = translate_lm_to_nd(table, *r.proof);
    out.push_back(CorpusEntry{f, std::move(*r.proof), std::move(tree)});
  }
  if (out.size() < count) throw LimitExceeded("provable_corpus: too few provable formulas found");
  return out;
}

/// Each ordered pair of distinct vertices is an edge with probability 1/2.
inline DiGraph random_digraph(Rng& rng, std::size_t n) {
  DiGraph g = DiGraph::with_vertices(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && rng.coin()) g.edges.emplace(u, v);
  return g;
}

/// All 2^(n(n-1)) loop-free digraphs on n labeled vertices.
inline std::vector<DiGraph> all_digraphs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v) pairs.emplace_back(u, v);
  if (pairs.size() > 20) throw LimitExceeded("all_digraphs: too many graphs");
  std::vector<DiGraph> out;
  for (std::uint64_t mask = 0; mask < (1ull << pairs.size()); ++mask) {
    DiGraph g = DiGraph::with_vertices(n);
    for (std::size_t b = 0; b < pairs.size(); ++b)
      if ((mask >> b) & 1) g.edges.insert(pairs[b]);
    out.push_back(std::move(g));
  }
  return out;
}

/// Random formula over p, q, r, s, ⊥ and ∧ ∨ → with size at most `max_size`.
inline FullFormula random_full_formula(FullTable& table, Rng& rng, std::size_t max_size) {
  auto build = [&](auto&& self, std::size_t size) -> FullFormula {
    if (size <= 2) {
      const auto pick = rng.below(5);
      return pick == 4 ? table.falsum() : table.atom(default_alphabet()[pick]);
    }
    const std::size_t left = 1 + rng.below(size - 2);
    const FullFormula a = self(self, left);
    const FullFormula b = self(self, size - 1 - left);
    switch (rng.below(3)) {
      case 0: return table.conj(a, b);
      case 1: return table.disj(a, b);
      default: return table.imp(a, b);
    }
  };
  return build(build, 1 + rng.below(max_size));
}

/// Random locally correct tree deduction of height <= max_height. Labels
/// come from a small pool so that equal labels recur on a level; the tree
/// need not be a proof.
inline TreeDeduction random_tree_deduction(FormulaTable& table, Rng& rng, std::size_t max_height,
                                           std::size_t alphabet = 2) {
  std::vector<Formula> pool;
  for (std::size_t i = 0; i < alphabet; ++i) pool.push_back(table.atom(default_alphabet()[i]));
  const std::size_t atoms = pool.size();
  for (std::size_t i = 0; i < atoms; ++i)
    for (std::size_t j = 0; j < atoms; ++j) pool.push_back(table.imp(pool[i], pool[j]));

  TreeDeduction t;
  auto gen = [&](auto&& self, Formula goal, std::size_t budget) -> NodeId {
    const auto choice = budget == 0 ? 0 : rng.below(8);
    if (choice >= 1 && choice <= 3 && table.is_imp(goal)) {
      const NodeId body = self(self, table.consequent(goal), budget - 1);
      return t.add(goal, TreeRule::imp_intro(table.antecedent(goal)), {body});
    }
    if (choice >= 1) {
      const Formula minor = pool[rng.below(atoms)];
      const NodeId m = self(self, minor, budget - 1);
      const NodeId j = self(self, table.imp(minor, goal), budget - 1);
      return t.add(goal, TreeRule::imp_elim(), {m, j});
    }
    return t.add(goal, TreeRule::assumption());
  };
  const Formula goal = pool[atoms + rng.below(pool.size() - atoms)];
  const NodeId body = gen(gen, table.consequent(goal), max_height - 1);
  t.root = t.add(goal, TreeRule::imp_intro(table.antecedent(goal)), {body});
  return t;
}

/// Random f: each ingoing edge of a merged node joins f(e, α) with
/// probability 1/2, for every outgoing edge e and assumption α.
inline FMap random_f(const DagDeduction& d, Rng& rng) {
  const DagIndex index(d);
  const auto assumptions = dag_assumptions(d);
  FMap f;
  for (NodeId x = 0; x < d.nodes.size(); ++x) {
    if (d.nodes[x].rule() != DagRuleKind::Merged) continue;
    for (EdgeId e : index.out_edges[x])
      for (Formula a : assumptions) {
        std::set<Edge> chosen;
        for (EdgeId in : index.in_edges[x])
          if (rng.coin()) chosen.insert(index.edges[in]);
        if (!chosen.empty()) f[FKey{index.edges[e], a}] = std::move(chosen);
      }
  }
  return f;
}

/// Drops or adds one random ingoing edge in one random entry of f at a
/// merged node.
inline FMap perturb_f(const DagDeduction& d, FMap f, Rng& rng) {
  const DagIndex index(d);
  const auto assumptions = dag_assumptions(d);
  std::vector<NodeId> merged;
  for (NodeId x = 0; x < d.nodes.size(); ++x)
    if (d.nodes[x].rule() == DagRuleKind::Merged) merged.push_back(x);
  if (merged.empty() || assumptions.empty()) return f;
  const NodeId x = merged[rng.below(merged.size())];
  const Edge out = index.edges[index.out_edges[x][rng.below(index.out_edges[x].size())]];
  const Edge in = index.edges[index.in_edges[x][rng.below(index.in_edges[x].size())]];
  const FKey key{out, assumptions[rng.below(assumptions.size())]};
  auto& sel = f[key];
  if (!sel.erase(in)) sel.insert(in);
  if (sel.empty()) f.erase(key);
  return f;
}

/// Random tree proof of height <= max_height: leaves are placed only on
/// formulas discharged below them. Gives up after `attempts` tries.
inline std::optional<TreeDeduction> random_proof_tree(FormulaTable& table, Rng& rng, std::size_t max_height,
                                                      std::size_t alphabet = 2, std::size_t attempts = 1000) {
  std::vector<Formula> atoms;
  for (std::size_t i = 0; i < alphabet; ++i) atoms.push_back(table.atom(default_alphabet()[i]));
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    TreeDeduction t;
    std::vector<Formula> context;
    auto in_context = [&](Formula f) { return std::find(context.begin(), context.end(), f) != context.end(); };
    auto gen = [&](auto&& self, Formula goal, std::size_t budget) -> NodeId {
      if (in_context(goal) && (budget == 0 || rng.coin(1, 3))) return t.add(goal, TreeRule::assumption());
      if (budget == 0) return kNoNode;
      if (table.is_imp(goal) && rng.coin()) {
        context.push_back(table.antecedent(goal));
        const NodeId body = self(self, table.consequent(goal), budget - 1);
        context.pop_back();
        if (body == kNoNode) return kNoNode;
        return t.add(goal, TreeRule::imp_intro(table.antecedent(goal)), {body});
      }
      // Prefer a minor whose implication into the goal is at hand.
      std::vector<Formula> minors;
      for (Formula c : context)
        if (table.is_imp(c) && table.consequent(c) == goal) minors.push_back(table.antecedent(c));
      const Formula minor = !minors.empty() && rng.coin(3, 4) ? minors[rng.below(minors.size())]
                                                             : atoms[rng.below(atoms.size())];
      const NodeId m = self(self, minor, budget - 1);
      if (m == kNoNode) return kNoNode;
      const NodeId j = self(self, table.imp(minor, goal), budget - 1);
      if (j == kNoNode) return kNoNode;
      return t.add(goal, TreeRule::imp_elim(), {m, j});
    };
    const std::size_t prefix = 1 + rng.below(3);
    std::vector<Formula> hyps;
    for (std::size_t i = 0; i < prefix; ++i) {
      const Formula a = atoms[rng.below(atoms.size())];
      hyps.push_back(rng.coin() ? a : table.imp(a, atoms[rng.below(atoms.size())]));
    }
    const Formula goal = table.chain(hyps, atoms[rng.below(atoms.size())]);
    const NodeId root = gen(gen, goal, max_height);
    if (root == kNoNode || t.nodes[root].premises.empty()) continue;
    t.root = root;
    return t;
  }
  return std::nullopt;
}

/// One draw of an A_f-correct dag with at most `max_nodes` nodes, for the
/// checker/thread-oracle comparison. Compresses a random deduction (a proof
/// half of the time) and equips it with a random f, the extracted f, or a
/// perturbation of it. Empty when the draw is rejected.
inline std::optional<DagDeduction> random_af_correct_dag(FormulaTable& table, Rng& rng, std::size_t max_nodes = 30) {
  TreeDeduction tree;
  if (rng.coin()) {
    auto proof = random_proof_tree(table, rng, 3 + rng.below(4));
    if (!proof) return std::nullopt;
    tree = std::move(*proof);
  } else {
    tree = random_tree_deduction(table, rng, 3 + rng.below(4));
  }
  Compression c;
  try {
    c = compress(table, level_tree(tree), false);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (c.dag.nodes.size() > max_nodes) return std::nullopt;
  const auto mode = rng.below(3);
  if (mode == 0) {
    c.dag.f = random_f(c.dag, rng);
  } else {
    c.dag.f = extract_f(c.dag, c.fstar);
    if (mode == 2) c.dag.f = perturb_f(c.dag, c.dag.f, rng);
  }
  try {
    if (!check_af_correctness(table, c.dag, compute_af(table, c.dag))) return std::nullopt;
  } catch (const IncompleteF&) {
    return std::nullopt;
  }
  return std::move(c.dag);
}

}  // namespace mlnd
