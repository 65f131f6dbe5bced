#pragma once

// Contraction-free sequent calculus LM→ for minimal implicational logic:
// rule schemas, bounded backward search, proof checking, and translation
// into tree-like natural deduction.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/nd_tree.hpp"
#include "mlnd/sequent.hpp"

namespace mlnd {

enum class LmRule : std::uint8_t { MA, MI1, MI2, MEP, MEE };

inline const char* rule_name(LmRule r) {
  switch (r) {
    case LmRule::MA: return "MA";
    case LmRule::MI1: return "MI1";
    case LmRule::MI2: return "MI2";
    case LmRule::MEP: return "MEP";
    case LmRule::MEE: return "MEE";
  }
  return "?";
}

inline std::optional<LmRule> rule_from_name(std::string_view name) {
  for (LmRule r : {LmRule::MA, LmRule::MI1, LmRule::MI2, LmRule::MEP, LmRule::MEE})
    if (name == rule_name(r)) return r;
  return std::nullopt;
}

/// Witness layout: MA [p], MI1 [α, β], MI2 [α, β, γ], MEP [p, γ],
/// MEE [α, β, γ].
struct LmNode {
  LmRule rule = LmRule::MA;
  Sequent conclusion;
  std::vector<Formula> witnesses;
  std::vector<std::uint32_t> premises;
};

struct LmProof {
  std::vector<LmNode> nodes;
  std::uint32_t root = 0;

  std::uint32_t add(LmNode n) {
    nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }
  std::size_t height() const {
    auto walk = [&](auto&& self, std::uint32_t x) -> std::size_t {
      std::size_t h = 0;
      for (auto p : nodes[x].premises) h = std::max(h, self(self, p) + 1);
      return h;
    };
    return nodes.empty() ? 0 : walk(walk, root);
  }
};

namespace detail {

inline bool var_in(const FormulaTable& table, Formula q, const std::vector<Formula>& gamma, Formula extra) {
  std::set<Formula> vars;
  for (Formula f : gamma) table.collect_atoms(f, vars);
  table.collect_atoms(extra, vars);
  return vars.count(q) != 0;
}

}  // namespace detail

/// Premises of `rule` applied backwards to `concl` with the given
/// witnesses, or nullopt if the instance is not well formed or violates a
/// side condition.
inline std::optional<std::vector<Sequent>> lm_premises(FormulaTable& table, LmRule rule, const Sequent& concl,
                                                       const std::vector<Formula>& w) {
  const auto& g = concl.antecedent;
  const Formula succ = concl.succedent;
  switch (rule) {
    case LmRule::MA:
      if (w.size() != 1 || !table.is_atom(w[0]) || succ != w[0] || !concl.contains(w[0])) return std::nullopt;
      return std::vector<Sequent>{};
    case LmRule::MI1: {
      if (w.size() != 2 || succ != table.imp(w[0], w[1])) return std::nullopt;
      for (Formula f : g)
        if (table.is_imp(f) && table.antecedent(f) == succ) return std::nullopt;
      return std::vector<Sequent>{Sequent(multiset_add(g, w[0]), w[1])};
    }
    case LmRule::MI2: {
      if (w.size() != 3) return std::nullopt;
      const Formula ab = table.imp(w[0], w[1]);
      const Formula principal = table.imp(ab, w[2]);
      if (succ != ab || !concl.contains(principal)) return std::nullopt;
      auto rest = multiset_remove(g, principal);
      rest = multiset_add(multiset_add(std::move(rest), w[0]), table.imp(w[1], w[2]));
      return std::vector<Sequent>{Sequent(std::move(rest), w[1])};
    }
    case LmRule::MEP: {
      if (w.size() != 2) return std::nullopt;
      const Formula p = w[0];
      const Formula principal = table.imp(p, w[1]);
      if (!table.is_atom(p) || !table.is_atom(succ) || p == succ) return std::nullopt;
      if (!concl.contains(p) || !concl.contains(principal)) return std::nullopt;
      auto rest = multiset_remove(multiset_remove(g, principal), p);
      if (!detail::var_in(table, succ, rest, w[1])) return std::nullopt;
      rest = multiset_add(multiset_add(std::move(rest), p), w[1]);
      return std::vector<Sequent>{Sequent(std::move(rest), succ)};
    }
    case LmRule::MEE: {
      if (w.size() != 3 || !table.is_atom(succ)) return std::nullopt;
      const Formula principal = table.imp(table.imp(w[0], w[1]), w[2]);
      if (!concl.contains(principal)) return std::nullopt;
      const auto rest = multiset_remove(g, principal);
      if (!detail::var_in(table, succ, rest, w[2])) return std::nullopt;
      Sequent left(multiset_add(multiset_add(rest, w[0]), table.imp(w[1], w[2])), w[1]);
      Sequent right(multiset_add(rest, w[2]), succ);
      return std::vector<Sequent>{std::move(left), std::move(right)};
    }
  }
  return std::nullopt;
}

struct LmViolation {
  std::uint32_t node;
  std::string reason;
};

struct LmReport {
  bool correct = true;
  std::vector<LmViolation> violations;
};

inline LmReport check_lm_report(FormulaTable& table, const LmProof& p) {
  LmReport r;
  auto fail = [&](std::uint32_t n, std::string why) {
    r.correct = false;
    r.violations.push_back({n, std::move(why)});
  };
  if (p.nodes.empty() || p.root >= p.nodes.size()) {
    fail(p.root, "root out of range");
    return r;
  }
  std::vector<std::uint32_t> uses(p.nodes.size(), 0);
  for (std::uint32_t i = 0; i < p.nodes.size(); ++i)
    for (auto c : p.nodes[i].premises) {
      if (c >= p.nodes.size()) {
        fail(i, "premise id out of range");
        return r;
      }
      ++uses[c];
    }
  for (std::uint32_t i = 0; i < p.nodes.size(); ++i)
    if (uses[i] != (i == p.root ? 0u : 1u)) fail(i, "proof is not a tree");
  if (!r.correct) return r;

  for (std::uint32_t i = 0; i < p.nodes.size(); ++i) {
    const LmNode& n = p.nodes[i];
    for (Formula f : n.witnesses)
      if (!table.contains(f)) {
        fail(i, "witness from another table");
        continue;
      }
    const auto expected = lm_premises(table, n.rule, n.conclusion, n.witnesses);
    if (!expected) {
      fail(i, std::string(rule_name(n.rule)) + " does not match its conclusion or side condition");
      continue;
    }
    if (expected->size() != n.premises.size()) {
      fail(i, std::string(rule_name(n.rule)) + " has the wrong number of premises");
      continue;
    }
    for (std::size_t k = 0; k < expected->size(); ++k)
      if (!(p.nodes[n.premises[k]].conclusion == (*expected)[k]))
        fail(i, "premise " + std::to_string(k) + " differs from the rule instance");
  }
  return r;
}

inline bool check_lm(FormulaTable& table, const LmProof& p) { return check_lm_report(table, p).correct; }

struct ProveOptions {
  std::size_t bound_mult = 2;
  std::optional<std::size_t> depth_bound;  // overrides bound_mult * weight
  std::size_t node_budget = 2'000'000;
  // MA, MEP, MI2 and MI1 have premises equivalent to their conclusions, so
  // once one applies the others need not be tried. Only MEE backtracks.
  bool commit_invertible = true;
};

enum class ProveStatus : std::uint8_t { Proved, Unproved, BudgetExceeded };

struct ProveResult {
  ProveStatus status = ProveStatus::Unproved;
  std::optional<LmProof> proof;
  std::size_t depth_bound = 0;
  std::size_t nodes_explored = 0;
  std::string caveat;  // set when the bound is below the default
};

namespace detail {

class LmSearch {
 public:
  LmSearch(FormulaTable& table, std::size_t budget, bool commit)
      : table_(table), budget_(budget), commit_(commit) {}

  std::optional<std::uint32_t> prove(const Sequent& s, std::size_t depth) {
    if (++explored_ > budget_) throw LimitExceeded("prove_lm: node budget exhausted");
    auto it = failed_.find(s);
    if (it != failed_.end() && it->second >= depth) return std::nullopt;

    for (const auto& [rule, w] : candidates(s)) {
      if (rule != LmRule::MA && depth == 0) break;
      const auto premises = lm_premises(table_, rule, s, w);
      if (!premises) continue;
      const auto mark = proof_.nodes.size();
      std::vector<std::uint32_t> children;
      bool ok = true;
      for (const Sequent& prem : *premises) {
        auto child = prove(prem, depth - 1);
        if (!child) {
          ok = false;
          break;
        }
        children.push_back(*child);
      }
      if (ok) return proof_.add(LmNode{rule, s, w, std::move(children)});
      proof_.nodes.resize(mark);
      if (commit_ && rule != LmRule::MEE) break;
    }
    auto& slot = failed_[s];
    slot = std::max(slot, depth);
    return std::nullopt;
  }

  LmProof& proof() { return proof_; }
  std::size_t explored() const { return explored_; }

 private:
  /// Applicable-looking instances in the order MA, MEP, MI2, MI1, MEE.
  std::vector<std::pair<LmRule, std::vector<Formula>>> candidates(const Sequent& s) {
    std::vector<std::pair<LmRule, std::vector<Formula>>> out;
    const Formula succ = s.succedent;
    const auto& g = s.antecedent;
    std::vector<Formula> distinct(g.begin(), g.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    if (table_.is_atom(succ) && s.contains(succ)) out.push_back({LmRule::MA, {succ}});
    if (table_.is_atom(succ))
      for (Formula f : distinct)
        if (table_.is_imp(f) && table_.is_atom(table_.antecedent(f)) && s.contains(table_.antecedent(f)))
          out.push_back({LmRule::MEP, {table_.antecedent(f), table_.consequent(f)}});
    if (table_.is_imp(succ))
      for (Formula f : distinct)
        if (table_.is_imp(f) && table_.antecedent(f) == succ)
          out.push_back({LmRule::MI2, {table_.antecedent(succ), table_.consequent(succ), table_.consequent(f)}});
    if (table_.is_imp(succ)) out.push_back({LmRule::MI1, {table_.antecedent(succ), table_.consequent(succ)}});
    if (table_.is_atom(succ))
      for (Formula f : distinct)
        if (table_.is_imp(f) && table_.is_imp(table_.antecedent(f))) {
          const Formula ab = table_.antecedent(f);
          out.push_back({LmRule::MEE, {table_.antecedent(ab), table_.consequent(ab), table_.consequent(f)}});
        }
    return out;
  }

  FormulaTable& table_;
  std::size_t budget_;
  bool commit_;
  std::size_t explored_ = 0;
  std::map<Sequent, std::size_t> failed_;
  LmProof proof_;
};

}  // namespace detail

/// Depth-first backward search with memoized failures. Every LM→ rule
/// lowers the sequent weight, so a bound of weight(goal) is never binding.
inline ProveResult prove_lm(FormulaTable& table, const Sequent& goal, const ProveOptions& opts = {}) {
  ProveResult result;
  const std::size_t weight = sequent_weight(table, goal);
  result.depth_bound = opts.depth_bound.value_or(opts.bound_mult * weight);
  if (result.depth_bound < 1) throw InvalidInput("prove_lm: depth bound must be at least 1");
  if (result.depth_bound < 2 * weight)
    result.caveat = "bound " + std::to_string(result.depth_bound) + " is below the default " +
                    std::to_string(2 * weight) + "; failure does not imply invalidity";
  detail::LmSearch search(table, opts.node_budget, opts.commit_invertible);
  try {
    const auto root = search.prove(goal, result.depth_bound);
    result.nodes_explored = search.explored();
    if (root) {
      result.status = ProveStatus::Proved;
      LmProof proof = std::move(search.proof());
      proof.root = *root;
      if (!check_lm(table, proof)) throw InternalInconsistency("prove_lm: search produced an invalid proof");
      result.proof = std::move(proof);
    }
  } catch (const LimitExceeded&) {
    result.status = ProveStatus::BudgetExceeded;
    result.nodes_explored = search.explored();
  }
  return result;
}

inline ProveResult prove_lm(FormulaTable& table, Formula goal, const ProveOptions& opts = {}) {
  return prove_lm(table, Sequent({}, goal), opts);
}

namespace detail {

/// Persistent ND tree used while translating; open leaves are substituted
/// by sharing subtrees, and the result is flattened at the end.
struct PTree {
  Formula label;
  TreeRule rule;
  std::vector<std::shared_ptr<const PTree>> premises;
};
using PTreePtr = std::shared_ptr<const PTree>;

inline PTreePtr pleaf(Formula f) { return std::make_shared<const PTree>(PTree{f, TreeRule::assumption(), {}}); }

/// Replaces every open assumption leaf `target` (not discharged inside `t`)
/// by `with`.
inline PTreePtr substitute(const PTreePtr& t, Formula target, const PTreePtr& with, int bound = 0) {
  if (t->premises.empty()) return (t->label == target && bound == 0) ? with : t;
  const int inner = bound + (t->rule.kind == TreeRuleKind::ImpI && t->rule.discharged == target ? 1 : 0);
  PTree copy{t->label, t->rule, {}};
  bool changed = false;
  for (const auto& p : t->premises) {
    copy.premises.push_back(substitute(p, target, with, inner));
    changed = changed || copy.premises.back() != p;
  }
  return changed ? std::make_shared<const PTree>(std::move(copy)) : t;
}

inline NodeId flatten(const PTreePtr& t, TreeDeduction& out) {
  std::vector<NodeId> prem;
  for (const auto& p : t->premises) prem.push_back(flatten(p, out));
  return out.add(t->label, t->rule, std::move(prem));
}

}  // namespace detail

/// Structural translation: the result derives the succedent of the root
/// from open assumptions drawn from its antecedent.
inline TreeDeduction translate_lm_open(FormulaTable& table, const LmProof& p) {
  using detail::PTree;
  using detail::PTreePtr;
  auto imp_e = [&](PTreePtr minor, PTreePtr major) {
    return std::make_shared<const PTree>(
        PTree{table.consequent(major->label), TreeRule::imp_elim(), {std::move(minor), std::move(major)}});
  };
  auto imp_i = [&](Formula a, PTreePtr body) {
    return std::make_shared<const PTree>(PTree{table.imp(a, body->label), TreeRule::imp_intro(a), {std::move(body)}});
  };
  // β→γ from (α→β)→γ: assume β, vacuously discharge α, apply, discharge β.
  auto gadget = [&](Formula a, Formula b, Formula c) {
    const PTreePtr ab = imp_i(a, detail::pleaf(b));
    return imp_i(b, imp_e(ab, detail::pleaf(table.imp(table.imp(a, b), c))));
  };

  auto walk = [&](auto&& self, std::uint32_t x) -> PTreePtr {
    const LmNode& n = p.nodes[x];
    const auto& w = n.witnesses;
    switch (n.rule) {
      case LmRule::MA: return detail::pleaf(w[0]);
      case LmRule::MI1: return imp_i(w[0], self(self, n.premises[0]));
      case LmRule::MEP: {
        const PTreePtr gamma = imp_e(detail::pleaf(w[0]), detail::pleaf(table.imp(w[0], w[1])));
        return detail::substitute(self(self, n.premises[0]), w[1], gamma);
      }
      case LmRule::MI2: {
        const PTreePtr body = detail::substitute(self(self, n.premises[0]), table.imp(w[1], w[2]), gadget(w[0], w[1], w[2]));
        return imp_i(w[0], body);
      }
      case LmRule::MEE: {
        const PTreePtr left =
            detail::substitute(self(self, n.premises[0]), table.imp(w[1], w[2]), gadget(w[0], w[1], w[2]));
        const PTreePtr gamma = imp_e(imp_i(w[0], left), detail::pleaf(table.imp(table.imp(w[0], w[1]), w[2])));
        return detail::substitute(self(self, n.premises[1]), w[2], gamma);
      }
    }
    throw InternalInconsistency("translate: unknown rule");
  };
  if (!check_lm(table, p)) throw InvalidInput("translate_lm_to_nd: proof does not check");
  TreeDeduction out;
  out.root = detail::flatten(walk(walk, p.root), out);
  return out;
}

/// Translation of a proof of ⇒ ρ, or of Γ ⇒ ρ closed off by discharging Γ
/// in order as ρ's antecedents.
inline TreeDeduction translate_lm_to_nd(FormulaTable& table, const LmProof& p) {
  TreeDeduction t = translate_lm_open(table, p);
  const auto& gamma = p.nodes[p.root].conclusion.antecedent;
  std::vector<Formula> distinct(gamma.begin(), gamma.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (auto it = distinct.rbegin(); it != distinct.rend(); ++it)
    t.root = t.add(table.imp(*it, t.conclusion()), TreeRule::imp_intro(*it), {t.root});
  return t;
}

}  // namespace mlnd
