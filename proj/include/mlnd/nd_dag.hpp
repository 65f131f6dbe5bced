#pragma once

// Dag-like natural deduction: leveled rooted dags whose merged nodes carry
// several premise groups, plus the selection function f that routes each
// assumption through a merged node.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/nd_tree.hpp"

namespace mlnd {

enum class GroupKind : std::uint8_t { Twin, IPrem, RepPrem };

/// One way of deriving a node's label from the level above it.
///   Twin:    first = minor γ, second = major γ→β
///   IPrem:   first = body β, conclusion α→β
///   RepPrem: first = body with the conclusion's own label
struct PremiseGroup {
  GroupKind kind = GroupKind::RepPrem;
  NodeId first = kNoNode;
  NodeId second = kNoNode;

  static PremiseGroup twin(NodeId minor, NodeId major) { return {GroupKind::Twin, minor, major}; }
  static PremiseGroup intro(NodeId body) { return {GroupKind::IPrem, body, kNoNode}; }
  static PremiseGroup repeat(NodeId body) { return {GroupKind::RepPrem, body, kNoNode}; }

  std::vector<NodeId> members() const {
    if (kind == GroupKind::Twin) return {first, second};
    return {first};
  }

  friend bool operator==(const PremiseGroup&, const PremiseGroup&) = default;
};

enum class DagRuleKind : std::uint8_t { Assumption, ImpI, ImpE, Rep, Merged };

/// Level 0 is the root; leaves sit on the deepest level.
struct DagNode {
  Formula label;
  std::uint32_t level = 0;
  std::vector<PremiseGroup> groups;

  DagRuleKind rule() const {
    if (groups.empty()) return DagRuleKind::Assumption;
    if (groups.size() > 1) return DagRuleKind::Merged;
    switch (groups.front().kind) {
      case GroupKind::Twin: return DagRuleKind::ImpE;
      case GroupKind::IPrem: return DagRuleKind::ImpI;
      case GroupKind::RepPrem: return DagRuleKind::Rep;
    }
    return DagRuleKind::Rep;
  }
};

/// Directed from premise (source) to conclusion (target).
struct Edge {
  NodeId source = kNoNode;
  NodeId target = kNoNode;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

struct FKey {
  Edge edge;  // an outgoing edge of a merged node
  Formula assumption;

  friend constexpr auto operator<=>(const FKey&, const FKey&) = default;
};

/// Partial selection function. Keys are (outgoing edge of a merged node,
/// assumption); values are ingoing edges of the same node. At a merged node
/// an absent key denotes the empty selection.
using FMap = std::map<FKey, std::set<Edge>>;

struct DagDeduction {
  std::vector<DagNode> nodes;
  NodeId root = 0;
  FMap f;

  Formula conclusion() const { return nodes.at(root).label; }

  NodeId add(Formula label, std::uint32_t level, std::vector<PremiseGroup> groups = {}) {
    nodes.push_back(DagNode{label, level, std::move(groups)});
    return static_cast<NodeId>(nodes.size() - 1);
  }

  std::uint32_t height() const {
    std::uint32_t h = 0;
    for (const DagNode& n : nodes) h = std::max(h, n.level);
    return h;
  }
};

using EdgeId = std::uint32_t;

/// Edge numbering and adjacency derived from the premise groups.
struct DagIndex {
  std::vector<Edge> edges;
  std::map<Edge, EdgeId> edge_id;
  std::vector<std::vector<EdgeId>> in_edges;   // per node, in first-use order
  std::vector<std::vector<EdgeId>> out_edges;  // per node
  std::vector<char> iprem_edge;                // per edge: body edge of an IPrem group

  explicit DagIndex(const DagDeduction& d)
      : in_edges(d.nodes.size()), out_edges(d.nodes.size()) {
    for (NodeId x = 0; x < d.nodes.size(); ++x)
      for (const PremiseGroup& g : d.nodes[x].groups)
        for (NodeId y : g.members()) {
          if (y >= d.nodes.size()) continue;
          const Edge e{y, x};
          auto [it, fresh] = edge_id.emplace(e, static_cast<EdgeId>(edges.size()));
          if (fresh) {
            edges.push_back(e);
            iprem_edge.push_back(0);
            in_edges[x].push_back(it->second);
            out_edges[y].push_back(it->second);
          }
          if (g.kind == GroupKind::IPrem) iprem_edge[it->second] = 1;
        }
  }

  std::optional<EdgeId> find(Edge e) const {
    auto it = edge_id.find(e);
    if (it == edge_id.end()) return std::nullopt;
    return it->second;
  }
};

/// Sorted, distinct leaf labels: the assumption set A.
inline std::vector<Formula> dag_assumptions(const DagDeduction& d) {
  std::set<Formula> a;
  for (const DagNode& n : d.nodes)
    if (n.groups.empty()) a.insert(n.label);
  return {a.begin(), a.end()};
}

/// Sum of label weights plus number of edges.
inline std::size_t dag_weight(const FormulaTable& table, const DagDeduction& d) {
  std::size_t w = 0;
  for (const DagNode& n : d.nodes) w += table.weight(n.label);
  return w + DagIndex(d).edges.size();
}

struct DagReport {
  bool correct = true;
  std::vector<Violation> violations;
};

inline DagReport check_dag(const FormulaTable& table, const DagDeduction& d) {
  DagReport report;
  auto fail = [&](NodeId n, std::string why) {
    report.correct = false;
    report.violations.push_back({n, std::move(why)});
  };
  const auto n = d.nodes.size();
  if (n == 0 || d.root >= n) {
    fail(d.root, "root out of range");
    return report;
  }
  for (NodeId x = 0; x < n; ++x)
    for (const PremiseGroup& g : d.nodes[x].groups)
      for (NodeId y : g.members())
        if (y >= n) {
          fail(x, "premise id out of range");
          return report;
        }

  const DagIndex index(d);
  const std::uint32_t h = d.height();
  if (d.nodes[d.root].level != 0) fail(d.root, "root must be on level 0");
  for (NodeId x = 0; x < n; ++x) {
    const DagNode& node = d.nodes[x];
    if (x != d.root && node.level == 0) fail(x, "only the root may sit on level 0");
    if (x != d.root && index.out_edges[x].empty()) fail(x, "node has no conclusion");
    if (node.groups.empty() != (node.level == h))
      fail(x, node.groups.empty() ? "leaf above the top level" : "inference on the top level");
  }
  for (const Edge& e : index.edges)
    if (d.nodes[e.source].level != d.nodes[e.target].level + 1)
      fail(e.target, "edge does not span exactly one level");
  if (!report.correct) return report;

  const auto rr = d.nodes[d.root].rule();
  if (rr != DagRuleKind::ImpI && rr != DagRuleKind::ImpE) fail(d.root, "root rule must be ImpI or ImpE");

  for (NodeId x = 0; x < n; ++x) {
    const DagNode& node = d.nodes[x];
    std::set<Formula> minors;
    std::set<NodeId> rep_bodies;
    int intros = 0;
    for (const PremiseGroup& g : node.groups) {
      switch (g.kind) {
        case GroupKind::Twin: {
          const Formula minor = d.nodes[g.first].label;
          const Formula major = d.nodes[g.second].label;
          if (!table.is_imp(major) || table.antecedent(major) != minor ||
              table.consequent(major) != node.label)
            fail(x, "major premise mismatch");
          if (!minors.insert(minor).second) fail(x, "twin minors must be distinct");
          break;
        }
        case GroupKind::IPrem:
          ++intros;
          if (!table.is_imp(node.label) || table.consequent(node.label) != d.nodes[g.first].label)
            fail(x, "IPrem body is not the consequent of the conclusion");
          break;
        case GroupKind::RepPrem:
          if (d.nodes[g.first].label != node.label) fail(x, "RepPrem label differs from conclusion");
          if (!rep_bodies.insert(g.first).second) fail(x, "duplicate RepPrem group");
          break;
      }
    }
    if (intros > 1) fail(x, "at most one IPrem group per node");
  }

  const auto assumptions = dag_assumptions(d);
  for (const auto& [key, selected] : d.f) {
    const auto id = index.find(key.edge);
    if (!id) {
      fail(key.edge.source < n ? key.edge.source : d.root, "f key is not an edge");
      continue;
    }
    const NodeId x = key.edge.source;
    if (d.nodes[x].rule() != DagRuleKind::Merged) {
      fail(x, "f undefined outside Merged");
      continue;
    }
    if (!std::binary_search(assumptions.begin(), assumptions.end(), key.assumption))
      fail(x, "f assumption not in A");
    for (const Edge& s : selected)
      if (s.target != x || !index.find(s)) fail(x, "f selects an edge that is not ingoing");
  }
  return report;
}

/// Bitset over the indices of the dag's assumption list.
class AssumptionSet {
 public:
  AssumptionSet() = default;
  explicit AssumptionSet(std::size_t universe) : words_((universe + 63) / 64, 0) {}

  void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void erase(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  bool subset_of(const AssumptionSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }
  /// Returns the number of word operations performed.
  std::size_t unite(const AssumptionSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return words_.size();
  }
  std::size_t word_count() const { return words_.size(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        fn(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  friend bool operator==(const AssumptionSet&, const AssumptionSet&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

/// A_f per edge, plus the virtual outgoing edge of the root.
struct AfTable {
  std::vector<Formula> assumptions;  // sorted; bit i stands for assumptions[i]
  std::vector<AssumptionSet> per_edge;
  AssumptionSet root;
  std::uint64_t steps = 0;

  std::optional<std::size_t> index_of(Formula f) const {
    auto it = std::lower_bound(assumptions.begin(), assumptions.end(), f);
    if (it == assumptions.end() || *it != f) return std::nullopt;
    return static_cast<std::size_t>(it - assumptions.begin());
  }

  std::vector<Formula> formulas(const AssumptionSet& s) const {
    std::vector<Formula> out;
    s.for_each([&](std::size_t i) { out.push_back(assumptions[i]); });
    return out;
  }
};

namespace detail {

/// Selections of f grouped per outgoing edge: assumption index → in-edge ids.
struct FRoutes {
  std::vector<std::map<std::size_t, std::vector<EdgeId>>> per_edge;

  FRoutes(const DagDeduction& d, const DagIndex& index, const AfTable& t) : per_edge(index.edges.size()) {
    for (const auto& [key, selected] : d.f) {
      const auto e = index.find(key.edge);
      const auto a = t.index_of(key.assumption);
      if (!e || !a) continue;
      auto& slot = per_edge[*e][*a];
      for (const Edge& s : selected)
        if (auto id = index.find(s)) slot.push_back(*id);
    }
  }
};

inline std::vector<NodeId> nodes_by_level_desc(const DagDeduction& d) {
  std::vector<NodeId> order(d.nodes.size());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return d.nodes[a].level > d.nodes[b].level; });
  return order;
}

}  // namespace detail

/// Thrown by compute_af when a merged node's outgoing edge has no
/// selection at all although assumptions reach the node.
class IncompleteF : public Error {
 public:
  using Error::Error;
};

/// Evaluates A_f level by level from the leaves. At a merged node, α is
/// proper on an outgoing edge e iff some edge in f(e, α) carries α.
///
/// An IPrem body edge contributes its set minus the discharged antecedent;
/// this is what lets a merged node act as the (→I) it absorbs.
inline AfTable compute_af(const FormulaTable& table, const DagDeduction& d) {
  const DagIndex index(d);
  AfTable t;
  t.assumptions = dag_assumptions(d);
  const std::size_t universe = t.assumptions.size();
  t.per_edge.assign(index.edges.size(), AssumptionSet(universe));
  t.root = AssumptionSet(universe);
  const detail::FRoutes routes(d, index, t);

  auto discharge_index = [&](NodeId x) -> std::optional<std::size_t> {
    const Formula label = d.nodes[x].label;
    if (!table.is_imp(label)) return std::nullopt;
    return t.index_of(table.antecedent(label));
  };
  // Contribution of an in-edge to its target's outgoing sets.
  auto contribution = [&](EdgeId e) {
    AssumptionSet c = t.per_edge[e];
    if (index.iprem_edge[e])
      if (auto a = discharge_index(index.edges[e].target)) c.erase(*a);
    ++t.steps;
    return c;
  };

  for (NodeId x : detail::nodes_by_level_desc(d)) {
    const DagNode& node = d.nodes[x];
    const auto rule = node.rule();
    std::vector<EdgeId> outs = index.out_edges[x];
    const bool is_root = x == d.root;

    if (rule == DagRuleKind::Merged) {
      AssumptionSet arriving(universe);
      for (EdgeId in : index.in_edges[x]) t.steps += arriving.unite(t.per_edge[in]);
      for (EdgeId e : outs) {
        AssumptionSet value(universe);
        const auto& sel = routes.per_edge[e];
        if (sel.empty() && !arriving.empty())
          throw IncompleteF("f incomplete at node " + std::to_string(x));
        arriving.for_each([&](std::size_t a) {
          auto it = sel.find(a);
          ++t.steps;
          if (it == sel.end()) return;
          for (EdgeId in : it->second)
            if (contribution(in).contains(a)) {
              value.insert(a);
              break;
            }
        });
        t.per_edge[e] = std::move(value);
      }
      if (is_root) throw InvalidInput("merged root");
      continue;
    }

    AssumptionSet value(universe);
    if (rule == DagRuleKind::Assumption) {
      value.insert(*t.index_of(node.label));
      ++t.steps;
    } else {
      for (EdgeId in : index.in_edges[x]) t.steps += value.unite(t.per_edge[in]);
      if (rule == DagRuleKind::ImpI)
        if (auto a = discharge_index(x)) {
          value.erase(*a);
          ++t.steps;
        }
    }
    for (EdgeId e : outs) {
      t.per_edge[e] = value;
      t.steps += value.word_count();
    }
    if (is_root) t.root = value;
  }
  return t;
}

struct AfCorrectness {
  bool ok = true;
  std::vector<Violation> violations;
  std::uint64_t steps = 0;
};

/// Condition (a): every ingoing edge of a merged node is selected by f for
/// some outgoing edge and assumption. Condition (b): whenever α ∈ A_f(e),
/// some edge in f(e, α) contributes α. Routing: every assumption an ingoing
/// edge contributes is selected onward for some outgoing edge, so no open
/// assumption is dropped at a merged node.
inline AfCorrectness check_af_correctness_report(const FormulaTable& table, const DagDeduction& d,
                                                 const AfTable& t) {
  const DagIndex index(d);
  const detail::FRoutes routes(d, index, t);
  AfCorrectness r;
  for (NodeId x = 0; x < d.nodes.size(); ++x) {
    if (d.nodes[x].rule() != DagRuleKind::Merged) continue;
    std::set<EdgeId> selected;
    for (EdgeId e : index.out_edges[x])
      for (const auto& [a, ins] : routes.per_edge[e]) {
        selected.insert(ins.begin(), ins.end());
        r.steps += ins.size();
      }
    for (EdgeId in : index.in_edges[x])
      if (!selected.count(in)) {
        r.ok = false;
        r.violations.push_back({x, "ingoing edge from " + std::to_string(index.edges[in].source) +
                                       " never selected by f"});
      }
    std::optional<std::size_t> discharged;
    if (table.is_imp(d.nodes[x].label)) discharged = t.index_of(table.antecedent(d.nodes[x].label));
    for (EdgeId in : index.in_edges[x]) {
      t.per_edge[in].for_each([&](std::size_t a) {
        if (index.iprem_edge[in] && discharged == a) return;
        bool routed = false;
        for (EdgeId e : index.out_edges[x]) {
          ++r.steps;
          auto it = routes.per_edge[e].find(a);
          if (it != routes.per_edge[e].end() &&
              std::find(it->second.begin(), it->second.end(), in) != it->second.end()) {
            routed = true;
            break;
          }
        }
        if (!routed) {
          r.ok = false;
          r.violations.push_back({x, "assumption " + table.format(t.assumptions[a]) + " arriving from " +
                                         std::to_string(index.edges[in].source) + " is not routed by f"});
        }
      });
    }
    for (EdgeId e : index.out_edges[x]) {
      t.per_edge[e].for_each([&](std::size_t a) {
        bool witnessed = false;
        auto it = routes.per_edge[e].find(a);
        if (it != routes.per_edge[e].end())
          for (EdgeId in : it->second) {
            ++r.steps;
            const bool removed = index.iprem_edge[in] && discharged == a;
            if (!removed && t.per_edge[in].contains(a)) witnessed = true;
          }
        if (!witnessed) {
          r.ok = false;
          r.violations.push_back({x, "assumption " + table.format(t.assumptions[a]) +
                                         " on an outgoing edge has no selected source"});
        }
      });
    }
  }
  return r;
}

inline bool check_af_correctness(const FormulaTable& table, const DagDeduction& d, const AfTable& t) {
  return check_af_correctness_report(table, d, t).ok;
}

struct DagVerdict {
  bool proves = false;
  bool af_correct = false;
  std::vector<Formula> open_at_root;
  std::uint64_t steps = 0;
};

inline DagVerdict verify_dag_report(const FormulaTable& table, const DagDeduction& d) {
  DagVerdict v;
  const AfTable t = compute_af(table, d);
  const AfCorrectness c = check_af_correctness_report(table, d, t);
  v.af_correct = c.ok;
  v.open_at_root = t.formulas(t.root);
  v.steps = t.steps + c.steps;
  v.proves = v.af_correct && t.root.empty();
  return v;
}

/// Polynomial-time provability check: A_f-correct and A_f of the virtual
/// root edge is empty.
inline bool verify_dag(const FormulaTable& table, const DagDeduction& d) {
  return verify_dag_report(table, d).proves;
}

struct FThread {
  std::vector<NodeId> nodes;  // leaf first, root last
  bool closed = false;
};

namespace detail {

/// Walks every f-thread ending in a leaf labeled `alpha`, root first.
/// `visit(path_root_first, closed)` returns false to stop the walk.
template <typename Visit>
bool walk_threads(const FormulaTable& table, const DagDeduction& d, const DagIndex& index,
                  const std::map<std::pair<EdgeId, Formula>, std::set<EdgeId>>& fsel, Formula alpha,
                  Visit&& visit) {
  std::vector<NodeId> path;
  auto discharges = [&](NodeId x) {
    const Formula l = d.nodes[x].label;
    return table.is_imp(l) && table.antecedent(l) == alpha;
  };
  auto step = [&](auto&& self, NodeId x, std::optional<EdgeId> out, bool closed) -> bool {
    path.push_back(x);
    const DagNode& node = d.nodes[x];
    bool keep_going = true;
    if (node.groups.empty()) {
      if (node.label == alpha) keep_going = visit(path, closed);
    } else {
      const bool merged = node.rule() == DagRuleKind::Merged;
      const std::set<EdgeId>* allowed = nullptr;
      static const std::set<EdgeId> kNone;
      if (merged) {
        auto it = fsel.find({*out, alpha});
        allowed = it == fsel.end() ? &kNone : &it->second;
      }
      for (EdgeId in : index.in_edges[x]) {
        if (allowed && !allowed->count(in)) continue;
        bool c = closed;
        if (node.rule() == DagRuleKind::ImpI && discharges(x)) c = true;
        if (merged && index.iprem_edge[in] && discharges(x)) c = true;
        if (!self(self, index.edges[in].source, in, c)) {
          keep_going = false;
          break;
        }
      }
    }
    path.pop_back();
    return keep_going;
  };
  return step(step, d.root, std::nullopt, false);
}

inline std::map<std::pair<EdgeId, Formula>, std::set<EdgeId>> f_by_id(const DagDeduction& d,
                                                                      const DagIndex& index) {
  std::map<std::pair<EdgeId, Formula>, std::set<EdgeId>> out;
  for (const auto& [key, selected] : d.f) {
    auto e = index.find(key.edge);
    if (!e) continue;
    auto& slot = out[{*e, key.assumption}];
    for (const Edge& s : selected)
      if (auto id = index.find(s)) slot.insert(*id);
  }
  return out;
}

}  // namespace detail

/// All f-threads with their closure flag. Exponential in general; `limit`
/// bounds the number of threads produced.
inline std::vector<FThread> enumerate_f_threads(const FormulaTable& table, const DagDeduction& d,
                                                std::size_t limit = 1'000'000) {
  const DagIndex index(d);
  const auto fsel = detail::f_by_id(d, index);
  std::vector<FThread> out;
  for (Formula alpha : dag_assumptions(d)) {
    detail::walk_threads(table, d, index, fsel, alpha, [&](const std::vector<NodeId>& p, bool closed) {
      if (out.size() >= limit) throw LimitExceeded("f-thread enumeration limit exceeded");
      out.push_back(FThread{{p.rbegin(), p.rend()}, closed});
      return true;
    });
  }
  return out;
}

/// Brute-force oracle: every f-thread is closed.
inline bool verify_by_threads(const FormulaTable& table, const DagDeduction& d) {
  const DagIndex index(d);
  const auto fsel = detail::f_by_id(d, index);
  for (Formula alpha : dag_assumptions(d)) {
    const bool all_closed = detail::walk_threads(table, d, index, fsel, alpha,
                                                 [](const std::vector<NodeId>&, bool closed) { return closed; });
    if (!all_closed) return false;
  }
  return true;
}

/// A leveled tree deduction seen as a dag with empty f.
inline DagDeduction as_dag(const TreeDeduction& t) {
  if (!is_leveled(t)) throw InvalidInput("as_dag: tree is not leveled");
  const auto depth = detail::depths(t);
  DagDeduction d;
  d.nodes.resize(t.nodes.size());
  for (NodeId i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& n = t.nodes[i];
    DagNode& out = d.nodes[i];
    out.label = n.label;
    out.level = static_cast<std::uint32_t>(depth[i]);
    switch (n.rule.kind) {
      case TreeRuleKind::Assumption: break;
      case TreeRuleKind::ImpI: out.groups.push_back(PremiseGroup::intro(n.premises[0])); break;
      case TreeRuleKind::ImpE: out.groups.push_back(PremiseGroup::twin(n.premises[0], n.premises[1])); break;
      case TreeRuleKind::Rep:
        if (n.premises.size() != 1) throw InvalidInput("as_dag: (R)_n with n > 1");
        out.groups.push_back(PremiseGroup::repeat(n.premises[0]));
        break;
    }
  }
  d.root = t.root;
  return d;
}

struct UnfoldOptions {
  std::size_t node_budget = 5'000'000;
};

/// Unfolds a verified dag into a tree of the extended calculus, duplicating
/// shared nodes from the root upward. A merged node reached through edge e
/// keeps the groups met by f(e, α) for α ∈ A_f(e); among those only groups
/// whose unfolded subtree is closed in context survive, falling back to the
/// remaining groups when none does. Several survivors become an (R)_k.
inline TreeDeduction unfold_dag(const FormulaTable& table, const DagDeduction& d, UnfoldOptions opts = {}) {
  const DagVerdict verdict = verify_dag_report(table, d);
  if (!verdict.proves) throw InvalidInput("unfold_dag: dag does not verify");
  const DagIndex index(d);
  const AfTable t = compute_af(table, d);
  const detail::FRoutes routes(d, index, t);

  TreeDeduction out;
  detail::DischargeStack discharged;

  auto budget = [&] {
    if (out.nodes.size() > opts.node_budget) throw LimitExceeded("unfold_dag: node budget exceeded");
  };

  // Each returns the new node id or kNoNode when some path stays open.
  auto unfold = [&](auto&& self, NodeId x, std::optional<EdgeId> via) -> NodeId {
    budget();
    const DagNode& node = d.nodes[x];
    auto build_group = [&](const PremiseGroup& g) -> NodeId {
      switch (g.kind) {
        case GroupKind::Twin: {
          NodeId minor = self(self, g.first, index.find({g.first, x}));
          if (minor == kNoNode) return kNoNode;
          NodeId major = self(self, g.second, index.find({g.second, x}));
          if (major == kNoNode) return kNoNode;
          return out.add(node.label, TreeRule::imp_elim(), {minor, major});
        }
        case GroupKind::IPrem: {
          const Formula alpha = table.antecedent(node.label);
          discharged.push(alpha);
          NodeId body = self(self, g.first, index.find({g.first, x}));
          discharged.pop(alpha);
          if (body == kNoNode) return kNoNode;
          return out.add(node.label, TreeRule::imp_intro(alpha), {body});
        }
        case GroupKind::RepPrem: {
          NodeId body = self(self, g.first, index.find({g.first, x}));
          if (body == kNoNode) return kNoNode;
          return out.add(node.label, TreeRule::rep(), {body});
        }
      }
      return kNoNode;
    };

    if (node.groups.empty()) {
      if (!discharged.contains(node.label)) return kNoNode;
      return out.add(node.label, TreeRule::assumption());
    }
    if (node.rule() != DagRuleKind::Merged) return build_group(node.groups.front());

    // Tier 0: groups touched by f(e, α) with α ∈ A_f(e); tier 1: touched by
    // any selection of e; tier 2: everything else.
    std::set<EdgeId> tier0, tier1;
    const auto& sel = routes.per_edge[*via];
    for (const auto& [a, ins] : sel) {
      tier1.insert(ins.begin(), ins.end());
      if (t.per_edge[*via].contains(a)) tier0.insert(ins.begin(), ins.end());
    }
    auto tier_of = [&](const PremiseGroup& g) {
      int best = 2;
      for (NodeId y : g.members()) {
        const EdgeId e = *index.find({y, x});
        if (tier0.count(e)) best = std::min(best, 0);
        else if (tier1.count(e)) best = std::min(best, 1);
      }
      return best;
    };
    for (int tier = 0; tier < 3; ++tier) {
      std::vector<NodeId> kept;
      for (const PremiseGroup& g : node.groups) {
        if (tier_of(g) != tier) continue;
        const auto mark = out.nodes.size();
        NodeId r = build_group(g);
        if (r == kNoNode) {
          out.nodes.resize(mark);
        } else {
          kept.push_back(r);
        }
      }
      if (kept.size() == 1) return kept.front();
      if (kept.size() > 1) return out.add(node.label, TreeRule::rep(), std::move(kept));
    }
    return kNoNode;
  };

  const NodeId root = unfold(unfold, d.root, std::nullopt);
  if (root == kNoNode) throw InternalInconsistency("unfold_dag: no closed unfolding found");
  out.root = root;
  return out;
}

}  // namespace mlnd
