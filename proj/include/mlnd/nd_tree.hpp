#pragma once

// Tree-like natural deduction for minimal implicational logic, with the
// repetition rules (R)_n of the extended calculus.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlnd/formula.hpp"

namespace mlnd {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class TreeRuleKind : std::uint8_t { Assumption, ImpI, ImpE, Rep };

struct TreeRule {
  TreeRuleKind kind = TreeRuleKind::Assumption;
  Formula discharged{};  // meaningful for ImpI only

  static TreeRule assumption() { return {TreeRuleKind::Assumption, {}}; }
  static TreeRule imp_intro(Formula discharged) { return {TreeRuleKind::ImpI, discharged}; }
  static TreeRule imp_elim() { return {TreeRuleKind::ImpE, {}}; }
  static TreeRule rep() { return {TreeRuleKind::Rep, {}}; }

  friend bool operator==(const TreeRule&, const TreeRule&) = default;
};

/// ImpE premises are ordered [minor α, major α→β].
struct TreeNode {
  Formula label;
  TreeRule rule;
  std::vector<NodeId> premises;
};

struct TreeDeduction {
  std::vector<TreeNode> nodes;
  NodeId root = 0;

  Formula conclusion() const { return nodes.at(root).label; }

  NodeId add(Formula label, TreeRule rule, std::vector<NodeId> premises = {}) {
    nodes.push_back(TreeNode{label, rule, std::move(premises)});
    return static_cast<NodeId>(nodes.size() - 1);
  }
};

struct Violation {
  NodeId node;
  std::string reason;
};

struct TreeReport {
  bool locally_correct = true;
  std::vector<Violation> violations;
};

inline TreeReport check_tree(const FormulaTable& table, const TreeDeduction& d) {
  TreeReport report;
  auto fail = [&](NodeId n, std::string why) {
    report.locally_correct = false;
    report.violations.push_back({n, std::move(why)});
  };
  const auto n = d.nodes.size();
  if (n == 0 || d.root >= n) {
    fail(d.root, "root out of range");
    return report;
  }

  std::vector<std::uint32_t> parents(n, 0);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId p : d.nodes[i].premises) {
      if (p >= n) {
        fail(i, "premise id out of range");
        return report;
      }
      ++parents[p];
    }
  if (parents[d.root] != 0) fail(d.root, "root is used as a premise");
  for (NodeId i = 0; i < n; ++i)
    if (i != d.root && parents[i] != 1) fail(i, "node has " + std::to_string(parents[i]) + " conclusions");
  if (!report.locally_correct) return report;

  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{d.root};
  std::size_t reached = 0;
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = 1;
    ++reached;
    for (NodeId p : d.nodes[x].premises) stack.push_back(p);
  }
  if (reached != n) {
    for (NodeId i = 0; i < n; ++i)
      if (!seen[i]) fail(i, "node not connected to the root");
    return report;
  }

  for (NodeId i = 0; i < n; ++i) {
    const TreeNode& node = d.nodes[i];
    const auto& prem = node.premises;
    switch (node.rule.kind) {
      case TreeRuleKind::Assumption:
        if (!prem.empty()) fail(i, "assumption with premises");
        break;
      case TreeRuleKind::ImpI: {
        if (prem.size() != 1) {
          fail(i, "ImpI needs exactly one premise");
          break;
        }
        if (!table.is_imp(node.label) || table.antecedent(node.label) != node.rule.discharged) {
          fail(i, "label not an implication with antecedent " + table.format(node.rule.discharged));
          break;
        }
        if (d.nodes[prem[0]].label != table.consequent(node.label))
          fail(i, "ImpI premise is not the consequent of the conclusion");
        break;
      }
      case TreeRuleKind::ImpE: {
        if (prem.size() != 2) {
          fail(i, "ImpE needs exactly two premises");
          break;
        }
        const Formula minor = d.nodes[prem[0]].label;
        const Formula major = d.nodes[prem[1]].label;
        if (!table.is_imp(major) || table.antecedent(major) != minor ||
            table.consequent(major) != node.label)
          fail(i, "major premise mismatch");
        break;
      }
      case TreeRuleKind::Rep:
        if (prem.empty()) fail(i, "Rep needs at least one premise");
        for (NodeId p : prem)
          if (d.nodes[p].label != node.label) fail(i, "Rep premise label differs from conclusion");
        break;
    }
  }
  return report;
}

namespace detail {

/// Multiset of formulas discharged along the current root-to-node path.
class DischargeStack {
 public:
  void push(Formula f) { ++counts_[f]; }
  void pop(Formula f) {
    if (--counts_[f] == 0) counts_.erase(f);
  }
  bool contains(Formula f) const { return counts_.count(f) != 0; }

 private:
  std::unordered_map<Formula, int> counts_;
};

inline std::vector<NodeId> parent_map(const TreeDeduction& d) {
  std::vector<NodeId> parent(d.nodes.size(), kNoNode);
  for (NodeId i = 0; i < d.nodes.size(); ++i)
    for (NodeId p : d.nodes[i].premises) parent[p] = i;
  return parent;
}

/// Depth of every node (edges from the root), iteratively.
inline std::vector<std::size_t> depths(const TreeDeduction& d) {
  std::vector<std::size_t> depth(d.nodes.size(), 0);
  std::vector<NodeId> stack{d.root};
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    for (NodeId p : d.nodes[x].premises) {
      depth[p] = depth[x] + 1;
      stack.push_back(p);
    }
  }
  return depth;
}

}  // namespace detail

/// Edges on the longest leaf-to-root path.
inline std::size_t tree_height(const TreeDeduction& d) {
  const auto depth = detail::depths(d);
  return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

inline bool is_leveled(const TreeDeduction& d) {
  const auto depth = detail::depths(d);
  const std::size_t h = depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
  for (NodeId i = 0; i < d.nodes.size(); ++i)
    if (d.nodes[i].premises.empty() && depth[i] != h) return false;
  return true;
}

/// Leaf-to-root node sequences, one per leaf, in left-to-right leaf order.
inline std::vector<std::vector<NodeId>> deductive_paths(const TreeDeduction& d) {
  std::vector<std::vector<NodeId>> paths;
  std::vector<NodeId> current;
  auto walk = [&](auto&& self, NodeId x) -> void {
    current.push_back(x);
    const auto& prem = d.nodes[x].premises;
    if (prem.empty()) {
      paths.emplace_back(current.rbegin(), current.rend());
    } else {
      for (NodeId p : prem) self(self, p);
    }
    current.pop_back();
  };
  walk(walk, d.root);
  return paths;
}

/// Every deductive path contains an (→I) discharging its leaf formula
/// (the root included).
inline bool proves_tree(const TreeDeduction& d) {
  detail::DischargeStack discharged;
  auto walk = [&](auto&& self, NodeId x) -> bool {
    const TreeNode& node = d.nodes[x];
    if (node.premises.empty()) return discharged.contains(node.label);
    const bool intro = node.rule.kind == TreeRuleKind::ImpI;
    if (intro) discharged.push(node.rule.discharged);
    bool ok = true;
    for (NodeId p : node.premises)
      if (!self(self, p)) {
        ok = false;
        break;
      }
    if (intro) discharged.pop(node.rule.discharged);
    return ok;
  };
  return walk(walk, d.root);
}

/// Pads every short branch with (R)_1 nodes directly below its leaf so that
/// all leaves sit at the maximal height.
inline TreeDeduction level_tree(const TreeDeduction& d) {
  const auto depth = detail::depths(d);
  const std::size_t h = tree_height(d);
  const auto parent = detail::parent_map(d);
  TreeDeduction out = d;
  for (NodeId leaf = 0; leaf < d.nodes.size(); ++leaf) {
    if (!d.nodes[leaf].premises.empty() || depth[leaf] == h) continue;
    NodeId below = leaf;
    for (std::size_t k = depth[leaf]; k < h; ++k)
      below = out.add(d.nodes[leaf].label, TreeRule::rep(), {below});
    for (NodeId& p : out.nodes[parent[leaf]].premises)
      if (p == leaf) p = below;
  }
  return out;
}

/// Resolves every (R)_n by keeping its leftmost premise whose subtree is
/// closed in context, yielding a pure (→I)/(→E) proof.
inline TreeDeduction eliminate_repetitions(const TreeDeduction& d) {
  TreeDeduction out;
  detail::DischargeStack discharged;
  // Returns the new node id, or kNoNode if some path stays open.
  auto build = [&](auto&& self, NodeId x) -> NodeId {
    const TreeNode& node = d.nodes[x];
    switch (node.rule.kind) {
      case TreeRuleKind::Assumption:
        if (!discharged.contains(node.label)) return kNoNode;
        return out.add(node.label, node.rule);
      case TreeRuleKind::Rep:
        for (NodeId p : node.premises) {
          const auto mark = out.nodes.size();
          NodeId r = self(self, p);
          if (r != kNoNode) return r;
          out.nodes.resize(mark);
        }
        return kNoNode;
      case TreeRuleKind::ImpI: {
        discharged.push(node.rule.discharged);
        NodeId body = self(self, node.premises[0]);
        discharged.pop(node.rule.discharged);
        if (body == kNoNode) return kNoNode;
        return out.add(node.label, node.rule, {body});
      }
      case TreeRuleKind::ImpE: {
        NodeId minor = self(self, node.premises[0]);
        if (minor == kNoNode) return kNoNode;
        NodeId major = self(self, node.premises[1]);
        if (major == kNoNode) return kNoNode;
        return out.add(node.label, node.rule, {minor, major});
      }
    }
    return kNoNode;
  };
  const NodeId root = build(build, d.root);
  if (root == kNoNode)
    throw InternalInconsistency("eliminate_repetitions: no premise of some repetition yields closure");
  out.root = root;
  return out;
}

/// Sum of label weights plus number of edges.
inline std::size_t tree_weight(const FormulaTable& table, const TreeDeduction& d) {
  std::size_t w = 0;
  for (const TreeNode& n : d.nodes) w += table.weight(n.label) + n.premises.size();
  return w;
}

inline std::set<Formula> distinct_labels(const TreeDeduction& d) {
  std::set<Formula> labels;
  for (const TreeNode& n : d.nodes) labels.insert(n.label);
  return labels;
}

struct TreeMetrics {
  std::size_t h = 0;
  std::size_t phi = 0;
  std::size_t w = 0;
  bool normal = true;
  bool weak_subformula = true;
};

inline TreeMetrics tree_metrics(const FormulaTable& table, const TreeDeduction& d) {
  TreeMetrics m;
  m.h = tree_height(d);
  m.phi = total_weight(table, distinct_labels(d));
  m.w = tree_weight(table, d);
  for (const TreeNode& n : d.nodes)
    if (n.rule.kind == TreeRuleKind::ImpE &&
        d.nodes[n.premises[1]].rule.kind == TreeRuleKind::ImpI)
      m.normal = false;

  std::set<Formula> allowed;
  for (Formula f : table.subformulas(d.conclusion())) allowed.insert(f);
  for (const TreeNode& n : d.nodes)
    if (n.rule.kind == TreeRuleKind::ImpI)
      for (Formula f : table.subformulas(n.rule.discharged)) allowed.insert(f);
  for (const TreeNode& n : d.nodes)
    if (!allowed.count(n.label)) {
      m.weak_subformula = false;
      break;
    }
  return m;
}

}  // namespace mlnd
