#pragma once

// Graphviz export. One rank per level; edges point from premise to
// conclusion, so the root is drawn at the bottom.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlnd/formula.hpp"
#include "mlnd/json_io.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"

namespace mlnd {

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline void dot_ranks(std::string& out, const std::map<std::size_t, std::vector<NodeId>>& by_level) {
  for (const auto& [level, ids] : by_level) {
    out += "  { rank=same;";
    for (NodeId x : ids) out += " n" + std::to_string(x) + ";";
    out += " }  // level " + std::to_string(level) + "\n";
  }
}

}  // namespace detail

inline std::string tree_to_dot(const FormulaTable& table, const TreeDeduction& d) {
  const auto depth = detail::depths(d);
  std::string out = "digraph tree {\n  rankdir=BT;\n  node [shape=plaintext];\n";
  std::map<std::size_t, std::vector<NodeId>> by_level;
  for (NodeId i = 0; i < d.nodes.size(); ++i) {
    const TreeNode& n = d.nodes[i];
    std::string rule = tree_tag(n.rule.kind);
    if (n.rule.kind == TreeRuleKind::ImpI) rule += " " + table.format(n.rule.discharged);
    out += "  n" + std::to_string(i) + " [label=\"" + detail::dot_escape(table.format(n.label)) + "\\n(" +
           detail::dot_escape(rule) + ")\"];\n";
    by_level[depth[i]].push_back(i);
  }
  for (NodeId i = 0; i < d.nodes.size(); ++i)
    for (NodeId p : d.nodes[i].premises) out += "  n" + std::to_string(p) + " -> n" + std::to_string(i) + ";\n";
  detail::dot_ranks(out, by_level);
  out += "}\n";
  return out;
}

/// Edges of a merged node carry the index of their premise group; edges
/// selected anywhere in f are drawn bold and blue.
inline std::string dag_to_dot(const FormulaTable& table, const DagDeduction& d) {
  std::string out = "digraph dag {\n  rankdir=BT;\n  node [shape=plaintext];\n";
  std::map<std::size_t, std::vector<NodeId>> by_level;
  for (NodeId i = 0; i < d.nodes.size(); ++i) {
    const DagNode& n = d.nodes[i];
    out += "  n" + std::to_string(i) + " [label=\"" + detail::dot_escape(table.format(n.label)) + "\\n(" +
           dag_tag(n.rule()) + ")\"];\n";
    by_level[n.level].push_back(i);
  }
  std::set<Edge> selected;
  for (const auto& [key, sel] : d.f) selected.insert(sel.begin(), sel.end());
  for (NodeId i = 0; i < d.nodes.size(); ++i) {
    const DagNode& n = d.nodes[i];
    const bool merged = n.rule() == DagRuleKind::Merged;
    for (std::size_t g = 0; g < n.groups.size(); ++g)
      for (NodeId p : n.groups[g].members()) {
        std::vector<std::string> attrs;
        if (merged) attrs.push_back("label=\"" + std::string(group_tag(n.groups[g].kind)) + " g" + std::to_string(g) + "\"");
        if (selected.count(Edge{p, i})) {
          attrs.push_back("style=bold");
          attrs.push_back("color=blue");
        }
        out += "  n" + std::to_string(p) + " -> n" + std::to_string(i);
        if (!attrs.empty()) {
          out += " [";
          for (std::size_t k = 0; k < attrs.size(); ++k) out += (k ? ", " : "") + attrs[k];
          out += "]";
        }
        out += ";\n";
      }
  }
  detail::dot_ranks(out, by_level);
  out += "}\n";
  return out;
}

}  // namespace mlnd
