#pragma once

// Horizontal compression of leveled tree proofs into dag proofs, and the
// certification chain: fundamental set of paths → restriction → f → check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"

namespace mlnd {

/// A root-to-leaf path through a dag. `nodes[k]` sits on level k;
/// `groups[k]` is the premise group of `nodes[k]` that the path leaves
/// through to reach `nodes[k + 1]`.
struct DagPath {
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> groups;
  NodeId origin_leaf = kNoNode;  // tree leaf the path was imaged from

  NodeId leaf() const { return nodes.back(); }
};

using PathFamily = std::vector<DagPath>;

struct Compression {
  DagDeduction dag;
  std::vector<NodeId> merge_map;  // tree node → dag node
  PathFamily fstar;
};

/// Merges equally labeled nodes on each level of a leveled tree proof.
/// Each tree inference contributes one premise group to its image; equal
/// groups are shared. Single-group images stay ordinary inferences.
inline Compression compress(const FormulaTable& table, const TreeDeduction& tree, bool require_proof = true) {
  if (!check_tree(table, tree).locally_correct) throw InvalidInput("compress: tree is not locally correct");
  if (!is_leveled(tree)) throw InvalidInput("compress: tree is not leveled");
  if (tree.nodes[tree.root].premises.empty())
    throw InvalidInput("compress: a single assumption proves nothing");
  if (require_proof && !proves_tree(tree)) throw InvalidInput("compress: tree does not prove its conclusion");

  Compression c;
  const auto depth = detail::depths(tree);
  c.merge_map.assign(tree.nodes.size(), kNoNode);
  std::map<std::pair<std::size_t, Formula>, NodeId> key_to_node;

  // Breadth-first so dag ids grow with level, in left-to-right order.
  std::vector<NodeId> order{tree.root};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (NodeId p : tree.nodes[order[i]].premises) order.push_back(p);
  for (NodeId t : order) {
    const auto key = std::make_pair(depth[t], tree.nodes[t].label);
    auto [it, fresh] = key_to_node.emplace(key, static_cast<NodeId>(c.dag.nodes.size()));
    if (fresh) c.dag.add(tree.nodes[t].label, static_cast<std::uint32_t>(depth[t]));
    c.merge_map[t] = it->second;
  }

  std::vector<std::uint32_t> group_of(tree.nodes.size(), 0);
  for (NodeId t : order) {
    const TreeNode& tn = tree.nodes[t];
    if (tn.premises.empty()) continue;
    PremiseGroup g;
    switch (tn.rule.kind) {
      case TreeRuleKind::ImpI: g = PremiseGroup::intro(c.merge_map[tn.premises[0]]); break;
      case TreeRuleKind::ImpE:
        g = PremiseGroup::twin(c.merge_map[tn.premises[0]], c.merge_map[tn.premises[1]]);
        break;
      case TreeRuleKind::Rep: g = PremiseGroup::repeat(c.merge_map[tn.premises[0]]); break;
      case TreeRuleKind::Assumption: break;
    }
    auto& groups = c.dag.nodes[c.merge_map[t]].groups;
    auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) {
      groups.push_back(g);
      it = groups.end() - 1;
    }
    group_of[t] = static_cast<std::uint32_t>(it - groups.begin());
  }
  c.dag.root = c.merge_map[tree.root];

  const auto parent = detail::parent_map(tree);
  for (const auto& tree_path : deductive_paths(tree)) {
    DagPath p;
    p.origin_leaf = tree_path.front();
    for (auto it = tree_path.rbegin(); it != tree_path.rend(); ++it) {
      p.nodes.push_back(c.merge_map[*it]);
      if (!tree.nodes[*it].premises.empty()) p.groups.push_back(group_of[*it]);
    }
    c.fstar.push_back(std::move(p));
  }
  (void)parent;
  return c;
}

namespace detail {

inline std::optional<NodeId> twin_sibling(const PremiseGroup& g, NodeId via) {
  if (g.kind != GroupKind::Twin) return std::nullopt;
  return g.first == via ? g.second : g.first;
}

/// Prefix trie over (group, next node) steps of a path family.
class PathTrie {
 public:
  struct TrieNode {
    std::map<std::pair<std::uint32_t, NodeId>, std::uint32_t> children;
    std::uint32_t first_path = 0;
  };

  explicit PathTrie(const PathFamily& family) {
    nodes_.push_back(TrieNode{});
    for (std::uint32_t i = 0; i < family.size(); ++i) insert(family[i], i);
  }

  /// Trie node after `depth` steps of `p`.
  std::uint32_t locate(const DagPath& p, std::size_t depth) const {
    std::uint32_t cur = 0;
    for (std::size_t k = 0; k < depth; ++k) cur = nodes_[cur].children.at({p.groups[k], p.nodes[k + 1]});
    return cur;
  }

  std::optional<std::uint32_t> child(std::uint32_t at, std::uint32_t group, NodeId next) const {
    auto it = nodes_[at].children.find({group, next});
    if (it == nodes_[at].children.end()) return std::nullopt;
    return it->second;
  }

  const TrieNode& node(std::uint32_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  void insert(const DagPath& p, std::uint32_t index) {
    std::uint32_t cur = 0;
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
      const auto key = std::make_pair(p.groups[k], p.nodes[k + 1]);
      auto it = nodes_[cur].children.find(key);
      if (it == nodes_[cur].children.end()) {
        nodes_.push_back(TrieNode{{}, index});
        it = nodes_[cur].children.emplace(key, static_cast<std::uint32_t>(nodes_.size() - 1)).first;
      }
      cur = it->second;
    }
  }

  std::vector<TrieNode> nodes_;
};

inline bool path_closed(const FormulaTable& table, const DagDeduction& d, const DagPath& p) {
  const Formula alpha = d.nodes[p.leaf()].label;
  for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
    const DagNode& node = d.nodes[p.nodes[k]];
    if (node.groups[p.groups[k]].kind == GroupKind::IPrem && table.antecedent(node.label) == alpha)
      return true;
  }
  return false;
}

inline bool path_well_formed(const DagDeduction& d, const DagPath& p) {
  if (p.nodes.empty() || p.nodes.front() != d.root || p.groups.size() + 1 != p.nodes.size()) return false;
  for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
    if (p.nodes[k] >= d.nodes.size() || p.nodes[k + 1] >= d.nodes.size()) return false;
    const auto& groups = d.nodes[p.nodes[k]].groups;
    if (p.groups[k] >= groups.size()) return false;
    const auto members = groups[p.groups[k]].members();
    if (std::find(members.begin(), members.end(), p.nodes[k + 1]) == members.end()) return false;
  }
  return d.nodes[p.leaf()].groups.empty();
}

}  // namespace detail

struct CoherencyReport {
  bool dense = true;
  bool closed = true;
  bool preserves_elim = true;
  std::vector<std::string> problems;

  bool ok() const { return dense && closed && preserves_elim; }
};

/// The three local-coherency conditions of a path family over a dag:
/// density, closure of every path, and preservation of (→E) steps.
inline CoherencyReport check_coherency_report(const FormulaTable& table, const DagDeduction& d,
                                              const PathFamily& family) {
  CoherencyReport r;
  for (const DagPath& p : family)
    if (!detail::path_well_formed(d, p)) {
      r.dense = r.closed = r.preserves_elim = false;
      r.problems.push_back("path does not lie in the dag");
      return r;
    }

  std::vector<char> covered(d.nodes.size(), 0);
  for (const DagPath& p : family)
    for (NodeId x : p.nodes) covered[x] = 1;
  for (NodeId x = 0; x < d.nodes.size(); ++x)
    if (!covered[x]) {
      r.dense = false;
      r.problems.push_back("node " + std::to_string(x) + " lies on no path");
    }

  for (std::size_t i = 0; i < family.size(); ++i)
    if (!detail::path_closed(table, d, family[i])) {
      r.closed = false;
      r.problems.push_back("path " + std::to_string(i) + " is open");
    }

  const detail::PathTrie trie(family);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const DagPath& p = family[i];
    std::uint32_t at = 0;
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
      const PremiseGroup& g = d.nodes[p.nodes[k]].groups[p.groups[k]];
      if (auto sib = detail::twin_sibling(g, p.nodes[k + 1])) {
        if (!trie.child(at, p.groups[k], *sib)) {
          r.preserves_elim = false;
          r.problems.push_back("path " + std::to_string(i) + " lacks a sibling at level " +
                               std::to_string(k + 1));
        }
      }
      at = *trie.child(at, p.groups[k], p.nodes[k + 1]);
    }
  }
  return r;
}

inline bool check_coherency(const FormulaTable& table, const DagDeduction& d, const PathFamily& family) {
  return check_coherency_report(table, d, family).ok();
}

/// Extracts a fundamental set of paths from a coherent family, descending
/// from the root: start from the first path and, level by level, add for
/// each (→E) step the first path through the sibling premise that shares
/// the tail above it.
inline PathFamily build_fsp(const DagDeduction& d, const PathFamily& fstar) {
  if (fstar.empty()) throw InvalidInput("build_fsp: empty path family");
  const detail::PathTrie trie(fstar);
  std::vector<char> in_family(trie.size(), 0);
  std::vector<std::uint32_t> chosen;
  std::vector<char> taken(fstar.size(), 0);

  auto take = [&](std::uint32_t index) {
    if (taken[index]) return;
    taken[index] = 1;
    chosen.push_back(index);
    const DagPath& p = fstar[index];
    std::uint32_t at = 0;
    in_family[at] = 1;
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
      at = *trie.child(at, p.groups[k], p.nodes[k + 1]);
      in_family[at] = 1;
    }
  };

  take(0);
  const std::size_t h = fstar.front().nodes.size() - 1;
  for (std::size_t level = 0; level < h; ++level) {
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const DagPath& p = fstar[chosen[i]];
      const PremiseGroup& g = d.nodes[p.nodes[level]].groups[p.groups[level]];
      const auto sib = detail::twin_sibling(g, p.nodes[level + 1]);
      if (!sib) continue;
      const std::uint32_t at = trie.locate(p, level);
      const auto target = trie.child(at, p.groups[level], *sib);
      if (!target)
        throw InternalInconsistency("build_fsp: no path through the sibling premise at level " +
                                    std::to_string(level + 1));
      if (!in_family[*target]) take(trie.node(*target).first_path);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  PathFamily out;
  for (std::uint32_t i : chosen) out.push_back(fstar[i]);
  return out;
}

struct Restriction {
  DagDeduction dag;
  PathFamily paths;  // the input family, renumbered into `dag`
};

/// Keeps the nodes, edges and premise groups that the family uses. Merged
/// nodes left with one group become ordinary inferences.
inline Restriction restrict_to_fsp(const DagDeduction& d, const PathFamily& family) {
  std::vector<char> used_node(d.nodes.size(), 0);
  std::vector<std::vector<char>> used_group(d.nodes.size());
  for (NodeId x = 0; x < d.nodes.size(); ++x) used_group[x].assign(d.nodes[x].groups.size(), 0);
  for (const DagPath& p : family) {
    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
      used_node[p.nodes[k]] = 1;
      if (k + 1 < p.nodes.size()) used_group[p.nodes[k]][p.groups[k]] = 1;
    }
  }
  // Twin groups are kept whole; the sibling path guarantees both members.
  Restriction r;
  std::vector<NodeId> renumber(d.nodes.size(), kNoNode);
  for (NodeId x = 0; x < d.nodes.size(); ++x)
    if (used_node[x]) renumber[x] = r.dag.add(d.nodes[x].label, d.nodes[x].level);
  std::vector<std::vector<std::uint32_t>> group_renumber(d.nodes.size());
  for (NodeId x = 0; x < d.nodes.size(); ++x) {
    if (!used_node[x]) continue;
    group_renumber[x].assign(d.nodes[x].groups.size(), 0);
    auto& groups = r.dag.nodes[renumber[x]].groups;
    for (std::size_t gi = 0; gi < d.nodes[x].groups.size(); ++gi) {
      if (!used_group[x][gi]) continue;
      PremiseGroup g = d.nodes[x].groups[gi];
      for (NodeId y : g.members())
        if (renumber[y] == kNoNode)
          throw InternalInconsistency("restrict_to_fsp: group member missing from the family");
      g.first = renumber[g.first];
      if (g.second != kNoNode) g.second = renumber[g.second];
      group_renumber[x][gi] = static_cast<std::uint32_t>(groups.size());
      groups.push_back(g);
    }
  }
  r.dag.root = renumber[d.root];
  for (const DagPath& p : family) {
    DagPath q;
    q.origin_leaf = p.origin_leaf;
    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
      q.nodes.push_back(renumber[p.nodes[k]]);
      if (k + 1 < p.nodes.size()) q.groups.push_back(group_renumber[p.nodes[k]][p.groups[k]]);
    }
    r.paths.push_back(std::move(q));
  }
  return r;
}

/// f(e, α) := the ingoing edges e′ of merged x such that some path of the
/// family with leaf formula α passes e′ and then e.
inline FMap extract_f(const DagDeduction& d, const PathFamily& family) {
  FMap f;
  for (const DagPath& p : family) {
    const Formula alpha = d.nodes[p.leaf()].label;
    for (std::size_t k = 1; k + 1 < p.nodes.size(); ++k) {
      const NodeId x = p.nodes[k];
      if (d.nodes[x].rule() != DagRuleKind::Merged) continue;
      f[FKey{Edge{x, p.nodes[k - 1]}, alpha}].insert(Edge{p.nodes[k + 1], x});
    }
  }
  return f;
}

struct CertificationMetrics {
  std::size_t h_tree = 0;    // height of the leveled input
  std::size_t h_dag = 0;     // height of the compressed dag
  std::size_t phi = 0;       // total weight of distinct tree formulas
  std::size_t w_tree = 0;
  std::size_t w_dag = 0;     // weight of the full compression
  std::size_t w_cert = 0;    // weight of the certified restriction
  std::size_t nodes_dag = 0;
  std::size_t nodes_cert = 0;
  std::size_t fstar_size = 0;
  std::size_t fsp_size = 0;
  std::uint64_t checker_steps = 0;
  bool height_bound_ok = false;  // h_dag <= 2 h_tree
  bool weight_bound_ok = false;  // w_dag <= h_dag * phi^2
  bool bound_ok() const { return height_bound_ok && weight_bound_ok; }
};

struct Certified {
  DagDeduction compressed;  // without f
  DagDeduction dag;         // restricted, with f
  CertificationMetrics metrics;
  bool verified = false;
};

class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// level → compress → fsp → restrict → extract f → verify.
inline Certified compress_and_certify(const FormulaTable& table, const TreeDeduction& tree) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
  };

  stage("input", [&] {
    const auto report = check_tree(table, tree);
    if (!report.locally_correct) throw InvalidInput("tree is not locally correct");
    if (!proves_tree(tree)) throw InvalidInput("tree does not prove its conclusion");
    return 0;
  });
  const TreeDeduction leveled = stage("level", [&] { return level_tree(tree); });
  Compression comp = stage("compress", [&] { return compress(table, leveled); });
  stage("coherency", [&] {
    const auto r = check_coherency_report(table, comp.dag, comp.fstar);
    if (!r.ok()) throw InternalInconsistency(r.problems.empty() ? "incoherent" : r.problems.front());
    return 0;
  });
  const PathFamily fsp = stage("fsp", [&] { return build_fsp(comp.dag, comp.fstar); });
  Restriction restricted = stage("restrict", [&] { return restrict_to_fsp(comp.dag, fsp); });
  restricted.dag.f = stage("extract_f", [&] { return extract_f(restricted.dag, restricted.paths); });
  stage("check_dag", [&] {
    const auto r = check_dag(table, restricted.dag);
    if (!r.correct) throw InternalInconsistency(r.violations.front().reason);
    return 0;
  });
  const DagVerdict verdict = stage("verify", [&] { return verify_dag_report(table, restricted.dag); });

  Certified out;
  CertificationMetrics& m = out.metrics;
  const TreeMetrics tm = tree_metrics(table, leveled);
  m.h_tree = tm.h;
  m.phi = tm.phi;
  m.w_tree = tm.w;
  m.h_dag = comp.dag.height();
  m.w_dag = dag_weight(table, comp.dag);
  m.w_cert = dag_weight(table, restricted.dag);
  m.nodes_dag = comp.dag.nodes.size();
  m.nodes_cert = restricted.dag.nodes.size();
  m.fstar_size = comp.fstar.size();
  m.fsp_size = fsp.size();
  m.checker_steps = verdict.steps;
  m.height_bound_ok = m.h_dag <= 2 * m.h_tree;
  m.weight_bound_ok = m.w_dag <= m.h_dag * m.phi * m.phi;
  out.verified = verdict.proves;
  out.compressed = std::move(comp.dag);
  out.dag = std::move(restricted.dag);
  return out;
}

}  // namespace mlnd
