#pragma once

// JSON interchange for tree deductions, dag deductions (with f) and LM→
// proofs. Formulas travel as their formatted strings.

#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "mlnd/compressor.hpp"
#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/lm_prover.hpp"
#include "mlnd/nd_dag.hpp"
#include "mlnd/nd_tree.hpp"
#include "mlnd/sequent.hpp"

namespace mlnd {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing \"" + key + "\"", 0);
  return obj.at(key);
}

template <typename T>
T get_as(const Json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": wrong type", 0);
  }
}

inline Formula parse_label(FormulaTable& table, const Json& j, const std::string& where) {
  const auto text = get_as<std::string>(j, where);
  try {
    return table.parse(text);
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what(), e.offset());
  }
}

/// Maps the "id" fields of a node array onto dense indices.
inline std::map<std::int64_t, NodeId> dense_ids(const Json& nodes, const std::string& what) {
  std::map<std::int64_t, NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto id = get_as<std::int64_t>(field(nodes[i], "id", what + " node " + std::to_string(i)), what);
    if (!ids.emplace(id, static_cast<NodeId>(i)).second)
      throw ParseError(what + ": duplicate node id " + std::to_string(id), 0);
  }
  return ids;
}

inline NodeId resolve(const std::map<std::int64_t, NodeId>& ids, const Json& j, const std::string& where) {
  const auto id = get_as<std::int64_t>(j, where);
  auto it = ids.find(id);
  if (it == ids.end()) throw ParseError(where + ": unknown node id " + std::to_string(id), 0);
  return it->second;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

}  // namespace detail

inline const char* tree_tag(TreeRuleKind k) {
  switch (k) {
    case TreeRuleKind::Assumption: return "Assumption";
    case TreeRuleKind::ImpI: return "ImpI";
    case TreeRuleKind::ImpE: return "ImpE";
    case TreeRuleKind::Rep: return "Rep";
  }
  return "?";
}

inline Json tree_to_json(const FormulaTable& table, const TreeDeduction& d) {
  Json nodes = Json::array();
  for (NodeId i = 0; i < d.nodes.size(); ++i) {
    const TreeNode& n = d.nodes[i];
    Json rule{{"tag", tree_tag(n.rule.kind)}};
    if (n.rule.kind == TreeRuleKind::ImpI) rule["discharge"] = table.format(n.rule.discharged);
    nodes.push_back(Json{{"id", i}, {"label", table.format(n.label)}, {"rule", rule}, {"premises", n.premises}});
  }
  return Json{{"nodes", nodes}, {"root", d.root}};
}

inline TreeDeduction tree_from_json(FormulaTable& table, const Json& j) {
  const Json& nodes = detail::field(j, "nodes", "tree");
  if (!nodes.is_array()) throw ParseError("tree: \"nodes\" must be an array", 0);
  const auto ids = detail::dense_ids(nodes, "tree");
  TreeDeduction d;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "tree node " + std::to_string(i);
    const Json& n = nodes[i];
    TreeNode node;
    node.label = detail::parse_label(table, detail::field(n, "label", where), where);
    const Json& rule = detail::field(n, "rule", where);
    const auto tag = detail::get_as<std::string>(detail::field(rule, "tag", where), where);
    if (tag == "Assumption") {
      node.rule = TreeRule::assumption();
    } else if (tag == "ImpI") {
      node.rule = TreeRule::imp_intro(detail::parse_label(table, detail::field(rule, "discharge", where), where));
    } else if (tag == "ImpE") {
      node.rule = TreeRule::imp_elim();
    } else if (tag == "Rep") {
      node.rule = TreeRule::rep();
    } else {
      throw ParseError(where + ": unknown rule tag \"" + tag + "\"", 0);
    }
    if (n.contains("premises"))
      for (const Json& p : n.at("premises")) node.premises.push_back(detail::resolve(ids, p, where));
    d.nodes.push_back(std::move(node));
  }
  d.root = detail::resolve(ids, detail::field(j, "root", "tree"), "tree root");
  return d;
}

inline const char* dag_tag(DagRuleKind k) {
  switch (k) {
    case DagRuleKind::Assumption: return "Assumption";
    case DagRuleKind::ImpI: return "ImpI";
    case DagRuleKind::ImpE: return "ImpE";
    case DagRuleKind::Rep: return "Rep";
    case DagRuleKind::Merged: return "Merged";
  }
  return "?";
}

inline const char* group_tag(GroupKind k) {
  switch (k) {
    case GroupKind::Twin: return "Twin";
    case GroupKind::IPrem: return "IPrem";
    case GroupKind::RepPrem: return "RepPrem";
  }
  return "?";
}

inline Json dag_to_json(const FormulaTable& table, const DagDeduction& d) {
  Json nodes = Json::array();
  for (NodeId i = 0; i < d.nodes.size(); ++i) {
    const DagNode& n = d.nodes[i];
    Json groups = Json::array();
    for (const PremiseGroup& g : n.groups) groups.push_back(Json{{"kind", group_tag(g.kind)}, {"premises", g.members()}});
    nodes.push_back(Json{{"id", i},
                         {"label", table.format(n.label)},
                         {"level", n.level},
                         {"rule", dag_tag(n.rule())},
                         {"groups", groups}});
  }
  const DagIndex index(d);
  Json edges = Json::array();
  for (const Edge& e : index.edges) edges.push_back(Json::array({e.source, e.target}));
  Json f = Json::array();
  for (const auto& [key, selected] : d.f) {
    Json sel = Json::array();
    for (const Edge& e : selected) sel.push_back(Json::array({e.source, e.target}));
    f.push_back(Json{{"edge", Json::array({key.edge.source, key.edge.target})},
                     {"assumption", table.format(key.assumption)},
                     {"selected", sel}});
  }
  return Json{{"nodes", nodes}, {"root", d.root}, {"edges", edges}, {"f_map", f}};
}

inline DagDeduction dag_from_json(FormulaTable& table, const Json& j) {
  const Json& nodes = detail::field(j, "nodes", "dag");
  if (!nodes.is_array()) throw ParseError("dag: \"nodes\" must be an array", 0);
  const auto ids = detail::dense_ids(nodes, "dag");
  DagDeduction d;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "dag node " + std::to_string(i);
    const Json& n = nodes[i];
    DagNode node;
    node.label = detail::parse_label(table, detail::field(n, "label", where), where);
    node.level = detail::get_as<std::uint32_t>(detail::field(n, "level", where), where);
    if (n.contains("groups"))
      for (const Json& g : n.at("groups")) {
        const auto kind = detail::get_as<std::string>(detail::field(g, "kind", where), where);
        const Json& prem = detail::field(g, "premises", where);
        std::vector<NodeId> members;
        for (const Json& p : prem) members.push_back(detail::resolve(ids, p, where));
        if (kind == "Twin" && members.size() == 2) {
          node.groups.push_back(PremiseGroup::twin(members[0], members[1]));
        } else if (kind == "IPrem" && members.size() == 1) {
          node.groups.push_back(PremiseGroup::intro(members[0]));
        } else if (kind == "RepPrem" && members.size() == 1) {
          node.groups.push_back(PremiseGroup::repeat(members[0]));
        } else {
          throw ParseError(where + ": bad group \"" + kind + "\" with " + std::to_string(members.size()) +
                               " premises",
                           0);
        }
      }
    if (n.contains("rule")) {
      const auto tag = detail::get_as<std::string>(n.at("rule"), where);
      if (tag != dag_tag(node.rule()))
        throw ParseError(where + ": rule \"" + tag + "\" does not match its groups", 0);
    }
    d.nodes.push_back(std::move(node));
  }
  d.root = detail::resolve(ids, detail::field(j, "root", "dag"), "dag root");

  auto edge = [&](const Json& e, const std::string& where) {
    if (!e.is_array() || e.size() != 2) throw ParseError(where + ": an edge is a [source, target] pair", 0);
    return Edge{detail::resolve(ids, e[0], where), detail::resolve(ids, e[1], where)};
  };
  const DagIndex index(d);
  if (j.contains("edges")) {
    std::set<Edge> listed;
    for (const Json& e : j.at("edges")) listed.insert(edge(e, "dag edges"));
    const std::set<Edge> derived(index.edges.begin(), index.edges.end());
    if (listed != derived) throw ParseError("dag: \"edges\" disagree with the premise groups", 0);
  }
  if (j.contains("f_map"))
    for (const Json& entry : j.at("f_map")) {
      const std::string where = "dag f_map";
      FKey key{edge(detail::field(entry, "edge", where), where),
               detail::parse_label(table, detail::field(entry, "assumption", where), where)};
      auto& sel = d.f[key];
      for (const Json& s : detail::field(entry, "selected", where)) sel.insert(edge(s, where));
    }
  return d;
}

inline Json lm_to_json(const FormulaTable& table, const LmProof& p) {
  Json nodes = Json::array();
  for (std::uint32_t i = 0; i < p.nodes.size(); ++i) {
    const LmNode& n = p.nodes[i];
    Json w = Json::array();
    for (Formula f : n.witnesses) w.push_back(table.format(f));
    nodes.push_back(Json{{"id", i},
                         {"rule", rule_name(n.rule)},
                         {"conclusion", format_sequent(table, n.conclusion)},
                         {"witnesses", w},
                         {"premises", n.premises}});
  }
  return Json{{"nodes", nodes}, {"root", p.root}};
}

inline LmProof lm_from_json(FormulaTable& table, const Json& j) {
  const Json& nodes = detail::field(j, "nodes", "proof");
  if (!nodes.is_array()) throw ParseError("proof: \"nodes\" must be an array", 0);
  const auto ids = detail::dense_ids(nodes, "proof");
  LmProof p;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "proof node " + std::to_string(i);
    const Json& n = nodes[i];
    LmNode node;
    const auto name = detail::get_as<std::string>(detail::field(n, "rule", where), where);
    const auto rule = rule_from_name(name);
    if (!rule) throw ParseError(where + ": unknown rule \"" + name + "\"", 0);
    node.rule = *rule;
    const auto text = detail::get_as<std::string>(detail::field(n, "conclusion", where), where);
    try {
      node.conclusion = parse_sequent(table, text);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what(), e.offset());
    }
    if (n.contains("witnesses"))
      for (const Json& w : n.at("witnesses")) node.witnesses.push_back(detail::parse_label(table, w, where));
    if (n.contains("premises"))
      for (const Json& c : n.at("premises")) node.premises.push_back(detail::resolve(ids, c, where));
    p.nodes.push_back(std::move(node));
  }
  p.root = detail::resolve(ids, detail::field(j, "root", "proof"), "proof root");
  return p;
}

inline Json metrics_to_json(const CertificationMetrics& m) {
  return Json{{"h_tree", m.h_tree},       {"h_dag", m.h_dag},         {"phi", m.phi},
              {"w_tree", m.w_tree},       {"w_dag", m.w_dag},         {"w_cert", m.w_cert},
              {"nodes_dag", m.nodes_dag}, {"nodes_cert", m.nodes_cert}, {"fstar_size", m.fstar_size},
              {"fsp_size", m.fsp_size},   {"checker_steps", m.checker_steps}, {"bound_ok", m.bound_ok()}};
}

}  // namespace mlnd
