#pragma once

// Purely implicational formulas, interned in a FormulaTable.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mlnd/error.hpp"

namespace mlnd {

/// Handle to an interned implicational formula. Two handles from the same
/// table are equal iff the formulas are structurally equal.
struct Formula {
  std::uint32_t id = 0;

  friend constexpr auto operator<=>(Formula, Formula) = default;
};

}  // namespace mlnd

template <>
struct std::hash<mlnd::Formula> {
  std::size_t operator()(mlnd::Formula f) const noexcept { return std::hash<std::uint32_t>{}(f.id); }
};

namespace mlnd {

namespace detail {

inline bool is_ident_char(std::string_view text, std::size_t i) {
  const char c = text[i];
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
      c == '.')
    return true;
  // '-' belongs to a name unless it starts an arrow.
  return c == '-' && !(i + 1 < text.size() && text[i + 1] == '>');
}

inline void skip_space(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                               text[pos] == '\r'))
    ++pos;
}

}  // namespace detail

/// Hash-consing arena for implicational formulas.
///
/// Not synchronized: a table is confined to one worker. Ids are dense and
/// children are always interned before their parents, so ascending id order
/// is a topological order of the subterm relation.
class FormulaTable {
 public:
  Formula atom(std::string_view name) {
    if (name.empty()) throw InvalidInput("empty variable name");
    auto it = atoms_.find(std::string(name));
    if (it != atoms_.end()) return Formula{it->second};
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{static_cast<std::int32_t>(names_.size()), {}, {}, 1});
    names_.emplace_back(name);
    atoms_.emplace(std::string(name), id);
    return Formula{id};
  }

  Formula imp(Formula lhs, Formula rhs) {
    check(lhs);
    check(rhs);
    const std::uint64_t key = (std::uint64_t{lhs.id} << 32) | rhs.id;
    auto it = imps_.find(key);
    if (it != imps_.end()) return Formula{it->second};
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{-1, lhs, rhs, nodes_[lhs.id].weight + nodes_[rhs.id].weight + 1});
    imps_.emplace(key, id);
    return Formula{id};
  }

  /// Right-folds `premises` onto `conclusion`: a1 -> (a2 -> ... -> c).
  Formula chain(const std::vector<Formula>& premises, Formula conclusion) {
    Formula out = conclusion;
    for (auto it = premises.rbegin(); it != premises.rend(); ++it) out = imp(*it, out);
    return out;
  }

  bool is_atom(Formula f) const { return node(f).var >= 0; }
  bool is_imp(Formula f) const { return node(f).var < 0; }
  Formula antecedent(Formula f) const {
    if (is_atom(f)) throw InvalidInput("antecedent of an atom");
    return node(f).lhs;
  }
  Formula consequent(Formula f) const {
    if (is_atom(f)) throw InvalidInput("consequent of an atom");
    return node(f).rhs;
  }
  const std::string& name(Formula f) const {
    if (!is_atom(f)) throw InvalidInput("name of an implication");
    return names_[static_cast<std::size_t>(node(f).var)];
  }

  /// Atoms plus implication symbols.
  std::size_t weight(Formula f) const { return node(f).weight; }

  std::size_t size() const { return nodes_.size(); }
  bool contains(Formula f) const { return f.id < nodes_.size(); }

  std::optional<Formula> find_atom(std::string_view name) const {
    auto it = atoms_.find(std::string(name));
    if (it == atoms_.end()) return std::nullopt;
    return Formula{it->second};
  }

  std::string format(Formula f) const {
    std::string out;
    format_into(f, out);
    return out;
  }

  /// Parses `a->b->c` (right-associative) with parentheses.
  Formula parse(std::string_view text) {
    std::size_t pos = 0;
    Formula f = parse_imp(text, pos);
    detail::skip_space(text, pos);
    if (pos != text.size())
      throw ParseError("unexpected '" + std::string(1, text[pos]) + "' at offset " +
                           std::to_string(pos),
                       pos);
    return f;
  }

  /// All subterms of `f`, including `f`, in ascending id order.
  std::vector<Formula> subformulas(Formula f) const {
    std::set<Formula> seen;
    std::vector<Formula> stack{f};
    while (!stack.empty()) {
      Formula g = stack.back();
      stack.pop_back();
      if (!seen.insert(g).second) continue;
      if (is_imp(g)) {
        stack.push_back(node(g).lhs);
        stack.push_back(node(g).rhs);
      }
    }
    return {seen.begin(), seen.end()};
  }

  bool is_subformula(Formula g, Formula f) const {
    if (g == f) return true;
    if (g.id > f.id) return false;
    const auto subs = subformulas(f);
    return std::binary_search(subs.begin(), subs.end(), g);
  }

  void collect_atoms(Formula f, std::set<Formula>& out) const {
    for (Formula g : subformulas(f))
      if (is_atom(g)) out.insert(g);
  }

 private:
  struct Node {
    std::int32_t var;  // index into names_, or -1 for an implication
    Formula lhs;
    Formula rhs;
    std::size_t weight;
  };

  void check(Formula f) const {
    if (f.id >= nodes_.size()) throw InvalidInput("formula handle from another table");
  }
  const Node& node(Formula f) const {
    check(f);
    return nodes_[f.id];
  }

  void format_into(Formula f, std::string& out) const {
    const Node& n = node(f);
    if (n.var >= 0) {
      out += names_[static_cast<std::size_t>(n.var)];
      return;
    }
    if (is_imp(n.lhs)) {
      out += '(';
      format_into(n.lhs, out);
      out += ')';
    } else {
      format_into(n.lhs, out);
    }
    out += "->";
    format_into(n.rhs, out);
  }

  Formula parse_imp(std::string_view text, std::size_t& pos) {
    Formula lhs = parse_primary(text, pos);
    detail::skip_space(text, pos);
    if (text.substr(pos, 2) == "->") {
      pos += 2;
      Formula rhs = parse_imp(text, pos);
      return imp(lhs, rhs);
    }
    return lhs;
  }

  Formula parse_primary(std::string_view text, std::size_t& pos) {
    detail::skip_space(text, pos);
    if (pos >= text.size())
      throw ParseError("unexpected end of input at offset " + std::to_string(pos), pos);
    if (text[pos] == '(') {
      ++pos;
      Formula f = parse_imp(text, pos);
      detail::skip_space(text, pos);
      if (pos >= text.size() || text[pos] != ')')
        throw ParseError("expected ')' at offset " + std::to_string(pos), pos);
      ++pos;
      return f;
    }
    const std::size_t start = pos;
    while (pos < text.size() && detail::is_ident_char(text, pos)) ++pos;
    if (pos == start)
      throw ParseError("unexpected '" + std::string(1, text[pos]) + "' at offset " +
                           std::to_string(pos),
                       pos);
    return atom(text.substr(start, pos - start));
  }

  std::vector<Node> nodes_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> atoms_;
  std::unordered_map<std::uint64_t, std::uint32_t> imps_;
};

/// Sum of weights over a set of distinct formulas.
template <typename Range>
std::size_t total_weight(const FormulaTable& table, const Range& formulas) {
  std::size_t w = 0;
  for (Formula f : formulas) w += table.weight(f);
  return w;
}

}  // namespace mlnd
