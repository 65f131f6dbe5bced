#pragma once

// Propositional formulas over ⊥, ∧, ∨, →. Used by the Hamiltonian encoding
// and its translation into the implicational fragment.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"

namespace mlnd {

struct FullFormula {
  std::uint32_t id = 0;

  friend constexpr auto operator<=>(FullFormula, FullFormula) = default;
};

enum class FullKind : std::uint8_t { Atom, Falsum, And, Or, Imp };

class FullTable {
 public:
  FullFormula atom(std::string_view name) {
    if (name.empty()) throw InvalidInput("empty variable name");
    auto it = atoms_.find(std::string(name));
    if (it != atoms_.end()) return FullFormula{it->second};
    const auto id = push(Node{FullKind::Atom, static_cast<std::int32_t>(names_.size()), {}, {}, 1});
    names_.emplace_back(name);
    atoms_.emplace(std::string(name), id);
    return FullFormula{id};
  }

  FullFormula falsum() {
    if (!falsum_) falsum_ = push(Node{FullKind::Falsum, -1, {}, {}, 1});
    return FullFormula{*falsum_};
  }

  FullFormula conj(FullFormula a, FullFormula b) { return binary(FullKind::And, a, b); }
  FullFormula disj(FullFormula a, FullFormula b) { return binary(FullKind::Or, a, b); }
  FullFormula imp(FullFormula a, FullFormula b) { return binary(FullKind::Imp, a, b); }

  /// Left-associated conjunction; `parts` must be nonempty.
  FullFormula conj_all(const std::vector<FullFormula>& parts) { return fold(FullKind::And, parts); }
  FullFormula disj_all(const std::vector<FullFormula>& parts) { return fold(FullKind::Or, parts); }

  FullKind kind(FullFormula f) const { return node(f).kind; }
  FullFormula lhs(FullFormula f) const { return node(f).lhs; }
  FullFormula rhs(FullFormula f) const { return node(f).rhs; }
  const std::string& name(FullFormula f) const {
    if (kind(f) != FullKind::Atom) throw InvalidInput("name of a compound formula");
    return names_[static_cast<std::size_t>(node(f).var)];
  }
  bool is_compound(FullFormula f) const { return kind(f) != FullKind::Atom && kind(f) != FullKind::Falsum; }

  /// Symbol count: atoms, ⊥ and connectives each count 1.
  std::size_t size(FullFormula f) const { return node(f).size; }
  std::size_t table_size() const { return nodes_.size(); }

  /// Distinct subterms (including `f`) in ascending id order.
  std::vector<FullFormula> subformulas(FullFormula f) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<FullFormula> stack{f};
    while (!stack.empty()) {
      FullFormula g = stack.back();
      stack.pop_back();
      if (seen[g.id]) continue;
      seen[g.id] = 1;
      if (is_compound(g)) {
        stack.push_back(lhs(g));
        stack.push_back(rhs(g));
      }
    }
    std::vector<FullFormula> out;
    for (std::uint32_t i = 0; i < seen.size(); ++i)
      if (seen[i]) out.push_back(FullFormula{i});
    return out;
  }

  /// Distinct atoms of `f`, in ascending id order.
  std::vector<FullFormula> atoms(FullFormula f) const {
    std::vector<FullFormula> out;
    for (FullFormula g : subformulas(f))
      if (kind(g) == FullKind::Atom) out.push_back(g);
    return out;
  }

  std::string format(FullFormula f) const {
    std::string out;
    format_into(f, out);
    return out;
  }

  /// Grammar: imp := or ("->" imp)? ; or := and ("|" and)* ;
  /// and := unit ("&" unit)* ; unit := ident | "false" | "(" imp ")".
  FullFormula parse(std::string_view text) {
    std::size_t pos = 0;
    FullFormula f = parse_imp(text, pos);
    detail::skip_space(text, pos);
    if (pos != text.size())
      throw ParseError("unexpected '" + std::string(1, text[pos]) + "' at offset " +
                           std::to_string(pos),
                       pos);
    return f;
  }

 private:
  struct Node {
    FullKind kind;
    std::int32_t var;
    FullFormula lhs;
    FullFormula rhs;
    std::size_t size;
  };

  std::uint32_t push(Node n) {
    nodes_.push_back(n);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  const Node& node(FullFormula f) const {
    if (f.id >= nodes_.size()) throw InvalidInput("full formula handle from another table");
    return nodes_[f.id];
  }

  FullFormula binary(FullKind k, FullFormula a, FullFormula b) {
    const auto key = std::make_tuple(static_cast<int>(k), a.id, b.id);
    auto it = compounds_.find(key);
    if (it != compounds_.end()) return FullFormula{it->second};
    const auto id = push(Node{k, -1, a, b, node(a).size + node(b).size + 1});
    compounds_.emplace(key, id);
    return FullFormula{id};
  }

  FullFormula fold(FullKind k, const std::vector<FullFormula>& parts) {
    if (parts.empty()) throw InvalidInput("empty conjunction or disjunction");
    FullFormula acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = binary(k, acc, parts[i]);
    return acc;
  }

  static int precedence(FullKind k) {
    switch (k) {
      case FullKind::Imp: return 1;
      case FullKind::Or: return 2;
      case FullKind::And: return 3;
      default: return 4;
    }
  }

  void format_into(FullFormula f, std::string& out) const {
    const Node& n = node(f);
    switch (n.kind) {
      case FullKind::Atom: out += names_[static_cast<std::size_t>(n.var)]; return;
      case FullKind::Falsum: out += "false"; return;
      default: break;
    }
    const int p = precedence(n.kind);
    const bool right_assoc = n.kind == FullKind::Imp;
    const int pl = precedence(kind(n.lhs));
    const int pr = precedence(kind(n.rhs));
    const bool paren_l = right_assoc ? pl <= p : pl < p;
    const bool paren_r = right_assoc ? pr < p : pr <= p;
    if (paren_l) out += '(';
    format_into(n.lhs, out);
    if (paren_l) out += ')';
    out += n.kind == FullKind::And ? "&" : n.kind == FullKind::Or ? "|" : "->";
    if (paren_r) out += '(';
    format_into(n.rhs, out);
    if (paren_r) out += ')';
  }

  FullFormula parse_imp(std::string_view text, std::size_t& pos) {
    FullFormula lhs = parse_or(text, pos);
    detail::skip_space(text, pos);
    if (text.substr(pos, 2) == "->") {
      pos += 2;
      return imp(lhs, parse_imp(text, pos));
    }
    return lhs;
  }

  FullFormula parse_or(std::string_view text, std::size_t& pos) {
    FullFormula acc = parse_and(text, pos);
    for (;;) {
      detail::skip_space(text, pos);
      if (pos < text.size() && text[pos] == '|') {
        ++pos;
        acc = disj(acc, parse_and(text, pos));
      } else {
        return acc;
      }
    }
  }

  FullFormula parse_and(std::string_view text, std::size_t& pos) {
    FullFormula acc = parse_unit(text, pos);
    for (;;) {
      detail::skip_space(text, pos);
      if (pos < text.size() && text[pos] == '&') {
        ++pos;
        acc = conj(acc, parse_unit(text, pos));
      } else {
        return acc;
      }
    }
  }

  FullFormula parse_unit(std::string_view text, std::size_t& pos) {
    detail::skip_space(text, pos);
    if (pos >= text.size())
      throw ParseError("unexpected end of input at offset " + std::to_string(pos), pos);
    if (text[pos] == '(') {
      ++pos;
      FullFormula f = parse_imp(text, pos);
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
    const auto word = text.substr(start, pos - start);
    if (word == "false") return falsum();
    return atom(word);
  }

  std::vector<Node> nodes_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> atoms_;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::uint32_t> compounds_;
  std::optional<std::uint32_t> falsum_;
};

}  // namespace mlnd
