#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "mlnd/formula.hpp"

namespace mlnd {

/// Γ ⇒ α with Γ a multiset, stored sorted by formula id.
struct Sequent {
  std::vector<Formula> antecedent;
  Formula succedent;

  Sequent() = default;
  Sequent(std::vector<Formula> ante, Formula succ) : antecedent(std::move(ante)), succedent(succ) {
    std::sort(antecedent.begin(), antecedent.end());
  }

  friend bool operator==(const Sequent&, const Sequent&) = default;
  friend auto operator<=>(const Sequent&, const Sequent&) = default;

  std::size_t count(Formula f) const {
    auto [lo, hi] = std::equal_range(antecedent.begin(), antecedent.end(), f);
    return static_cast<std::size_t>(hi - lo);
  }
  bool contains(Formula f) const { return std::binary_search(antecedent.begin(), antecedent.end(), f); }
};

/// Multiset helpers on sorted antecedents.
inline std::vector<Formula> multiset_add(std::vector<Formula> ms, Formula f) {
  ms.insert(std::upper_bound(ms.begin(), ms.end(), f), f);
  return ms;
}

inline std::vector<Formula> multiset_remove(std::vector<Formula> ms, Formula f) {
  auto it = std::lower_bound(ms.begin(), ms.end(), f);
  if (it == ms.end() || *it != f) throw InvalidInput("multiset_remove: element not present");
  ms.erase(it);
  return ms;
}

inline std::size_t sequent_weight(const FormulaTable& table, const Sequent& s) {
  return total_weight(table, s.antecedent) + table.weight(s.succedent) + 1;
}

inline std::string format_sequent(const FormulaTable& table, const Sequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.antecedent.size(); ++i) {
    if (i) out += ", ";
    out += table.format(s.antecedent[i]);
  }
  out += out.empty() ? "=> " : " => ";
  out += table.format(s.succedent);
  return out;
}

/// Parses "a->b, (a->b)->c => a->b". An empty antecedent is written "=> a".
inline Sequent parse_sequent(FormulaTable& table, std::string_view text) {
  const auto arrow = text.find("=>");
  if (arrow == std::string_view::npos) throw ParseError("sequent lacks '=>'", 0);
  const std::string_view ante = text.substr(0, arrow);
  std::vector<Formula> formulas;
  int depth = 0;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view part = ante.substr(start, end - start);
    const auto first = part.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
      if (!formulas.empty() || end != ante.size())
        throw ParseError("empty antecedent entry at offset " + std::to_string(start), start);
      return;
    }
    try {
      formulas.push_back(table.parse(part));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), start + e.offset());
    }
  };
  for (std::size_t i = 0; i < ante.size(); ++i) {
    if (ante[i] == '(') ++depth;
    if (ante[i] == ')') --depth;
    if (ante[i] == ',' && depth == 0) {
      flush(i);
      start = i + 1;
    }
  }
  flush(ante.size());
  Formula succ;
  try {
    succ = table.parse(text.substr(arrow + 2));
  } catch (const ParseError& e) {
    throw ParseError(e.what(), arrow + 2 + e.offset());
  }
  return Sequent(std::move(formulas), succ);
}

}  // namespace mlnd
