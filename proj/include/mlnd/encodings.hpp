#pragma once

// Hamiltonian-path encoding of digraphs, truth-table satisfiability, and
// the translation of full propositional formulas into implicational ones.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlnd/error.hpp"
#include "mlnd/formula.hpp"
#include "mlnd/full_formula.hpp"

namespace mlnd {

struct DiGraph {
  std::vector<std::string> vertices;
  std::set<std::pair<std::size_t, std::size_t>> edges;

  std::size_t size() const { return vertices.size(); }
  bool has_edge(std::size_t u, std::size_t v) const { return edges.count({u, v}) != 0; }

  /// Vertices v1..vn, no edges.
  static DiGraph with_vertices(std::size_t n) {
    DiGraph g;
    for (std::size_t i = 1; i <= n; ++i) g.vertices.push_back("v" + std::to_string(i));
    return g;
  }
};

/// "n <count>" on the first line, then one "u v" directed edge per line.
/// Blank lines and lines starting with '#' are ignored.
inline DiGraph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::optional<DiGraph> g;
  std::map<std::string, std::size_t> index;
  auto err = [&](const std::string& msg) { return ParseError(msg, 0, lineno); };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream words(line);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (!g) {
      if (tok.size() != 2 || tok[0] != "n") throw err("expected header 'n <count>'");
      std::size_t n = 0;
      try {
        std::size_t used = 0;
        n = std::stoul(tok[1], &used);
        if (used != tok[1].size()) throw InvalidInput("");
      } catch (const std::exception&) {
        throw err("bad vertex count '" + tok[1] + "'");
      }
      if (n == 0) throw err("a graph needs at least one vertex");
      g = DiGraph::with_vertices(n);
      for (std::size_t i = 0; i < n; ++i) index[g->vertices[i]] = i;
      continue;
    }
    if (tok.size() != 2) throw err("expected an edge 'u v'");
    auto u = index.find(tok[0]);
    auto v = index.find(tok[1]);
    if (u == index.end()) throw err("unknown vertex '" + tok[0] + "'");
    if (v == index.end()) throw err("unknown vertex '" + tok[1] + "'");
    if (!g->edges.emplace(u->second, v->second).second) throw err("duplicate edge " + tok[0] + " " + tok[1]);
  }
  if (!g) throw ParseError("empty graph description", 0, lineno);
  return *g;
}

inline std::string format_graph(const DiGraph& g) {
  std::string out = "n " + std::to_string(g.size()) + "\n";
  for (const auto& [u, v] : g.edges) out += g.vertices[u] + " " + g.vertices[v] + "\n";
  return out;
}

/// Whether some ordering of all vertices has every consecutive pair joined
/// by an edge.
inline bool hamiltonicity_oracle(const DiGraph& g) {
  if (g.size() > 10) throw LimitExceeded("hamiltonicity_oracle: more than 10 vertices");
  std::vector<std::size_t> perm(g.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; ok && i + 1 < perm.size(); ++i) ok = g.has_edge(perm[i], perm[i + 1]);
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

struct HamEncoding {
  // Absent parts are empty conjunctions and are left out of alpha.
  std::optional<FullFormula> a, b, c, d, e;
  FullFormula alpha;
  std::size_t variable_count = 0;
};

inline FullFormula ham_var(FullTable& t, const DiGraph& g, std::size_t step, std::size_t v) {
  return t.atom("X_" + std::to_string(step + 1) + "_" + g.vertices[v]);
}

inline HamEncoding encode_alpha(FullTable& t, const DiGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw InvalidInput("encode_alpha: empty graph");
  auto x = [&](std::size_t i, std::size_t v) { return ham_var(t, g, i, v); };
  auto never = [&](FullFormula p, FullFormula q) { return t.imp(p, t.imp(q, t.falsum())); };
  auto conj = [&](const std::vector<FullFormula>& parts) -> std::optional<FullFormula> {
    if (parts.empty()) return std::nullopt;
    return t.conj_all(parts);
  };

  HamEncoding enc;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t v = 0; v < n; ++v) x(i, v);
  enc.variable_count = n * n;

  std::vector<FullFormula> parts;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<FullFormula> steps;
    for (std::size_t i = 0; i < n; ++i) steps.push_back(x(i, v));
    parts.push_back(t.disj_all(steps));
  }
  enc.a = conj(parts);

  parts.clear();
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) parts.push_back(never(x(i, v), x(j, v)));
  enc.b = conj(parts);

  parts.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<FullFormula> verts;
    for (std::size_t v = 0; v < n; ++v) verts.push_back(x(i, v));
    parts.push_back(t.disj_all(verts));
  }
  enc.c = conj(parts);

  parts.clear();
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w)
      if (v != w)
        for (std::size_t i = 0; i < n; ++i) parts.push_back(never(x(i, v), x(i, w)));
  enc.d = conj(parts);

  parts.clear();
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w)
      if (!g.has_edge(v, w))
        for (std::size_t i = 0; i + 1 < n; ++i) parts.push_back(never(x(i, v), x(i + 1, w)));
  enc.e = conj(parts);

  std::vector<FullFormula> present;
  for (const auto& part : {enc.a, enc.b, enc.c, enc.d, enc.e})
    if (part) present.push_back(*part);
  enc.alpha = t.conj_all(present);
  return enc;
}

inline constexpr std::size_t kMaxSatVariables = 26;

/// Truth-table satisfiability, 64 assignments per machine word.
inline bool classical_sat(const FullTable& t, FullFormula f) {
  const auto atoms = t.atoms(f);
  if (atoms.size() > kMaxSatVariables)
    throw LimitExceeded("classical_sat: " + std::to_string(atoms.size()) + " variables exceed the limit of " +
                        std::to_string(kMaxSatVariables));
  const auto subs = t.subformulas(f);  // ascending id: children precede parents
  std::map<std::uint32_t, std::size_t> slot;
  for (std::size_t i = 0; i < subs.size(); ++i) slot[subs[i].id] = i;
  struct Op {
    FullKind kind;
    std::size_t lhs = 0, rhs = 0;  // slots of the children, or the variable index
  };
  std::vector<Op> ops;
  std::size_t next_var = 0;
  for (FullFormula g : subs) {
    Op op{t.kind(g)};
    if (op.kind == FullKind::Atom) op.lhs = next_var++;
    if (t.is_compound(g)) {
      op.lhs = slot[t.lhs(g).id];
      op.rhs = slot[t.rhs(g).id];
    }
    ops.push_back(op);
  }

  // The low six variables vary inside a word; the rest select the word.
  static constexpr std::uint64_t kPattern[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull,
                                                0xF0F0F0F0F0F0F0F0ull, 0xFF00FF00FF00FF00ull,
                                                0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  const std::size_t k = atoms.size();
  const std::uint64_t words = k > 6 ? (1ull << (k - 6)) : 1;
  std::vector<std::uint64_t> val(ops.size());
  for (std::uint64_t w = 0; w < words; ++w) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Op& op = ops[i];
      switch (op.kind) {
        case FullKind::Atom:
          val[i] = op.lhs < 6 ? kPattern[op.lhs] : (((w >> (op.lhs - 6)) & 1) ? ~0ull : 0ull);
          break;
        case FullKind::Falsum: val[i] = 0; break;
        case FullKind::And: val[i] = val[op.lhs] & val[op.rhs]; break;
        case FullKind::Or: val[i] = val[op.lhs] | val[op.rhs]; break;
        case FullKind::Imp: val[i] = ~val[op.lhs] | val[op.rhs]; break;
      }
    }
    // With fewer than six variables the word repeats whole assignments.
    if (val.back()) return true;
  }
  return false;
}

struct StatmanMap {
  std::map<std::uint32_t, Formula> rep;  // full formula id → atom or q-variable
  std::vector<Formula> axioms;
  Formula result;  // axioms chained into the representative of the input
};

namespace detail {

/// Subformula ids occurring positively and negatively in `f`.
inline std::pair<std::set<std::uint32_t>, std::set<std::uint32_t>> polarities(const FullTable& t, FullFormula f) {
  std::set<std::pair<std::uint32_t, bool>> seen;
  std::vector<std::pair<FullFormula, bool>> stack{{f, true}};
  std::set<std::uint32_t> pos, neg;
  while (!stack.empty()) {
    auto [g, positive] = stack.back();
    stack.pop_back();
    if (!seen.insert({g.id, positive}).second) continue;
    (positive ? pos : neg).insert(g.id);
    if (!t.is_compound(g)) continue;
    stack.push_back({t.lhs(g), t.kind(g) == FullKind::Imp ? !positive : positive});
    stack.push_back({t.rhs(g), positive});
  }
  return {pos, neg};
}

}  // namespace detail

/// Replaces ⊥ and every compound subformula δ by a fresh variable q_δ and
/// prefixes the axioms making q_δ equivalent to δ. Elimination axioms for
/// ∨ and ⊥ are emitted only where the connective occurs negatively, and
/// range over the representatives of positively occurring subformulas.
inline StatmanMap statman_translate(const FullTable& src, FullFormula f, FormulaTable& out) {
  StatmanMap m;
  const auto subs = src.subformulas(f);
  std::set<std::string> source_names;
  for (FullFormula g : subs)
    if (src.kind(g) == FullKind::Atom) source_names.insert(src.name(g));
  auto fresh = [&](std::uint32_t id) {
    std::string name = "q_" + std::to_string(id);
    while (source_names.count(name)) name += "_";
    return out.atom(name);
  };
  for (FullFormula g : subs)
    m.rep[g.id] = src.kind(g) == FullKind::Atom ? out.atom(src.name(g)) : fresh(g.id);

  const auto [pos, neg] = detail::polarities(src, f);
  std::vector<Formula> targets;
  for (FullFormula g : subs)
    if (pos.count(g.id)) targets.push_back(m.rep[g.id]);

  auto imp = [&](Formula a, Formula b) { return out.imp(a, b); };
  for (FullFormula g : subs) {
    const Formula q = m.rep[g.id];
    switch (src.kind(g)) {
      case FullKind::Atom: break;
      case FullKind::Falsum:
        if (neg.count(g.id))
          for (Formula t : targets)
            if (t != q) m.axioms.push_back(imp(q, t));
        break;
      case FullKind::And: {
        const Formula a = m.rep[src.lhs(g).id], b = m.rep[src.rhs(g).id];
        m.axioms.push_back(imp(q, a));
        m.axioms.push_back(imp(q, b));
        m.axioms.push_back(imp(a, imp(b, q)));
        break;
      }
      case FullKind::Or: {
        const Formula a = m.rep[src.lhs(g).id], b = m.rep[src.rhs(g).id];
        m.axioms.push_back(imp(a, q));
        m.axioms.push_back(imp(b, q));
        if (neg.count(g.id))
          for (Formula t : targets)
            if (t != q) m.axioms.push_back(imp(imp(a, t), imp(imp(b, t), imp(q, t))));
        break;
      }
      case FullKind::Imp: {
        const Formula a = m.rep[src.lhs(g).id], b = m.rep[src.rhs(g).id];
        m.axioms.push_back(imp(q, imp(a, b)));
        m.axioms.push_back(imp(imp(a, b), q));
        break;
      }
    }
  }
  m.result = out.chain(m.axioms, m.rep[f.id]);
  return m;
}

/// The implicational translation of ¬α_G.
inline Formula rho_g(const DiGraph& g, FormulaTable& out) {
  FullTable t;
  const HamEncoding enc = encode_alpha(t, g);
  return statman_translate(t, t.imp(enc.alpha, t.falsum()), out).result;
}

}  // namespace mlnd
