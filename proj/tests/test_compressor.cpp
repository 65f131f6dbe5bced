#include <gtest/gtest.h>

#include "mlnd/compressor.hpp"
#include "mlnd/generators.hpp"
#include "mlnd/lm_prover.hpp"

using namespace mlnd;

namespace {

// Closes `body` (concluding `goal`) with ImpI over each formula in `hyps`,
// innermost first.
TreeDeduction close_over(FormulaTable& t, TreeDeduction d, NodeId body, const std::vector<Formula>& hyps) {
  NodeId below = body;
  Formula label = d.nodes[body].label;
  for (Formula h : hyps) {
    label = t.imp(h, label);
    below = d.add(label, TreeRule::imp_intro(h), {below});
  }
  d.root = below;
  return d;
}

std::size_t count_rule(const DagDeduction& d, DagRuleKind k) {
  std::size_t n = 0;
  for (const DagNode& x : d.nodes) n += x.rule() == k;
  return n;
}

// s from a and a->s; a from r, r->a; a->s from r, r->(a->s); the two r
// come from (p, p->r) and (q, q->r) and meet on one level.
TreeDeduction two_twin_tree(FormulaTable& t) {
  const Formula p = t.atom("p"), q = t.atom("q"), r = t.atom("r"), a = t.atom("a"), s = t.atom("s");
  const Formula pr = t.imp(p, r), qr = t.imp(q, r), ra = t.imp(r, a), ras = t.imp(r, t.imp(a, s));
  TreeDeduction d;
  const NodeId ra_node = d.add(r, TreeRule::imp_elim(), {d.add(p, TreeRule::assumption()), d.add(pr, TreeRule::assumption())});
  const NodeId rb_node = d.add(r, TreeRule::imp_elim(), {d.add(q, TreeRule::assumption()), d.add(qr, TreeRule::assumption())});
  const NodeId a_node = d.add(a, TreeRule::imp_elim(), {ra_node, d.add(ra, TreeRule::assumption())});
  const NodeId as_node = d.add(t.imp(a, s), TreeRule::imp_elim(), {rb_node, d.add(ras, TreeRule::assumption())});
  const NodeId s_node = d.add(s, TreeRule::imp_elim(), {a_node, as_node});
  return close_over(t, d, s_node, {ras, ra, qr, pr, q, p});
}

// r from a and a->r; a from u = p->p (ImpI(p) over [p]) and u->a; a->r from
// u' = p->p (from q, q->(p->p)) and u->(a->r). Both p->p meet on one level.
TreeDeduction intro_elim_tree(FormulaTable& t) {
  const Formula p = t.atom("p"), q = t.atom("q"), r = t.atom("r"), a = t.atom("a");
  const Formula u = t.imp(p, p), qu = t.imp(q, u), ua = t.imp(u, a), uar = t.imp(u, t.imp(a, r));
  TreeDeduction d;
  const NodeId intro = d.add(u, TreeRule::imp_intro(p), {d.add(p, TreeRule::assumption())});
  const NodeId elim = d.add(u, TreeRule::imp_elim(), {d.add(q, TreeRule::assumption()), d.add(qu, TreeRule::assumption())});
  const NodeId a_node = d.add(a, TreeRule::imp_elim(), {intro, d.add(ua, TreeRule::assumption())});
  const NodeId ar = d.add(t.imp(a, r), TreeRule::imp_elim(), {elim, d.add(uar, TreeRule::assumption())});
  const NodeId root = d.add(r, TreeRule::imp_elim(), {a_node, ar});
  return close_over(t, d, root, {uar, ua, qu, q});
}

// Leaves y:p, M:p->q; z1:q = ImpE(y, M), z2:p->q = Rep(M), w:p = Rep(y);
// u:q merged from Rep(z1) and Twin(w, z2); v:p->q ImpI(p); root ImpI(p->q).
struct EightNode {
  DagDeduction d;
  PathFamily family;  // P1..P4, see below
};

EightNode eight_node(FormulaTable& t) {
  const Formula p = t.atom("p"), q = t.atom("q"), pq = t.imp(p, q);
  EightNode e;
  DagDeduction& d = e.d;
  const NodeId y = d.add(p, 4), m = d.add(pq, 4);
  const NodeId z1 = d.add(q, 3, {PremiseGroup::twin(y, m)});
  const NodeId z2 = d.add(pq, 3, {PremiseGroup::repeat(m)});
  const NodeId w = d.add(p, 3, {PremiseGroup::repeat(y)});
  const NodeId u = d.add(q, 2, {PremiseGroup::repeat(z1), PremiseGroup::twin(w, z2)});
  const NodeId v = d.add(pq, 1, {PremiseGroup::intro(u)});
  d.root = d.add(t.imp(pq, pq), 0, {PremiseGroup::intro(v)});
  auto path = [&](std::vector<NodeId> nodes, std::vector<std::uint32_t> groups) {
    DagPath p;
    p.nodes = std::move(nodes);
    p.groups = std::move(groups);
    return p;
  };
  e.family = {
      path({d.root, v, u, z1, y}, {0, 0, 0, 0}),
      path({d.root, v, u, z1, m}, {0, 0, 0, 0}),
      path({d.root, v, u, w, y}, {0, 0, 1, 0}),
      path({d.root, v, u, z2, m}, {0, 0, 1, 0}),
  };
  return e;
}

TreeDeduction identity_tree(FormulaTable& t) {
  const Formula p = t.atom("p");
  TreeDeduction d;
  const NodeId leaf = d.add(p, TreeRule::assumption());
  d.root = d.add(t.imp(p, p), TreeRule::imp_intro(p), {leaf});
  return d;
}

}  // namespace

TEST(Compress, DistinctLabelsGiveIsomorphicDag) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q");
  TreeDeduction d;
  const NodeId e = d.add(q, TreeRule::imp_elim(), {d.add(p, TreeRule::assumption()), d.add(t.imp(p, q), TreeRule::assumption())});
  d = close_over(t, d, e, {t.imp(p, q), p});
  const Compression c = compress(t, d);
  EXPECT_EQ(c.dag.nodes.size(), d.nodes.size());
  EXPECT_EQ(count_rule(c.dag, DagRuleKind::Merged), 0u);
  EXPECT_EQ(c.fstar.size(), 2u);
  EXPECT_EQ(c.dag.conclusion(), d.conclusion());
}

TEST(Compress, TwoEliminationsMerge) {
  FormulaTable t;
  const TreeDeduction tree = level_tree(two_twin_tree(t));
  ASSERT_TRUE(proves_tree(tree));
  const Compression c = compress(t, tree);
  ASSERT_EQ(count_rule(c.dag, DagRuleKind::Merged), 1u);
  for (const DagNode& n : c.dag.nodes) {
    if (n.rule() != DagRuleKind::Merged) continue;
    EXPECT_EQ(n.label, t.atom("r"));
    ASSERT_EQ(n.groups.size(), 2u);
    EXPECT_EQ(n.groups[0].kind, GroupKind::Twin);
    EXPECT_EQ(n.groups[1].kind, GroupKind::Twin);
  }
  EXPECT_TRUE(check_dag(t, c.dag).correct);
  EXPECT_TRUE(check_coherency(t, c.dag, c.fstar));
}

TEST(Compress, IntroAndEliminationMerge) {
  FormulaTable t;
  const TreeDeduction tree = level_tree(intro_elim_tree(t));
  ASSERT_TRUE(check_tree(t, tree).locally_correct);
  ASSERT_TRUE(proves_tree(tree));
  const Compression c = compress(t, tree);
  ASSERT_EQ(count_rule(c.dag, DagRuleKind::Merged), 1u);
  for (const DagNode& n : c.dag.nodes) {
    if (n.rule() != DagRuleKind::Merged) continue;
    EXPECT_EQ(n.label, t.parse("p->p"));
    std::multiset<GroupKind> kinds;
    for (const PremiseGroup& g : n.groups) kinds.insert(g.kind);
    EXPECT_EQ(kinds, (std::multiset<GroupKind>{GroupKind::Twin, GroupKind::IPrem}));
  }
  const Certified cert = compress_and_certify(t, intro_elim_tree(t));
  EXPECT_TRUE(cert.verified);
  EXPECT_TRUE(cert.metrics.bound_ok());
}

TEST(Compress, RejectsBadInput) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q");
  TreeDeduction open;
  const NodeId leaf = open.add(p, TreeRule::assumption());
  open.root = open.add(t.imp(q, p), TreeRule::imp_intro(q), {leaf});
  EXPECT_THROW(compress(t, open), InvalidInput);
  EXPECT_NO_THROW(compress(t, open, false));
  EXPECT_THROW(compress(t, two_twin_tree(t)), InvalidInput);  // not leveled
  EXPECT_THROW(compress_and_certify(t, open), PipelineError);
}

TEST(Coherency, EightNodeFamily) {
  FormulaTable t;
  const EightNode e = eight_node(t);
  ASSERT_TRUE(check_dag(t, e.d).correct);
  EXPECT_TRUE(check_coherency(t, e.d, e.family));

  PathFamily dropped = e.family;
  dropped.erase(dropped.begin() + 1);  // the path covering M beside z1's minor
  const CoherencyReport r = check_coherency_report(t, e.d, dropped);
  EXPECT_TRUE(r.dense);
  EXPECT_TRUE(r.closed);
  EXPECT_FALSE(r.preserves_elim);

  PathFamily sparse = e.family;
  sparse.erase(sparse.begin() + 3);  // the only path through z2
  EXPECT_FALSE(check_coherency_report(t, e.d, sparse).dense);
}

TEST(Coherency, CompressedFamiliesAreCoherent) {
  FormulaTable t;
  Rng rng(31);
  int n = 0;
  while (n < 100) {
    auto proof = random_proof_tree(t, rng, 4 + rng.below(4));
    if (!proof) continue;
    const Compression c = compress(t, level_tree(*proof));
    EXPECT_TRUE(check_coherency(t, c.dag, c.fstar));
    ++n;
  }
}

TEST(Fsp, LinearDag) {
  FormulaTable t;
  const Compression c = compress(t, identity_tree(t));
  const PathFamily f = build_fsp(c.dag, c.fstar);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].nodes, c.fstar[0].nodes);
}

TEST(Fsp, RootEliminationBasis) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q");
  // minor p->p, major (p->p)->(q->q), both closed
  TreeDeduction d;
  const NodeId minor = d.add(t.imp(p, p), TreeRule::imp_intro(p), {d.add(p, TreeRule::assumption())});
  const NodeId major = d.add(t.imp(t.imp(p, p), t.imp(q, q)), TreeRule::imp_intro(t.imp(p, p)),
                             {d.add(t.imp(q, q), TreeRule::imp_intro(q), {d.add(q, TreeRule::assumption())})});
  d.root = d.add(t.imp(q, q), TreeRule::imp_elim(), {minor, major});
  ASSERT_TRUE(proves_tree(d));
  const Compression c = compress(t, level_tree(d));
  const PathFamily f = build_fsp(c.dag, c.fstar);
  ASSERT_EQ(f.size(), 2u);
  std::set<NodeId> second;
  for (const DagPath& p : f) second.insert(p.nodes[1]);
  EXPECT_EQ(second.size(), 2u);
}

TEST(Fsp, SubfamilyOfClosedPaths) {
  FormulaTable t;
  Rng rng(17);
  int n = 0;
  while (n < 100) {
    auto proof = random_proof_tree(t, rng, 4 + rng.below(4));
    if (!proof) continue;
    const Compression c = compress(t, level_tree(*proof));
    const PathFamily f = build_fsp(c.dag, c.fstar);
    EXPECT_LE(f.size(), c.fstar.size());
    for (const DagPath& p : f) EXPECT_TRUE(detail::path_closed(t, c.dag, p));
    const Restriction r = restrict_to_fsp(c.dag, f);
    const CoherencyReport rep = check_coherency_report(t, r.dag, r.paths);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(r.dag.conclusion(), c.dag.conclusion());
    ++n;
  }
}

TEST(ExtractF, NoMergedNodes) {
  FormulaTable t;
  const Compression c = compress(t, identity_tree(t));
  EXPECT_TRUE(extract_f(c.dag, c.fstar).empty());
}

TEST(ExtractF, EightNodeEntries) {
  FormulaTable t;
  const EightNode e = eight_node(t);
  const FMap f = extract_f(e.d, e.family);
  const NodeId u = 5, v = 6, z1 = 2, z2 = 3, w = 4;
  const Edge out{u, v};
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.at({out, t.atom("p")}), (std::set<Edge>{{z1, u}, {w, u}}));
  EXPECT_EQ(f.at({out, t.parse("p->q")}), (std::set<Edge>{{z1, u}, {z2, u}}));
  DagDeduction d = e.d;
  d.f = f;
  EXPECT_TRUE(check_dag(t, d).correct);
  EXPECT_TRUE(check_af_correctness(t, d, compute_af(t, d)));
  EXPECT_TRUE(verify_dag(t, d));
}

TEST(Restrict, FullFamilyKeepsDag) {
  FormulaTable t;
  const EightNode e = eight_node(t);
  const Restriction r = restrict_to_fsp(e.d, e.family);
  EXPECT_EQ(r.dag.nodes.size(), e.d.nodes.size());
  EXPECT_EQ(r.dag.conclusion(), e.d.conclusion());
  EXPECT_EQ(count_rule(r.dag, DagRuleKind::Merged), 1u);

  const PathFamily one_side{e.family[0], e.family[1]};
  const Restriction s = restrict_to_fsp(e.d, one_side);
  EXPECT_EQ(s.dag.nodes.size(), 6u);
  EXPECT_EQ(count_rule(s.dag, DagRuleKind::Merged), 0u);
  EXPECT_EQ(s.dag.conclusion(), e.d.conclusion());
}

TEST(Certify, IdentityProof) {
  FormulaTable t;
  const Certified c = compress_and_certify(t, identity_tree(t));
  EXPECT_TRUE(c.verified);
  EXPECT_EQ(c.dag.nodes.size(), 2u);
  EXPECT_TRUE(c.metrics.bound_ok());
}

TEST(Certify, TranslatedProof) {
  FormulaTable t;
  const Formula goal = t.parse("((p->q)->p)->((p->q)->q)");
  const ProveResult r = prove_lm(t, goal);
  ASSERT_EQ(r.status, ProveStatus::Proved);
  const Certified c = compress_and_certify(t, translate_lm_to_nd(t, *r.proof));
  EXPECT_TRUE(c.verified);
  EXPECT_EQ(c.dag.conclusion(), goal);
  EXPECT_TRUE(c.metrics.height_bound_ok);
  EXPECT_TRUE(c.metrics.weight_bound_ok);
  EXPECT_LE(c.metrics.w_dag, c.metrics.h_dag * c.metrics.phi * c.metrics.phi);
}

TEST(Certify, RandomProofTrees) {
  FormulaTable t;
  Rng rng(3);
  int n = 0;
  while (n < 300) {
    auto proof = random_proof_tree(t, rng, 4 + rng.below(6));
    if (!proof) continue;
    const Certified c = compress_and_certify(t, *proof);
    EXPECT_TRUE(c.verified);
    EXPECT_TRUE(c.metrics.bound_ok());
    EXPECT_EQ(c.dag.conclusion(), proof->conclusion());
    EXPECT_EQ(c.compressed.conclusion(), proof->conclusion());
    EXPECT_TRUE(check_af_correctness(t, c.dag, compute_af(t, c.dag)));
    EXPECT_EQ(verify_by_threads(t, c.dag), c.verified);

    std::map<std::uint32_t, std::set<Formula>> per_level;
    std::map<std::uint32_t, std::size_t> count;
    for (const DagNode& x : c.compressed.nodes) {
      per_level[x.level].insert(x.label);
      ++count[x.level];
    }
    for (const auto& [level, labels] : per_level) EXPECT_EQ(labels.size(), count[level]);
    ++n;
  }
}
