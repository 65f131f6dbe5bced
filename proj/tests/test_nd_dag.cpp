#include <gtest/gtest.h>

#include "mlnd/generators.hpp"
#include "mlnd/nd_dag.hpp"

using namespace mlnd;

namespace {

DagDeduction identity_dag(FormulaTable& t) {
  const Formula p = t.atom("p");
  DagDeduction d;
  const NodeId leaf = d.add(p, 1);
  d.root = d.add(t.imp(p, p), 0, {PremiseGroup::intro(leaf)});
  return d;
}

std::vector<Formula> af_of(const FormulaTable& t, const DagDeduction& d, NodeId from, NodeId to) {
  const AfTable af = compute_af(t, d);
  const auto id = DagIndex(d).find(Edge{from, to});
  return af.formulas(af.per_edge.at(id.value()));
}

// Leaves p, p->r, q, q->r; r merged from twins (p, p->r) and (q, q->r);
// then ImpI over q->r, p->r, q, p.
struct TwoTwins {
  DagDeduction d;
  NodeId p, pr, q, qr, x, out;
  Formula fp, fpr, fq, fqr;
};

TwoTwins two_twins(FormulaTable& t) {
  TwoTwins s;
  s.fp = t.atom("p");
  s.fq = t.atom("q");
  const Formula r = t.atom("r");
  s.fpr = t.imp(s.fp, r);
  s.fqr = t.imp(s.fq, r);
  DagDeduction& d = s.d;
  s.p = d.add(s.fp, 5);
  s.pr = d.add(s.fpr, 5);
  s.q = d.add(s.fq, 5);
  s.qr = d.add(s.fqr, 5);
  s.x = d.add(r, 4, {PremiseGroup::twin(s.p, s.pr), PremiseGroup::twin(s.q, s.qr)});
  Formula label = t.imp(s.fqr, r);
  s.out = d.add(label, 3, {PremiseGroup::intro(s.x)});
  NodeId below = s.out;
  std::uint32_t level = 3;
  for (Formula a : {s.fpr, s.fq, s.fp}) {
    label = t.imp(a, label);
    below = d.add(label, --level, {PremiseGroup::intro(below)});
  }
  d.root = below;
  const Edge e{s.x, s.out};
  d.f[{e, s.fp}] = {Edge{s.p, s.x}};
  d.f[{e, s.fpr}] = {Edge{s.pr, s.x}};
  d.f[{e, s.fq}] = {Edge{s.q, s.x}};
  d.f[{e, s.fqr}] = {Edge{s.qr, s.x}};
  return s;
}

// p reaches the merged r both through s (from p, p->s) and through t
// (from p, p->t); f routes p only through the s group.
struct Routed {
  DagDeduction d;
  NodeId s, tnode, x;
  Formula fp;
};

Routed routed(FormulaTable& t) {
  Routed out;
  const Formula p = t.atom("p"), s = t.atom("s"), tt = t.atom("t"), r = t.atom("r");
  const Formula ps = t.imp(p, s), pt = t.imp(p, tt), sr = t.imp(s, r), tr = t.imp(tt, r);
  out.fp = p;
  DagDeduction& d = out.d;
  const NodeId lp = d.add(p, 7), lps = d.add(ps, 7), lpt = d.add(pt, 7), lsr = d.add(sr, 7), ltr = d.add(tr, 7);
  out.s = d.add(s, 6, {PremiseGroup::twin(lp, lps)});
  out.tnode = d.add(tt, 6, {PremiseGroup::twin(lp, lpt)});
  const NodeId rsr = d.add(sr, 6, {PremiseGroup::repeat(lsr)});
  const NodeId rtr = d.add(tr, 6, {PremiseGroup::repeat(ltr)});
  out.x = d.add(r, 5, {PremiseGroup::twin(out.s, rsr), PremiseGroup::twin(out.tnode, rtr)});
  Formula label = r;
  NodeId below = out.x;
  std::uint32_t level = 5;
  NodeId first_intro = kNoNode;
  for (Formula a : {tr, sr, pt, ps, p}) {
    label = t.imp(a, label);
    below = d.add(label, --level, {PremiseGroup::intro(below)});
    if (first_intro == kNoNode) first_intro = below;
  }
  d.root = below;
  const Edge e{out.x, first_intro};
  d.f[{e, p}] = {Edge{out.s, out.x}};
  d.f[{e, ps}] = {Edge{out.s, out.x}};
  d.f[{e, pt}] = {Edge{out.tnode, out.x}};
  d.f[{e, sr}] = {Edge{rsr, out.x}};
  d.f[{e, tr}] = {Edge{rtr, out.x}};
  return out;
}

bool has_violation(const DagReport& r, const std::string& text) {
  for (const Violation& v : r.violations)
    if (v.reason.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(CheckDag, IdentityIsCorrect) {
  FormulaTable t;
  EXPECT_TRUE(check_dag(t, identity_dag(t)).correct);
}

TEST(CheckDag, TwinMinorsMustBeDistinct) {
  FormulaTable t;
  const Formula p = t.atom("p"), r = t.atom("r");
  DagDeduction d;
  const NodeId a = d.add(p, 2), b = d.add(t.imp(p, r), 2);
  const NodeId x = d.add(r, 1, {PremiseGroup::twin(a, b), PremiseGroup::twin(a, b)});
  d.root = d.add(t.imp(p, r), 0, {PremiseGroup::intro(x)});
  const auto rep = check_dag(t, d);
  EXPECT_FALSE(rep.correct);
  EXPECT_TRUE(has_violation(rep, "twin minors must be distinct"));
}

TEST(CheckDag, FOutsideMerged) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q");
  DagDeduction d;
  const NodeId a = d.add(p, 2), b = d.add(t.imp(p, q), 2);
  const NodeId e = d.add(q, 1, {PremiseGroup::twin(a, b)});
  d.root = d.add(t.imp(p, q), 0, {PremiseGroup::intro(e)});
  d.f[{Edge{e, d.root}, p}] = {Edge{a, e}};
  const auto rep = check_dag(t, d);
  EXPECT_FALSE(rep.correct);
  EXPECT_TRUE(has_violation(rep, "f undefined outside Merged"));
}

TEST(CheckDag, LevelDiscipline) {
  FormulaTable t;
  DagDeduction d = identity_dag(t);
  d.nodes[0].level = 2;
  EXPECT_FALSE(check_dag(t, d).correct);
}

TEST(ComputeAf, LeafAndVirtualRoot) {
  FormulaTable t;
  const DagDeduction d = identity_dag(t);
  EXPECT_EQ(af_of(t, d, 0, 1), std::vector<Formula>{t.atom("p")});
  EXPECT_TRUE(compute_af(t, d).root.empty());
}

TEST(ComputeAf, ImpEUnion) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q");
  DagDeduction d;
  const NodeId a = d.add(p, 1), b = d.add(t.imp(p, q), 1);
  d.root = d.add(q, 0, {PremiseGroup::twin(a, b)});
  const AfTable af = compute_af(t, d);
  const auto open = af.formulas(af.root);
  EXPECT_EQ(std::set<Formula>(open.begin(), open.end()), (std::set<Formula>{p, t.imp(p, q)}));
  EXPECT_FALSE(verify_dag(t, d));
}

TEST(ComputeAf, MergedNodeFollowsF) {
  FormulaTable t;
  const TwoTwins s = two_twins(t);
  ASSERT_TRUE(check_dag(t, s.d).correct);
  const auto out = af_of(t, s.d, s.x, s.out);
  EXPECT_EQ(std::set<Formula>(out.begin(), out.end()), (std::set<Formula>{s.fp, s.fpr, s.fq, s.fqr}));
  EXPECT_TRUE(verify_dag(t, s.d));
  EXPECT_TRUE(verify_by_threads(t, s.d));
}

TEST(ComputeAf, MissingFIsIncomplete) {
  FormulaTable t;
  TwoTwins s = two_twins(t);
  s.d.f.clear();
  EXPECT_THROW(compute_af(t, s.d), IncompleteF);
}

TEST(AfCorrectness, UnselectedInEdge) {
  FormulaTable t;
  TwoTwins s = two_twins(t);
  const Edge e{s.x, s.out};
  s.d.f.erase({e, s.fq});
  s.d.f.erase({e, s.fqr});
  ASSERT_TRUE(check_dag(t, s.d).correct);
  EXPECT_FALSE(check_af_correctness(t, s.d, compute_af(t, s.d)));
  EXPECT_FALSE(verify_dag(t, s.d));
}

TEST(AfCorrectness, SelectionWithoutTheAssumption) {
  FormulaTable t;
  TwoTwins s = two_twins(t);
  s.d.f[{Edge{s.x, s.out}, s.fp}] = {Edge{s.pr, s.x}};
  ASSERT_TRUE(check_dag(t, s.d).correct);
  EXPECT_FALSE(check_af_correctness(t, s.d, compute_af(t, s.d)));
  EXPECT_FALSE(verify_dag(t, s.d));
}

TEST(Verify, IdentityAndWrongDischarge) {
  FormulaTable t;
  EXPECT_TRUE(verify_dag(t, identity_dag(t)));
  const Formula p = t.atom("p"), q = t.atom("q");
  DagDeduction d;
  const NodeId leaf = d.add(p, 1);
  d.root = d.add(t.imp(q, p), 0, {PremiseGroup::intro(leaf)});
  ASSERT_TRUE(check_dag(t, d).correct);
  const DagVerdict v = verify_dag_report(t, d);
  EXPECT_FALSE(v.proves);
  EXPECT_EQ(v.open_at_root, std::vector<Formula>{p});
  EXPECT_FALSE(verify_by_threads(t, d));
}

TEST(Threads, IdentityHasOneClosedThread) {
  FormulaTable t;
  const auto threads = enumerate_f_threads(t, identity_dag(t));
  ASSERT_EQ(threads.size(), 1u);
  EXPECT_TRUE(threads[0].closed);
  EXPECT_EQ(threads[0].nodes, (std::vector<NodeId>{0, 1}));
}

TEST(Threads, FRestrictsRoutes) {
  FormulaTable t;
  const Routed r = routed(t);
  ASSERT_TRUE(check_dag(t, r.d).correct);
  std::size_t through_s = 0;
  for (const FThread& th : enumerate_f_threads(t, r.d)) {
    if (r.d.nodes[th.nodes.front()].label != r.fp) continue;
    EXPECT_EQ(std::count(th.nodes.begin(), th.nodes.end(), r.tnode), 0);
    through_s += std::count(th.nodes.begin(), th.nodes.end(), r.s);
  }
  EXPECT_EQ(through_s, 1u);
  // p arriving through t is dropped: every thread closes, but f fails routing
  EXPECT_TRUE(verify_by_threads(t, r.d));
  EXPECT_FALSE(check_af_correctness(t, r.d, compute_af(t, r.d)));
  EXPECT_FALSE(verify_dag(t, r.d));
}

TEST(Threads, TreeAsDagGivesDeductivePaths) {
  FormulaTable t;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const TreeDeduction tree = level_tree(random_tree_deduction(t, rng, 4));
    const DagDeduction d = as_dag(tree);
    ASSERT_TRUE(check_dag(t, d).correct);
    std::set<std::vector<NodeId>> threads, paths;
    for (const FThread& th : enumerate_f_threads(t, d)) threads.insert(th.nodes);
    for (const auto& p : deductive_paths(tree)) paths.insert(p);
    EXPECT_EQ(threads, paths);
    EXPECT_EQ(verify_dag(t, d), proves_tree(tree));
  }
}

TEST(Unfold, TreeAsDagRoundTrip) {
  FormulaTable t;
  const DagDeduction d = identity_dag(t);
  const TreeDeduction u = unfold_dag(t, d);
  EXPECT_EQ(u.nodes.size(), 2u);
  EXPECT_EQ(u.conclusion(), d.conclusion());
  EXPECT_TRUE(proves_tree(u));

  Rng rng(13);
  int done = 0;
  while (done < 50) {
    auto proof = random_proof_tree(t, rng, 5);
    if (!proof) continue;
    const TreeDeduction leveled = level_tree(*proof);
    const TreeDeduction back = unfold_dag(t, as_dag(leveled));
    EXPECT_EQ(back.nodes.size(), leveled.nodes.size());
    EXPECT_EQ(back.conclusion(), leveled.conclusion());
    EXPECT_EQ(tree_height(back), tree_height(leveled));
    EXPECT_TRUE(proves_tree(back));
    ++done;
  }
}

TEST(Unfold, MergedDags) {
  FormulaTable t;
  for (const DagDeduction& d : {two_twins(t).d}) {
    const TreeDeduction u = unfold_dag(t, d);
    EXPECT_TRUE(check_tree(t, u).locally_correct);
    EXPECT_TRUE(proves_tree(u));
    EXPECT_EQ(u.conclusion(), d.conclusion());
    const TreeDeduction pure = eliminate_repetitions(u);
    EXPECT_TRUE(proves_tree(pure));
  }
}

TEST(Unfold, RejectsUnverified) {
  FormulaTable t;
  DagDeduction d;
  const NodeId leaf = d.add(t.atom("p"), 1);
  d.root = d.add(t.imp(t.atom("q"), t.atom("p")), 0, {PremiseGroup::intro(leaf)});
  EXPECT_THROW(unfold_dag(t, d), InvalidInput);
}

TEST(Oracle, RandomAfCorrectDags) {
  FormulaTable t;
  Rng rng(99);
  int kept = 0, disagreements = 0, merged = 0;
  for (int tries = 0; kept < 300 && tries < 50000; ++tries) {
    auto d = random_af_correct_dag(t, rng);
    if (!d) continue;
    ++kept;
    for (const DagNode& n : d->nodes)
      if (n.rule() == DagRuleKind::Merged) {
        ++merged;
        break;
      }
    disagreements += verify_dag(t, *d) != verify_by_threads(t, *d);

    const AfTable af = compute_af(t, *d);
    const auto assumptions = dag_assumptions(*d);
    const std::size_t w = dag_weight(t, *d);
    for (const AssumptionSet& s : af.per_edge) {
      const auto fs = af.formulas(s);
      EXPECT_LE(fs.size(), w);
      for (Formula f : fs) EXPECT_TRUE(std::binary_search(assumptions.begin(), assumptions.end(), f));
    }
    if (verify_dag(t, *d)) {
      const TreeDeduction u = unfold_dag(t, *d);
      EXPECT_TRUE(proves_tree(u));
      EXPECT_EQ(u.conclusion(), d->conclusion());
      EXPECT_TRUE(proves_tree(eliminate_repetitions(u)));
    }
  }
  EXPECT_EQ(kept, 300);
  EXPECT_GT(merged, 0);
  EXPECT_EQ(disagreements, 0);
}

// f routes the leaves p and q->p nowhere; only the q-thread survives and it
// is closed, yet q->p is not valid.
TEST(AfCorrectness, DroppedAssumptionsDoNotVerify) {
  FormulaTable t;
  const Formula p = t.atom("p"), q = t.atom("q"), qp = t.imp(q, p);
  DagDeduction d;
  const NodeId lp = d.add(p, 4), lq = d.add(q, 4), lqp = d.add(qp, 4);
  const NodeId x = d.add(p, 3, {PremiseGroup::repeat(lp), PremiseGroup::twin(lq, lqp)});
  const NodeId rp = d.add(p, 2, {PremiseGroup::repeat(x)});
  const NodeId pp = d.add(t.imp(p, p), 2, {PremiseGroup::intro(x)});
  const NodeId e = d.add(p, 1, {PremiseGroup::twin(rp, pp)});
  d.root = d.add(qp, 0, {PremiseGroup::intro(e)});
  const Edge e1{x, rp}, e2{x, pp};
  d.f[{e1, p}] = {Edge{lqp, x}};
  d.f[{e1, q}] = {Edge{lp, x}, Edge{lq, x}, Edge{lqp, x}};
  d.f[{e1, qp}] = {Edge{lq, x}};
  d.f[{e2, p}] = {Edge{lqp, x}};
  d.f[{e2, q}] = {Edge{lqp, x}};
  d.f[{e2, qp}] = {Edge{lp, x}};
  ASSERT_TRUE(check_dag(t, d).correct);
  EXPECT_TRUE(compute_af(t, d).root.empty());
  EXPECT_TRUE(verify_by_threads(t, d));
  EXPECT_FALSE(check_af_correctness(t, d, compute_af(t, d)));
  EXPECT_FALSE(verify_dag(t, d));
}
