// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lr/harness.hpp"
#include "lr/infer.hpp"
#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

namespace {

bool clause_holds(const Clause &c, const Solution &s, Oracle &o) {
  Clause a = apply_solution(c, s);
  return o.valid(query(a.binders, a.hyps, a.head)).kind == VerdictKind::Valid;
}

bool all_hold(const std::vector<Clause> &cs, const Solution &s, Oracle &o) {
  for (const auto &c : cs)
    if (!clause_holds(c, s, o)) return false;
  return true;
}

// sol(k) => goal, for goal over k's parameters.
bool sol_implies(const KVar &k, const Solution &s, const RExp &goal, Oracle &o) {
  const KSol &ks = s.at(k.id);
  RSubst th;
  for (size_t i = 0; i < k.params.size(); ++i) th[ks.params[i]] = rvar(k.params[i].first);
  return o.valid(query(k.params, {subst_all(ks.pred, th)}, goal)).kind == VerdictKind::Valid;
}

VerifyResult verify(const std::string &rel) {
  BuiltinOracle o;
  return verify_program(load(rel), o);
}

}  // namespace

TEST(Infer, FreshKVarType) {
  KVarStore ks;
  TypeP t = fresh_kvar_type(ks, int_params({"a", "b"}), b_int());
  EXPECT_EQ(print_type(t), "{v. int[v] | $k0(v, a, b)}");
  const KVar *k = ks.find("k0");
  ASSERT_NE(k, nullptr);
  EXPECT_EQ(k->nvalue, 1u);
  EXPECT_EQ(k->params.size(), 3u);
  // binders named v in scope push the value binder elsewhere
  TypeP u = fresh_kvar_type(ks, int_params({"v"}), b_bool());
  EXPECT_EQ(u->kind, TKind::Exists);
  EXPECT_NE(u->binder, "v");
  EXPECT_EQ(ks.all().size(), 2u);
  // location binders are not passed to templates
  RefCtx d = {RefEntry::bind("l", Sort::Loc), RefEntry::bind("n", Sort::Int)};
  EXPECT_EQ(kvar_scope(d).size(), 1u);
}

TEST(Infer, RecSignatureIdenticalSitesAddNothing) {
  KVarStore ks;
  NameGen names;
  LoopShape cur;
  Loc l = Loc::abs("l");
  cur.in = {{l, t_indexed(b_int(), lr::rint(0))}};
  LoopShape out = infer_rec_signature(ks, names, {}, cur, {cur.in, cur.in});
  EXPECT_TRUE(out.params.empty());
  EXPECT_TRUE(locctx_equal(out.in, cur.in));
  EXPECT_TRUE(ks.all().empty());
}

TEST(Infer, RecSignatureGeneralizesIndices) {
  KVarStore ks;
  NameGen names;
  LoopShape cur;
  Loc l = Loc::abs("l");
  cur.in = {{l, t_indexed(b_int(), lr::rint(0))}};
  LoopShape out = infer_rec_signature(ks, names, {}, cur, {{{l, t_indexed(b_int(), lr::rint(1))}}});
  ASSERT_EQ(out.params.size(), 1u);
  EXPECT_EQ(out.in[0].ty->kind, TKind::Indexed);
  EXPECT_TRUE(requal(out.in[0].ty->idx, rvar(out.params[0].first)));
  // a second pass with the parameter in place is stable
  LoopShape again = infer_rec_signature(ks, names, {}, out, {{{l, t_indexed(b_int(), lr::rint(7))}}});
  EXPECT_EQ(again.params.size(), 1u);
}

TEST(Infer, RecSignatureShapeMismatch) {
  KVarStore ks;
  NameGen names;
  LoopShape cur;
  Loc l = Loc::abs("l");
  cur.in = {{l, t_indexed(b_int(), lr::rint(0))}};
  EXPECT_THROW(infer_rec_signature(ks, names, {}, cur, {{{l, t_indexed(b_bool(), rbool(true))}}}),
               ShapeMismatch);
  EXPECT_THROW(infer_rec_signature(ks, names, {}, cur, {{}}), ShapeMismatch);
}

TEST(Infer, DistinctKVarsPerSite) {
  VerifyResult vr = verify("accept/ref_join.lr");
  std::set<std::string> ids;
  for (const auto &k : vr.kvars) EXPECT_TRUE(ids.insert(k.id).second);
  EXPECT_GE(ids.size(), 3u);
}

TEST(Infer, MakeVecSolution) {
  VerifyResult vr = verify("accept/make_vec.lr");
  ASSERT_EQ(vr.exit_code, 0);
  ASSERT_EQ(vr.kvars.size(), 2u);
  BuiltinOracle o;
  for (const auto &k : vr.kvars) {
    EXPECT_EQ(print_rexp(vr.shown.at(k.id).pred), "v > 0");
    EXPECT_TRUE(sol_implies(k, vr.solve.sol, rgt(rvar("v"), lr::rint(0)), o));
  }
}

TEST(Infer, RefJoinSolution) {
  VerifyResult vr = verify("accept/ref_join.lr");
  ASSERT_EQ(vr.exit_code, 0);
  BuiltinOracle o;
  for (const auto &k : vr.kvars) EXPECT_TRUE(sol_implies(k, vr.solve.sol, rge(rvar("v"), lr::rint(0)), o)) << k.id;
}

TEST(Infer, InitZerosJoinRelatesCounterAndLength) {
  VerifyResult vr = verify("accept/init_zeros.lr");
  ASSERT_EQ(vr.exit_code, 0);
  BuiltinOracle o;
  bool found = false;
  for (const auto &k : vr.kvars) {
    if (k.nvalue < 2) continue;
    std::string b = k.params[0].first, c = k.params[1].first;
    if (sol_implies(k, vr.solve.sol, req(rvar(b), rvar(c)), o)) found = true;
  }
  EXPECT_TRUE(found);
}

// Adding any qualifier instance that the solution does not already imply
// breaks some clause.
TEST(Infer, SolutionIsStrongestOverQualifiers) {
  BuiltinOracle o;
  for (const char *rel : {"accept/make_vec.lr", "accept/ref_join.lr", "accept/decr_driver.lr"}) {
    VerifyResult vr = verify(rel);
    ASSERT_EQ(vr.exit_code, 0) << rel;
    ASSERT_TRUE(all_hold(vr.clauses, vr.solve.sol, o)) << rel;
    for (const auto &k : vr.kvars) {
      for (const auto &q : instantiate_qualifiers(k, default_qualifiers())) {
        if (sol_implies(k, vr.solve.sol, q, o)) continue;
        Solution s = vr.solve.sol;
        RSubst th;
        for (size_t i = 0; i < k.params.size(); ++i) th[k.params[i].first] = rvar(s[k.id].params[i]);
        s[k.id].pred = rand_(s[k.id].pred, subst_all(q, th));
        EXPECT_FALSE(all_hold(vr.clauses, s, o)) << rel << " " << k.id << " could add " << print_rexp(q);
      }
    }
  }
}

TEST(Infer, UnsatisfiableReportsFailedClause) {
  VerifyResult vr = verify("mutants/make_vec_offbyone.lr");
  EXPECT_EQ(vr.exit_code, 1);
  EXPECT_EQ(vr.solve.status, SolveStatus::Unsat);
  EXPECT_GE(vr.solve.failed_clause, 0);
}

TEST(Infer, DeterministicDumps) {
  for (const auto &path : corpus_files(LR_CORPUS_DIR)) {
    BuiltinOracle o1, o2;
    Program p = parse_program(slurp(path), path);
    VerifyResult a = verify_program(p, o1), b = verify_program(p, o2);
    EXPECT_EQ(dump_constraints(a), dump_constraints(b)) << path;
    EXPECT_EQ(dump_solution(a), dump_solution(b)) << path;
  }
}
