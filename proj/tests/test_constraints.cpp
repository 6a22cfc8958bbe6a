// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lr/constraints.hpp"
#include "lr/harness.hpp"
#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

namespace {

Provenance pv(const std::string &rule = "test") { return Provenance{"t.lr", Span{1, 1}, rule}; }

// Random nested constraints over int binders x0.. with applications of k0(v).
CP gen_constraint(Rng &r, std::vector<std::string> &scope, int depth) {
  int k = depth <= 0 ? 3 : r.pick(0, 3);
  switch (k) {
    case 0: {
      std::string x = "x" + std::to_string(scope.size());
      scope.push_back(x);
      RExp hyp = r.coin(30) ? rkapp("k0", {rvar(x)}) : gen_bool(r, scope, {}, 1);
      CP body = gen_constraint(r, scope, depth - 1);
      scope.pop_back();
      return c_forall(x, Sort::Int, hyp, body);
    }
    case 1: return c_implies(gen_bool(r, scope, {}, 1), gen_constraint(r, scope, depth - 1));
    case 2: {
      std::vector<CP> kids;
      for (int i = r.pick(0, 3); i > 0; --i) kids.push_back(gen_constraint(r, scope, depth - 1));
      return c_conj(std::move(kids));
    }
    default: {
      if (!scope.empty() && r.coin(30)) return c_head(rkapp("k0", {rvar(r.any(scope))}), pv());
      RExp g = gen_bool(r, scope, {}, 2);
      if (r.coin(30)) g = rand_(g, gen_bool(r, scope, {}, 1));
      return c_head(g, pv());
    }
  }
}

// Direct semantics of a constraint tree with every binder boxed to [-R, R].
bool holds_boxed(const CP &c, Assignment &env, const Solution &sol, int R) {
  switch (c->kind) {
    case CKind::Head: return eval_bool(apply_solution(c->goal, sol), env);
    case CKind::Conj:
      for (const auto &k : c->kids)
        if (!holds_boxed(k, env, sol, R)) return false;
      return true;
    case CKind::Implies:
      return !eval_bool(apply_solution(c->hyp, sol), env) || holds_boxed(c->kids[0], env, sol, R);
    case CKind::ForAll: {
      auto saved = env.find(c->binder) != env.end() ? std::optional<GVal>(env[c->binder]) : std::nullopt;
      bool ok = true;
      for (int v = -R; v <= R && ok; ++v) {
        env[c->binder] = GVal{Sort::Int, v};
        if (eval_bool(apply_solution(c->hyp, sol), env)) ok = holds_boxed(c->kids[0], env, sol, R);
      }
      if (saved) env[c->binder] = *saved;
      else env.erase(c->binder);
      return ok;
    }
  }
  return true;
}

Solution sol_of(const std::string &k, const std::string &param, RExp pred) {
  Solution s;
  s[k] = KSol{{param}, std::move(pred)};
  return s;
}

}  // namespace

TEST(Constraints, NormalizeFlattensAndSplits) {
  CP h1 = c_head(rgt(rvar("a"), lr::rint(0)), pv());
  CP h2 = c_head(rge(rvar("a"), lr::rint(0)), pv());
  CP c = normalize(c_forall("a", Sort::Int, rbool(true), c_conj({c_conj({h1}), h2})));
  EXPECT_EQ(count_heads(c), 2u);
  CP split = normalize(c_forall("a", Sort::Int, rbool(true),
                                c_head(rand_(rgt(rvar("a"), lr::rint(0)), rge(rvar("a"), lr::rint(0))), pv())));
  EXPECT_EQ(count_heads(split), 2u);
}

TEST(Constraints, HeadOnlyIsOneClauseWithoutHypotheses) {
  auto cs = clauses(normalize(c_head(rle(lr::rint(1), lr::rint(2)), pv())));
  // closed and true: dropped as trivial
  EXPECT_TRUE(cs.empty());
  cs = clauses(normalize(c_forall("a", Sort::Int, rbool(true), c_head(rge(rvar("a"), lr::rint(0)), pv()))));
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_TRUE(cs[0].hyps.empty());
}

TEST(Constraints, MakeVecClauses) {
  BuiltinOracle o;
  VerifyResult vr = verify_program(load("accept/make_vec.lr"), o);
  ASSERT_EQ(vr.clauses.size(), 3u);
  ASSERT_EQ(vr.kvars.size(), 2u);
  std::string k1 = vr.kvars[0].id, k2 = vr.kvars[1].id;
  std::vector<std::string> got;
  for (const auto &c : vr.clauses) {
    std::string h;
    for (const auto &x : c.hyps) h += print_rexp(x);
    got.push_back(h + " => " + print_rexp(c.head));
  }
  std::sort(got.begin(), got.end());
  std::vector<std::string> want = {"$" + k1 + "(v) => $" + k2 + "(v)", "$" + k2 + "(v) => v > 0",
                                   "v = 42 => $" + k2 + "(v)"};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
}

TEST(Constraints, ApplySolutionExample) {
  Solution s = sol_of("k", "p0", rge(rvar("p0"), lr::rint(0)));
  EXPECT_EQ(print_rexp(apply_solution(rkapp("k", {rvar("a")}), s)), "a >= 0");
  CP c = c_forall("a", Sort::Int, rbool(true), c_head(rgt(rvar("a"), lr::rint(0)), pv()));
  EXPECT_EQ(print_clauses(clauses(apply_solution(c, Solution{}))), print_clauses(clauses(c)));
  EXPECT_THROW(apply_solution(rkapp("k9", {rvar("a")}), s), MissingKVar);
}

TEST(Constraints, ApplyCommutesWithClauses) {
  // compared semantically: splitting of applied conjunctions may differ
  Rng r(21);
  auto holds = [](const std::vector<Clause> &cs) {
    for (const auto &cl : cs)
      if (brute_counterexample(query(cl.binders, cl.hyps, cl.head), 3)) return false;
    return true;
  };
  int refuted = 0;
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> scope;
    CP c = normalize(gen_constraint(r, scope, 4));
    Solution s = sol_of("k0", "v", gen_bool(r, {"v"}, {}, 2));
    auto lhs = clauses(normalize(apply_solution(c, s)));
    std::vector<Clause> rhs;
    for (const auto &cl : clauses(c)) rhs.push_back(apply_solution(cl, s));
    bool h = holds(lhs);
    ASSERT_EQ(h, holds(rhs));
    if (!h) ++refuted;
  }
  EXPECT_GT(refuted, 10);
}

TEST(Constraints, ClausesPreserveValidity) {
  Rng r(22);
  BuiltinOracle o;
  int valid = 0, invalid = 0;
  for (int i = 0; i < 250; ++i) {
    std::vector<std::string> scope;
    CP c = gen_constraint(r, scope, 3);
    Solution s = sol_of("k0", "v", gen_bool(r, {"v"}, {}, 1));
    CP applied = normalize(apply_solution(c, s));
    bool all = true;
    for (const auto &cl : clauses(applied)) {
      Verdict v = o.valid(query(cl.binders, cl.hyps, cl.head));
      ASSERT_NE(v.kind, VerdictKind::Unknown);
      if (v.kind == VerdictKind::Invalid) all = false;
    }
    Assignment env;
    bool boxed = holds_boxed(c, env, s, 6);
    if (all) {
      ASSERT_TRUE(boxed) << "clauses valid but tree refuted";
      ++valid;
    } else {
      ++invalid;
    }
    if (!boxed) ASSERT_FALSE(all);
  }
  EXPECT_GT(valid, 10);
  EXPECT_GT(invalid, 10);
}

TEST(Constraints, DumpRoundTrip) {
  BuiltinOracle o;
  for (const auto &path : corpus_files(LR_CORPUS_DIR)) {
    VerifyResult vr = verify_program(parse_program(slurp(path), path), o);
    std::string text = print_clauses(vr.clauses);
    auto back = parse_clause_dump(text);
    ASSERT_EQ(back.size(), vr.clauses.size()) << path;
    for (size_t i = 0; i < back.size(); ++i) EXPECT_TRUE(clause_equal(back[i], vr.clauses[i])) << path;
  }
}

TEST(Constraints, QualifierInstantiation) {
  KVar k{"k", {{"v", Sort::Int}, {"a", Sort::Int}, {"p", Sort::Bool}}, 1};
  auto inst = instantiate_qualifiers(k, default_qualifiers());
  std::set<std::string> shown;
  for (const auto &q : inst) shown.insert(print_rexp(q));
  EXPECT_TRUE(shown.count("v >= 0"));
  EXPECT_TRUE(shown.count("v = a + 1"));
  EXPECT_FALSE(shown.count("v = p"));
  Qualifier q = parse_qualifier("v <= m + 2");
  EXPECT_TRUE(q.uses_m);
  EXPECT_THROW(parse_qualifier("w > 0"), std::runtime_error);
}
