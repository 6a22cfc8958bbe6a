// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>

#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

namespace {

const std::vector<std::string> kV = {"a", "b", "c"};

bool is_valid(Oracle &o, const Query &q) { return o.valid(q).kind == VerdictKind::Valid; }

std::vector<Param> ps() { return int_params(kV); }

std::vector<RExp> hyps(Rng &r, int n) {
  std::vector<RExp> h;
  for (int i = 0; i < n; ++i) h.push_back(gen_bool(r, kV, {}, 1));
  return h;
}

std::string z3_path() {
  for (const char *p : {"/usr/local/bin/z3", "/usr/bin/z3"})
    if (std::filesystem::exists(p)) return p;
  return "";
}

}  // namespace

TEST(Oracle, DecrQueryIsValid) {
  BuiltinOracle o;
  Query q = query(int_params({"a"}), {rge(rvar("a"), lr::rint(0)), rgt(rvar("a"), lr::rint(0))},
                  rge(rsub(rvar("a"), lr::rint(1)), lr::rint(0)));
  EXPECT_EQ(o.valid(q).kind, VerdictKind::Valid);
}

TEST(Oracle, GuardlessDecrHasCounterModel) {
  BuiltinOracle o;
  Query q = query(int_params({"a"}), {rge(rvar("a"), lr::rint(0))}, rge(rsub(rvar("a"), lr::rint(1)), lr::rint(0)));
  Verdict v = o.valid(q);
  ASSERT_EQ(v.kind, VerdictKind::Invalid);
  EXPECT_EQ(v.model.at("a").v, 0);
  EXPECT_TRUE(model_refutes(q, v.model));
}

TEST(Oracle, Evaluation) {
  EXPECT_TRUE(eval_bool(req(radd(radd(lr::rint(1), lr::rint(2)), lr::rint(3)), lr::rint(6)), {}));
  Assignment env{{"a", GVal{Sort::Int, 0}}};
  EXPECT_FALSE(eval_bool(rge(rsub(rvar("a"), lr::rint(1)), lr::rint(0)), env));
  EXPECT_THROW(eval_bool(rvar("zz"), env), EvalError);
}

TEST(Oracle, NonlinearIsNeverSilentlyValid) {
  BuiltinOracle o;
  // a*a >= 0 is true but outside the linear fragment
  Query q = query(int_params({"a"}), {}, rge(rmul(rvar("a"), rvar("a")), lr::rint(0)));
  EXPECT_NE(o.valid(q).kind, VerdictKind::Invalid);
  Query bad = query(int_params({"a"}), {}, rgt(rmul(rvar("a"), rvar("a")), lr::rint(0)));
  Verdict v = o.valid(bad);
  EXPECT_NE(v.kind, VerdictKind::Valid);
  if (v.kind == VerdictKind::Invalid) EXPECT_TRUE(model_refutes(bad, v.model));
}

// Independent route: bounded enumeration plus model re-evaluation.
TEST(Oracle, AgreesWithBruteForce) {
  Rng r(31);
  BuiltinOracle o;
  int valid = 0, invalid = 0;
  for (int i = 0; i < 600; ++i) {
    Query q = query(ps(), hyps(r, r.pick(0, 3)), gen_bool(r, kV, {}, 2));
    Verdict v = o.valid(q);
    ASSERT_NE(v.kind, VerdictKind::Unknown) << smt_query_text(q);
    auto cex = brute_counterexample(q, 5);
    if (v.kind == VerdictKind::Valid) {
      ASSERT_FALSE(cex.has_value()) << smt_query_text(q);
      ++valid;
    } else {
      ASSERT_TRUE(model_refutes(q, v.model)) << smt_query_text(q);
      ++invalid;
    }
  }
  EXPECT_GT(valid, 50);
  EXPECT_GT(invalid, 50);
}

TEST(Oracle, AgreesWithZ3) {
  std::string z3 = z3_path();
  if (z3.empty()) GTEST_SKIP() << "z3 not installed";
  SmtConfig cfg;
  cfg.path = z3;
  SmtOracle smt(cfg);
  ASSERT_TRUE(smt.available());
  BuiltinOracle o;
  Rng r(32);
  for (int i = 0; i < 500; ++i) {
    Query q = query(ps(), hyps(r, r.pick(0, 3)), gen_bool(r, kV, {}, 2));
    Verdict a = o.valid(q), b = smt.valid(q);
    ASSERT_EQ(a.kind, b.kind) << smt_query_text(q);
    if (b.kind == VerdictKind::Invalid) ASSERT_TRUE(model_refutes(q, b.model)) << smt_query_text(q);
  }
}

TEST(Oracle, CanonicalFormIgnoresBinderNames) {
  Query a = query(int_params({"x"}), {rge(rvar("x"), lr::rint(0))}, rgt(rvar("x"), lr::rint(-1)));
  Query b = query(int_params({"y"}), {rge(rvar("y"), lr::rint(0))}, rgt(rvar("y"), lr::rint(-1)));
  EXPECT_EQ(canonical_query(a, nullptr), canonical_query(b, nullptr));
  CachedOracle c(std::make_shared<BuiltinOracle>());
  EXPECT_EQ(c.valid(a).kind, VerdictKind::Valid);
  EXPECT_EQ(c.valid(b).kind, VerdictKind::Valid);
  EXPECT_EQ(c.hits(), 1u);
}

// The seven meta-properties; Unknown verdicts are vacuous.

TEST(OracleAssumptions, Weakening) {
  Rng r(41);
  BuiltinOracle o;
  for (int i = 0; i < 250; ++i) {
    auto h1 = hyps(r, r.pick(0, 2)), h2 = hyps(r, r.pick(0, 2));
    RExp e = gen_bool(r, kV, {}, 2);
    std::vector<RExp> both = h1;
    both.insert(both.end(), h2.begin(), h2.end());
    if (!is_valid(o, query(ps(), both, e))) continue;
    std::vector<RExp> mid = h1;
    mid.push_back(gen_bool(r, kV, {}, 1));
    mid.insert(mid.end(), h2.begin(), h2.end());
    auto bs = ps();
    bs.emplace_back("d", Sort::Int);
    ASSERT_NE(o.valid(query(bs, mid, e)).kind, VerdictKind::Invalid);
  }
}

TEST(OracleAssumptions, Cut) {
  Rng r(42);
  BuiltinOracle o;
  int used = 0;
  for (int i = 0; i < 400; ++i) {
    auto d1 = hyps(r, r.pick(0, 2)), d2 = hyps(r, r.pick(0, 2));
    RExp e1 = gen_bool(r, kV, {}, 1), e2 = gen_bool(r, kV, {}, 2);
    if (!is_valid(o, query(ps(), d1, e1))) continue;
    std::vector<RExp> with = d1;
    with.push_back(e1);
    with.insert(with.end(), d2.begin(), d2.end());
    if (!is_valid(o, query(ps(), with, e2))) continue;
    ++used;
    std::vector<RExp> without = d1;
    without.insert(without.end(), d2.begin(), d2.end());
    ASSERT_NE(o.valid(query(ps(), without, e2)).kind, VerdictKind::Invalid);
  }
  EXPECT_GT(used, 5);
}

TEST(OracleAssumptions, Identity) {
  Rng r(43);
  BuiltinOracle o;
  for (int i = 0; i < 250; ++i) {
    auto h = hyps(r, r.pick(0, 2));
    RExp e = gen_bool(r, kV, {}, 3);
    h.push_back(e);
    ASSERT_NE(o.valid(query(ps(), h, e)).kind, VerdictKind::Invalid) << print_rexp(e);
  }
}

TEST(OracleAssumptions, Reflexivity) {
  Rng r(44);
  BuiltinOracle o;
  for (int i = 0; i < 250; ++i) {
    RExp e = gen_int(r, kV, 3);
    ASSERT_NE(o.valid(query(ps(), hyps(r, r.pick(0, 2)), req(e, e))).kind, VerdictKind::Invalid);
  }
}

TEST(OracleAssumptions, TransitiveEquality) {
  Rng r(45);
  BuiltinOracle o;
  for (int i = 0; i < 250; ++i) {
    RExp x = gen_int(r, kV, 2), y = gen_int(r, kV, 2), z = gen_int(r, kV, 2);
    auto h = hyps(r, r.pick(0, 2));
    if (!is_valid(o, query(ps(), h, req(x, y))) || !is_valid(o, query(ps(), h, req(y, z)))) {
      // force the premise: assume both equalities
      h.push_back(req(x, y));
      h.push_back(req(y, z));
    }
    ASSERT_NE(o.valid(query(ps(), h, req(x, z))).kind, VerdictKind::Invalid);
  }
}

TEST(OracleAssumptions, TransitiveImplication) {
  Rng r(46);
  BuiltinOracle o;
  int used = 0;
  for (int i = 0; i < 500; ++i) {
    auto h = hyps(r, r.pick(0, 1));
    RExp p = gen_bool(r, kV, {}, 1), q = gen_bool(r, kV, {}, 1), s = gen_bool(r, kV, {}, 1);
    auto with = [&](RExp x) {
      auto hh = h;
      hh.push_back(std::move(x));
      return hh;
    };
    if (!is_valid(o, query(ps(), with(p), q)) || !is_valid(o, query(ps(), with(q), s))) continue;
    ++used;
    ASSERT_NE(o.valid(query(ps(), with(p), s)).kind, VerdictKind::Invalid);
  }
  EXPECT_GT(used, 20);
}

TEST(OracleAssumptions, Substitution) {
  Rng r(47);
  BuiltinOracle o;
  int used = 0;
  for (int i = 0; i < 400; ++i) {
    auto h = hyps(r, r.pick(0, 2));
    RExp e = gen_bool(r, kV, {}, 2);
    if (!is_valid(o, query(ps(), h, e))) continue;
    ++used;
    RExp ea = gen_int(r, {"b", "c"}, 2);
    std::vector<RExp> hs;
    for (const auto &x : h) hs.push_back(subst(x, "a", ea));
    ASSERT_NE(o.valid(query(int_params({"b", "c"}), hs, subst(e, "a", ea))).kind, VerdictKind::Invalid);
  }
  EXPECT_GT(used, 20);
}
