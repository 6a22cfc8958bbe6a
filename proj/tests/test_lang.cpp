// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lr/harness.hpp"
#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

namespace {

void spans_present(const ExprP &e, int *missing) {
  if (!e) return;
  if (e->span.line <= 0) ++*missing;
  spans_present(e->e1, missing);
  spans_present(e->e2, missing);
  spans_present(e->e3, missing);
  for (const auto &a : e->args) spans_present(a, missing);
}

}  // namespace

TEST(Parser, DecrSignatureAndBody) {
  Program p = load("accept/decr.lr");
  ASSERT_EQ(p.fns.size(), 1u);
  EXPECT_EQ(p.fns[0].name, "decr");
  const FnSig &s = *p.fns[0].sig;
  ASSERT_EQ(s.args.size(), 1u);
  EXPECT_EQ(s.args[0]->kind, TKind::Ref);
  EXPECT_EQ(print_type(s.args[0]->pointee), "{v. int[v] | v >= 0}");
  EXPECT_EQ(print_type(s.ret), "uninit(1)");
  EXPECT_FALSE(p.entry);
}

TEST(Parser, InfixDesugarsToBuiltinCall) {
  ExprP e = parse_expr("x + 1");
  ASSERT_EQ(e->kind, EKind::Call);
  ASSERT_EQ(e->e1->kind, EKind::Var);
  EXPECT_EQ(e->e1->x, "add");
  EXPECT_EQ(e->args.size(), 2u);
}

TEST(Parser, NotEqualIsSugar) {
  EXPECT_TRUE(requal(parse_refexpr("a != 1"), rnot(req(rvar("a"), lr::rint(1)))));
}

TEST(Parser, RejectsMalformedInput) {
  EXPECT_THROW(parse_program("fn"), ParseError);
  EXPECT_THROW(parse_program("entry let x = in x"), ParseError);
  EXPECT_THROW(parse_type("uninit(0)"), ParseError);
}

TEST(Parser, SpansOnEveryNode) {
  for (const char *f : {"accept/init_zeros.lr", "accept/ref_join.lr", "accept/make_vec.lr"}) {
    Program p = load(f);
    int missing = 0;
    for (const auto &fn : p.fns) spans_present(fn.rec->body, &missing);
    spans_present(p.entry, &missing);
    EXPECT_EQ(missing, 0) << f;
  }
}

TEST(Parser, RoundTripCorpus) {
  for (const auto &path : corpus_files(LR_CORPUS_DIR)) {
    Program p = parse_program(slurp(path), path);
    Program q = parse_program(print_program(p), path);
    EXPECT_TRUE(program_equal(p, q)) << path << "\n" << print_program(p);
  }
}

TEST(Parser, RoundTripGenerated) {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Program p = generate_program(seed, 8);
    Program q = parse_program(print_program(p));
    ASSERT_TRUE(program_equal(p, q)) << "seed " << seed << "\n" << print_program(p);
  }
}

TEST(ExprSubst, VariableCase) {
  ExprP e = subst_value_in_expr(parse_expr("x"), "x", v_int(3));
  ASSERT_EQ(e->kind, EKind::Val);
  EXPECT_TRUE(value_equal(e->val, v_int(3)));
}

TEST(ExprSubst, UnpackSubstitutesTheBinderToo) {
  ExprP e = subst_value_in_expr(parse_expr("unpack (x, a) in call f{a}(x)"), "x", v_int(5));
  EXPECT_TRUE(expr_equal(e, parse_expr("call f{5}(5)"))) << print_expr(e);
}

TEST(ExprSubst, UnpackOfNonBaseValueFails) {
  EXPECT_THROW(subst_value_in_expr(parse_expr("unpack (x, a) in x"), "x", v_poison()), SubstError);
}

TEST(ExprSubst, RecShadowingItsOwnNameIsUnchanged) {
  ExprP e = parse_expr("rec f() := call f()");
  EXPECT_TRUE(expr_equal(subst_value_in_expr(e, "f", v_int(1)), e));
}

TEST(ExprSubst, IdentityWhenNotFree) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Program p = generate_program(seed, 6);
    std::set<std::string> fv = free_prog_vars(p.entry);
    std::string y = fresh_name("zz", fv);
    EXPECT_TRUE(expr_equal(subst_value_in_expr(p.entry, y, v_int(1)), p.entry));
  }
}
