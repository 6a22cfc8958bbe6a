// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lr/harness.hpp"
#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

TEST(Harness, GeneratedProgramsAreAcceptedAndSound) {
  BuiltinOracle o;
  for (uint64_t seed = 0; seed < 60; ++seed) {
    Program p = generate_program(seed, 10);
    VerifyResult vr = verify_program(p, o);
    ASSERT_EQ(vr.exit_code, 0) << "seed " << seed << "\n" << generate_source(seed, 10);
    HarnessVerdict v = run_and_verify(p, vr, o);
    ASSERT_EQ(v.tag, VerdictTag::Pass) << "seed " << seed << ": " << v.detail;
  }
}

TEST(Harness, GeneratorIsDeterministic) {
  EXPECT_EQ(generate_source(7, 10), generate_source(7, 10));
  EXPECT_NE(generate_source(7, 10), generate_source(8, 10));
}

TEST(Harness, ZeroBudgetIsTrivial) {
  EXPECT_EQ(generate_source(3, 0), "entry 0\n");
  BuiltinOracle o;
  Program p = generate_program(3, 0);
  VerifyResult vr = verify_program(p, o);
  ASSERT_EQ(vr.exit_code, 0);
  HarnessVerdict v = run_and_verify(p, vr, o);
  EXPECT_EQ(v.tag, VerdictTag::Pass);
  EXPECT_TRUE(value_equal(v.run.value, v_int(0)));
}

// A deliberately unsound checker lets poison reach an addition.
TEST(Harness, UnsoundFixtureIsCaught) {
  Program p = parse_program("entry let c = new(l) in let x = *c in x + 1");
  BuiltinOracle o;
  EXPECT_NE(verify_program(p, o).exit_code, 0);
  VerifyOptions bad;
  bad.check.unsound_deref_uninit = true;
  VerifyResult vr = verify_program(p, o, bad);
  ASSERT_EQ(vr.exit_code, 0);
  HarnessVerdict v = run_and_verify(p, vr, o);
  EXPECT_EQ(v.tag, VerdictTag::SoundnessBug);
  EXPECT_EQ(v.run.outcome, Outcome::Stuck);
}

TEST(Harness, DivergenceIsNotABug) {
  BuiltinOracle o;
  Program p = load("accept/diverge.lr");
  VerifyResult vr = verify_program(p, o);
  ASSERT_EQ(vr.exit_code, 0);
  HarnessVerdict v = run_and_verify(p, vr, o, 1000);
  EXPECT_EQ(v.tag, VerdictTag::Pass);
  EXPECT_EQ(v.run.outcome, Outcome::FuelExhausted);
}

TEST(Harness, ValueConformance) {
  BuiltinOracle o;
  MachineState st;
  TypeP nat = t_exists("v", b_int(), rge(rvar("v"), lr::rint(0)));
  std::string why;
  EXPECT_TRUE(value_conforms(v_int(3), nat, {}, {}, st, o, &why));
  EXPECT_FALSE(value_conforms(v_int(-3), nat, {}, {}, st, o, &why));
  EXPECT_FALSE(value_conforms(v_bool(true), nat, {}, {}, st, o, &why));
  EXPECT_TRUE(value_conforms(v_poison(), t_uninit(1), {}, {}, st, o, &why));
  // a reference needs a live, granted tag
  SbResult a = sb_alloc(st, 1);
  st.heap[a.loc] = v_int(5);
  TypeP ref = t_ref(RefMode::Mut, nat);
  EXPECT_TRUE(value_conforms(v_ptr(a.loc, a.tag), ref, {}, {}, st, o, &why)) << why;
  EXPECT_FALSE(value_conforms(v_ptr(a.loc, 99), ref, {}, {}, st, o, &why));
}

TEST(Harness, CorpusSidecarsMatch) {
  BuiltinOracle o;
  auto files = corpus_files(LR_CORPUS_DIR);
  EXPECT_GE(files.size(), 15u);
  for (const auto &path : files) {
    CorpusResult r = run_corpus_file(path, o);
    EXPECT_TRUE(r.matches) << path << ": " << r.note;
    if (r.ran) EXPECT_EQ(r.verdict.tag, VerdictTag::Pass) << path << ": " << r.verdict.detail;
  }
}
