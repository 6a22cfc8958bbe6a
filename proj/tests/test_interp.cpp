// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lr/harness.hpp"
#include "lr/interp.hpp"
#include "lr/printer.hpp"
#include "support.hpp"

using namespace lrtest;

namespace {

RunResult run_src(const std::string &src, int64_t fuel = kDefaultFuel) {
  return run_expr(parse_expr(src), {}, fuel);
}

bool granted(const MachineState &st, int64_t loc, int64_t tag, bool write) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end()) return false;
  for (auto i = it->second.rbegin(); i != it->second.rend(); ++i)
    if (i->tag == tag) return write ? i->perm == Perm::Unique : i->perm != Perm::Disabled;
  return false;
}

bool stacks_equal(const MachineState &a, const MachineState &b) {
  if (a.stacks.size() != b.stacks.size()) return false;
  for (const auto &[l, s] : a.stacks) {
    auto it = b.stacks.find(l);
    if (it == b.stacks.end() || s.size() != it->second.size()) return false;
    for (size_t i = 0; i < s.size(); ++i)
      if (s[i].tag != it->second[i].tag || s[i].perm != it->second[i].perm) return false;
  }
  return true;
}

}  // namespace

TEST(StackedBorrows, Examples) {
  MachineState st;
  SbResult a = sb_alloc(st, 2);
  EXPECT_EQ(a.loc, 1);
  EXPECT_EQ(a.tag, 1);
  EXPECT_EQ(print_stack(st.stacks[1]), "[U1]");
  EXPECT_TRUE(value_equal(st.heap[2], v_poison()));

  SbResult m = sb_reborrow(st, 1, 1, RefMode::Mut);
  ASSERT_TRUE(m.ok);
  SbResult s = sb_reborrow(st, 1, m.tag, RefMode::Shr);
  ASSERT_TRUE(s.ok);
  EXPECT_EQ(print_stack(st.stacks[1]), "[U1, U2, S3]");
  // reading through the owner disables the unique borrow above it
  EXPECT_TRUE(sb_read(st, 1, 1).ok);
  EXPECT_EQ(print_stack(st.stacks[1]), "[U1, D2, S3]");
  EXPECT_TRUE(sb_read(st, 1, 3).ok);
  SbResult bad = sb_write(st, 1, 2);
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.err.event, "write");
  // writing through the owner pops everything above it
  EXPECT_TRUE(sb_write(st, 1, 1).ok);
  EXPECT_EQ(print_stack(st.stacks[1]), "[U1]");
  EXPECT_FALSE(sb_read(st, 1, 3).ok);
  EXPECT_FALSE(sb_write(st, 1, 99).ok);
  EXPECT_TRUE(sb_dealloc(st, 2, 1).ok);
  EXPECT_FALSE(sb_read(st, 2, 1).ok);
  EXPECT_TRUE(state_invariant(st));
}

TEST(StackedBorrows, SharedCannotWriteOrMutablyReborrow) {
  MachineState st;
  SbResult a = sb_alloc(st, 1);
  SbResult s = sb_reborrow(st, a.loc, a.tag, RefMode::Shr);
  EXPECT_FALSE(sb_write(st, a.loc, s.tag).ok);
  EXPECT_FALSE(sb_reborrow(st, a.loc, s.tag, RefMode::Mut).ok);
  EXPECT_TRUE(sb_reborrow(st, a.loc, s.tag, RefMode::Shr).ok);
}

// Random event sequences against properties of the borrow stacks.
TEST(StackedBorrows, RandomSequenceProperties) {
  Rng r(71);
  int failures = 0, successes = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    MachineState st;
    std::map<int64_t, std::vector<int64_t>> tags;  // loc -> tags ever issued there
    std::map<int64_t, int64_t> owner;
    int len = r.pick(1, 30);
    for (int ev = 0; ev < len; ++ev) {
      if (tags.empty() || r.coin(10)) {
        int n = r.pick(1, 2);
        SbResult a = sb_alloc(st, n);
        for (int i = 0; i < n; ++i) {
          tags[a.loc + i].push_back(a.tag);
          owner[a.loc + i] = a.tag;
        }
        continue;
      }
      std::vector<int64_t> locs;
      for (const auto &kv : tags) locs.push_back(kv.first);
      int64_t loc = r.any(locs);
      int64_t tag = r.coin(5) ? r.pick(1, 60) : r.any(tags[loc]);
      MachineState before = st;
      int kind = r.pick(0, 9);
      SbResult res;
      if (kind <= 2) res = sb_read(st, loc, tag);
      else if (kind <= 5) res = sb_write(st, loc, tag);
      else if (kind <= 8) res = sb_reborrow(st, loc, tag, r.coin() ? RefMode::Mut : RefMode::Shr);
      else res = sb_dealloc(st, loc, tag);

      ASSERT_TRUE(state_invariant(st));
      // a failed access is not granted and changes nothing
      if (!res.ok) {
        ++failures;
        ASSERT_TRUE(stacks_equal(before, st));
        ASSERT_EQ(before.next_tag, st.next_tag);
        if (kind <= 2) ASSERT_FALSE(granted(before, loc, tag, false));
        if (kind >= 3 && kind <= 5) ASSERT_FALSE(granted(before, loc, tag, true));
        continue;
      }
      ++successes;
      if (kind <= 2) {
        ASSERT_TRUE(granted(before, loc, tag, false));
        ASSERT_EQ(st.stacks[loc].size(), before.stacks[loc].size());
        // reading again is a no-op
        MachineState again = st;
        ASSERT_TRUE(sb_read(again, loc, tag).ok);
        ASSERT_TRUE(stacks_equal(again, st));
      } else if (kind <= 5) {
        ASSERT_TRUE(granted(before, loc, tag, true));
        ASSERT_EQ(st.stacks[loc].back().tag, tag);
        ASSERT_EQ(st.stacks[loc].back().perm, Perm::Unique);
      } else if (kind <= 8) {
        ASSERT_EQ(st.stacks[loc].back().tag, before.next_tag);
        ASSERT_EQ(st.next_tag, before.next_tag + 1);
        tags[loc].push_back(st.stacks[loc].back().tag);
      } else {
        ASSERT_EQ(st.stacks.count(loc), 0u);
        tags.erase(loc);
      }
      for (const auto &[l, s] : st.stacks) {
        // tags increase from bottom to top, the owner stays at the bottom and can write
        for (size_t i = 1; i < s.size(); ++i) ASSERT_LT(s[i - 1].tag, s[i].tag) << print_stack(s);
        ASSERT_EQ(s.front().tag, owner[l]);
        ASSERT_EQ(s.front().perm, Perm::Unique);
      }
      // items disabled stay disabled until popped
      for (const auto &[l, s] : before.stacks) {
        auto it = st.stacks.find(l);
        if (it == st.stacks.end()) continue;
        for (const auto &item : s)
          if (item.perm == Perm::Disabled)
            for (const auto &now : it->second)
              if (now.tag == item.tag) ASSERT_EQ(now.perm, Perm::Disabled);
      }
    }
  }
  EXPECT_GT(failures, 1000);
  EXPECT_GT(successes, 10000);
}

TEST(Interp, Arithmetic) {
  RunResult r = run_src("1 + 2 + 3");
  ASSERT_EQ(r.outcome, Outcome::Done);
  EXPECT_TRUE(value_equal(r.value, v_int(6)));
}

TEST(Interp, StuckStates) {
  RunResult p = run_src("let c = new(l) in let x = *c in if x { 1 } else { 2 }");
  EXPECT_EQ(p.outcome, Outcome::Stuck);
  RunResult oob = run_src(
      "let v = new(l) in v := call vec_new(); call vec_push(v, 1); "
      "let e = call vec_index_mut(&mut v, 3) in *e");
  EXPECT_EQ(oob.outcome, Outcome::Stuck);
  RunResult neg = run_src(
      "let v = new(l) in v := call vec_new(); call vec_push(v, 1); "
      "let e = call vec_index_mut(&mut v, 0 - 1) in *e");
  EXPECT_EQ(neg.outcome, Outcome::Stuck);
}

TEST(Interp, VecPushPreservesElements) {
  Rng r(72);
  for (int i = 0; i < 100; ++i) {
    int n = r.pick(1, 6);
    std::vector<int> xs;
    std::string src = "let v = new(l) in v := call vec_new(); ";
    for (int j = 0; j < n; ++j) {
      xs.push_back(r.pick(-20, 20));
      src += "call vec_push(v, " + std::to_string(xs.back()) + "); ";
    }
    int k = r.pick(0, n - 1);
    src += "let e = call vec_index_mut(&mut v, " + std::to_string(k) + ") in *e";
    RunResult res = run_src(src);
    ASSERT_EQ(res.outcome, Outcome::Done) << src << " " << res.reason;
    ASSERT_TRUE(value_equal(res.value, v_int(xs[static_cast<size_t>(k)]))) << src;
    ASSERT_TRUE(state_invariant(res.state));
  }
}

TEST(Interp, CorpusRuns) {
  RunResult d = run(load("accept/decr_driver.lr"), kDefaultFuel);
  ASSERT_EQ(d.outcome, Outcome::Done);
  EXPECT_TRUE(value_equal(d.value, v_int(0)));
  RunResult s = run(load("accept/stale_write.lr"), kDefaultFuel);
  ASSERT_EQ(s.outcome, Outcome::AliasError);
  EXPECT_EQ(s.alias.event, "write");
  RunResult f = run(load("accept/diverge.lr"), 500);
  EXPECT_EQ(f.outcome, Outcome::FuelExhausted);
  EXPECT_EQ(f.steps, 500);
  RunResult z = run(load("accept/init_zeros.lr"), kDefaultFuel);
  ASSERT_EQ(z.outcome, Outcome::Done);
  ASSERT_EQ(z.value->kind, VKind::Vec);
  EXPECT_EQ(z.value->n, 5);
}

TEST(Interp, TraceRecordsEvents) {
  RunResult s = run(load("accept/stale_write.lr"), kDefaultFuel, true);
  ASSERT_FALSE(s.state.trace.empty());
  bool saw = false;
  for (const auto &line : s.state.trace)
    if (line.find("reborrow loc=1 tag=2 stack=[U1, U2]") != std::string::npos) saw = true;
  EXPECT_TRUE(saw);
}

// Terminal results of well-typed programs are closed values of the expected form.
TEST(Interp, CanonicalForms) {
  for (uint64_t seed = 0; seed < 150; ++seed) {
    Program p = generate_program(seed, 8);
    RunResult r = run(p, kDefaultFuel);
    ASSERT_NE(r.outcome, Outcome::Stuck) << "seed " << seed << ": " << r.reason;
    ASSERT_TRUE(state_invariant(r.state));
    if (r.outcome != Outcome::Done) continue;
    ASSERT_TRUE(r.value->kind == VKind::Int || r.value->kind == VKind::True ||
                r.value->kind == VKind::False || r.value->kind == VKind::Vec ||
                r.value->kind == VKind::Ptr || r.value->kind == VKind::Poison)
        << print_value(r.value);
  }
}
