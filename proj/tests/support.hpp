// SPDX-License-Identifier: Apache-2.0
// Shared generators and reference oracles for the test suites.
#ifndef LR_TESTS_SUPPORT_HPP
#define LR_TESTS_SUPPORT_HPP

#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lr/driver.hpp"
#include "lr/eval.hpp"
#include "lr/logic.hpp"
#include "lr/oracle.hpp"
#include "lr/parser.hpp"

#ifndef LR_CORPUS_DIR
#define LR_CORPUS_DIR "corpus"
#endif

namespace lrtest {

using namespace lr;

struct Rng {
  std::mt19937_64 g;
  explicit Rng(uint64_t seed) : g(seed) {}
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
  bool coin(int pct = 50) { return pick(0, 99) < pct; }
  template <class T> const T &any(const std::vector<T> &v) {
    return v[static_cast<size_t>(pick(0, static_cast<int>(v.size()) - 1))];
  }
};

inline std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program load(const std::string &rel) {
  std::string path = std::string(LR_CORPUS_DIR) + "/" + rel;
  return parse_program(slurp(path), path);
}

// Linear integer terms over `ints`; products only with constants.
inline RExp gen_int(Rng &r, const std::vector<std::string> &ints, int depth) {
  if (depth <= 0 || r.coin(35)) {
    if (!ints.empty() && r.coin(60)) return rvar(r.any(ints));
    return lr::rint(r.pick(-4, 4));
  }
  switch (r.pick(0, 2)) {
    case 0: return radd(gen_int(r, ints, depth - 1), gen_int(r, ints, depth - 1));
    case 1: return rsub(gen_int(r, ints, depth - 1), gen_int(r, ints, depth - 1));
    default: return rmul(lr::rint(r.pick(-3, 3)), gen_int(r, ints, depth - 1));
  }
}

inline RExp gen_bool(Rng &r, const std::vector<std::string> &ints,
                     const std::vector<std::string> &bools, int depth) {
  if (depth <= 0 || r.coin(30)) {
    if (!bools.empty() && r.coin(25)) return rvar(r.any(bools));
    RExp a = gen_int(r, ints, 1), b = gen_int(r, ints, 1);
    switch (r.pick(0, 4)) {
      case 0: return req(a, b);
      case 1: return rlt(a, b);
      case 2: return rle(a, b);
      case 3: return rge(a, b);
      default: return r.coin(15) ? rbool(r.coin()) : rgt(a, b);
    }
  }
  switch (r.pick(0, 2)) {
    case 0: return rand_(gen_bool(r, ints, bools, depth - 1), gen_bool(r, ints, bools, depth - 1));
    case 1: return ror(gen_bool(r, ints, bools, depth - 1), gen_bool(r, ints, bools, depth - 1));
    default: return rnot(gen_bool(r, ints, bools, depth - 1));
  }
}

// Refined int/bool/vec types whose indices mention `ints`.
inline TypeP gen_type(Rng &r, const std::vector<std::string> &ints, int depth) {
  int k = r.pick(0, depth > 0 ? 4 : 2);
  if (k == 0) return t_indexed(b_int(), gen_int(r, ints, 2));
  if (k == 1) {
    std::vector<std::string> in = ints;
    std::string b = fresh_name("b", std::set<std::string>(ints.begin(), ints.end()));
    in.push_back(b);
    return t_exists(b, b_int(), gen_bool(r, in, {}, 1));
  }
  if (k == 2) return t_indexed(b_bool(), gen_bool(r, ints, {}, 1));
  TypeP elem = gen_type(r, ints, depth - 1);
  if (k == 3) return t_indexed(b_vec(elem), gen_int(r, ints, 1));
  return t_ref(r.coin() ? RefMode::Mut : RefMode::Shr, gen_type(r, ints, depth - 1));
}

// Bounded search for a counter-model; boxes every int binder in [-range, range].
inline std::optional<Assignment> brute_counterexample(const Query &q, int range) {
  std::vector<Param> bs = q.binders;
  Assignment env;
  std::optional<Assignment> found;
  std::function<void(size_t)> go = [&](size_t i) {
    if (found) return;
    if (i == bs.size()) {
      try {
        for (const auto &h : q.hyps)
          if (!eval_bool(h, env)) return;
        if (!eval_bool(q.goal, env)) found = env;
      } catch (const EvalError &) {
      }
      return;
    }
    const auto &[n, s] = bs[i];
    if (s == Sort::Bool) {
      for (int v = 0; v <= 1; ++v) {
        env[n] = GVal{Sort::Bool, v};
        go(i + 1);
      }
    } else {
      for (int v = -range; v <= range; ++v) {
        env[n] = GVal{s, v};
        go(i + 1);
      }
    }
  };
  go(0);
  return found;
}

inline bool model_refutes(const Query &q, const Assignment &m) {
  try {
    for (const auto &h : q.hyps)
      if (!eval_bool(h, m)) return false;
    return !eval_bool(q.goal, m);
  } catch (const EvalError &) {
    return false;
  }
}

inline Query query(std::vector<Param> bs, std::vector<RExp> hyps, RExp goal) {
  Query q;
  q.binders = std::move(bs);
  q.hyps = std::move(hyps);
  q.goal = std::move(goal);
  return q;
}

inline std::vector<Param> int_params(const std::vector<std::string> &names) {
  std::vector<Param> ps;
  for (const auto &n : names) ps.emplace_back(n, Sort::Int);
  return ps;
}

// Validity of a closed constraint via the builtin procedure, clause by clause.
inline bool constraint_valid(const CP &c, Oracle &o) {
  for (const auto &cl : clauses(normalize(c))) {
    Verdict v = o.valid(query(cl.binders, cl.hyps, cl.head));
    if (v.kind != VerdictKind::Valid) return false;
  }
  return true;
}

}  // namespace lrtest

#endif
