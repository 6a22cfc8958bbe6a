// SPDX-License-Identifier: Apache-2.0
#include "lr/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lr/logic.hpp"
#include "lr/parser.hpp"
#include "lr/printer.hpp"

namespace lr {

namespace fs = std::filesystem;

// conformance

namespace {

// false only if the oracle proves the refinement cannot hold
bool satisfiable(const RExp &goal, const RefCtx &delta, const Solution &sol, Oracle &oracle,
                 std::string *why) {
  Query q;
  q.binders = ctx_binders(delta);
  for (const auto &a : ctx_assumes(delta)) q.hyps.push_back(apply_solution(a, sol));
  RExp g = apply_solution(goal, sol);
  q.goal = rnot(g);
  Verdict v = oracle.valid(q);
  if (v.kind == VerdictKind::Valid) {
    if (why) *why = "refinement " + print_rexp(g) + " cannot hold";
    return false;
  }
  if (v.kind == VerdictKind::Unknown && why) *why = "conformance inconclusive: " + v.reason;
  return true;
}

bool base_matches(const ValueP &v, const BaseType &b) {
  switch (b.kind) {
    case BaseKind::Int: return v->kind == VKind::Int;
    case BaseKind::Bool: return v->kind == VKind::True || v->kind == VKind::False;
    case BaseKind::Vec: return v->kind == VKind::Vec;
  }
  return false;
}

bool granted(const MachineState &st, int64_t loc, int64_t tag) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end()) return false;
  for (const auto &item : it->second)
    if (item.tag == tag && item.perm != Perm::Disabled) return true;
  return false;
}

}  // namespace

bool value_conforms(const ValueP &v, const TypeP &t, const RefCtx &delta, const Solution &sol,
                    const MachineState &st, Oracle &oracle, std::string *why) {
  auto fail = [&](const std::string &m) {
    if (why) *why = m;
    return false;
  };
  switch (t->kind) {
    case TKind::Uninit: return true;
    case TKind::Fn:
      switch (v->kind) {
        case VKind::Rec: case VKind::Prim: case VKind::VecNew: case VKind::VecPush:
        case VKind::VecIndexMut: return true;
        default: return fail(print_value(v) + " is not a function");
      }
    case TKind::Ptr:
    case TKind::Ref:
      if (v->kind != VKind::Ptr) return fail(print_value(v) + " is not a pointer");
      if (!granted(st, v->loc, v->tag)) return fail("pointer " + print_value(v) + " is not live");
      return true;
    case TKind::Indexed:
    case TKind::Exists: break;
  }
  if (!base_matches(v, t->base)) return fail(print_value(v) + " does not have base " + print_type(t));
  RExp iv = *interp(v);
  RExp goal = t->kind == TKind::Indexed ? req(t->idx, iv) : subst(t->pred, t->binder, iv);
  if (!satisfiable(goal, delta, sol, oracle, why)) return false;
  if (t->base.kind == BaseKind::Vec && v->n > 0) {
    const ValueP &buf = v->payload;
    if (!buf || buf->kind != VKind::Ptr) return fail("vector without a buffer");
    for (int64_t i = 0; i < v->n; ++i) {
      auto c = st.heap.find(buf->loc + i);
      if (c == st.heap.end()) return fail("vector element " + std::to_string(i) + " missing");
      if (!value_conforms(c->second, t->base.elem, delta, sol, st, oracle, why)) return false;
    }
  }
  return true;
}

HarnessVerdict run_and_verify(const Program &p, const VerifyResult &vr, Oracle &oracle, int64_t fuel,
                              bool trace) {
  HarnessVerdict out;
  if (!p.entry) {
    out.detail = "no entry expression";
    return out;
  }
  out.run = run(p, fuel, trace);
  const RunResult &r = out.run;
  if (!state_invariant(r.state)) {
    out.tag = VerdictTag::SoundnessBug;
    out.detail = "heap and borrow stacks disagree";
    return out;
  }
  switch (r.outcome) {
    case Outcome::Stuck:
      out.tag = VerdictTag::SoundnessBug;
      out.detail = "stuck: " + r.reason;
      return out;
    case Outcome::Done: {
      const Report &rep = vr.report;
      if (!rep.entry_type) return out;
      std::string why;
      if (!value_conforms(r.value, rep.entry_type, rep.entry_delta, vr.solve.sol, r.state, oracle,
                          &why)) {
        out.tag = VerdictTag::SoundnessBug;
        out.detail = "result " + print_value(r.value) + " does not conform to " +
                     print_type(rep.entry_type) + ": " + why;
      } else {
        out.detail = why;
      }
      return out;
    }
    default: return out;
  }
}

// generator

namespace {

const char *kDecr =
    "fn decr (&mut {v. int[v] | v >= 0}) -> uninit(1) :=\n"
    "  rec decr(x) :=\n"
    "    let y = *x in\n"
    "    unpack (y, a_y) in\n"
    "    if y > 0 { x := y - 1 } else { poison }\n\n";

const char *kIncr =
    "fn incr (&mut {v. int[v] | v >= 0}) -> uninit(1) :=\n"
    "  rec incr(x) :=\n"
    "    let y = *x in\n"
    "    x := y + 1\n\n";

const char *kAddk =
    "fn bump {a: int | a >= 0} (int[a]) -> {v. int[v] | v > a} :=\n"
    "  rec bump{a: int}(x) := x + 1\n\n";

struct VecVar {
  std::string name;
  int len = 0;
  bool known = true;
};

struct Gen {
  std::mt19937_64 rng;
  int counter = 0;
  std::vector<std::string> cells;  // int cells, contents always >= 0
  std::vector<std::string> ints;   // let-bound ints, >= 0
  std::vector<VecVar> vecs;
  std::vector<std::string> out;
  bool use_decr = false, use_incr = false, use_addk = false;

  explicit Gen(uint64_t seed) : rng(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool coin(int pct) { return pick(0, 99) < pct; }
  template <class T> const T &any(const std::vector<T> &v) {
    return v[static_cast<size_t>(pick(0, static_cast<int>(v.size()) - 1))];
  }
  std::string fresh(const char *base) { return base + std::to_string(counter++); }
  std::string num(int lo, int hi) { return std::to_string(pick(lo, hi)); }

  std::string new_cell() {
    std::string c = fresh("c");
    out.push_back("let " + c + " = new(l" + c + ") in");
    out.push_back(c + " := " + num(0, 9) + ";");
    cells.push_back(c);
    return c;
  }
  std::string some_cell() { return cells.empty() ? new_cell() : any(cells); }

  std::string read(const std::string &c) {
    std::string x = fresh("x");
    out.push_back("let " + x + " = *" + c + " in");
    ints.push_back(x);
    return x;
  }
  std::string some_int() { return ints.empty() ? read(some_cell()) : any(ints); }

  std::string cond() {
    switch (pick(0, 3)) {
      case 0: return coin(50) ? "true" : "false";
      case 1: return some_int() + " > " + num(0, 6);
      case 2: return some_int() + " <= " + num(0, 6);
      default: return some_int() + " == " + num(0, 4);
    }
  }

  VecVar &some_vec() {
    if (vecs.empty()) {
      std::string v = fresh("v");
      out.push_back("let " + v + " = new(l" + v + ") in");
      out.push_back(v + " := call vec_new();");
      vecs.push_back(VecVar{v});
    }
    return vecs[static_cast<size_t>(pick(0, static_cast<int>(vecs.size()) - 1))];
  }

  void stmt() {
    switch (pick(0, 18)) {
      case 0: new_cell(); break;
      case 1: {
        std::string c = some_cell();
        std::string x = read(c);
        out.push_back(c + " := " + x + " + " + num(0, 3) + ";");
        break;
      }
      case 2: {
        use_decr = true;
        std::string r = fresh("r");
        out.push_back("let " + r + " = &mut " + some_cell() + " in");
        out.push_back("call decr(" + r + ");");
        break;
      }
      case 3: {
        use_incr = true;
        std::string r = fresh("r");
        out.push_back("let " + r + " = &mut " + some_cell() + " in");
        out.push_back("call incr(" + r + ");");
        break;
      }
      case 4: {
        std::string k = cond();
        std::string a = some_cell(), b = some_cell();
        out.push_back("if " + k + " { " + a + " := " + num(0, 9) + " } else { " + b + " := " +
                      num(0, 9) + " };");
        break;
      }
      case 5: {
        std::string k = cond();
        std::string y = fresh("y");
        out.push_back("let " + y + " = if " + k + " { " + num(0, 9) + " } else { " + num(0, 9) + " } in");
        ints.push_back(y);
        break;
      }
      case 6: {
        use_decr = true;
        std::string k = cond();
        std::string a = some_cell(), b = coin(70) ? new_cell() : some_cell();
        if (a == b) b = new_cell();
        std::string r = fresh("r");
        out.push_back("let " + r + " = if " + k + " { &mut " + a + " } else { &mut " + b + " } in");
        out.push_back("call decr(" + r + ");");
        break;
      }
      case 7: {
        std::string r = fresh("r"), s = fresh("s"), x = fresh("x");
        out.push_back("let " + r + " = &mut " + some_cell() + " in");
        out.push_back("let " + s + " = &shr " + r + " in");
        out.push_back("let " + x + " = *" + s + " in");
        ints.push_back(x);
        break;
      }
      case 8: {
        // stale reference: the write through r after the owner's write is an alias error
        if (!coin(15)) break;
        std::string c = some_cell(), r = fresh("r");
        out.push_back("let " + r + " = &mut " + c + " in");
        out.push_back(c + " := " + num(0, 9) + ";");
        out.push_back(r + " := " + num(0, 9) + ";");
        break;
      }
      case 9:
      case 10: {
        VecVar &v = some_vec();
        out.push_back("call vec_push(" + v.name + ", " + num(0, 9) + ");");
        ++v.len;
        break;
      }
      case 11: {
        VecVar &v = some_vec();
        if (!v.known || v.len == 0) break;
        std::string e = fresh("e");
        out.push_back("let " + e + " = call vec_index_mut(&mut " + v.name + ", " +
                      std::to_string(pick(0, v.len - 1)) + ") in");
        out.push_back(e + " := " + num(0, 9) + ";");
        break;
      }
      case 12: {
        VecVar &v = some_vec();
        if (!v.known || v.len == 0) break;
        std::string e = fresh("e"), x = fresh("x");
        out.push_back("let " + e + " = call vec_index_mut(&mut " + v.name + ", " +
                      std::to_string(pick(0, v.len - 1)) + ") in");
        out.push_back("let " + x + " = *" + e + " in");
        ints.push_back(x);
        break;
      }
      case 13: {
        VecVar &v = some_vec();
        std::string name = v.name;
        std::string i = fresh("i"), lp = fresh("loop"), iv = fresh("iv");
        out.push_back("let " + i + " = new(l" + i + ") in");
        out.push_back(i + " := 0;");
        out.push_back("let " + lp + " = rec " + lp + "() := let " + iv + " = *" + i + " in if " + iv +
                      " < " + num(0, 5) + " { call vec_push(" + name + ", " + num(0, 9) + "); " + i +
                      " := " + iv + " + 1; call " + lp + "() } else { poison } in");
        out.push_back("call " + lp + "();");
        v.known = false;
        break;
      }
      case 14: {
        std::string c = some_cell(), lp = fresh("loop"), x = fresh("x");
        out.push_back("let " + lp + " = rec " + lp + "() := let " + x + " = *" + c + " in if " + x +
                      " > 0 { " + c + " := " + x + " - 1; call " + lp + "() } else { poison } in");
        out.push_back("call " + lp + "();");
        break;
      }
      case 15: {
        use_addk = true;
        std::string x = fresh("x");
        out.push_back("let " + x + " = call bump(" + some_int() + ") in");
        ints.push_back(x);
        break;
      }
      case 16: {
        std::string k = cond();
        VecVar &v = some_vec();
        out.push_back("if " + k + " { call vec_push(" + v.name + ", " + num(0, 9) +
                      ") } else { poison };");
        v.known = false;
        break;
      }
      case 17: {
        std::string c = some_cell(), q = fresh("p");
        out.push_back("let " + q + " = &strg " + c + " in");
        out.push_back(q + " := " + num(0, 9) + ";");
        break;
      }
      default: read(some_cell()); break;
    }
  }

  std::string result() {
    switch (pick(0, 4)) {
      case 0: return cells.empty() ? "0" : "*" + any(cells);
      case 1: return vecs.empty() ? "poison" : "*" + any(vecs).name;
      case 2: return ints.empty() ? "true" : any(ints);
      case 3: return num(0, 9);
      default: return cells.empty() ? "false" : "*" + any(cells);
    }
  }
};

}  // namespace

std::string generate_source(uint64_t seed, int budget) {
  Gen g(seed);
  if (budget <= 0) return "entry 0\n";
  for (int i = 0; i < budget; ++i) g.stmt();
  std::string res = g.result();
  std::string src = "// generated, seed " + std::to_string(seed) + "\n";
  if (g.use_decr) src += kDecr;
  if (g.use_incr) src += kIncr;
  if (g.use_addk) src += kAddk;
  src += "entry\n";
  for (const auto &l : g.out) src += "  " + l + "\n";
  src += "  " + res + "\n";
  return src;
}

Program generate_program(uint64_t seed, int budget) {
  return parse_program(generate_source(seed, budget), "<gen " + std::to_string(seed) + ">");
}

// corpus

Expectation read_expectation(const std::string &lr_path) {
  Expectation e;
  std::ifstream in(lr_path + ".expect");
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos || line[0] == '#') continue;
    std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "exit") e.exit = std::stoi(v);
    else if (k == "rule") e.rule = v;
    else if (k == "line") e.line = std::stoi(v);
    else if (k == "outcome") e.outcome = v;
    else if (k == "value") e.value = v;
  }
  return e;
}

CorpusResult run_corpus_file(const std::string &path, Oracle &oracle, int64_t fuel) {
  CorpusResult cr;
  cr.path = path;
  Expectation ex = read_expectation(path);
  std::ifstream in(path);
  if (!in) {
    cr.exit = 2;
    cr.matches = false;
    cr.note = "cannot read " + path;
    return cr;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Program p;
  try {
    p = parse_program(ss.str(), path);
  } catch (const ParseError &err) {
    cr.exit = 2;
    cr.matches = false;
    cr.note = err.what();
    return cr;
  }
  VerifyResult vr = verify_program(p, oracle);
  cr.exit = vr.exit_code;
  cr.diags = vr.diags;
  if (cr.exit != ex.exit) {
    cr.matches = false;
    cr.note = "exit " + std::to_string(cr.exit) + ", expected " + std::to_string(ex.exit);
  }
  if (cr.exit == 1 && (!ex.rule.empty() || ex.line)) {
    bool hit = std::any_of(vr.diags.begin(), vr.diags.end(), [&](const Diagnostic &d) {
      return (ex.rule.empty() || d.rule == ex.rule) && (!ex.line || d.span.line == ex.line);
    });
    if (!hit) {
      cr.matches = false;
      cr.note = "no diagnostic with rule " + ex.rule + " at line " + std::to_string(ex.line);
    }
  }
  if (cr.exit == 0 && p.entry) {
    cr.ran = true;
    cr.verdict = run_and_verify(p, vr, oracle, fuel);
    if (cr.verdict.tag == VerdictTag::SoundnessBug) cr.matches = false;
    if (!ex.outcome.empty() && ex.outcome != outcome_name(cr.verdict.run.outcome)) {
      cr.matches = false;
      cr.note = std::string("outcome ") + outcome_name(cr.verdict.run.outcome) + ", expected " + ex.outcome;
    }
    const ValueP &v = cr.verdict.run.value;
    if (!ex.value.empty() && (!v || print_value(v) != ex.value)) {
      cr.matches = false;
      cr.note = "value " + (v ? print_value(v) : std::string("none")) + ", expected " + ex.value;
    }
  }
  return cr;
}

std::vector<std::string> corpus_files(const std::string &root) {
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto &sub : {"accept", "reject", "mutants"}) {
    fs::path dir = fs::path(root) / sub;
    if (!fs::is_directory(dir, ec)) continue;
    for (const auto &ent : fs::directory_iterator(dir, ec))
      if (ent.path().extension() == ".lr") files.push_back(ent.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lr
