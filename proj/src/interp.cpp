// SPDX-License-Identifier: Apache-2.0
#include "lr/interp.hpp"

#include "lr/logic.hpp"
#include "lr/printer.hpp"
#include "lr/typeck.hpp"

namespace lr {

std::string print_stack(const std::vector<StackItem> &s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += s[i].perm == Perm::Unique ? 'U' : s[i].perm == Perm::SharedRO ? 'S' : 'D';
    out += std::to_string(s[i].tag);
  }
  return out + "]";
}

const char *outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Reduced: return "Reduced";
    case Outcome::Done: return "Done";
    case Outcome::AliasError: return "AliasError";
    case Outcome::Stuck: return "Stuck";
    case Outcome::FuelExhausted: return "FuelExhausted";
  }
  return "?";
}

// stacked borrows

namespace {

void log_event(MachineState &st, const char *ev, int64_t loc, int64_t tag) {
  if (!st.tracing) return;
  auto it = st.stacks.find(loc);
  st.trace.push_back(std::to_string(st.step) + " " + ev + " loc=" + std::to_string(loc) +
                     " tag=" + std::to_string(tag) +
                     " stack=" + (it == st.stacks.end() ? "[]" : print_stack(it->second)));
}

SbResult fail(const char *ev, int64_t loc, int64_t tag) {
  SbResult r;
  r.ok = false;
  r.err = AliasInfo{ev, loc, tag};
  return r;
}

// topmost item carrying `tag`, or -1
long find_tag(const std::vector<StackItem> &s, int64_t tag) {
  for (long i = static_cast<long>(s.size()) - 1; i >= 0; --i)
    if (s[static_cast<size_t>(i)].tag == tag) return i;
  return -1;
}

bool read_access(std::vector<StackItem> &s, int64_t tag) {
  long i = find_tag(s, tag);
  if (i < 0 || s[static_cast<size_t>(i)].perm == Perm::Disabled) return false;
  for (size_t j = static_cast<size_t>(i) + 1; j < s.size(); ++j)
    if (s[j].perm == Perm::Unique) s[j].perm = Perm::Disabled;
  return true;
}

bool write_access(std::vector<StackItem> &s, int64_t tag) {
  long i = find_tag(s, tag);
  if (i < 0 || s[static_cast<size_t>(i)].perm != Perm::Unique) return false;
  s.resize(static_cast<size_t>(i) + 1);
  return true;
}

}  // namespace

SbResult sb_alloc(MachineState &st, int64_t n) {
  SbResult r;
  r.loc = st.next_loc;
  r.tag = st.next_tag++;
  st.next_loc += n;
  for (int64_t i = 0; i < n; ++i) {
    st.heap[r.loc + i] = v_poison();
    st.stacks[r.loc + i] = {StackItem{Perm::Unique, r.tag}};
    log_event(st, "alloc", r.loc + i, r.tag);
  }
  return r;
}

SbResult sb_read(MachineState &st, int64_t loc, int64_t tag) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end() || !read_access(it->second, tag)) return fail("read", loc, tag);
  log_event(st, "read", loc, tag);
  return {};
}

SbResult sb_write(MachineState &st, int64_t loc, int64_t tag) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end() || !write_access(it->second, tag)) return fail("write", loc, tag);
  log_event(st, "write", loc, tag);
  return {};
}

SbResult sb_reborrow(MachineState &st, int64_t loc, int64_t from, RefMode mode) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end()) return fail("reborrow", loc, from);
  bool ok = mode == RefMode::Mut ? write_access(it->second, from) : read_access(it->second, from);
  if (!ok) return fail("reborrow", loc, from);
  SbResult r;
  r.tag = st.next_tag++;
  it->second.push_back(StackItem{mode == RefMode::Mut ? Perm::Unique : Perm::SharedRO, r.tag});
  log_event(st, "reborrow", loc, r.tag);
  return r;
}

SbResult sb_dealloc(MachineState &st, int64_t loc, int64_t tag) {
  auto it = st.stacks.find(loc);
  if (it == st.stacks.end() || !write_access(it->second, tag)) return fail("dealloc", loc, tag);
  st.stacks.erase(it);
  st.heap.erase(loc);
  log_event(st, "dealloc", loc, tag);
  return {};
}

bool state_invariant(const MachineState &st) {
  if (st.heap.size() != st.stacks.size()) return false;
  for (const auto &[l, s] : st.stacks) {
    if (!st.heap.count(l)) return false;
    for (const auto &it : s)
      if (it.tag >= st.next_tag) return false;
  }
  return true;
}

// stepping

Globals program_globals(const Program &p) {
  Globals g;
  for (const auto &f : p.fns) g[f.name] = f.rec;
  return g;
}

namespace {

constexpr int kMaxDepth = 10000;

StepResult reduced(ExprP e, const char *rule) {
  StepResult r;
  r.kind = Outcome::Reduced;
  r.expr = std::move(e);
  r.rule = rule;
  return r;
}

StepResult stuck(const std::string &why) {
  StepResult r;
  r.kind = Outcome::Stuck;
  r.reason = why;
  return r;
}

StepResult aliased(const AliasInfo &a) {
  StepResult r;
  r.kind = Outcome::AliasError;
  r.alias = a;
  r.reason = a.event + " access at @" + std::to_string(a.loc) + " with tag #" +
             std::to_string(a.tag) + " is not granted";
  return r;
}

bool is_val(const ExprP &e) { return e->kind == EKind::Val; }

std::shared_ptr<Expr> clone(const ExprP &e) { return std::make_shared<Expr>(*e); }

struct Stepper {
  MachineState &st;
  const Globals &g;
  int depth = 0;

  StepResult in_context(const ExprP &e, ExprP Expr::*slot) {
    StepResult r = go(e.get()->*slot);
    if (r.kind != Outcome::Reduced) return r;
    auto n = clone(e);
    n.get()->*slot = r.expr;
    r.expr = n;
    return r;
  }

  StepResult go(const ExprP &e) {
    if (++depth > kMaxDepth) {
      StepResult r;
      r.kind = Outcome::FuelExhausted;
      r.reason = "evaluation context too deep";
      return r;
    }
    switch (e->kind) {
      case EKind::Val: {
        StepResult r;
        r.kind = Outcome::Done;
        r.value = e->val;
        return r;
      }
      case EKind::Var: {
        auto it = g.find(e->x);
        if (it != g.end()) return reduced(e_val(it->second, e->span), "global");
        if (is_prim(e->x)) return reduced(e_val(v_prim(e->x), e->span), "global");
        return stuck("unbound variable '" + e->x + "'");
      }
      case EKind::Let: {
        if (!is_val(e->e1)) return in_context(e, &Expr::e1);
        if (e->x == "_") return reduced(e->e2, "let");
        try {
          return reduced(subst_value_in_expr(e->e2, e->x, e->e1->val), "let");
        } catch (const SubstError &err) {
          return stuck(err.what());
        }
      }
      case EKind::LetNew: {
        SbResult a = sb_alloc(st, 1);
        ExprP body = subst_ref_in_expr(e->e1, e->a, rloc(a.loc));
        return reduced(subst_value_in_expr(body, e->x, v_ptr(a.loc, a.tag)), "let-new");
      }
      case EKind::Unpack: return stuck("unpack of unbound variable '" + e->x + "'");
      case EKind::If: {
        if (!is_val(e->e1)) return in_context(e, &Expr::e1);
        VKind k = e->e1->val->kind;
        if (k == VKind::True) return reduced(e->e2, "if-true");
        if (k == VKind::False) return reduced(e->e3, "if-false");
        return stuck("branch on " + print_value(e->e1->val));
      }
      case EKind::Call: {
        if (!is_val(e->e1)) return in_context(e, &Expr::e1);
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (is_val(e->args[i])) continue;
          StepResult r = go(e->args[i]);
          if (r.kind != Outcome::Reduced) return r;
          auto n = clone(e);
          n->args[i] = r.expr;
          r.expr = n;
          return r;
        }
        return apply(e);
      }
      case EKind::Assign: {
        if (!is_val(e->e1)) return in_context(e, &Expr::e1);
        if (e->place.kind != Place::Ptr) return stuck("assignment through a non-pointer");
        int64_t l = e->place.loc;
        if (!st.heap.count(l)) return stuck("write to deallocated memory @" + std::to_string(l));
        SbResult w = sb_write(st, l, e->place.tag);
        if (!w.ok) return aliased(w.err);
        st.heap[l] = e->e1->val;
        return reduced(e_val(v_poison(), e->span), "assign");
      }
      case EKind::BorrowStrg:
      case EKind::BorrowMut:
      case EKind::BorrowShr: {
        if (e->place.kind != Place::Ptr) return stuck("borrow of a non-pointer");
        int64_t l = e->place.loc;
        if (!st.heap.count(l)) return stuck("borrow of deallocated memory @" + std::to_string(l));
        RefMode m = e->kind == EKind::BorrowShr ? RefMode::Shr : RefMode::Mut;
        SbResult r = sb_reborrow(st, l, e->place.tag, m);
        if (!r.ok) return aliased(r.err);
        const char *rule = e->kind == EKind::BorrowStrg  ? "borrow-strg"
                           : e->kind == EKind::BorrowMut ? "borrow-mut"
                                                         : "borrow-shr";
        return reduced(e_val(v_ptr(l, r.tag), e->span), rule);
      }
      case EKind::Deref: {
        if (e->place.kind != Place::Ptr) return stuck("dereference of a non-pointer");
        int64_t l = e->place.loc;
        if (!st.heap.count(l)) return stuck("read of deallocated memory @" + std::to_string(l));
        SbResult r = sb_read(st, l, e->place.tag);
        if (!r.ok) return aliased(r.err);
        return reduced(e_val(st.heap[l], e->span), "deref");
      }
    }
    return stuck("unknown expression");
  }

  StepResult prim(const std::string &name, const std::vector<ValueP> &vs, Span sp) {
    auto is_int = [](const ValueP &v) { return v->kind == VKind::Int; };
    auto is_bool = [](const ValueP &v) { return v->kind == VKind::True || v->kind == VKind::False; };
    auto bval = [](const ValueP &v) { return v->kind == VKind::True; };
    auto out = [&](ValueP v) { return reduced(e_val(std::move(v), sp), "call-prim"); };
    if (name == "not") {
      if (vs.size() != 1 || !is_bool(vs[0])) return stuck("bad operand to not");
      return out(v_bool(!bval(vs[0])));
    }
    if (vs.size() != 2) return stuck("bad arity for " + name);
    if (name == "and" || name == "or") {
      if (!is_bool(vs[0]) || !is_bool(vs[1])) return stuck("bad operand to " + name);
      return out(v_bool(name == "and" ? bval(vs[0]) && bval(vs[1]) : bval(vs[0]) || bval(vs[1])));
    }
    if (name == "eq" && is_bool(vs[0]) && is_bool(vs[1])) return out(v_bool(bval(vs[0]) == bval(vs[1])));
    if (!is_int(vs[0]) || !is_int(vs[1]))
      return stuck("operand " + print_value(is_int(vs[0]) ? vs[1] : vs[0]) + " to " + name);
    int64_t a = vs[0]->z, b = vs[1]->z, c = 0;
    if (name == "add") {
      if (__builtin_add_overflow(a, b, &c)) return stuck("overflow");
      return out(v_int(c));
    }
    if (name == "sub") {
      if (__builtin_sub_overflow(a, b, &c)) return stuck("overflow");
      return out(v_int(c));
    }
    if (name == "mul") {
      if (__builtin_mul_overflow(a, b, &c)) return stuck("overflow");
      return out(v_int(c));
    }
    if (name == "lt") return out(v_bool(a < b));
    if (name == "le") return out(v_bool(a <= b));
    if (name == "gt") return out(v_bool(a > b));
    if (name == "ge") return out(v_bool(a >= b));
    if (name == "eq") return out(v_bool(a == b));
    return stuck("unknown builtin " + name);
  }

  StepResult apply(const ExprP &e) {
    const ValueP &f = e->e1->val;
    std::vector<ValueP> vs;
    for (const auto &a : e->args) vs.push_back(a->val);
    switch (f->kind) {
      case VKind::Rec: {
        if (vs.size() != f->argnames.size()) return stuck("arity mismatch calling " + f->name);
        ExprP body = f->body;
        try {
          bool shadowed = false;
          for (const auto &a : f->argnames) shadowed = shadowed || a == f->name;
          if (!shadowed) body = subst_value_in_expr(body, f->name, f);
          if (!e->refargs.empty() && e->refargs.size() == f->rparams.size())
            for (size_t i = 0; i < f->rparams.size(); ++i)
              body = subst_ref_in_expr(body, f->rparams[i].first, e->refargs[i]);
          for (size_t i = 0; i < vs.size(); ++i) body = subst_value_in_expr(body, f->argnames[i], vs[i]);
        } catch (const SubstError &err) {
          return stuck(err.what());
        }
        return reduced(body, "call-rec");
      }
      case VKind::Prim: return prim(f->name, vs, e->span);
      case VKind::VecNew:
        if (!vs.empty()) return stuck("vec_new takes no arguments");
        return reduced(e_val(v_vec(0, v_poison()), e->span), "vec-new");
      case VKind::VecPush: return vec_push(vs, e->span);
      case VKind::VecIndexMut: return vec_index_mut(vs, e->span);
      default: return stuck("call of non-function " + print_value(f));
    }
  }

  StepResult vec_push(const std::vector<ValueP> &vs, Span sp) {
    if (vs.size() != 2 || vs[0]->kind != VKind::Ptr) return stuck("vec_push needs a pointer");
    int64_t l = vs[0]->loc;
    auto hv = st.heap.find(l);
    if (hv == st.heap.end()) return stuck("vec_push on deallocated memory");
    if (hv->second->kind != VKind::Vec) return stuck("vec_push on " + print_value(hv->second));
    ValueP vec = hv->second;
    SbResult w = sb_write(st, l, vs[0]->tag);
    if (!w.ok) return aliased(w.err);
    int64_t n = vec->n;
    if (n == 0) {
      SbResult a = sb_alloc(st, 1);
      st.heap[a.loc] = vs[1];
      st.heap[l] = v_vec(1, v_ptr(a.loc, a.tag));
      return reduced(e_val(v_poison(), sp), "vec-push-empty");
    }
    const ValueP &buf = vec->payload;
    if (!buf || buf->kind != VKind::Ptr) return stuck("vector without a buffer");
    std::vector<ValueP> old;
    for (int64_t i = 0; i < n; ++i) {
      auto c = st.heap.find(buf->loc + i);
      if (c == st.heap.end()) return stuck("vector buffer was deallocated");
      old.push_back(c->second);
    }
    for (int64_t i = 0; i < n; ++i) {
      SbResult d = sb_dealloc(st, buf->loc + i, buf->tag);
      if (!d.ok) return aliased(d.err);
    }
    SbResult a = sb_alloc(st, n + 1);
    for (int64_t i = 0; i < n; ++i) st.heap[a.loc + i] = old[static_cast<size_t>(i)];
    st.heap[a.loc + n] = vs[1];
    st.heap[l] = v_vec(n + 1, v_ptr(a.loc, a.tag));
    return reduced(e_val(v_poison(), sp), "vec-push");
  }

  StepResult vec_index_mut(const std::vector<ValueP> &vs, Span sp) {
    if (vs.size() != 2 || vs[0]->kind != VKind::Ptr) return stuck("vec_index_mut needs a reference");
    int64_t l = vs[0]->loc;
    if (!st.heap.count(l)) return stuck("vec_index_mut on deallocated memory");
    SbResult r = sb_read(st, l, vs[0]->tag);
    if (!r.ok) return aliased(r.err);
    ValueP vec = st.heap[l];
    if (vec->kind != VKind::Vec) return stuck("vec_index_mut on " + print_value(vec));
    if (vs[1]->kind != VKind::Int) return stuck("vector index " + print_value(vs[1]));
    int64_t i = vs[1]->z;
    if (i < 0 || i >= vec->n) return stuck("index " + std::to_string(i) + " out of bounds");
    const ValueP &buf = vec->payload;
    if (!buf || buf->kind != VKind::Ptr || !st.heap.count(buf->loc + i))
      return stuck("vector element not allocated");
    SbResult b = sb_reborrow(st, buf->loc + i, buf->tag, RefMode::Mut);
    if (!b.ok) return aliased(b.err);
    return reduced(e_val(v_ptr(buf->loc + i, b.tag), sp), "vec-index-mut");
  }
};

}  // namespace

StepResult step(MachineState &st, const ExprP &e, const Globals &g) {
  Stepper s{st, g};
  return s.go(e);
}

RunResult run_expr(const ExprP &e0, const Globals &g, int64_t fuel, bool trace) {
  RunResult r;
  r.state.tracing = trace;
  ExprP e = e0;
  for (;;) {
    if (r.steps >= fuel) {
      r.outcome = Outcome::FuelExhausted;
      r.reason = "fuel exhausted after " + std::to_string(r.steps) + " steps";
      return r;
    }
    r.state.step = r.steps;
    StepResult s = step(r.state, e, g);
    if (s.kind == Outcome::Reduced) {
      ++r.steps;
      ++r.coverage[s.rule];
      e = s.expr;
      continue;
    }
    r.outcome = s.kind;
    r.value = s.value;
    r.alias = s.alias;
    r.reason = s.reason;
    return r;
  }
}

RunResult run(const Program &p, int64_t fuel, bool trace) {
  if (!p.entry) {
    RunResult r;
    r.outcome = Outcome::Stuck;
    r.reason = "program has no entry expression";
    return r;
  }
  return run_expr(p.entry, program_globals(p), fuel, trace);
}

}  // namespace lr
