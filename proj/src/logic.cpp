// SPDX-License-Identifier: Apache-2.0
#include "lr/logic.hpp"

#include "lr/printer.hpp"

namespace lr {

Sort getsort(const BaseType &b) {
  return b.kind == BaseKind::Bool ? Sort::Bool : Sort::Int;
}

std::optional<RExp> interp(const ValueP &v) {
  switch (v->kind) {
    case VKind::True: return rbool(true);
    case VKind::False: return rbool(false);
    case VKind::Int: return rint(v->z);
    case VKind::Vec: return rint(v->n);
    default: return std::nullopt;
  }
}

SortEnv sort_env(const RefCtx &d) {
  SortEnv env;
  for (const auto &en : d)
    if (en.is_bind) env[en.name] = en.sort;
  return env;
}

Sort sortcheck(const RefCtx &d, const RExp &e) { return sortcheck(sort_env(d), e); }

Sort sortcheck(const SortEnv &env, const RExp &e) {
  auto expect = [&](const RExp &sub, Sort s) {
    Sort got = sortcheck(env, sub);
    if (got != s)
      throw SortError(std::string("expected ") + sort_name(s) + " but '" + print_rexp(sub) +
                          "' has sort " + sort_name(got),
                      sub);
  };
  switch (e->op) {
    case ROp::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw SortError("unbound refinement variable '" + e->name + "'", e);
      return it->second;
    }
    case ROp::IntC: return Sort::Int;
    case ROp::BoolC: return Sort::Bool;
    case ROp::LocC: return Sort::Loc;
    case ROp::Eq: {
      Sort a = sortcheck(env, e->args[0]);
      expect(e->args[1], a);
      return Sort::Bool;
    }
    case ROp::Not: expect(e->args[0], Sort::Bool); return Sort::Bool;
    case ROp::And:
    case ROp::Or:
      expect(e->args[0], Sort::Bool);
      expect(e->args[1], Sort::Bool);
      return Sort::Bool;
    case ROp::Add:
    case ROp::Sub:
    case ROp::Mul:
      expect(e->args[0], Sort::Int);
      expect(e->args[1], Sort::Int);
      return Sort::Int;
    case ROp::Lt:
    case ROp::Le:
    case ROp::Gt:
    case ROp::Ge:
      expect(e->args[0], Sort::Int);
      expect(e->args[1], Sort::Int);
      return Sort::Bool;
    case ROp::KApp:
      for (const auto &a : e->args) sortcheck(env, a);
      return Sort::Bool;
  }
  throw SortError("bad refinement", e);
}

bool ctx_binds(const RefCtx &d, const std::string &n) {
  for (const auto &en : d)
    if (en.is_bind && en.name == n) return true;
  return false;
}

std::vector<Param> ctx_binders(const RefCtx &d) {
  std::vector<Param> out;
  for (const auto &en : d)
    if (en.is_bind) out.emplace_back(en.name, en.sort);
  return out;
}

std::vector<RExp> ctx_assumes(const RefCtx &d) {
  std::vector<RExp> out;
  for (const auto &en : d)
    if (!en.is_bind) out.push_back(en.pred);
  return out;
}

std::string fresh_name(const std::string &base, const std::set<std::string> &avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string c = base + std::to_string(i);
    if (!avoid.count(c)) return c;
  }
}

// free variables

namespace {

void fv_into(const RExp &e, std::set<std::string> &out) {
  if (e->op == ROp::Var) {
    out.insert(e->name);
    return;
  }
  for (const auto &a : e->args) fv_into(a, out);
}

void fv_type_into(const TypeP &t, std::set<std::string> &out);

void fv_loc_into(const Loc &l, std::set<std::string> &out) {
  if (!l.concrete) out.insert(l.var);
}

void fv_locctx_into(const LocCtx &l, std::set<std::string> &out) {
  for (const auto &b : l) {
    fv_loc_into(b.loc, out);
    fv_type_into(b.ty, out);
  }
}

void fv_sig_into(const FnSig &s, std::set<std::string> &out) {
  std::set<std::string> inner;
  if (s.requires_) fv_into(s.requires_, inner);
  fv_locctx_into(s.in, inner);
  for (const auto &a : s.args) fv_type_into(a, inner);
  if (s.ret) fv_type_into(s.ret, inner);
  fv_locctx_into(s.out, inner);
  for (const auto &p : s.params) inner.erase(p.first);
  out.insert(inner.begin(), inner.end());
}

void fv_base_into(const BaseType &b, std::set<std::string> &out) {
  if (b.kind == BaseKind::Vec) fv_type_into(b.elem, out);
}

void fv_type_into(const TypeP &t, std::set<std::string> &out) {
  switch (t->kind) {
    case TKind::Indexed:
      fv_base_into(t->base, out);
      fv_into(t->idx, out);
      break;
    case TKind::Exists: {
      fv_base_into(t->base, out);
      std::set<std::string> p;
      fv_into(t->pred, p);
      p.erase(t->binder);
      out.insert(p.begin(), p.end());
      break;
    }
    case TKind::Ptr: fv_loc_into(t->loc, out); break;
    case TKind::Ref: fv_type_into(t->pointee, out); break;
    case TKind::Uninit: break;
    case TKind::Fn:
      if (t->sig) fv_sig_into(*t->sig, out);
      break;
  }
}

void fv_value_into(const ValueP &v, std::set<std::string> &out);

void fv_expr_into(const ExprP &e, std::set<std::string> &out) {
  if (!e) return;
  switch (e->kind) {
    case EKind::LetNew: {
      std::set<std::string> b;
      fv_expr_into(e->e1, b);
      b.erase(e->a);
      out.insert(b.begin(), b.end());
      return;
    }
    case EKind::Unpack: {
      std::set<std::string> b;
      fv_expr_into(e->e1, b);
      b.erase(e->a);
      out.insert(b.begin(), b.end());
      return;
    }
    case EKind::Call:
      for (const auto &r : e->refargs) fv_into(r, out);
      for (const auto &t : e->targs) fv_type_into(t, out);
      break;
    case EKind::Val: fv_value_into(e->val, out); return;
    default: break;
  }
  fv_expr_into(e->e1, out);
  fv_expr_into(e->e2, out);
  fv_expr_into(e->e3, out);
  for (const auto &a : e->args) fv_expr_into(a, out);
}

void fv_value_into(const ValueP &v, std::set<std::string> &out) {
  if (v->kind == VKind::Rec) {
    std::set<std::string> b;
    fv_expr_into(v->body, b);
    if (v->sig) {
      // the signature's params scope over the body as well
      fv_sig_into(*v->sig, out);
      for (const auto &p : v->sig->params) b.erase(p.first);
    }
    for (const auto &p : v->rparams) b.erase(p.first);
    out.insert(b.begin(), b.end());
  } else if (v->kind == VKind::Vec) {
    fv_value_into(v->payload, out);
  }
}

void fpv_into(const ExprP &e, std::set<std::string> &out);

void fpv_value_into(const ValueP &v, std::set<std::string> &out) {
  if (v->kind != VKind::Rec) return;
  std::set<std::string> b;
  fpv_into(v->body, b);
  b.erase(v->name);
  for (const auto &x : v->argnames) b.erase(x);
  out.insert(b.begin(), b.end());
}

void fpv_place(const Place &p, std::set<std::string> &out) {
  if (p.kind == Place::Var) out.insert(p.var);
}

void fpv_into(const ExprP &e, std::set<std::string> &out) {
  if (!e) return;
  switch (e->kind) {
    case EKind::LetNew: {
      std::set<std::string> b;
      fpv_into(e->e1, b);
      b.erase(e->x);
      out.insert(b.begin(), b.end());
      return;
    }
    case EKind::Let: {
      fpv_into(e->e1, out);
      std::set<std::string> b;
      fpv_into(e->e2, b);
      b.erase(e->x);
      out.insert(b.begin(), b.end());
      return;
    }
    case EKind::Unpack:
      // unpack refers to x and rebinds it
      out.insert(e->x);
      fpv_into(e->e1, out);
      return;
    case EKind::Var: out.insert(e->x); return;
    case EKind::Val: fpv_value_into(e->val, out); return;
    case EKind::Assign:
    case EKind::BorrowStrg:
    case EKind::BorrowMut:
    case EKind::BorrowShr:
    case EKind::Deref: fpv_place(e->place, out); break;
    default: break;
  }
  fpv_into(e->e1, out);
  fpv_into(e->e2, out);
  fpv_into(e->e3, out);
  for (const auto &a : e->args) fpv_into(a, out);
}

void binders_into(const TypeP &t, std::set<std::string> &out);

void binders_sig_into(const FnSig &s, std::set<std::string> &out) {
  for (const auto &p : s.params) out.insert(p.first);
  for (const auto &b : s.in) binders_into(b.ty, out);
  for (const auto &a : s.args) binders_into(a, out);
  binders_into(s.ret, out);
  for (const auto &b : s.out) binders_into(b.ty, out);
}

void binders_into(const TypeP &t, std::set<std::string> &out) {
  switch (t->kind) {
    case TKind::Exists:
      out.insert(t->binder);
      [[fallthrough]];
    case TKind::Indexed:
      if (t->base.kind == BaseKind::Vec) binders_into(t->base.elem, out);
      break;
    case TKind::Ref: binders_into(t->pointee, out); break;
    case TKind::Fn:
      if (t->sig) binders_sig_into(*t->sig, out);
      break;
    default: break;
  }
}

}  // namespace

std::set<std::string> free_vars(const RExp &e) {
  std::set<std::string> s;
  fv_into(e, s);
  return s;
}
std::set<std::string> free_vars(const TypeP &t) {
  std::set<std::string> s;
  fv_type_into(t, s);
  return s;
}
std::set<std::string> free_vars(const FnSig &sig) {
  std::set<std::string> s;
  fv_sig_into(sig, s);
  return s;
}
std::set<std::string> free_vars(const LocCtx &l) {
  std::set<std::string> s;
  fv_locctx_into(l, s);
  return s;
}
std::set<std::string> free_vars(const ExprP &e) {
  std::set<std::string> s;
  fv_expr_into(e, s);
  return s;
}
std::set<std::string> free_prog_vars(const ExprP &e) {
  std::set<std::string> s;
  fpv_into(e, s);
  return s;
}
std::set<std::string> binders(const TypeP &t) {
  std::set<std::string> s;
  binders_into(t, s);
  return s;
}

// substitution

namespace {

std::set<std::string> range_fv(const RSubst &th) {
  std::set<std::string> s;
  for (const auto &[k, v] : th) fv_into(v, s);
  return s;
}

RExp subst_rexp(const RExp &t, const RSubst &th) {
  if (th.empty()) return t;
  if (t->op == ROp::Var) {
    auto it = th.find(t->name);
    return it == th.end() ? t : it->second;
  }
  if (t->args.empty()) return t;
  auto n = std::make_shared<RefExpr>(*t);
  bool changed = false;
  for (auto &a : n->args) {
    RExp b = subst_rexp(a, th);
    if (b != a) changed = true;
    a = b;
  }
  return changed ? RExp(n) : t;
}

Loc subst_loc(const Loc &l, const RSubst &th) {
  if (l.concrete) return l;
  auto it = th.find(l.var);
  if (it == th.end()) return l;
  auto nl = Loc::from_rexp(it->second);
  return nl ? *nl : l;
}

TypeP subst_type(const TypeP &t, const RSubst &th);
SigP subst_sig(const SigP &s, const RSubst &th);

LocCtx subst_locctx(const LocCtx &l, const RSubst &th) {
  LocCtx out;
  out.reserve(l.size());
  for (const auto &b : l) out.push_back(LocBind{subst_loc(b.loc, th), subst_type(b.ty, th)});
  return out;
}

BaseType subst_base(const BaseType &b, const RSubst &th) {
  if (b.kind != BaseKind::Vec) return b;
  return b_vec(subst_type(b.elem, th));
}

// Removes shadowed keys; returns true if anything is left.
RSubst without(const RSubst &th, const std::vector<std::string> &names) {
  RSubst out = th;
  for (const auto &n : names) out.erase(n);
  return out;
}

TypeP subst_type(const TypeP &t, const RSubst &th) {
  if (th.empty()) return t;
  switch (t->kind) {
    case TKind::Indexed:
      return t_indexed(subst_base(t->base, th), subst_rexp(t->idx, th));
    case TKind::Exists: {
      BaseType b = subst_base(t->base, th);
      RSubst inner = without(th, {t->binder});
      std::string binder = t->binder;
      RExp pred = t->pred;
      if (!inner.empty()) {
        auto rfv = range_fv(inner);
        if (rfv.count(binder)) {
          std::set<std::string> avoid = rfv;
          fv_into(pred, avoid);
          for (const auto &[k, v] : inner) avoid.insert(k);
          std::string nb = fresh_name(binder, avoid);
          pred = subst_rexp(pred, RSubst{{binder, rvar(nb)}});
          binder = nb;
        }
        pred = subst_rexp(pred, inner);
      }
      return t_exists(binder, b, pred);
    }
    case TKind::Ptr: return t_ptr(subst_loc(t->loc, th));
    case TKind::Ref: return t_ref(t->mode, subst_type(t->pointee, th));
    case TKind::Uninit: return t;
    case TKind::Fn: return t->sig ? t_fn(subst_sig(t->sig, th)) : t;
  }
  return t;
}

SigP subst_sig_raw(const FnSig &s, const RSubst &th) {
  auto n = std::make_shared<FnSig>();
  n->params = s.params;
  n->requires_ = s.requires_ ? subst_rexp(s.requires_, th) : nullptr;
  n->in = subst_locctx(s.in, th);
  for (const auto &a : s.args) n->args.push_back(subst_type(a, th));
  n->ret = s.ret ? subst_type(s.ret, th) : nullptr;
  n->out = subst_locctx(s.out, th);
  return n;
}

SigP subst_sig(const SigP &s, const RSubst &th) {
  std::vector<std::string> pnames;
  for (const auto &p : s->params) pnames.push_back(p.first);
  RSubst inner = without(th, pnames);
  if (inner.empty()) return s;
  auto rfv = range_fv(inner);
  RSubst rename;
  std::set<std::string> avoid = rfv;
  fv_sig_into(*s, avoid);
  for (const auto &p : s->params) avoid.insert(p.first);
  for (const auto &[k, v] : inner) avoid.insert(k);
  FnSig cur = *s;
  for (auto &p : cur.params) {
    if (rfv.count(p.first)) {
      std::string nn = fresh_name(p.first, avoid);
      avoid.insert(nn);
      rename[p.first] = rvar(nn);
      p.first = nn;
    }
  }
  if (!rename.empty()) {
    auto renamed = subst_sig_raw(cur, rename);
    cur = *renamed;
  }
  return subst_sig_raw(cur, inner);
}

}  // namespace

RExp subst(const RExp &t, const std::string &a, const RExp &e) {
  return subst_rexp(t, RSubst{{a, e}});
}
TypeP subst(const TypeP &t, const std::string &a, const RExp &e) {
  return subst_type(t, RSubst{{a, e}});
}
SigP subst(const SigP &s, const std::string &a, const RExp &e) {
  return subst_sig(s, RSubst{{a, e}});
}
LocCtx subst(const LocCtx &l, const std::string &a, const RExp &e) {
  return subst_locctx(l, RSubst{{a, e}});
}
Loc subst(const Loc &l, const std::string &a, const RExp &e) {
  return subst_loc(l, RSubst{{a, e}});
}
ValCtx subst(const ValCtx &g, const std::string &a, const RExp &e) {
  ValCtx out;
  for (const auto &[x, t] : g) out.emplace_back(x, subst(t, a, e));
  return out;
}
DynCtx subst(const DynCtx &s, const std::string &a, const RExp &e) {
  DynCtx out;
  for (const auto &[k, t] : s) out[k] = subst(t, a, e);
  return out;
}
RefCtx subst(const RefCtx &d, const std::string &a, const RExp &e) {
  RefCtx out;
  bool shadowed = false;
  for (const auto &en : d) {
    if (en.is_bind) {
      if (en.name == a) shadowed = true;
      out.push_back(en);
    } else {
      out.push_back(shadowed ? en : RefEntry::assume(subst(en.pred, a, e)));
    }
  }
  return out;
}

RExp subst_all(const RExp &t, const RSubst &th) { return subst_rexp(t, th); }
TypeP subst_all(const TypeP &t, const RSubst &th) { return subst_type(t, th); }
LocCtx subst_all(const LocCtx &l, const RSubst &th) { return subst_locctx(l, th); }

// expression substitution

namespace {

std::shared_ptr<Expr> clone(const ExprP &e) { return std::make_shared<Expr>(*e); }

Place subst_place(const Place &p, const std::string &x, const ValueP &v) {
  if (p.kind != Place::Var || p.var != x) return p;
  Place q;
  if (v->kind == VKind::Ptr) {
    q.kind = Place::Ptr;
    q.loc = v->loc;
    q.tag = v->tag;
  } else {
    q.kind = Place::Bad;
    q.bad = v;
  }
  return q;
}

}  // namespace

ExprP subst_value_in_expr(const ExprP &e, const std::string &x, const ValueP &v) {
  if (!e) return e;
  switch (e->kind) {
    case EKind::Var:
      return e->x == x ? e_val(v, e->span) : e;
    case EKind::Val: {
      const ValueP &f = e->val;
      if (f->kind != VKind::Rec || f->name == x) return e;
      for (const auto &a : f->argnames)
        if (a == x) return e;
      auto nf = std::make_shared<Value>(*f);
      nf->body = subst_value_in_expr(f->body, x, v);
      return e_val(nf, e->span);
    }
    case EKind::LetNew: {
      if (e->x == x) return e;
      auto n = clone(e);
      n->e1 = subst_value_in_expr(e->e1, x, v);
      return n;
    }
    case EKind::Let: {
      auto n = clone(e);
      n->e1 = subst_value_in_expr(e->e1, x, v);
      if (e->x != x) n->e2 = subst_value_in_expr(e->e2, x, v);
      return n;
    }
    case EKind::Unpack: {
      if (e->x == x) {
        auto iv = interp(v);
        if (!iv) throw SubstError("unpack of '" + x + "' bound to non-base value " + print_value(v));
        return subst_ref_in_expr(subst_value_in_expr(e->e1, x, v), e->a, *iv);
      }
      auto n = clone(e);
      n->e1 = subst_value_in_expr(e->e1, x, v);
      return n;
    }
    default: break;
  }
  auto n = clone(e);
  n->place = subst_place(e->place, x, v);
  if (e->e1) n->e1 = subst_value_in_expr(e->e1, x, v);
  if (e->e2) n->e2 = subst_value_in_expr(e->e2, x, v);
  if (e->e3) n->e3 = subst_value_in_expr(e->e3, x, v);
  for (auto &a : n->args) a = subst_value_in_expr(a, x, v);
  return n;
}

ExprP subst_ref_in_expr(const ExprP &e, const std::string &a, const RExp &r) {
  if (!e) return e;
  auto rfv = free_vars(r);
  switch (e->kind) {
    case EKind::LetNew:
    case EKind::Unpack: {
      if (e->a == a) return e;
      auto n = clone(e);
      if (rfv.count(e->a)) {
        std::set<std::string> avoid = rfv;
        auto bfv = free_vars(e->e1);
        avoid.insert(bfv.begin(), bfv.end());
        avoid.insert(a);
        std::string nb = fresh_name(e->a, avoid);
        n->e1 = subst_ref_in_expr(e->e1, e->a, rvar(nb));
        n->a = nb;
      }
      n->e1 = subst_ref_in_expr(n->e1, a, r);
      return n;
    }
    case EKind::Val: {
      const ValueP &f = e->val;
      if (f->kind != VKind::Rec) return e;
      for (const auto &p : f->rparams)
        if (p.first == a) return e;
      if (f->sig)
        for (const auto &p : f->sig->params)
          if (p.first == a) return e;
      auto nf = std::make_shared<Value>(*f);
      if (f->sig) nf->sig = subst(f->sig, a, r);
      nf->body = subst_ref_in_expr(f->body, a, r);
      return e_val(nf, e->span);
    }
    case EKind::Var: return e;
    default: break;
  }
  auto n = clone(e);
  for (auto &ra : n->refargs) ra = subst(ra, a, r);
  for (auto &t : n->targs) t = subst(t, a, r);
  if (e->e1) n->e1 = subst_ref_in_expr(e->e1, a, r);
  if (e->e2) n->e2 = subst_ref_in_expr(e->e2, a, r);
  if (e->e3) n->e3 = subst_ref_in_expr(e->e3, a, r);
  for (auto &x : n->args) x = subst_ref_in_expr(x, a, r);
  return n;
}

}  // namespace lr
