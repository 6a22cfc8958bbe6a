// SPDX-License-Identifier: Apache-2.0
#include "lr/typeck.hpp"

#include <sstream>

#include "lr/printer.hpp"
#include "lr/subtyping.hpp"
#include "lr/wellformed.hpp"

namespace lr {

const TypeP &hole_type() {
  static const TypeP h = t_uninit(1);
  return h;
}

bool is_hole(const TypeP &t) { return t.get() == hole_type().get(); }

std::string print_diagnostic(const Diagnostic &d) {
  std::ostringstream os;
  os << d.file << ':' << d.span.line << ':' << d.span.col << ": " << d.severity << '[' << d.rule
     << "]: " << d.message;
  if (d.clause_id >= 0) os << " (clause " << d.clause_id << ")";
  return os.str();
}

CP Report::constraint() const {
  std::vector<CP> cs;
  for (const auto &f : fns)
    if (f.ok && f.constraint) cs.push_back(f.constraint);
  return c_conj(std::move(cs));
}

// builtins

std::optional<FnSig> prim_sig(const std::string &name) {
  static const std::map<std::string, ROp> binary = {
      {"add", ROp::Add}, {"sub", ROp::Sub}, {"mul", ROp::Mul}, {"lt", ROp::Lt}, {"le", ROp::Le},
      {"gt", ROp::Gt},   {"ge", ROp::Ge},   {"eq", ROp::Eq},   {"and", ROp::And}, {"or", ROp::Or}};
  FnSig s;
  s.requires_ = rbool(true);
  RExp a1 = rvar("a1"), a2 = rvar("a2");
  if (name == "not") {
    s.params = {{"a1", Sort::Bool}};
    s.args = {t_indexed(b_bool(), a1)};
    s.ret = t_indexed(b_bool(), rnot(a1));
    return s;
  }
  auto it = binary.find(name);
  if (it == binary.end()) return std::nullopt;
  ROp op = it->second;
  bool logical = op == ROp::And || op == ROp::Or;
  bool arith = op == ROp::Add || op == ROp::Sub || op == ROp::Mul;
  Sort in = logical ? Sort::Bool : Sort::Int;
  BaseType ib = logical ? b_bool() : b_int();
  s.params = {{"a1", in}, {"a2", in}};
  s.args = {t_indexed(ib, a1), t_indexed(ib, a2)};
  s.ret = t_indexed(arith ? b_int() : b_bool(), rbin(op, a1, a2));
  return s;
}

bool is_prim(const std::string &name) { return prim_sig(name).has_value(); }

namespace {

bool refined_base(const TypeP &t) {
  return t->kind == TKind::Indexed || t->kind == TKind::Exists;
}

void type_kvars(const TypeP &t, std::vector<RExp> &out) {
  switch (t->kind) {
    case TKind::Indexed: collect_kapps(t->idx, out); break;
    case TKind::Exists: collect_kapps(t->pred, out); break;
    case TKind::Ref: type_kvars(t->pointee, out); return;
    default: return;
  }
  if (t->base.kind == BaseKind::Vec) type_kvars(t->base.elem, out);
}

bool subset(const std::set<std::string> &a, const std::set<std::string> &b) {
  for (const auto &x : a)
    if (!b.count(x)) return false;
  return true;
}

void unify(const TypeP &f, const TypeP &a, const std::set<std::string> &ps, RSubst &th) {
  switch (f->kind) {
    case TKind::Indexed:
      if (f->idx->op == ROp::Var && ps.count(f->idx->name) && !th.count(f->idx->name) &&
          a->kind == TKind::Indexed && base_shape_equal(f->base, a->base))
        th[f->idx->name] = a->idx;
      break;
    case TKind::Ptr:
      if (!f->loc.concrete && ps.count(f->loc.var) && !th.count(f->loc.var) &&
          a->kind == TKind::Ptr)
        th[f->loc.var] = a->loc.to_rexp();
      break;
    case TKind::Ref:
      if (a->kind == TKind::Ref) unify(f->pointee, a->pointee, ps, th);
      break;
    default: break;
  }
}

FnSig subst_sig(const FnSig &s, const RSubst &th) {
  FnSig o = s;
  o.requires_ = subst_all(s.requires_ ? s.requires_ : rbool(true), th);
  o.in = subst_all(s.in, th);
  for (auto &a : o.args) a = subst_all(a, th);
  o.ret = subst_all(s.ret, th);
  o.out = subst_all(s.out, th);
  return o;
}

Span tail_span(ExprP e) {
  for (;;) {
    if (e->kind == EKind::Let) e = e->e2;
    else if (e->kind == EKind::LetNew || e->kind == EKind::Unpack) e = e->e1;
    else return e->span;
  }
}

TypeP restore_point(CheckState &st, const std::string &x) {
  for (const auto &[n, t] : st.gamma)
    if (n == x) return t;
  return nullptr;
}

void restore_var(CheckState &st, const std::string &x, const TypeP &old) {
  for (auto it = st.gamma.begin(); it != st.gamma.end(); ++it) {
    if (it->first != x) continue;
    if (old) it->second = old;
    else st.gamma.erase(it);
    return;
  }
}

}  // namespace

std::vector<RExp> infer_refargs(const FnSig &formal, const std::vector<TypeP> &actuals) {
  if (formal.args.size() != actuals.size())
    throw TypeError("ArityMismatch", "expected " + std::to_string(formal.args.size()) +
                                         " arguments, got " + std::to_string(actuals.size()),
                    {});
  std::set<std::string> ps;
  for (const auto &p : formal.params) ps.insert(p.first);
  RSubst th;
  for (size_t i = 0; i < actuals.size(); ++i) unify(formal.args[i], actuals[i], ps, th);
  std::vector<RExp> out;
  for (const auto &p : formal.params) {
    auto it = th.find(p.first);
    if (it == th.end())
      throw InstError(p.first,
                      "cannot infer refinement parameter '" + p.first +
                          "' from the arguments; pass explicit refinement arguments",
                      {});
    out.push_back(it->second);
  }
  return out;
}

// Checker

Checker::Checker(const Program *prog, CheckOptions opts, KVarStore &kvars)
    : prog_(prog), opts_(opts), ks_(kvars) {
  for (const char *n : {"add", "sub", "mul", "lt", "le", "gt", "ge", "eq", "and", "or", "not"})
    globals_[n] = t_fn(std::make_shared<FnSig>(*prim_sig(n)));
  if (prog_)
    for (const auto &f : prog_->fns) globals_[f.name] = t_fn(f.sig);
}

void Checker::reset_function() {
  cs_.clear();
  names_ = NameGen{};
  pending_.clear();
  shape_depth_ = 0;
}

Provenance Checker::prov(Span sp, const std::string &rule) const {
  return Provenance{prog_ ? prog_->file : "<input>", sp, rule};
}

void Checker::emit(const RefCtx &d, const CP &c) {
  if (shape_depth_ == 0) cs_.push_back(close_under(d, c));
}

CP Checker::sub(const RefCtx &d, const TypeP &a, const TypeP &b, Span sp,
                const std::string &rule) {
  try {
    return subtype(d, a, b, prov(sp, rule));
  } catch (const StructuralError &e) {
    throw TypeError("StructuralError", e.what(), sp);
  }
}

CP Checker::include(const RefCtx &d, const LocCtx &a, const LocCtx &b, Span sp,
                    const std::string &rule) {
  try {
    return ctx_include(d, a, b, prov(sp, rule));
  } catch (const StructuralError &e) {
    throw TypeError("StructuralError", e.what(), sp);
  }
}

void Checker::wf_check(const CheckState &st, const TypeP &t, Span sp) {
  try {
    wf_refctx(st.delta);
    wf_valctx(st.delta, st.gamma);
    wf_locctx(st.delta, st.locs);
    wf_type(st.delta, t);
  } catch (const WfError &e) {
    throw TypeError("WfViolation", e.what(), sp);
  }
}

TypeP Checker::lookup(const CheckState &st, const std::string &x, Span sp) const {
  for (auto it = st.gamma.rbegin(); it != st.gamma.rend(); ++it)
    if (it->first == x) return it->second;
  auto g = globals_.find(x);
  if (g != globals_.end()) return g->second;
  throw TypeError("UnboundVariable", "unbound variable '" + x + "'", sp);
}

TypeP Checker::as_indexed(CheckState &st, const TypeP &t, const std::string &hint) {
  if (t->kind != TKind::Exists) return t;
  std::string a = names_.fresh("a_" + hint);
  st.delta.push_back(RefEntry::bind(a, getsort(t->base)));
  RExp p = subst(t->pred, t->binder, rvar(a));
  if (!is_true(p)) st.delta.push_back(RefEntry::assume(p));
  return t_indexed(t->base, rvar(a));
}

TypeP Checker::bind_var(CheckState &st, const std::string &x, TypeP t) {
  TypeP old = restore_point(st, x);
  t = as_indexed(st, t, x);
  for (auto &[n, ty] : st.gamma)
    if (n == x) {
      ty = t;
      return old;
    }
  st.gamma.emplace_back(x, t);
  return old;
}

void Checker::unpack_on_the_fly(CheckState &st, const std::string &x) {
  for (auto &[n, ty] : st.gamma)
    if (n == x) {
      ty = as_indexed(st, ty, x);
      return;
    }
}

TypeP Checker::unpack_loc(CheckState &st, size_t i) {
  LocBind &b = st.locs[i];
  std::string hint = b.loc.concrete ? "l" + std::to_string(b.loc.id) : b.loc.var;
  TypeP t = as_indexed(st, b.ty, hint);
  st.locs[i].ty = t;
  return t;
}

LocBind *Checker::find_loc(CheckState &st, const Loc &l) {
  for (auto &b : st.locs)
    if (b.loc == l) return &b;
  return nullptr;
}

TypeP Checker::synth(CheckState &st, const ExprP &e) {
  TypeP t = synth_inner(st, e);
  if (opts_.debug_wf && !is_hole(t)) wf_check(st, t, e->span);
  return t;
}

TypeP Checker::synth_inner(CheckState &st, const ExprP &e) {
  switch (e->kind) {
    case EKind::Var: return lookup(st, e->x, e->span);
    case EKind::Val: return value_type(st, e->val, e->span);
    case EKind::Let: {
      TypeP t1 = synth(st, e->e1);
      if (is_hole(t1)) return t1;
      if (e->x == "_") return synth(st, e->e2);
      TypeP old = bind_var(st, e->x, t1);
      TypeP t2 = synth(st, e->e2);
      restore_var(st, e->x, old);
      return t2;
    }
    case EKind::LetNew: {
      std::string l = names_.fresh(e->a);
      ExprP body = l == e->a ? e->e1 : subst_ref_in_expr(e->e1, e->a, rvar(l));
      st.delta.push_back(RefEntry::bind(l, Sort::Loc));
      st.locs.push_back(LocBind{Loc::abs(l), t_uninit(1)});
      TypeP old = bind_var(st, e->x, t_ptr(Loc::abs(l)));
      TypeP t = synth(st, body);
      restore_var(st, e->x, old);
      if (is_hole(t)) return t;
      for (auto it = st.locs.begin(); it != st.locs.end(); ++it)
        if (it->loc == Loc::abs(l)) {
          st.locs.erase(it);
          break;
        }
      if (free_vars(t).count(l))
        throw TypeError("EscapeError",
                        "result type " + print_type(t) + " mentions the local location " + l,
                        e->span);
      if (free_vars(st.locs).count(l))
        throw TypeError("EscapeError", "location context mentions the local location " + l,
                        e->span);
      return t;
    }
    case EKind::Unpack: {
      TypeP cur = restore_point(st, e->x);
      if (!cur) throw TypeError("UnboundVariable", "unbound variable '" + e->x + "'", e->span);
      unpack_on_the_fly(st, e->x);
      TypeP t = restore_point(st, e->x);
      if (t->kind != TKind::Indexed)
        throw TypeError("StructuralError",
                        "unpack expects a refined value, got " + print_type(t), e->span);
      return synth(st, subst_ref_in_expr(e->e1, e->a, t->idx));
    }
    case EKind::If: return synth_if(st, e);
    case EKind::Call: return synth_call(st, e);
    case EKind::Assign: {
      TypeP rhs = synth(st, e->e1);
      if (is_hole(rhs)) return rhs;
      return check_assign(st, e->place, rhs, e->span);
    }
    case EKind::BorrowStrg:
    case EKind::BorrowMut:
    case EKind::BorrowShr: return check_borrow(st, e->kind, e->place, e->span);
    case EKind::Deref: return check_deref(st, e->place, e->span);
  }
  throw TypeError("StructuralError", "unknown expression", e->span);
}

TypeP Checker::value_type(CheckState &st, const ValueP &v, Span sp) {
  switch (v->kind) {
    case VKind::Int: return t_indexed(b_int(), rint(v->z));
    case VKind::True: return t_indexed(b_bool(), rbool(true));
    case VKind::False: return t_indexed(b_bool(), rbool(false));
    case VKind::Poison: return t_uninit(1);
    case VKind::Prim: return lookup(st, v->name, sp);
    case VKind::Rec:
      if (v->sig) {
        check_fn(st.delta, st.gamma, *v->sig, v);
        return t_fn(v->sig);
      }
      if (v->argnames.empty() && v->rparams.empty()) return infer_loop(st, v, sp);
      throw TypeError("UnannotatedFunction",
                      "function '" + v->name + "' takes arguments and needs a ': fn' signature",
                      sp);
    case VKind::VecNew:
    case VKind::VecPush:
    case VKind::VecIndexMut:
      throw TypeError("StructuralError", "vector builtins must be called directly", sp);
    default:
      throw TypeError("StructuralError", "runtime value " + print_value(v) + " in source", sp);
  }
}

TypeP Checker::check_assign(CheckState &st, const Place &p, const TypeP &rhs, Span sp) {
  if (p.kind != Place::Var) throw TypeError("StructuralError", "runtime place in source", sp);
  TypeP pt = lookup(st, p.var, sp);
  if (pt->kind == TKind::Ref) {
    if (pt->mode == RefMode::Shr)
      throw TypeError("AssignThroughShared", "cannot assign through shared reference '" + p.var + "'",
                      sp);
    emit(st.delta, sub(st.delta, rhs, pt->pointee, sp, "T-Assign"));
    return t_uninit(1);
  }
  if (pt->kind == TKind::Ptr) {
    LocBind *b = find_loc(st, pt->loc);
    if (!b)
      throw TypeError("StructuralError", "location " + print_loc(pt->loc) + " is not owned here",
                      sp);
    b->ty = rhs;
    return t_uninit(1);
  }
  throw TypeError("StructuralError", "assignment to non-pointer '" + p.var + "'", sp);
}

TypeP Checker::check_borrow(CheckState &st, EKind kind, const Place &p, Span sp) {
  if (p.kind != Place::Var) throw TypeError("StructuralError", "runtime place in source", sp);
  TypeP pt = lookup(st, p.var, sp);
  switch (kind) {
    case EKind::BorrowStrg:
      if (pt->kind == TKind::Ptr) return pt;
      throw TypeError("StructuralError", "&strg needs a strong pointer", sp);
    case EKind::BorrowMut: {
      if (pt->kind == TKind::Ref) {
        if (pt->mode == RefMode::Mut) return pt;
        throw TypeError("StructuralError", "cannot mutably reborrow a shared reference", sp);
      }
      if (pt->kind != TKind::Ptr)
        throw TypeError("StructuralError", "&mut needs a pointer or reference", sp);
      LocBind *b = find_loc(st, pt->loc);
      if (!b)
        throw TypeError("StructuralError", "location " + print_loc(pt->loc) + " is not owned here",
                        sp);
      // a vector reference keeps its length precise, so name it first
      if (b->ty->kind == TKind::Exists && b->ty->base.kind == BaseKind::Vec)
        unpack_loc(st, static_cast<size_t>(b - st.locs.data()));
      TypeP cur = b->ty;
      if (cur->kind == TKind::Uninit)
        throw TypeError("StructuralError", "cannot borrow uninitialized memory", sp);
      TypeP tau = cur;
      if (refined_base(cur) && cur->base.kind != BaseKind::Vec) {
        tau = fresh_kvar_type(ks_, st.delta, cur->base);
        emit(st.delta, sub(st.delta, cur, tau, sp, "T-Strg-Mut-Rebor"));
      }
      b->ty = tau;
      return t_ref(RefMode::Mut, tau);
    }
    default:
      if (pt->kind == TKind::Ref) return t_ref(RefMode::Shr, pt->pointee);
      throw TypeError("StructuralError", "&shr needs a reference", sp);
  }
}

TypeP Checker::check_deref(CheckState &st, const Place &p, Span sp) {
  if (p.kind != Place::Var) throw TypeError("StructuralError", "runtime place in source", sp);
  TypeP pt = lookup(st, p.var, sp);
  if (pt->kind == TKind::Ref) return pt->pointee;
  if (pt->kind == TKind::Ptr) {
    LocBind *b = find_loc(st, pt->loc);
    if (!b)
      throw TypeError("StructuralError", "location " + print_loc(pt->loc) + " is not owned here",
                      sp);
    if (b->ty->kind == TKind::Uninit) {
      // fixture: pretend the cell holds some int
      if (opts_.unsound_deref_uninit) return t_exists("v", b_int(), rbool(true));
      throw TypeError("DerefUninit", "reading uninitialized memory through '" + p.var + "'", sp);
    }
    return b->ty;
  }
  throw TypeError("DerefNonPointer", "cannot dereference '" + p.var + "'", sp);
}

TypeP Checker::synth_if(CheckState &st, const ExprP &e) {
  TypeP c = synth(st, e->e1);
  if (is_hole(c)) return c;
  c = as_indexed(st, c, "c");
  if (c->kind != TKind::Indexed || c->base.kind != BaseKind::Bool)
    throw TypeError("StructuralError", "condition has type " + print_type(c) + ", expected bool",
                    e->e1->span);
  CheckState s1 = st, s2 = st;
  s1.delta.push_back(RefEntry::assume(c->idx));
  s2.delta.push_back(RefEntry::assume(rnot(c->idx)));
  TypeP t1 = synth(s1, e->e2);
  TypeP t2 = synth(s2, e->e3);
  if (is_hole(t1) && is_hole(t2)) return t1;
  if (is_hole(t1)) {
    st = std::move(s2);
    return t2;
  }
  if (is_hole(t2)) {
    st = std::move(s1);
    return t1;
  }
  std::set<std::string> outer = bound_names(st.delta);
  std::vector<Param> scope = kvar_scope(st.delta);
  auto join = [&](const TypeP &a, const TypeP &b) {
    if (type_equal(a, b) && subset(free_vars(a), outer)) return a;
    TypeP j;
    try {
      j = template_like(ks_, scope, outer, a, b);
    } catch (const ShapeMismatch &m) {
      throw TypeError("StructuralError", std::string("branches disagree: ") + m.what(), e->span);
    }
    emit(s1.delta, sub(s1.delta, a, j, e->span, "T-If-Join"));
    emit(s2.delta, sub(s2.delta, b, j, e->span, "T-If-Join"));
    return j;
  };
  TypeP t = join(t1, t2);
  LocCtx joined;
  for (const auto &b1 : s1.locs) {
    if (!b1.loc.concrete && !outer.count(b1.loc.var)) continue;
    const LocBind *b2 = find_loc(s2, b1.loc);
    if (!b2) continue;
    joined.push_back(LocBind{b1.loc, join(b1.ty, b2->ty)});
  }
  st.locs = std::move(joined);
  return t;
}

TypeP Checker::synth_call(CheckState &st, const ExprP &e) {
  const ExprP &callee = e->e1;
  auto arg_types = [&]() {
    std::vector<TypeP> ts;
    for (const auto &a : e->args) ts.push_back(synth(st, a));
    return ts;
  };
  auto arity = [&](size_t n) {
    if (e->args.size() != n)
      throw TypeError("ArityMismatch",
                      "expected " + std::to_string(n) + " arguments, got " +
                          std::to_string(e->args.size()),
                      e->span);
  };
  if (callee->kind == EKind::Val) {
    VKind k = callee->val->kind;
    std::set<std::string> avoid = bound_names(st.delta);
    if (k == VKind::VecNew) {
      arity(0);
      TypeP T = e->targs.empty() ? instantiate_type_param(ks_, st.delta, b_int()) : e->targs[0];
      return t_indexed(b_vec(T), rint(0));
    }
    if (k == VKind::VecPush) {
      arity(2);
      auto ts = arg_types();
      if (ts[0]->kind != TKind::Ptr)
        throw TypeError("StructuralError", "vec_push expects a strong pointer to a vector",
                        e->span);
      LocBind *b = find_loc(st, ts[0]->loc);
      if (!b)
        throw TypeError("StructuralError",
                        "location " + print_loc(ts[0]->loc) + " is not owned here", e->span);
      if (b->ty->kind == TKind::Exists) unpack_loc(st, static_cast<size_t>(b - st.locs.data()));
      b = find_loc(st, ts[0]->loc);
      if (b->ty->kind != TKind::Indexed || b->ty->base.kind != BaseKind::Vec)
        throw TypeError("StructuralError", "vec_push target has type " + print_type(b->ty),
                        e->span);
      TypeP elem = b->ty->base.elem;
      TypeP T = !e->targs.empty()       ? e->targs[0]
                : refined_base(elem) ? instantiate_type_param(ks_, st.delta, elem->base)
                                     : elem;
      auto fv = free_vars(T);
      avoid.insert(fv.begin(), fv.end());
      std::string n = fresh_name("n", avoid), l = fresh_name("l", avoid);
      FnSig s;
      s.params = {{n, Sort::Int}, {l, Sort::Loc}};
      s.requires_ = rbool(true);
      s.in = {LocBind{Loc::abs(l), t_indexed(b_vec(T), rvar(n))}};
      s.args = {t_ptr(Loc::abs(l)), T};
      s.ret = t_uninit(1);
      s.out = {LocBind{Loc::abs(l), t_indexed(b_vec(T), radd(rvar(n), rint(1)))}};
      return call_sig(st, s, e->refargs, ts, e->span);
    }
    if (k == VKind::VecIndexMut) {
      arity(2);
      auto ts = arg_types();
      if (ts[0]->kind != TKind::Ref || ts[0]->mode != RefMode::Mut ||
          !refined_base(ts[0]->pointee) || ts[0]->pointee->base.kind != BaseKind::Vec)
        throw TypeError("StructuralError", "vec_index_mut expects &mut Vec, got " +
                                               print_type(ts[0]),
                        e->span);
      TypeP T = ts[0]->pointee->base.elem;
      auto fv = free_vars(T);
      avoid.insert(fv.begin(), fv.end());
      std::string a = fresh_name("a", avoid), bb = fresh_name("b", avoid);
      FnSig s;
      s.params = {{a, Sort::Int}, {bb, Sort::Int}};
      s.requires_ = rand_(rle(rint(0), rvar(bb)), rlt(rvar(bb), rvar(a)));
      s.args = {t_ref(RefMode::Mut, t_indexed(b_vec(T), rvar(a))), t_indexed(b_int(), rvar(bb))};
      s.ret = t_ref(RefMode::Mut, T);
      return call_sig(st, s, e->refargs, ts, e->span);
    }
  }
  TypeP ft = synth(st, callee);
  if (is_hole(ft)) return ft;
  if (ft->kind != TKind::Fn)
    throw TypeError("StructuralError", "call of non-function of type " + print_type(ft), e->span);
  if (!ft->sig) {
    if (callee->kind != EKind::Var)
      throw TypeError("StructuralError", "call of a function under inference", e->span);
    arity(0);
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it)
      if (it->name == callee->x) {
        it->sites.push_back(st.locs);
        return hole_type();
      }
    throw TypeError("StructuralError", "call of a function under inference", e->span);
  }
  auto ts = arg_types();
  return call_sig(st, *ft->sig, e->refargs, ts, e->span);
}

TypeP Checker::call_sig(CheckState &st, const FnSig &sig, const std::vector<RExp> &refargs,
                        const std::vector<TypeP> &args, Span sp) {
  if (args.size() != sig.args.size())
    throw TypeError("ArityMismatch",
                    "expected " + std::to_string(sig.args.size()) + " arguments, got " +
                        std::to_string(args.size()),
                    sp);
  RSubst th;
  std::set<std::string> ps;
  for (const auto &p : sig.params) ps.insert(p.first);
  if (!refargs.empty()) {
    if (refargs.size() != sig.params.size())
      throw TypeError("ArityMismatch",
                      "expected " + std::to_string(sig.params.size()) +
                          " refinement arguments, got " + std::to_string(refargs.size()),
                      sp);
    for (size_t i = 0; i < refargs.size(); ++i) th[sig.params[i].first] = refargs[i];
  } else {
    for (size_t i = 0; i < args.size(); ++i) unify(sig.args[i], args[i], ps, th);
    for (const auto &f : sig.in) {
      Loc l = f.loc;
      if (!l.concrete && ps.count(l.var)) {
        auto it = th.find(l.var);
        if (it == th.end()) continue;
        auto rl = Loc::from_rexp(it->second);
        if (!rl) continue;
        l = *rl;
      }
      LocBind *b = find_loc(st, l);
      if (!b) continue;
      if (b->ty->kind == TKind::Exists && f.ty->kind == TKind::Indexed)
        unpack_loc(st, static_cast<size_t>(b - st.locs.data()));
      unify(f.ty, find_loc(st, l)->ty, ps, th);
    }
    for (const auto &p : sig.params)
      if (!th.count(p.first))
        throw InstError(p.first,
                        "cannot infer refinement parameter '" + p.first +
                            "' at this call; pass explicit refinement arguments",
                        sp);
  }
  for (const auto &p : sig.params) {
    try {
      Sort s = sortcheck(st.delta, th[p.first]);
      if (s != p.second)
        throw SortError("refinement argument " + print_rexp(th[p.first]) + " for '" + p.first +
                            "' has sort " + sort_name(s) + ", expected " + sort_name(p.second),
                        th[p.first]);
    } catch (const SortError &e) {
      throw TypeError("SortError", e.what(), sp);
    }
  }
  FnSig is = subst_sig(sig, th);
  for (size_t i = 0; i < args.size(); ++i)
    emit(st.delta, sub(st.delta, args[i], is.args[i], sp, "T-Call-Arg"));
  auto in_dom = [](const LocCtx &l, const Loc &x) {
    for (const auto &b : l)
      if (b.loc == x) return true;
    return false;
  };
  LocCtx consumed;
  for (const auto &b : st.locs)
    if (in_dom(is.in, b.loc)) consumed.push_back(b);
  for (const auto &f : is.in)
    if (!in_dom(consumed, f.loc))
      throw TypeError("StructuralError",
                      "callee needs location " + print_loc(f.loc) + ", which is not available", sp);
  emit(st.delta, include(st.delta, consumed, is.in, sp, "T-Call-In"));
  if (!is_true(is.requires_)) emit(st.delta, c_head(is.requires_, prov(sp, "T-Call-Req")));
  LocCtx nl;
  for (const auto &b : st.locs) {
    if (!in_dom(is.in, b.loc)) {
      nl.push_back(b);
      continue;
    }
    for (const auto &o : is.out)
      if (o.loc == b.loc) nl.push_back(o);
  }
  for (const auto &o : is.out)
    if (!in_dom(nl, o.loc)) nl.push_back(o);
  st.locs = std::move(nl);
  return is.ret;
}

void Checker::check_fn(const RefCtx &d, const ValCtx &g, const FnSig &sig0, const ValueP &rec) {
  FnSig sig = sig0;
  ExprP body = rec->body;
  if (!rec->rparams.empty()) {
    bool ok = rec->rparams.size() == sig.params.size();
    for (size_t i = 0; ok && i < sig.params.size(); ++i)
      ok = rec->rparams[i].second == sig.params[i].second;
    if (!ok)
      throw TypeError("ArityMismatch",
                      "refinement parameters of '" + rec->name + "' do not match its signature",
                      rec->span);
    RSubst th;
    for (size_t i = 0; i < sig.params.size(); ++i)
      if (rec->rparams[i].first != sig.params[i].first)
        th[sig.params[i].first] = rvar(rec->rparams[i].first);
    if (!th.empty()) sig = subst_sig(sig, th);
    sig.params = rec->rparams;
  }
  for (auto &p : sig.params) {
    std::string n = names_.fresh(p.first);
    if (n == p.first) continue;
    RSubst th{{p.first, rvar(n)}};
    sig = subst_sig(sig, th);
    body = subst_ref_in_expr(body, p.first, rvar(n));
    p.first = n;
  }
  if (rec->argnames.size() != sig.args.size())
    throw TypeError("ArityMismatch",
                    "'" + rec->name + "' names " + std::to_string(rec->argnames.size()) +
                        " arguments but its signature has " + std::to_string(sig.args.size()),
                    rec->span);
  CheckState s;
  s.delta = d;
  for (const auto &p : sig.params) s.delta.push_back(RefEntry::bind(p.first, p.second));
  if (sig.requires_ && !is_true(sig.requires_)) s.delta.push_back(RefEntry::assume(sig.requires_));
  s.gamma = g;
  bind_var(s, rec->name, t_fn(std::make_shared<FnSig>(sig0)));
  for (size_t i = 0; i < sig.args.size(); ++i) bind_var(s, rec->argnames[i], sig.args[i]);
  s.locs = sig.in;
  TypeP t = synth(s, body);
  if (is_hole(t)) return;
  Span tail = tail_span(body);
  emit(s.delta, sub(s.delta, t, sig.ret, tail, "T-Fun"));
  emit(s.delta, include(s.delta, s.locs, sig.out, tail, "T-Fun-Out"));
}

TypeP Checker::infer_loop(CheckState &st, const ValueP &v, Span sp) {
  for (size_t i = 0; i < st.locs.size(); ++i)
    if (st.locs[i].ty->kind == TKind::Exists) unpack_loc(st, i);
  std::set<std::string> def_names = bound_names(st.delta);
  std::vector<Param> scope = kvar_scope(st.delta);
  std::set<std::string> outer_kvars;
  for (const auto &k : ks_.all()) outer_kvars.insert(k.id);
  LoopShape shape;
  shape.in = st.locs;
  TypeP exit_t;
  LocCtx exit_l;
  for (int iter = 0;; ++iter) {
    if (iter > 64) throw TypeError("ShapeMismatch", "loop shape inference does not converge", sp);
    CheckState s = st;
    for (const auto &p : shape.params) s.delta.push_back(RefEntry::bind(p.first, p.second));
    s.locs = shape.in;
    bind_var(s, v->name, t_fn(nullptr));
    pending_.push_back(Pending{v->name, {}});
    ++shape_depth_;
    TypeP t;
    try {
      t = synth(s, v->body);
    } catch (...) {
      --shape_depth_;
      pending_.pop_back();
      throw;
    }
    --shape_depth_;
    std::vector<LocCtx> sites = std::move(pending_.back().sites);
    pending_.pop_back();
    LoopShape next;
    try {
      next = infer_rec_signature(ks_, names_, scope, shape, sites);
    } catch (const ShapeMismatch &m) {
      throw TypeError("ShapeMismatch", m.what(), sp);
    }
    exit_t = t;
    exit_l = s.locs;
    if (next.params.size() == shape.params.size() &&
        next.templates.size() == shape.templates.size())
      break;
    shape = std::move(next);
  }

  std::vector<Param> sscope = shape.params;
  sscope.insert(sscope.end(), scope.begin(), scope.end());
  auto sig = std::make_shared<FnSig>();
  sig->params = shape.params;
  sig->requires_ = rbool(true);
  if (!shape.params.empty()) {
    const KVar &k = ks_.fresh(sscope, shape.params.size());
    std::vector<RExp> args;
    for (const auto &p : sscope) args.push_back(rvar(p.first));
    sig->requires_ = rkapp(k.id, args);
  }
  sig->in = shape.in;
  auto precise = [&](const TypeP &t) {
    // templates made during shape passes are unconstrained; outer ones are fine
    std::vector<RExp> apps;
    type_kvars(t, apps);
    for (const auto &a : apps)
      if (!outer_kvars.count(a->name)) return false;
    return subset(free_vars(t), def_names);
  };
  try {
    if (is_hole(exit_t)) {
      sig->ret = t_uninit(1);
      sig->out = shape.in;
    } else {
      sig->ret = precise(exit_t) ? exit_t : template_like(ks_, sscope, def_names, exit_t, exit_t);
      for (const auto &b : shape.in) {
        const LocBind *x = nullptr;
        for (const auto &eb : exit_l)
          if (eb.loc == b.loc) x = &eb;
        if (!x) throw ShapeMismatch("location " + print_loc(b.loc) + " is lost in the loop");
        TypeP o;
        if (precise(x->ty))
          o = x->ty;
        else if (refined_base(x->ty) && refined_base(b.ty) && base_shape_equal(x->ty->base, b.ty->base))
          o = fresh_kvar_type(ks_, sscope, b.ty->base);
        else
          o = template_like(ks_, sscope, def_names, x->ty, x->ty);
        sig->out.push_back(LocBind{b.loc, o});
      }
    }
  } catch (const ShapeMismatch &m) {
    throw TypeError("ShapeMismatch", m.what(), sp);
  }

  CheckState s = st;
  for (const auto &p : sig->params) s.delta.push_back(RefEntry::bind(p.first, p.second));
  if (!is_true(sig->requires_)) s.delta.push_back(RefEntry::assume(sig->requires_));
  s.locs = sig->in;
  bind_var(s, v->name, t_fn(sig));
  TypeP t = synth(s, v->body);
  if (!is_hole(t)) {
    Span tail = tail_span(v->body);
    emit(s.delta, sub(s.delta, t, sig->ret, tail, "T-Fun"));
    emit(s.delta, include(s.delta, s.locs, sig->out, tail, "T-Fun-Out"));
  }
  return t_fn(sig);
}

// program

Report check_program(const Program &p, const CheckOptions &opts) {
  Report r;
  KVarStore ks;
  Checker ck(&p, opts, ks);
  auto fail = [&](FnResult &fr, const TypeError &e) {
    fr.ok = false;
    std::string where = fr.name == "<entry>" ? "in entry" : "in function '" + fr.name + "'";
    r.diags.push_back(Diagnostic{"error", p.file, e.span, e.kind, where + ": " + e.what(), -1});
  };
  for (const auto &f : p.fns) {
    ck.reset_function();
    FnResult fr;
    fr.name = f.name;
    try {
      try {
        wf_sig({}, *f.sig);
      } catch (const WfError &w) {
        throw TypeError("WfViolation", w.what(), f.span);
      }
      ck.check_fn({}, {}, *f.sig, f.rec);
      fr.constraint = c_conj(ck.constraints());
    } catch (const TypeError &e) {
      fail(fr, e);
    }
    r.fns.push_back(fr);
  }
  if (p.entry) {
    ck.reset_function();
    r.has_entry = true;
    FnResult fr;
    fr.name = "<entry>";
    try {
      CheckState s;
      r.entry_type = ck.synth(s, p.entry);
      r.entry_delta = s.delta;
      r.entry_locs = s.locs;
      fr.constraint = c_conj(ck.constraints());
    } catch (const TypeError &e) {
      fail(fr, e);
    }
    r.fns.push_back(fr);
  }
  r.kvars = ks.all();
  return r;
}

}  // namespace lr
