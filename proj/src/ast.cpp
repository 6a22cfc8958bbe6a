// SPDX-License-Identifier: Apache-2.0
#include "lr/ast.hpp"

namespace lr {

const char *sort_name(Sort s) {
  switch (s) {
  case Sort::Int: return "int";
  case Sort::Bool: return "bool";
  case Sort::Loc: return "loc";
  }
  return "?";
}

static RExp mk(ROp op, std::vector<RExp> args = {}) {
  auto r = std::make_shared<RefExpr>();
  r->op = op;
  r->args = std::move(args);
  return r;
}

RExp rvar(const std::string &n) {
  auto r = std::make_shared<RefExpr>();
  r->op = ROp::Var;
  r->name = n;
  return r;
}

RExp rint(int64_t z) {
  auto r = std::make_shared<RefExpr>();
  r->op = ROp::IntC;
  r->val = z;
  return r;
}

RExp rbool(bool b) {
  auto r = std::make_shared<RefExpr>();
  r->op = ROp::BoolC;
  r->val = b ? 1 : 0;
  return r;
}

RExp rloc(int64_t l) {
  auto r = std::make_shared<RefExpr>();
  r->op = ROp::LocC;
  r->val = l;
  return r;
}

RExp rnot(RExp a) { return mk(ROp::Not, {std::move(a)}); }
RExp rbin(ROp op, RExp a, RExp b) { return mk(op, {std::move(a), std::move(b)}); }
RExp req(RExp a, RExp b) { return rbin(ROp::Eq, std::move(a), std::move(b)); }
RExp rand_(RExp a, RExp b) { return rbin(ROp::And, std::move(a), std::move(b)); }
RExp ror(RExp a, RExp b) { return rbin(ROp::Or, std::move(a), std::move(b)); }
RExp radd(RExp a, RExp b) { return rbin(ROp::Add, std::move(a), std::move(b)); }
RExp rsub(RExp a, RExp b) { return rbin(ROp::Sub, std::move(a), std::move(b)); }
RExp rmul(RExp a, RExp b) { return rbin(ROp::Mul, std::move(a), std::move(b)); }
RExp rlt(RExp a, RExp b) { return rbin(ROp::Lt, std::move(a), std::move(b)); }
RExp rle(RExp a, RExp b) { return rbin(ROp::Le, std::move(a), std::move(b)); }
RExp rgt(RExp a, RExp b) { return rbin(ROp::Gt, std::move(a), std::move(b)); }
RExp rge(RExp a, RExp b) { return rbin(ROp::Ge, std::move(a), std::move(b)); }

RExp rkapp(const std::string &k, std::vector<RExp> args) {
  auto r = std::make_shared<RefExpr>();
  r->op = ROp::KApp;
  r->name = k;
  r->args = std::move(args);
  return r;
}

RExp rconj(const std::vector<RExp> &ps) {
  RExp acc;
  for (auto &p : ps) {
    if (is_true(p)) continue;
    acc = acc ? rand_(acc, p) : p;
  }
  return acc ? acc : rbool(true);
}

bool is_true(const RExp &e) { return e && e->op == ROp::BoolC && e->val == 1; }

bool is_binop(ROp op) {
  switch (op) {
  case ROp::Eq: case ROp::And: case ROp::Or: case ROp::Add: case ROp::Sub:
  case ROp::Mul: case ROp::Lt: case ROp::Le: case ROp::Gt: case ROp::Ge:
    return true;
  default:
    return false;
  }
}

bool operator==(const RefExpr &a, const RefExpr &b) {
  if (a.op != b.op || a.val != b.val || a.name != b.name ||
      a.args.size() != b.args.size())
    return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!requal(a.args[i], b.args[i])) return false;
  return true;
}

bool requal(const RExp &a, const RExp &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

RExp Loc::to_rexp() const { return concrete ? rloc(id) : rvar(var); }

std::optional<Loc> Loc::from_rexp(const RExp &e) {
  if (e->op == ROp::Var) return Loc::abs(e->name);
  if (e->op == ROp::LocC) return Loc::conc(e->val);
  return std::nullopt;
}

bool operator==(const Loc &a, const Loc &b) {
  if (a.concrete != b.concrete) return false;
  return a.concrete ? a.id == b.id : a.var == b.var;
}

static std::shared_ptr<Type> mkt(TKind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

TypeP t_indexed(BaseType b, RExp idx) {
  auto t = mkt(TKind::Indexed);
  t->base = std::move(b);
  t->idx = std::move(idx);
  return t;
}

TypeP t_exists(const std::string &binder, BaseType b, RExp pred) {
  auto t = mkt(TKind::Exists);
  t->binder = binder;
  t->base = std::move(b);
  t->pred = std::move(pred);
  return t;
}

TypeP t_ptr(Loc l) {
  auto t = mkt(TKind::Ptr);
  t->loc = std::move(l);
  return t;
}

TypeP t_ref(RefMode m, TypeP pointee) {
  auto t = mkt(TKind::Ref);
  t->mode = m;
  t->pointee = std::move(pointee);
  return t;
}

TypeP t_uninit(int64_t n) {
  auto t = mkt(TKind::Uninit);
  t->n = n;
  return t;
}

TypeP t_fn(SigP sig) {
  auto t = mkt(TKind::Fn);
  t->sig = std::move(sig);
  return t;
}

BaseType b_int() { return BaseType{BaseKind::Int, nullptr}; }
BaseType b_bool() { return BaseType{BaseKind::Bool, nullptr}; }
BaseType b_vec(TypeP elem) { return BaseType{BaseKind::Vec, std::move(elem)}; }

bool base_equal(const BaseType &a, const BaseType &b) {
  if (a.kind != b.kind) return false;
  if (a.kind == BaseKind::Vec) return type_equal(a.elem, b.elem);
  return true;
}

bool base_shape_equal(const BaseType &a, const BaseType &b) { return a.kind == b.kind; }

bool locctx_equal(const LocCtx &a, const LocCtx &b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i].loc == b[i].loc) || !type_equal(a[i].ty, b[i].ty)) return false;
  return true;
}

bool sig_equal(const FnSig &a, const FnSig &b) {
  if (a.params != b.params || !requal(a.requires_, b.requires_) ||
      !locctx_equal(a.in, b.in) || !locctx_equal(a.out, b.out) ||
      a.args.size() != b.args.size() || !type_equal(a.ret, b.ret))
    return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!type_equal(a.args[i], b.args[i])) return false;
  return true;
}

bool type_equal(const TypeP &a, const TypeP &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case TKind::Indexed:
    return base_equal(a->base, b->base) && requal(a->idx, b->idx);
  case TKind::Exists:
    return a->binder == b->binder && base_equal(a->base, b->base) &&
           requal(a->pred, b->pred);
  case TKind::Ptr:
    return a->loc == b->loc;
  case TKind::Ref:
    return a->mode == b->mode && type_equal(a->pointee, b->pointee);
  case TKind::Uninit:
    return a->n == b->n;
  case TKind::Fn:
    if (!a->sig || !b->sig) return a->sig == b->sig;
    return sig_equal(*a->sig, *b->sig);
  }
  return false;
}

ValueP v_int(int64_t z) {
  auto v = std::make_shared<Value>();
  v->kind = VKind::Int;
  v->z = z;
  return v;
}

ValueP v_bool(bool b) {
  auto v = std::make_shared<Value>();
  v->kind = b ? VKind::True : VKind::False;
  return v;
}

ValueP v_poison() {
  auto v = std::make_shared<Value>();
  v->kind = VKind::Poison;
  return v;
}

ValueP v_ptr(int64_t loc, int64_t tag) {
  auto v = std::make_shared<Value>();
  v->kind = VKind::Ptr;
  v->loc = loc;
  v->tag = tag;
  return v;
}

ValueP v_vec(int64_t n, ValueP payload) {
  auto v = std::make_shared<Value>();
  v->kind = VKind::Vec;
  v->n = n;
  v->payload = std::move(payload);
  return v;
}

ValueP v_prim(const std::string &name) {
  auto v = std::make_shared<Value>();
  v->kind = VKind::Prim;
  v->name = name;
  return v;
}

ValueP v_builtin(VKind k) {
  auto v = std::make_shared<Value>();
  v->kind = k;
  return v;
}

static bool sigp_equal(const SigP &a, const SigP &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return sig_equal(*a, *b);
}

bool value_equal(const ValueP &a, const ValueP &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case VKind::Int: return a->z == b->z;
  case VKind::Ptr: return a->loc == b->loc && a->tag == b->tag;
  case VKind::Vec: return a->n == b->n && value_equal(a->payload, b->payload);
  case VKind::Prim: return a->name == b->name;
  case VKind::Rec:
    return a->name == b->name && a->rparams == b->rparams &&
           a->argnames == b->argnames && expr_equal(a->body, b->body) &&
           sigp_equal(a->sig, b->sig);
  default: return true;
  }
}

ExprP e_val(ValueP v, Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Val;
  e->val = std::move(v);
  e->span = sp;
  return e;
}

ExprP e_var(const std::string &x, Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Var;
  e->x = x;
  e->span = sp;
  return e;
}

ExprP e_let(const std::string &x, ExprP bound, ExprP body, Span sp) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Let;
  e->x = x;
  e->e1 = std::move(bound);
  e->e2 = std::move(body);
  e->span = sp;
  return e;
}

static bool place_equal(const Place &a, const Place &b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
  case Place::Var: return a.var == b.var;
  case Place::Ptr: return a.loc == b.loc && a.tag == b.tag;
  case Place::Bad: return value_equal(a.bad, b.bad);
  }
  return false;
}

bool expr_equal(const ExprP &a, const ExprP &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->x != b->x || a->a != b->a) return false;
  if (!expr_equal(a->e1, b->e1) || !expr_equal(a->e2, b->e2) ||
      !expr_equal(a->e3, b->e3))
    return false;
  if (a->refargs.size() != b->refargs.size() || a->targs.size() != b->targs.size() ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->refargs.size(); ++i)
    if (!requal(a->refargs[i], b->refargs[i])) return false;
  for (size_t i = 0; i < a->targs.size(); ++i)
    if (!type_equal(a->targs[i], b->targs[i])) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  switch (a->kind) {
  case EKind::Assign: case EKind::BorrowStrg: case EKind::BorrowMut:
  case EKind::BorrowShr: case EKind::Deref:
    if (!place_equal(a->place, b->place)) return false;
    break;
  default:
    break;
  }
  return value_equal(a->val, b->val);
}

bool is_aval(const ExprP &e) {
  if (e->kind == EKind::Var) return true;
  return e->kind == EKind::Val && e->val->kind != VKind::Rec;
}

bool program_equal(const Program &a, const Program &b) {
  if (a.fns.size() != b.fns.size()) return false;
  for (size_t i = 0; i < a.fns.size(); ++i) {
    if (a.fns[i].name != b.fns[i].name) return false;
    if (!sig_equal(*a.fns[i].sig, *b.fns[i].sig)) return false;
    if (!value_equal(a.fns[i].rec, b.fns[i].rec)) return false;
  }
  return expr_equal(a.entry, b.entry);
}

}  // namespace lr
