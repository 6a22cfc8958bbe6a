// SPDX-License-Identifier: Apache-2.0
#ifndef LR_AST_HPP
#define LR_AST_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lr {

struct Span {
  int line = 0;
  int col = 0;
};

enum class Sort { Int, Bool, Loc };

const char *sort_name(Sort s);

// Refinement expressions. KApp only arises from inference templates.
enum class ROp {
  Var, IntC, BoolC, LocC,
  Eq, Not, And, Or,
  Add, Sub, Mul,
  Lt, Le, Gt, Ge,
  KApp
};

struct RefExpr;
using RExp = std::shared_ptr<const RefExpr>;

struct RefExpr {
  ROp op = ROp::IntC;
  std::string name;  // Var name or KVar id
  int64_t val = 0;   // IntC value, BoolC 0/1, LocC id
  std::vector<RExp> args;
};

RExp rvar(const std::string &n);
RExp rint(int64_t z);
RExp rbool(bool b);
RExp rloc(int64_t l);
RExp rnot(RExp a);
RExp rbin(ROp op, RExp a, RExp b);
RExp req(RExp a, RExp b);
RExp rand_(RExp a, RExp b);
RExp ror(RExp a, RExp b);
RExp radd(RExp a, RExp b);
RExp rsub(RExp a, RExp b);
RExp rmul(RExp a, RExp b);
RExp rlt(RExp a, RExp b);
RExp rle(RExp a, RExp b);
RExp rgt(RExp a, RExp b);
RExp rge(RExp a, RExp b);
RExp rkapp(const std::string &k, std::vector<RExp> args);
// Conjunction of a list; true when empty.
RExp rconj(const std::vector<RExp> &ps);

bool is_true(const RExp &e);
bool is_binop(ROp op);

bool operator==(const RefExpr &a, const RefExpr &b);
bool requal(const RExp &a, const RExp &b);

// Types

struct Type;
using TypeP = std::shared_ptr<const Type>;

enum class BaseKind { Int, Bool, Vec };

struct BaseType {
  BaseKind kind = BaseKind::Int;
  TypeP elem;  // Vec only
};

// Abstract locations are loc-sorted refinement variables.
struct Loc {
  bool concrete = false;
  int64_t id = 0;
  std::string var;

  static Loc abs(const std::string &v) { return Loc{false, 0, v}; }
  static Loc conc(int64_t i) { return Loc{true, i, {}}; }
  RExp to_rexp() const;
  static std::optional<Loc> from_rexp(const RExp &e);
};

bool operator==(const Loc &a, const Loc &b);

struct LocBind {
  Loc loc;
  TypeP ty;
};
using LocCtx = std::vector<LocBind>;

using Param = std::pair<std::string, Sort>;

struct FnSig {
  std::vector<Param> params;
  RExp requires_;
  LocCtx in;
  std::vector<TypeP> args;
  TypeP ret;
  LocCtx out;
};
using SigP = std::shared_ptr<const FnSig>;

enum class TKind { Indexed, Exists, Ptr, Ref, Uninit, Fn };
enum class RefMode { Mut, Shr };

struct Type {
  TKind kind = TKind::Uninit;
  BaseType base;           // Indexed, Exists
  RExp idx;                // Indexed
  std::string binder;      // Exists
  RExp pred;               // Exists
  Loc loc;                 // Ptr
  RefMode mode = RefMode::Mut;
  TypeP pointee;           // Ref
  int64_t n = 1;           // Uninit
  SigP sig;                // Fn; null marks a signature still being inferred
};

TypeP t_indexed(BaseType b, RExp idx);
TypeP t_exists(const std::string &binder, BaseType b, RExp pred);
TypeP t_ptr(Loc l);
TypeP t_ref(RefMode m, TypeP pointee);
TypeP t_uninit(int64_t n);
TypeP t_fn(SigP sig);
BaseType b_int();
BaseType b_bool();
BaseType b_vec(TypeP elem);

bool type_equal(const TypeP &a, const TypeP &b);
bool base_equal(const BaseType &a, const BaseType &b);
bool sig_equal(const FnSig &a, const FnSig &b);
bool locctx_equal(const LocCtx &a, const LocCtx &b);
// Same base constructor, ignoring refinements.
bool base_shape_equal(const BaseType &a, const BaseType &b);

// Expressions and values

struct Expr;
using ExprP = std::shared_ptr<const Expr>;
struct Value;
using ValueP = std::shared_ptr<const Value>;

enum class VKind {
  Rec, True, False, Int, Poison, Ptr, Vec,
  VecNew, VecPush, VecIndexMut, Prim
};

struct Value {
  VKind kind = VKind::Poison;
  int64_t z = 0;              // Int
  int64_t loc = 0, tag = 0;   // Ptr
  int64_t n = 0;              // Vec length
  ValueP payload;             // Vec
  std::string name;           // Rec function name, Prim name
  std::vector<Param> rparams; // Rec
  std::vector<std::string> argnames;
  ExprP body;
  SigP sig;                   // optional declared signature
  Span span;
};

ValueP v_int(int64_t z);
ValueP v_bool(bool b);
ValueP v_poison();
ValueP v_ptr(int64_t loc, int64_t tag);
ValueP v_vec(int64_t n, ValueP payload);
ValueP v_prim(const std::string &name);
ValueP v_builtin(VKind k);

bool value_equal(const ValueP &a, const ValueP &b);

struct Place {
  enum Kind { Var, Ptr, Bad } kind = Var;
  std::string var;
  int64_t loc = 0, tag = 0;
  ValueP bad;  // a non-pointer value substituted into place position
};

enum class EKind {
  LetNew, Let, Unpack, If, Call, Assign,
  BorrowStrg, BorrowMut, BorrowShr, Deref, Var, Val
};

// Field use per kind:
//   LetNew: x, a (location variable), e1 body
//   Let: x, e1 bound, e2 body
//   Unpack: x, a, e1 body
//   If: e1 cond, e2 then, e3 else
//   Call: e1 callee, refargs, targs, args
//   Assign: place, e1 rhs
//   Borrow*, Deref: place
//   Var: x
//   Val: val
struct Expr {
  EKind kind = EKind::Val;
  Span span;
  std::string x, a;
  ExprP e1, e2, e3;
  std::vector<RExp> refargs;
  std::vector<TypeP> targs;
  std::vector<ExprP> args;
  Place place;
  ValueP val;
};

ExprP e_val(ValueP v, Span sp = {});
ExprP e_var(const std::string &x, Span sp = {});
ExprP e_let(const std::string &x, ExprP bound, ExprP body, Span sp = {});

bool expr_equal(const ExprP &a, const ExprP &b);
bool is_aval(const ExprP &e);

struct FnDecl {
  std::string name;
  SigP sig;
  ValueP rec;
  Span span;
};

struct Program {
  std::string file;
  std::vector<FnDecl> fns;
  ExprP entry;
};

bool program_equal(const Program &a, const Program &b);

struct ParseError : std::runtime_error {
  Span span;
  std::vector<std::string> expected;
  ParseError(const std::string &msg, Span sp, std::vector<std::string> exp)
      : std::runtime_error(msg), span(sp), expected(std::move(exp)) {}
};

}  // namespace lr

#endif
