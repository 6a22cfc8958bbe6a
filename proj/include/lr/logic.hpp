// SPDX-License-Identifier: Apache-2.0
#ifndef LR_LOGIC_HPP
#define LR_LOGIC_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lr/ast.hpp"

namespace lr {

Sort getsort(const BaseType &b);

// Undefined (nullopt) for functions, pointers and poison.
std::optional<RExp> interp(const ValueP &v);

struct RefEntry {
  bool is_bind = true;
  std::string name;
  Sort sort = Sort::Int;
  RExp pred;  // Assume

  static RefEntry bind(const std::string &n, Sort s) { return RefEntry{true, n, s, nullptr}; }
  static RefEntry assume(RExp p) { return RefEntry{false, {}, Sort::Bool, std::move(p)}; }
};
using RefCtx = std::vector<RefEntry>;

using ValCtx = std::vector<std::pair<std::string, TypeP>>;
// (concrete location, tag) -> pointer type
using DynCtx = std::map<std::pair<int64_t, int64_t>, TypeP>;

struct SortError : std::runtime_error {
  RExp term;
  SortError(const std::string &msg, RExp t) : std::runtime_error(msg), term(std::move(t)) {}
};

struct SubstError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SortEnv = std::map<std::string, Sort>;

SortEnv sort_env(const RefCtx &d);
Sort sortcheck(const RefCtx &d, const RExp &e);
Sort sortcheck(const SortEnv &env, const RExp &e);

bool ctx_binds(const RefCtx &d, const std::string &n);
std::vector<Param> ctx_binders(const RefCtx &d);
std::vector<RExp> ctx_assumes(const RefCtx &d);

// Capture-avoiding substitution [e/a].
RExp subst(const RExp &t, const std::string &a, const RExp &e);
TypeP subst(const TypeP &t, const std::string &a, const RExp &e);
SigP subst(const SigP &s, const std::string &a, const RExp &e);
LocCtx subst(const LocCtx &l, const std::string &a, const RExp &e);
ValCtx subst(const ValCtx &g, const std::string &a, const RExp &e);
DynCtx subst(const DynCtx &s, const std::string &a, const RExp &e);
RefCtx subst(const RefCtx &d, const std::string &a, const RExp &e);
Loc subst(const Loc &l, const std::string &a, const RExp &e);

// Simultaneous substitution.
using RSubst = std::map<std::string, RExp>;
RExp subst_all(const RExp &t, const RSubst &th);
TypeP subst_all(const TypeP &t, const RSubst &th);
LocCtx subst_all(const LocCtx &l, const RSubst &th);

std::set<std::string> free_vars(const RExp &e);
std::set<std::string> free_vars(const TypeP &t);
std::set<std::string> free_vars(const FnSig &s);
std::set<std::string> free_vars(const LocCtx &l);
// Free refinement variables of an expression.
std::set<std::string> free_vars(const ExprP &e);
// Free program variables of an expression.
std::set<std::string> free_prog_vars(const ExprP &e);

// Binder names occurring in a type (existential binders and signature params).
std::set<std::string> binders(const TypeP &t);

ExprP subst_value_in_expr(const ExprP &e, const std::string &x, const ValueP &v);
ExprP subst_ref_in_expr(const ExprP &e, const std::string &a, const RExp &r);

// Fresh name generation for alpha-renaming; `base` is kept as a prefix.
std::string fresh_name(const std::string &base, const std::set<std::string> &avoid);

}  // namespace lr

#endif
