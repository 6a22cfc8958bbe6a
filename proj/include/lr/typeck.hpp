// SPDX-License-Identifier: Apache-2.0
#ifndef LR_TYPECK_HPP
#define LR_TYPECK_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lr/constraints.hpp"
#include "lr/infer.hpp"

namespace lr {

// kind: UnboundVariable, ArityMismatch, SortError, EscapeError, InstError,
// AssignThroughShared, DerefNonPointer, DerefUninit, StructuralError,
// ShapeMismatch, UnannotatedFunction, WfViolation
struct TypeError : std::runtime_error {
  std::string kind;
  Span span;
  TypeError(std::string k, const std::string &msg, Span sp)
      : std::runtime_error(msg), kind(std::move(k)), span(sp) {}
};

struct InstError : TypeError {
  std::string param;
  InstError(const std::string &p, const std::string &msg, Span sp)
      : TypeError("InstError", msg, sp), param(p) {}
};

struct CheckOptions {
  bool debug_wf = false;
  // Test fixture only: `*x` of an uninitialized location is typed as int.
  bool unsound_deref_uninit = false;
};

struct Diagnostic {
  std::string severity = "error";
  std::string file;
  Span span;
  std::string rule;
  std::string message;
  int clause_id = -1;
};

std::string print_diagnostic(const Diagnostic &d);

struct FnResult {
  std::string name;
  bool ok = true;
  CP constraint;
};

struct Report {
  std::vector<FnResult> fns;  // the entry expression is reported as "<entry>"
  std::vector<KVar> kvars;
  std::vector<Diagnostic> diags;
  bool has_entry = false;
  TypeP entry_type;
  RefCtx entry_delta;
  LocCtx entry_locs;

  CP constraint() const;
  bool ok() const { return diags.empty(); }
};

Report check_program(const Program &p, const CheckOptions &opts = {});

struct CheckState {
  RefCtx delta;
  ValCtx gamma;
  LocCtx locs;
};

// Builtin arithmetic and comparison signatures.
std::optional<FnSig> prim_sig(const std::string &name);
bool is_prim(const std::string &name);

// Syntactic instantiation of refinement parameters from argument types.
std::vector<RExp> infer_refargs(const FnSig &formal, const std::vector<TypeP> &actuals);

// Marker type for paths that end in a call of a loop whose signature is
// still being inferred.
const TypeP &hole_type();
bool is_hole(const TypeP &t);

class Checker {
public:
  Checker(const Program *prog, CheckOptions opts, KVarStore &kvars);

  TypeP synth(CheckState &st, const ExprP &e);
  void unpack_on_the_fly(CheckState &st, const std::string &x);
  TypeP check_assign(CheckState &st, const Place &p, const TypeP &rhs, Span sp);
  TypeP check_borrow(CheckState &st, EKind kind, const Place &p, Span sp);
  TypeP check_deref(CheckState &st, const Place &p, Span sp);
  // T-Fun: checks `rec` against `sig` in the closure context (d, g).
  void check_fn(const RefCtx &d, const ValCtx &g, const FnSig &sig, const ValueP &rec);

  // Closed constraints emitted so far.
  const std::vector<CP> &constraints() const { return cs_; }
  NameGen &names() { return names_; }
  void reset_function();

private:
  const Program *prog_;
  CheckOptions opts_;
  KVarStore &ks_;
  NameGen names_;
  std::vector<CP> cs_;
  std::map<std::string, TypeP> globals_;
  int shape_depth_ = 0;
  struct Pending {
    std::string name;
    std::vector<LocCtx> sites;
  };
  std::vector<Pending> pending_;

  TypeP synth_inner(CheckState &st, const ExprP &e);
  TypeP value_type(CheckState &st, const ValueP &v, Span sp);
  TypeP lookup(const CheckState &st, const std::string &x, Span sp) const;
  TypeP bind_var(CheckState &st, const std::string &x, TypeP t);
  TypeP unpack_loc(CheckState &st, size_t i);
  TypeP as_indexed(CheckState &st, const TypeP &t, const std::string &hint);
  LocBind *find_loc(CheckState &st, const Loc &l);
  TypeP synth_if(CheckState &st, const ExprP &e);
  TypeP synth_call(CheckState &st, const ExprP &e);
  TypeP call_sig(CheckState &st, const FnSig &sig, const std::vector<RExp> &refargs,
                 const std::vector<TypeP> &args, Span sp);
  TypeP infer_loop(CheckState &st, const ValueP &v, Span sp);
  void emit(const RefCtx &d, const CP &c);
  CP sub(const RefCtx &d, const TypeP &a, const TypeP &b, Span sp, const std::string &rule);
  CP include(const RefCtx &d, const LocCtx &a, const LocCtx &b, Span sp, const std::string &rule);
  Provenance prov(Span sp, const std::string &rule) const;
  void wf_check(const CheckState &st, const TypeP &t, Span sp);
};

}  // namespace lr

#endif
