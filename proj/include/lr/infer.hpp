// SPDX-License-Identifier: Apache-2.0
#ifndef LR_INFER_HPP
#define LR_INFER_HPP

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lr/constraints.hpp"
#include "lr/oracle.hpp"

namespace lr {

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-function binder names; fresh() reserves the returned name.
struct NameGen {
  std::set<std::string> used;
  std::string fresh(const std::string &base);
};

class KVarStore {
public:
  const KVar &fresh(std::vector<Param> params, size_t nvalue);
  const std::vector<KVar> &all() const { return ks_; }
  const KVar *find(const std::string &id) const;

private:
  std::vector<KVar> ks_;
};

// int/bool binders of d in order; locations are not passed to KVars.
std::vector<Param> kvar_scope(const RefCtx &d);
std::set<std::string> bound_names(const RefCtx &d);

// {v. base[v] | k(v, scope)}
TypeP fresh_kvar_type(KVarStore &ks, const std::vector<Param> &scope, const BaseType &base);
TypeP fresh_kvar_type(KVarStore &ks, const RefCtx &d, const BaseType &base);
TypeP instantiate_type_param(KVarStore &ks, const RefCtx &d, const BaseType &expected);

// A type of the common shape of a and b whose refinements are fresh
// templates over `scope`. Parts equal in a and b that only mention `outer`
// names are kept.
TypeP template_like(KVarStore &ks, const std::vector<Param> &scope,
                    const std::set<std::string> &outer, const TypeP &a, const TypeP &b);

// Loop signature template: refinement parameters plus input locations.
struct LoopShape {
  std::vector<Param> params;
  LocCtx in;
  std::set<std::string> templates;  // KVar ids created for element/reference positions
};

// Generalizes `cur` so that every call-site context matches it up to the
// values of its parameters.
LoopShape infer_rec_signature(KVarStore &ks, NameGen &names, const std::vector<Param> &scope,
                              const LoopShape &cur, const std::vector<LocCtx> &sites);

enum class SolveStatus { Sat, Unsat, Unknown };

struct SolveResult {
  SolveStatus status = SolveStatus::Sat;
  Solution sol;
  int failed_clause = -1;
  Assignment model;
  std::string reason;
  size_t oracle_calls = 0;
};

// KVars occurring in the clauses, in registry order.
std::vector<KVar> used_kvars(const std::vector<Clause> &cs, const std::vector<KVar> &all);

SolveResult solve(const std::vector<Clause> &cs, const std::vector<KVar> &kvars,
                  const std::vector<Qualifier> &quals, Oracle &oracle);

// Drops qualifiers implied by the remaining ones.
Solution minimize_solution(const Solution &s, const std::vector<KVar> &kvars, Oracle &oracle);

}  // namespace lr

#endif
