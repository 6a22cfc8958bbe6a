// SPDX-License-Identifier: Apache-2.0
#ifndef LR_CONSTRAINTS_HPP
#define LR_CONSTRAINTS_HPP

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lr/logic.hpp"

namespace lr {

struct Provenance {
  std::string file;
  Span span;
  std::string rule;
};

// Unknown predicate. The first `nvalue` params are value positions that
// qualifiers are instantiated over; the rest are scope binders.
struct KVar {
  std::string id;
  std::vector<Param> params;
  size_t nvalue = 1;
};

// Predicates are refinement expressions that may contain KApp nodes.
using Pred = RExp;

enum class CKind { ForAll, Implies, Conj, Head };

struct Constraint;
using CP = std::shared_ptr<const Constraint>;

struct Constraint {
  CKind kind = CKind::Conj;
  std::string binder;    // ForAll
  Sort sort = Sort::Int; // ForAll
  Pred hyp;              // ForAll, Implies
  std::vector<CP> kids;  // Conj; ForAll/Implies use kids[0]
  Pred goal;             // Head
  Provenance prov;       // Head
};

CP c_forall(const std::string &b, Sort s, Pred hyp, CP body);
CP c_implies(Pred hyp, CP body);
CP c_conj(std::vector<CP> cs);
CP c_head(Pred goal, Provenance prov);
CP c_true();

struct Clause {
  int id = 0;
  std::vector<Param> binders;
  std::vector<Pred> hyps;
  Pred head;
  Provenance prov;
};

// Flattens conjunctions, splits conjunctive heads, drops trivially true heads
// and rewrites unknown-predicate heads with non-variable arguments.
CP normalize(const CP &c);
std::vector<Clause> clauses(const CP &c, int first_id = 0);
size_t count_heads(const CP &c);

struct KSol {
  std::vector<std::string> params;
  Pred pred;
};
using Solution = std::map<std::string, KSol>;

struct MissingKVar : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Pred apply_solution(const Pred &p, const Solution &s);
CP apply_solution(const CP &c, const Solution &s);
Clause apply_solution(const Clause &c, const Solution &s);

bool has_kapp(const Pred &p);
void collect_kapps(const Pred &p, std::vector<RExp> &out);

// Qualifier templates range over the value symbol `v` and one metavariable `m`.
struct Qualifier {
  std::string name;
  RExp tmpl;
  Sort vsort = Sort::Int;
  bool uses_m = false;
  Sort msort = Sort::Int;
};

std::vector<Qualifier> default_qualifiers();
// Parses a template over v (and optionally m); infers the sorts.
Qualifier parse_qualifier(const std::string &text);
std::vector<Pred> instantiate_qualifiers(const KVar &k, const std::vector<Qualifier> &qs);

std::string print_clause(const Clause &c);
std::string print_clauses(const std::vector<Clause> &cs);
std::string clauses_json(const std::vector<Clause> &cs);
std::vector<Clause> parse_clause_dump(const std::string &text);
std::string print_kvar_solution(const KVar &k, const Pred &p);

bool clause_equal(const Clause &a, const Clause &b);

}  // namespace lr

#endif
