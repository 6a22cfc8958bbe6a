// SPDX-License-Identifier: Apache-2.0
#include "lr/driver.hpp"

#include <sstream>

#include "lr/printer.hpp"

namespace lr {

VerifyResult verify_program(const Program &p, Oracle &oracle, const VerifyOptions &opts) {
  VerifyResult r;
  r.report = check_program(p, opts.check);
  r.diags = r.report.diags;
  r.clauses = clauses(normalize(r.report.constraint()));
  r.kvars = used_kvars(r.clauses, r.report.kvars);
  r.solve = solve(r.clauses, r.kvars, opts.quals, oracle);
  if (r.solve.status == SolveStatus::Sat || r.solve.status == SolveStatus::Unsat)
    r.shown = minimize_solution(r.solve.sol, r.kvars, oracle);
  else
    r.shown = r.solve.sol;
  if (r.solve.status != SolveStatus::Sat) {
    const Clause *c = nullptr;
    for (const auto &cl : r.clauses)
      if (cl.id == r.solve.failed_clause) c = &cl;
    Diagnostic d;
    d.file = p.file;
    d.clause_id = r.solve.failed_clause;
    if (c) {
      d.span = c->prov.span;
      d.rule = c->prov.rule;
      d.message = "cannot prove " + print_rexp(apply_solution(c->head, r.solve.sol));
      if (r.solve.status == SolveStatus::Unsat && !r.solve.model.empty()) {
        d.message += "; counterexample:";
        for (const auto &[n, v] : r.solve.model) d.message += " " + n + "=" + print_gval(v);
      }
      if (r.solve.status == SolveStatus::Unknown) d.message += " (oracle: " + r.solve.reason + ")";
    }
    r.diags.push_back(d);
  }
  if (!r.report.ok() || r.solve.status == SolveStatus::Unsat) r.exit_code = 1;
  else if (r.solve.status == SolveStatus::Unknown) r.exit_code = 3;
  return r;
}

std::string dump_constraints(const VerifyResult &r) { return print_clauses(r.clauses); }

std::string dump_solution(const VerifyResult &r) {
  std::string out;
  for (const auto &k : r.kvars) {
    auto it = r.shown.find(k.id);
    if (it != r.shown.end()) out += print_kvar_solution(k, it->second.pred) + "\n";
  }
  return out;
}

}  // namespace lr
