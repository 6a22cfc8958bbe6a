// SPDX-License-Identifier: Apache-2.0
#ifndef LR_DRIVER_HPP
#define LR_DRIVER_HPP

#include <string>
#include <vector>

#include "lr/infer.hpp"
#include "lr/oracle.hpp"
#include "lr/typeck.hpp"

namespace lr {

struct VerifyOptions {
  CheckOptions check;
  std::vector<Qualifier> quals = default_qualifiers();
};

struct VerifyResult {
  Report report;
  std::vector<Clause> clauses;
  std::vector<KVar> kvars;  // those occurring in clauses
  SolveResult solve;
  Solution shown;           // minimized for display
  std::vector<Diagnostic> diags;
  int exit_code = 0;        // 0 verified, 1 type error, 3 oracle unknown
};

VerifyResult verify_program(const Program &p, Oracle &oracle, const VerifyOptions &opts = {});

std::string dump_constraints(const VerifyResult &r);
std::string dump_solution(const VerifyResult &r);

}  // namespace lr

#endif
