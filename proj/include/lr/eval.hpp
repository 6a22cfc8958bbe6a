// SPDX-License-Identifier: Apache-2.0
#ifndef LR_EVAL_HPP
#define LR_EVAL_HPP

#include <map>
#include <stdexcept>
#include <string>

#include "lr/ast.hpp"

namespace lr {

// A ground refinement value: int, bool (0/1) or concrete location id.
struct GVal {
  Sort sort = Sort::Int;
  int64_t v = 0;
  bool operator==(const GVal &o) const { return sort == o.sort && v == o.v; }
};

using Assignment = std::map<std::string, GVal>;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact evaluation; throws EvalError on unbound variables, KVar applications
// or int64 overflow.
GVal eval_closed(const RExp &e, const Assignment &env);
bool eval_bool(const RExp &e, const Assignment &env);

std::string print_gval(const GVal &g);

}  // namespace lr

#endif
