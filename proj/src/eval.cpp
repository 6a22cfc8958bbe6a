// SPDX-License-Identifier: Apache-2.0
#include "lr/eval.hpp"

namespace lr {

namespace {

int64_t checked(bool overflow, int64_t r) {
  if (overflow) throw EvalError("integer overflow");
  return r;
}

}  // namespace

GVal eval_closed(const RExp &e, const Assignment &env) {
  auto I = [&](int i) { return eval_closed(e->args[i], env).v; };
  auto B = [](bool b) { return GVal{Sort::Bool, b ? 1 : 0}; };
  switch (e->op) {
    case ROp::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw EvalError("unbound variable '" + e->name + "'");
      return it->second;
    }
    case ROp::IntC: return GVal{Sort::Int, e->val};
    case ROp::BoolC: return B(e->val != 0);
    case ROp::LocC: return GVal{Sort::Loc, e->val};
    case ROp::Eq: return B(eval_closed(e->args[0], env) == eval_closed(e->args[1], env));
    case ROp::Not: return B(I(0) == 0);
    case ROp::And: return B(I(0) != 0 && I(1) != 0);
    case ROp::Or: return B(I(0) != 0 || I(1) != 0);
    case ROp::Add: {
      int64_t r;
      bool o = __builtin_add_overflow(I(0), I(1), &r);
      return GVal{Sort::Int, checked(o, r)};
    }
    case ROp::Sub: {
      int64_t r;
      bool o = __builtin_sub_overflow(I(0), I(1), &r);
      return GVal{Sort::Int, checked(o, r)};
    }
    case ROp::Mul: {
      int64_t r;
      bool o = __builtin_mul_overflow(I(0), I(1), &r);
      return GVal{Sort::Int, checked(o, r)};
    }
    case ROp::Lt: return B(I(0) < I(1));
    case ROp::Le: return B(I(0) <= I(1));
    case ROp::Gt: return B(I(0) > I(1));
    case ROp::Ge: return B(I(0) >= I(1));
    case ROp::KApp: throw EvalError("cannot evaluate unknown predicate $" + e->name);
  }
  throw EvalError("bad term");
}

bool eval_bool(const RExp &e, const Assignment &env) { return eval_closed(e, env).v != 0; }

std::string print_gval(const GVal &g) {
  switch (g.sort) {
    case Sort::Bool: return g.v ? "true" : "false";
    case Sort::Loc: return "@" + std::to_string(g.v);
    default: return std::to_string(g.v);
  }
}

}  // namespace lr
