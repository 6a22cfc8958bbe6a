// SPDX-License-Identifier: Apache-2.0
#ifndef LR_PRINTER_HPP
#define LR_PRINTER_HPP

#include <string>

#include "lr/ast.hpp"

namespace lr {

std::string print_rexp(const RExp &e);
std::string print_type(const TypeP &t);
std::string print_sig(const FnSig &s);
std::string print_locctx(const LocCtx &l);
std::string print_loc(const Loc &l);
std::string print_value(const ValueP &v);
std::string print_expr(const ExprP &e);
std::string print_program(const Program &p);

}  // namespace lr

#endif
