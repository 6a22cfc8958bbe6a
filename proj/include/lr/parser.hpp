// SPDX-License-Identifier: Apache-2.0
#ifndef LR_PARSER_HPP
#define LR_PARSER_HPP

#include <string>

#include "lr/ast.hpp"

namespace lr {

// Throws ParseError. `file` is recorded in the program for diagnostics.
Program parse_program(const std::string &source, const std::string &file = "<input>");

RExp parse_refexpr(const std::string &source);
TypeP parse_type(const std::string &source);
ExprP parse_expr(const std::string &source);

}  // namespace lr

#endif
