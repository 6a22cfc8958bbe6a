// SPDX-License-Identifier: Apache-2.0
#include "lr/printer.hpp"

#include <sstream>

namespace lr {

namespace {

int prec(const RExp &e) {
  switch (e->op) {
    case ROp::Or: return 1;
    case ROp::And: return 2;
    case ROp::Not: return 3;
    case ROp::Eq: case ROp::Lt: case ROp::Le: case ROp::Gt: case ROp::Ge: return 4;
    case ROp::Add: case ROp::Sub: return 5;
    case ROp::Mul: return 6;
    default: return 7;
  }
}

const char *op_text(ROp op) {
  switch (op) {
    case ROp::Or: return " || ";
    case ROp::And: return " && ";
    case ROp::Eq: return " = ";
    case ROp::Lt: return " < ";
    case ROp::Le: return " <= ";
    case ROp::Gt: return " > ";
    case ROp::Ge: return " >= ";
    case ROp::Add: return " + ";
    case ROp::Sub: return " - ";
    case ROp::Mul: return " * ";
    default: return " ? ";
  }
}

void pr(std::ostream &os, const RExp &e, int ctx) {
  bool paren = prec(e) < ctx;
  if (paren) os << '(';
  switch (e->op) {
    case ROp::Var: os << e->name; break;
    case ROp::IntC: os << e->val; break;
    case ROp::BoolC: os << (e->val ? "true" : "false"); break;
    case ROp::LocC: os << '@' << e->val; break;
    case ROp::Not:
      os << '!';
      pr(os, e->args[0], 3);
      break;
    case ROp::KApp:
      os << '$' << e->name << '(';
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << ", ";
        pr(os, e->args[i], 1);
      }
      os << ')';
      break;
    default: {
      int p = prec(e);
      // comparisons do not chain
      int lp = p == 4 ? 5 : p;
      pr(os, e->args[0], lp);
      os << op_text(e->op);
      pr(os, e->args[1], p + 1);
    }
  }
  if (paren) os << ')';
}

void pr_base(std::ostream &os, const BaseType &b);
void pr_type(std::ostream &os, const TypeP &t);
void pr_sig(std::ostream &os, const FnSig &s);

void pr_base(std::ostream &os, const BaseType &b) {
  switch (b.kind) {
    case BaseKind::Int: os << "int"; break;
    case BaseKind::Bool: os << "bool"; break;
    case BaseKind::Vec:
      os << "Vec<";
      pr_type(os, b.elem);
      os << '>';
      break;
  }
}

void pr_locctx(std::ostream &os, const LocCtx &l) {
  for (size_t i = 0; i < l.size(); ++i) {
    if (i) os << ", ";
    os << print_loc(l[i].loc) << " -> ";
    pr_type(os, l[i].ty);
  }
}

void pr_type(std::ostream &os, const TypeP &t) {
  switch (t->kind) {
    case TKind::Indexed:
      pr_base(os, t->base);
      os << '[';
      pr(os, t->idx, 1);
      os << ']';
      break;
    case TKind::Exists:
      if (t->binder == "v" && is_true(t->pred)) {
        pr_base(os, t->base);
        break;
      }
      os << '{' << t->binder << ". ";
      pr_base(os, t->base);
      os << '[' << t->binder << "] | ";
      pr(os, t->pred, 1);
      os << '}';
      break;
    case TKind::Ptr: os << "ptr(" << print_loc(t->loc) << ')'; break;
    case TKind::Ref:
      os << (t->mode == RefMode::Mut ? "&mut " : "&shr ");
      pr_type(os, t->pointee);
      break;
    case TKind::Uninit: os << "uninit(" << t->n << ')'; break;
    case TKind::Fn:
      os << "fn ";
      if (t->sig) pr_sig(os, *t->sig);
      else os << "<inferring>";
      break;
  }
}

void pr_sig(std::ostream &os, const FnSig &s) {
  bool req = s.requires_ && !is_true(s.requires_);
  if (!s.params.empty() || req || !s.in.empty()) {
    os << '{';
    for (size_t i = 0; i < s.params.size(); ++i) {
      if (i) os << ", ";
      os << s.params[i].first << ": " << sort_name(s.params[i].second);
    }
    if (req) {
      os << (s.params.empty() ? "| " : " | ");
      pr(os, s.requires_, 1);
    }
    if (!s.in.empty()) {
      os << (s.params.empty() && !req ? "| " : " | ");
      pr_locctx(os, s.in);
    }
    os << "} ";
  }
  os << '(';
  for (size_t i = 0; i < s.args.size(); ++i) {
    if (i) os << ", ";
    pr_type(os, s.args[i]);
  }
  os << ") -> ";
  pr_type(os, s.ret);
  if (!s.out.empty()) {
    os << "; ";
    pr_locctx(os, s.out);
  }
}

class ExprPrinter {
public:
  std::ostringstream os;

  void value(const ValueP &v, int d) {
    switch (v->kind) {
      case VKind::True: os << "true"; break;
      case VKind::False: os << "false"; break;
      case VKind::Int: os << v->z; break;
      case VKind::Poison: os << "poison"; break;
      case VKind::VecNew: os << "vec_new"; break;
      case VKind::VecPush: os << "vec_push"; break;
      case VKind::VecIndexMut: os << "vec_index_mut"; break;
      case VKind::Prim: os << v->name; break;
      case VKind::Ptr: os << "<ptr @" << v->loc << " #" << v->tag << '>'; break;
      case VKind::Vec:
        os << "<vec " << v->n << ' ';
        value(v->payload, d);
        os << '>';
        break;
      case VKind::Rec:
        os << "rec " << v->name;
        if (!v->rparams.empty()) {
          os << '{';
          for (size_t i = 0; i < v->rparams.size(); ++i) {
            if (i) os << ", ";
            os << v->rparams[i].first << ": " << sort_name(v->rparams[i].second);
          }
          os << '}';
        }
        os << '(';
        for (size_t i = 0; i < v->argnames.size(); ++i) {
          if (i) os << ", ";
          os << v->argnames[i];
        }
        os << ')';
        if (v->sig) {
          os << " : fn ";
          pr_sig(os, *v->sig);
        }
        os << " :=";
        nl(d + 1);
        expr(v->body, d + 1);
        break;
    }
  }

  void place(const Place &p) {
    switch (p.kind) {
      case Place::Var: os << p.var; break;
      case Place::Ptr: os << "<ptr @" << p.loc << " #" << p.tag << '>'; break;
      case Place::Bad: value(p.bad, 0); break;
    }
  }

  static bool binder_like(const ExprP &e) {
    return e->kind == EKind::Let || e->kind == EKind::LetNew || e->kind == EKind::Unpack ||
           (e->kind == EKind::Val && e->val->kind == VKind::Rec);
  }

  // Statements that can be followed by `;` without swallowing it.
  static bool stmt_like(const ExprP &e) {
    if (binder_like(e)) return false;
    if (e->kind == EKind::Assign)
      return !(e->e1->kind == EKind::Val && e->e1->val->kind == VKind::Rec);
    return true;
  }

  void nl(int d) {
    os << '\n';
    for (int i = 0; i < d; ++i) os << "  ";
  }

  void operand(const ExprP &e, int d) {
    if (binder_like(e) && !(e->kind == EKind::Val)) {
      os << '(';
      expr(e, d);
      os << ')';
    } else {
      expr(e, d);
    }
  }

  void expr(const ExprP &e, int d) {
    switch (e->kind) {
      case EKind::LetNew:
        os << "let " << e->x << " = new(" << e->a << ") in";
        nl(d);
        expr(e->e1, d);
        break;
      case EKind::Let:
        if (e->x == "_" && stmt_like(e->e1)) {
          expr(e->e1, d);
          os << ';';
        } else {
          os << "let " << e->x << " = ";
          expr(e->e1, d + 1);
          os << " in";
        }
        nl(d);
        expr(e->e2, d);
        break;
      case EKind::Unpack:
        os << "unpack (" << e->x << ", " << e->a << ") in";
        nl(d);
        expr(e->e1, d);
        break;
      case EKind::If:
        os << "if ";
        operand(e->e1, d);
        os << " {";
        nl(d + 1);
        expr(e->e2, d + 1);
        nl(d);
        os << "} else {";
        nl(d + 1);
        expr(e->e3, d + 1);
        nl(d);
        os << '}';
        break;
      case EKind::Call: {
        os << "call ";
        const ExprP &c = e->e1;
        if (c->kind == EKind::Var) {
          os << c->x;
        } else if (c->kind == EKind::Val && c->val->kind != VKind::Rec &&
                   c->val->kind != VKind::Int) {
          value(c->val, d);
        } else {
          os << '(';
          expr(c, d + 1);
          os << ')';
        }
        if (!e->targs.empty()) {
          os << '<';
          for (size_t i = 0; i < e->targs.size(); ++i) {
            if (i) os << ", ";
            pr_type(os, e->targs[i]);
          }
          os << '>';
        }
        if (!e->refargs.empty()) {
          os << '{';
          for (size_t i = 0; i < e->refargs.size(); ++i) {
            if (i) os << ", ";
            pr(os, e->refargs[i], 1);
          }
          os << '}';
        }
        os << '(';
        for (size_t i = 0; i < e->args.size(); ++i) {
          if (i) os << ", ";
          expr(e->args[i], d + 1);
        }
        os << ')';
        break;
      }
      case EKind::Assign:
        place(e->place);
        os << " := ";
        operand(e->e1, d + 1);
        break;
      case EKind::BorrowStrg: os << "&strg "; place(e->place); break;
      case EKind::BorrowMut: os << "&mut "; place(e->place); break;
      case EKind::BorrowShr: os << "&shr "; place(e->place); break;
      case EKind::Deref: os << '*'; place(e->place); break;
      case EKind::Var: os << e->x; break;
      case EKind::Val: value(e->val, d); break;
    }
  }
};

}  // namespace

std::string print_rexp(const RExp &e) {
  std::ostringstream os;
  pr(os, e, 1);
  return os.str();
}

std::string print_loc(const Loc &l) {
  return l.concrete ? "@" + std::to_string(l.id) : l.var;
}

std::string print_type(const TypeP &t) {
  std::ostringstream os;
  pr_type(os, t);
  return os.str();
}

std::string print_sig(const FnSig &s) {
  std::ostringstream os;
  pr_sig(os, s);
  return os.str();
}

std::string print_locctx(const LocCtx &l) {
  std::ostringstream os;
  pr_locctx(os, l);
  return os.str();
}

std::string print_value(const ValueP &v) {
  ExprPrinter p;
  p.value(v, 0);
  return p.os.str();
}

std::string print_expr(const ExprP &e) {
  ExprPrinter p;
  p.expr(e, 0);
  return p.os.str();
}

std::string print_program(const Program &prog) {
  ExprPrinter p;
  for (const auto &f : prog.fns) {
    p.os << "fn " << f.name << ' ';
    pr_sig(p.os, *f.sig);
    p.os << " :=";
    p.nl(1);
    p.value(f.rec, 1);
    p.os << "\n\n";
  }
  if (prog.entry) {
    p.os << "entry";
    p.nl(1);
    p.expr(prog.entry, 1);
    p.os << '\n';
  }
  return p.os.str();
}

}  // namespace lr
