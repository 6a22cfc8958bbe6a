// SPDX-License-Identifier: Apache-2.0
#include "lr/parser.hpp"

#include <cctype>
#include <set>

namespace lr {

namespace {

enum class Tok { Ident, KVar, Int, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int64_t val = 0;
  Span span;
};

const char *kSyms[] = {":=", "->", "<=", ">=", "==", "!=", "&&", "||",
                       "{", "}", "(", ")", "[", "]", "<", ">", "=", "!",
                       "+", "-", "*", ",", ".", ":", ";", "|", "&", "@"};

std::vector<Token> lex(const std::string &src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { adv(1); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    Span sp{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i + 1;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      Token t{c == '$' ? Tok::KVar : Tok::Ident, src.substr(i, j - i), 0, sp};
      if (t.kind == Tok::KVar) t.text = t.text.substr(1);
      out.push_back(t);
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string digits = src.substr(i, j - i);
      int64_t v = 0;
      try {
        v = std::stoll(digits);
      } catch (...) {
        throw ParseError("integer literal out of range", sp, {});
      }
      out.push_back(Token{Tok::Int, digits, v, sp});
      adv(j - i);
      continue;
    }
    bool matched = false;
    for (const char *s : kSyms) {
      size_t n = std::char_traits<char>::length(s);
      if (src.compare(i, n, s) == 0) {
        out.push_back(Token{Tok::Sym, s, 0, sp});
        adv(n);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(std::string("unexpected character '") + c + "'", sp, {});
  }
  out.push_back(Token{Tok::End, "<eof>", 0, Span{line, col}});
  return out;
}

const std::set<std::string> kKeywords = {
    "fn", "let", "new", "in", "unpack", "if", "else", "call", "rec", "true",
    "false", "poison", "vec_new", "vec_push", "vec_index_mut", "int", "bool",
    "loc", "ptr", "uninit", "Vec", "entry"};

class Parser {
public:
  explicit Parser(const std::string &src) : toks_(lex(src)) {}

  Program program(const std::string &file) {
    Program p;
    p.file = file;
    while (is_kw("fn")) p.fns.push_back(fndecl());
    if (is_kw("entry")) {
      next();
      p.entry = expr();
    }
    expect_end();
    return p;
  }

  RExp refexpr_only() {
    RExp e = rexpr();
    expect_end();
    return e;
  }

  TypeP type_only() {
    TypeP t = type();
    expect_end();
    return t;
  }

  ExprP expr_only() {
    ExprP e = expr();
    expect_end();
    return e;
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  int tmp_counter_ = 0;

  const Token &peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token &next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool is_sym(const char *s, size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_kw(const char *s, size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  bool is_ident(size_t k = 0) const {
    return peek(k).kind == Tok::Ident && !kKeywords.count(peek(k).text);
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    const Token &t = peek();
    std::string msg = "unexpected '" + t.text + "', expected ";
    for (size_t i = 0; i < expected.size(); ++i)
      msg += (i ? " or " : "") + expected[i];
    throw ParseError(msg, t.span, std::move(expected));
  }

  void expect_sym(const char *s) {
    if (!is_sym(s)) fail({std::string("'") + s + "'"});
    next();
  }
  void expect_kw(const char *s) {
    if (!is_kw(s)) fail({std::string("'") + s + "'"});
    next();
  }
  std::string ident() {
    if (!is_ident()) fail({"identifier"});
    return next().text;
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail({"end of input"});
  }

  // refinements

  RExp rexpr() {
    RExp e = rand_e();
    while (is_sym("||")) {
      next();
      e = ror(e, rand_e());
    }
    return e;
  }
  RExp rand_e() {
    RExp e = rnot_e();
    while (is_sym("&&")) {
      next();
      e = rand_(e, rnot_e());
    }
    return e;
  }
  RExp rnot_e() {
    if (is_sym("!")) {
      next();
      return rnot(rnot_e());
    }
    return rcmp();
  }
  RExp rcmp() {
    RExp a = radd_e();
    const Token &t = peek();
    if (t.kind != Tok::Sym) return a;
    ROp op;
    bool neg = false;
    if (t.text == "=" || t.text == "==") op = ROp::Eq;
    else if (t.text == "!=") { op = ROp::Eq; neg = true; }
    else if (t.text == "<") op = ROp::Lt;
    else if (t.text == "<=") op = ROp::Le;
    else if (t.text == ">") op = ROp::Gt;
    else if (t.text == ">=") op = ROp::Ge;
    else return a;
    next();
    RExp r = rbin(op, a, radd_e());
    return neg ? rnot(r) : r;
  }
  RExp radd_e() {
    RExp e = rmul_e();
    while (is_sym("+") || is_sym("-")) {
      bool plus = next().text == "+";
      RExp r = rmul_e();
      e = plus ? radd(e, r) : rsub(e, r);
    }
    return e;
  }
  RExp rmul_e() {
    RExp e = runary();
    while (is_sym("*")) {
      next();
      e = rmul(e, runary());
    }
    return e;
  }
  RExp runary() {
    if (is_sym("-")) {
      next();
      if (peek().kind == Tok::Int) return rint(-next().val);
      return rsub(rint(0), runary());
    }
    return ratom();
  }
  RExp ratom() {
    const Token &t = peek();
    if (t.kind == Tok::Int) return rint(next().val);
    if (is_kw("true")) { next(); return rbool(true); }
    if (is_kw("false")) { next(); return rbool(false); }
    if (is_sym("@")) {
      next();
      if (peek().kind != Tok::Int) fail({"location id"});
      return rloc(next().val);
    }
    if (t.kind == Tok::KVar) {
      std::string k = next().text;
      expect_sym("(");
      std::vector<RExp> args;
      if (!is_sym(")")) {
        args.push_back(rexpr());
        while (is_sym(",")) { next(); args.push_back(rexpr()); }
      }
      expect_sym(")");
      return rkapp(k, std::move(args));
    }
    if (is_sym("(")) {
      next();
      RExp e = rexpr();
      expect_sym(")");
      return e;
    }
    if (is_ident()) return rvar(next().text);
    fail({"refinement expression"});
  }

  // types

  Sort sort() {
    if (is_kw("int")) { next(); return Sort::Int; }
    if (is_kw("bool")) { next(); return Sort::Bool; }
    if (is_kw("loc")) { next(); return Sort::Loc; }
    fail({"'int'", "'bool'", "'loc'"});
  }

  bool at_base() const { return is_kw("int") || is_kw("bool") || is_kw("Vec"); }

  BaseType base() {
    if (is_kw("int")) { next(); return b_int(); }
    if (is_kw("bool")) { next(); return b_bool(); }
    if (is_kw("Vec")) {
      next();
      expect_sym("<");
      TypeP el = type();
      expect_sym(">");
      return b_vec(el);
    }
    fail({"'int'", "'bool'", "'Vec'"});
  }

  Loc loc() {
    if (is_sym("@")) {
      next();
      if (peek().kind != Tok::Int) fail({"location id"});
      return Loc::conc(next().val);
    }
    return Loc::abs(ident());
  }

  TypeP type() {
    if (is_sym("{")) {
      next();
      std::string b = ident();
      expect_sym(".");
      BaseType bt = base();
      expect_sym("[");
      std::string b2 = ident();
      if (b2 != b) throw ParseError("existential index must be its binder '" + b + "'",
                                    toks_[pos_ - 1].span, {b});
      expect_sym("]");
      expect_sym("|");
      RExp p = rexpr();
      expect_sym("}");
      return t_exists(b, bt, p);
    }
    if (is_kw("ptr")) {
      next();
      expect_sym("(");
      Loc l = loc();
      expect_sym(")");
      return t_ptr(l);
    }
    if (is_sym("&")) {
      next();
      RefMode m;
      if (is_kw("mut") || (peek().kind == Tok::Ident && peek().text == "mut")) m = RefMode::Mut;
      else if (peek().kind == Tok::Ident && peek().text == "shr") m = RefMode::Shr;
      else fail({"'mut'", "'shr'"});
      next();
      return t_ref(m, type());
    }
    if (is_kw("uninit")) {
      next();
      expect_sym("(");
      if (peek().kind != Tok::Int) fail({"integer"});
      Span sp = peek().span;
      int64_t n = next().val;
      if (n < 1) throw ParseError("uninit size must be positive", sp, {});
      expect_sym(")");
      return t_uninit(n);
    }
    if (is_kw("fn")) {
      next();
      return t_fn(sig());
    }
    if (at_base()) {
      BaseType bt = base();
      if (is_sym("[")) {
        next();
        RExp e = rexpr();
        expect_sym("]");
        return t_indexed(bt, e);
      }
      return t_exists("v", bt, rbool(true));
    }
    fail({"type"});
  }

  LocCtx locctx() {
    LocCtx out;
    do {
      if (!out.empty()) next();
      Loc l = loc();
      expect_sym("->");
      out.push_back(LocBind{l, type()});
    } while (is_sym(","));
    return out;
  }

  bool at_locctx() const {
    return (peek().kind == Tok::Ident && is_sym("->", 1)) ||
           (is_sym("@") && peek(1).kind == Tok::Int && is_sym("->", 2));
  }

  std::vector<Param> rparams() {
    std::vector<Param> ps;
    do {
      if (!ps.empty()) next();
      std::string n = ident();
      expect_sym(":");
      ps.emplace_back(n, sort());
    } while (is_sym(","));
    return ps;
  }

  SigP sig() {
    auto s = std::make_shared<FnSig>();
    s->requires_ = rbool(true);
    if (is_sym("{")) {
      next();
      if (is_ident() && is_sym(":", 1)) s->params = rparams();
      if (is_sym("|")) {
        next();
        if (at_locctx()) {
          s->in = locctx();
        } else {
          s->requires_ = rexpr();
          if (is_sym("|")) {
            next();
            s->in = locctx();
          }
        }
      }
      expect_sym("}");
    }
    expect_sym("(");
    if (!is_sym(")")) {
      s->args.push_back(type());
      while (is_sym(",")) { next(); s->args.push_back(type()); }
    }
    expect_sym(")");
    expect_sym("->");
    s->ret = type();
    if (is_sym(";")) {
      next();
      s->out = locctx();
    }
    return s;
  }

  // expressions

  std::shared_ptr<Expr> node(EKind k, Span sp) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->span = sp;
    return e;
  }

  std::string fresh_tmp() { return "_t" + std::to_string(tmp_counter_++); }

  ExprP expr() {
    Span sp = peek().span;
    if (is_kw("let")) {
      next();
      std::string x = ident();
      expect_sym("=");
      if (is_kw("new") && is_sym("(", 1)) {
        next();
        expect_sym("(");
        std::string l = ident();
        expect_sym(")");
        expect_kw("in");
        auto e = node(EKind::LetNew, sp);
        e->x = x;
        e->a = l;
        e->e1 = expr();
        return e;
      }
      ExprP bound = expr();
      expect_kw("in");
      return e_let(x, bound, expr(), sp);
    }
    if (is_kw("unpack")) {
      next();
      expect_sym("(");
      std::string x = ident();
      expect_sym(",");
      std::string a = ident();
      expect_sym(")");
      expect_kw("in");
      auto e = node(EKind::Unpack, sp);
      e->x = x;
      e->a = a;
      e->e1 = expr();
      return e;
    }
    ExprP s = stmt();
    if (is_sym(";")) {
      next();
      return e_let("_", s, expr(), sp);
    }
    return s;
  }

  ExprP stmt() {
    Span sp = peek().span;
    if (is_ident() && is_sym(":=", 1)) {
      std::string x = next().text;
      next();
      auto e = node(EKind::Assign, sp);
      e->place.kind = Place::Var;
      e->place.var = x;
      e->e1 = (is_kw("let") || is_kw("unpack")) ? expr() : infix();
      return e;
    }
    return infix();
  }

  // Builds `let` wrappers so every operand is an A-value.
  ExprP bind_avals(std::vector<ExprP> &operands, std::shared_ptr<Expr> call) {
    std::vector<std::pair<std::string, ExprP>> binds;
    for (auto &o : operands) {
      if (is_aval(o)) {
        call->args.push_back(o);
      } else {
        std::string t = fresh_tmp();
        binds.emplace_back(t, o);
        call->args.push_back(e_var(t, o->span));
      }
    }
    ExprP out = call;
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      out = e_let(it->first, it->second, out, it->second->span);
    return out;
  }

  ExprP prim_call(const std::string &prim, ExprP a, ExprP b, Span sp) {
    auto call = node(EKind::Call, sp);
    call->e1 = e_var(prim, sp);
    std::vector<ExprP> ops{a, b};
    return bind_avals(ops, call);
  }

  ExprP infix() {
    Span sp = peek().span;
    ExprP a = addexpr();
    const char *prim = nullptr;
    if (is_sym("<")) prim = "lt";
    else if (is_sym("<=")) prim = "le";
    else if (is_sym(">")) prim = "gt";
    else if (is_sym(">=")) prim = "ge";
    else if (is_sym("==")) prim = "eq";
    if (!prim) return a;
    next();
    return prim_call(prim, a, addexpr(), sp);
  }

  ExprP addexpr() {
    Span sp = peek().span;
    ExprP a = mulexpr();
    while (is_sym("+") || is_sym("-")) {
      const char *prim = next().text == "+" ? "add" : "sub";
      a = prim_call(prim, a, mulexpr(), sp);
    }
    return a;
  }

  ExprP mulexpr() {
    Span sp = peek().span;
    ExprP a = atom();
    while (is_sym("*")) {
      next();
      a = prim_call("mul", a, atom(), sp);
    }
    return a;
  }

  Place place_var() {
    Place p;
    p.kind = Place::Var;
    p.var = ident();
    return p;
  }

  ExprP atom() {
    Span sp = peek().span;
    if (is_kw("if")) {
      next();
      auto e = node(EKind::If, sp);
      e->e1 = expr();
      expect_sym("{");
      e->e2 = expr();
      expect_sym("}");
      expect_kw("else");
      expect_sym("{");
      e->e3 = expr();
      expect_sym("}");
      return e;
    }
    if (is_kw("call")) {
      next();
      auto call = node(EKind::Call, sp);
      if (is_sym("(")) {
        next();
        call->e1 = expr();
        expect_sym(")");
      } else if (is_kw("vec_new") || is_kw("vec_push") || is_kw("vec_index_mut")) {
        call->e1 = e_val(value(), peek().span);
      } else if (is_kw("rec")) {
        call->e1 = e_val(value(), peek().span);
      } else {
        Span csp = peek().span;
        call->e1 = e_var(ident(), csp);
      }
      if (is_sym("<")) {
        next();
        call->targs.push_back(type());
        while (is_sym(",")) { next(); call->targs.push_back(type()); }
        expect_sym(">");
      }
      if (is_sym("{")) {
        next();
        if (!is_sym("}")) {
          call->refargs.push_back(rexpr());
          while (is_sym(",")) { next(); call->refargs.push_back(rexpr()); }
        }
        expect_sym("}");
      }
      expect_sym("(");
      std::vector<ExprP> ops;
      if (!is_sym(")")) {
        ops.push_back(expr());
        while (is_sym(",")) { next(); ops.push_back(expr()); }
      }
      expect_sym(")");
      return bind_avals(ops, call);
    }
    if (is_sym("&")) {
      next();
      if (peek().kind != Tok::Ident) fail({"'strg'", "'mut'", "'shr'"});
      std::string m = peek().text;
      EKind k;
      if (m == "strg") k = EKind::BorrowStrg;
      else if (m == "mut") k = EKind::BorrowMut;
      else if (m == "shr") k = EKind::BorrowShr;
      else fail({"'strg'", "'mut'", "'shr'"});
      next();
      auto e = node(k, sp);
      e->place = place_var();
      return e;
    }
    if (is_sym("*")) {
      next();
      auto e = node(EKind::Deref, sp);
      e->place = place_var();
      return e;
    }
    if (is_sym("(")) {
      next();
      ExprP e = expr();
      expect_sym(")");
      return e;
    }
    if (is_ident()) return e_var(next().text, sp);
    return e_val(value(), sp);
  }

  ValueP value() {
    Span sp = peek().span;
    if (peek().kind == Tok::Int) return v_int(next().val);
    if (is_sym("-") && peek(1).kind == Tok::Int) {
      next();
      return v_int(-next().val);
    }
    if (is_kw("true")) { next(); return v_bool(true); }
    if (is_kw("false")) { next(); return v_bool(false); }
    if (is_kw("poison")) { next(); return v_poison(); }
    if (is_kw("vec_new")) { next(); return v_builtin(VKind::VecNew); }
    if (is_kw("vec_push")) { next(); return v_builtin(VKind::VecPush); }
    if (is_kw("vec_index_mut")) { next(); return v_builtin(VKind::VecIndexMut); }
    if (is_kw("rec")) {
      next();
      auto v = std::make_shared<Value>();
      v->kind = VKind::Rec;
      v->span = sp;
      v->name = ident();
      if (is_sym("{")) {
        next();
        if (!is_sym("}")) v->rparams = rparams();
        expect_sym("}");
      }
      expect_sym("(");
      while (!is_sym(")")) {
        v->argnames.push_back(ident());
        if (is_sym(",")) next();
      }
      expect_sym(")");
      if (is_sym(":")) {
        next();
        expect_kw("fn");
        v->sig = sig();
      }
      expect_sym(":=");
      v->body = expr();
      return v;
    }
    fail({"expression"});
  }

  FnDecl fndecl() {
    FnDecl d;
    d.span = peek().span;
    expect_kw("fn");
    d.name = ident();
    d.sig = sig();
    expect_sym(":=");
    ExprP body = expr();
    if (body->kind != EKind::Val || body->val->kind != VKind::Rec)
      throw ParseError("function '" + d.name + "' must be defined by a rec value",
                       body->span, {"'rec'"});
    d.rec = body->val;
    return d;
  }
};

}  // namespace

Program parse_program(const std::string &source, const std::string &file) {
  Parser p(source);
  return p.program(file);
}

RExp parse_refexpr(const std::string &source) {
  Parser p(source);
  return p.refexpr_only();
}

TypeP parse_type(const std::string &source) {
  Parser p(source);
  return p.type_only();
}

ExprP parse_expr(const std::string &source) {
  Parser p(source);
  return p.expr_only();
}

}  // namespace lr
