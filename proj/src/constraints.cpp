// SPDX-License-Identifier: Apache-2.0
#include "lr/constraints.hpp"

#include <set>
#include <sstream>

#include "json.hpp"
#include "lr/eval.hpp"
#include "lr/parser.hpp"
#include "lr/printer.hpp"

namespace lr {

CP c_forall(const std::string &b, Sort s, Pred hyp, CP body) {
  auto c = std::make_shared<Constraint>();
  c->kind = CKind::ForAll;
  c->binder = b;
  c->sort = s;
  c->hyp = hyp ? std::move(hyp) : rbool(true);
  c->kids = {std::move(body)};
  return c;
}

CP c_implies(Pred hyp, CP body) {
  auto c = std::make_shared<Constraint>();
  c->kind = CKind::Implies;
  c->hyp = std::move(hyp);
  c->kids = {std::move(body)};
  return c;
}

CP c_conj(std::vector<CP> cs) {
  if (cs.size() == 1) return cs[0];
  auto c = std::make_shared<Constraint>();
  c->kind = CKind::Conj;
  c->kids = std::move(cs);
  return c;
}

CP c_head(Pred goal, Provenance prov) {
  auto c = std::make_shared<Constraint>();
  c->kind = CKind::Head;
  c->goal = std::move(goal);
  c->prov = std::move(prov);
  return c;
}

CP c_true() { return c_conj({}); }

bool has_kapp(const Pred &p) {
  if (p->op == ROp::KApp) return true;
  for (const auto &a : p->args)
    if (has_kapp(a)) return true;
  return false;
}

void collect_kapps(const Pred &p, std::vector<RExp> &out) {
  if (p->op == ROp::KApp) {
    out.push_back(p);
    return;
  }
  for (const auto &a : p->args) collect_kapps(a, out);
}

namespace {

void split_and(const Pred &p, std::vector<Pred> &out) {
  if (p->op == ROp::And) {
    split_and(p->args[0], out);
    split_and(p->args[1], out);
  } else if (!is_true(p)) {
    out.push_back(p);
  }
}

bool trivially_true(const Pred &p) {
  if (is_true(p)) return true;
  if (p->op == ROp::Eq && requal(p->args[0], p->args[1])) return true;
  if (p->op == ROp::Le || p->op == ROp::Ge)
    if (requal(p->args[0], p->args[1])) return true;
  if (has_kapp(p) || !free_vars(p).empty()) return false;
  try {
    return eval_bool(p, {});
  } catch (const EvalError &) {
    return false;
  }
}

Sort guess_sort(const RExp &e) {
  switch (e->op) {
    case ROp::IntC: case ROp::Add: case ROp::Sub: case ROp::Mul: return Sort::Int;
    case ROp::LocC: return Sort::Loc;
    default: return Sort::Bool;
  }
}

CP norm_head(const CP &h) {
  std::vector<Pred> parts;
  split_and(h->goal, parts);
  std::vector<CP> out;
  for (const auto &p : parts) {
    if (trivially_true(p)) continue;
    if (p->op != ROp::KApp) {
      out.push_back(c_head(p, h->prov));
      continue;
    }
    // κ(e1, ..) with non-variable e_i becomes ∀v. v = e_i ⇒ κ(v, ..)
    std::set<std::string> avoid = free_vars(p);
    std::vector<RExp> args = p->args;
    std::vector<std::tuple<std::string, Sort, RExp>> binds;
    for (auto &a : args) {
      if (a->op == ROp::Var) continue;
      std::string v = fresh_name("v", avoid);
      avoid.insert(v);
      binds.emplace_back(v, guess_sort(a), a);
      a = rvar(v);
    }
    CP c = c_head(rkapp(p->name, args), h->prov);
    for (auto it = binds.rbegin(); it != binds.rend(); ++it) {
      auto &[v, s, a] = *it;
      c = c_forall(v, s, req(rvar(v), a), c);
    }
    out.push_back(c);
  }
  return c_conj(std::move(out));
}

void flatten_into(const CP &c, std::vector<CP> &out) {
  if (c->kind == CKind::Conj) {
    for (const auto &k : c->kids) flatten_into(k, out);
  } else {
    out.push_back(c);
  }
}

CP subst_c(const CP &c, const std::string &a, const RExp &e) {
  auto n = std::make_shared<Constraint>(*c);
  if (n->hyp) n->hyp = subst(n->hyp, a, e);
  if (n->goal) n->goal = subst(n->goal, a, e);
  if (c->kind == CKind::ForAll && c->binder == a) return n;
  for (auto &k : n->kids) k = subst_c(k, a, e);
  return n;
}

}  // namespace

CP normalize(const CP &c) {
  switch (c->kind) {
    case CKind::Head: return norm_head(c);
    case CKind::Conj: {
      std::vector<CP> out;
      for (const auto &k : c->kids) flatten_into(normalize(k), out);
      return c_conj(std::move(out));
    }
    case CKind::ForAll:
    case CKind::Implies: {
      CP body = normalize(c->kids[0]);
      std::vector<CP> parts;
      flatten_into(body, parts);
      std::vector<CP> out;
      for (const auto &p : parts) {
        if (c->kind == CKind::ForAll) out.push_back(c_forall(c->binder, c->sort, c->hyp, p));
        else out.push_back(c_implies(c->hyp, p));
      }
      return c_conj(std::move(out));
    }
  }
  return c;
}

size_t count_heads(const CP &c) {
  if (c->kind == CKind::Head) return 1;
  size_t n = 0;
  for (const auto &k : c->kids) n += count_heads(k);
  return n;
}

namespace {

void clauses_rec(const CP &c, std::vector<Param> &binders, std::vector<Pred> &hyps,
                 std::vector<Clause> &out, int &next) {
  switch (c->kind) {
    case CKind::Head: {
      Clause cl;
      cl.id = next++;
      cl.binders = binders;
      cl.hyps = hyps;
      cl.head = c->goal;
      cl.prov = c->prov;
      out.push_back(std::move(cl));
      return;
    }
    case CKind::Conj:
      for (const auto &k : c->kids) clauses_rec(k, binders, hyps, out, next);
      return;
    case CKind::ForAll: {
      CP body = c->kids[0];
      Pred hyp = c->hyp;
      std::string b = c->binder;
      bool clash = false;
      for (const auto &p : binders) clash = clash || p.first == b;
      if (clash) {
        std::set<std::string> avoid;
        for (const auto &p : binders) avoid.insert(p.first);
        std::string nb = fresh_name(b, avoid);
        hyp = subst(hyp, b, rvar(nb));
        body = subst_c(body, b, rvar(nb));
        b = nb;
      }
      binders.emplace_back(b, c->sort);
      size_t hs = hyps.size();
      split_and(hyp, hyps);
      clauses_rec(body, binders, hyps, out, next);
      hyps.resize(hs);
      binders.pop_back();
      return;
    }
    case CKind::Implies: {
      size_t hs = hyps.size();
      split_and(c->hyp, hyps);
      clauses_rec(c->kids[0], binders, hyps, out, next);
      hyps.resize(hs);
      return;
    }
  }
}

}  // namespace

std::vector<Clause> clauses(const CP &c, int first_id) {
  std::vector<Clause> out;
  std::vector<Param> binders;
  std::vector<Pred> hyps;
  int next = first_id;
  clauses_rec(c, binders, hyps, out, next);
  return out;
}

Pred apply_solution(const Pred &p, const Solution &s) {
  if (p->op == ROp::KApp) {
    auto it = s.find(p->name);
    if (it == s.end()) throw MissingKVar("no solution for $" + p->name);
    const KSol &k = it->second;
    if (k.params.size() != p->args.size())
      throw MissingKVar("arity mismatch for $" + p->name);
    RSubst th;
    for (size_t i = 0; i < k.params.size(); ++i) th[k.params[i]] = p->args[i];
    return subst_all(k.pred, th);
  }
  if (p->args.empty()) return p;
  auto n = std::make_shared<RefExpr>(*p);
  for (auto &a : n->args) a = apply_solution(a, s);
  return n;
}

CP apply_solution(const CP &c, const Solution &s) {
  auto n = std::make_shared<Constraint>(*c);
  if (n->hyp) n->hyp = apply_solution(n->hyp, s);
  if (n->goal) n->goal = apply_solution(n->goal, s);
  for (auto &k : n->kids) k = apply_solution(k, s);
  return n;
}

Clause apply_solution(const Clause &c, const Solution &s) {
  Clause n = c;
  for (auto &h : n.hyps) h = apply_solution(h, s);
  n.head = apply_solution(n.head, s);
  return n;
}

// qualifiers

std::vector<Qualifier> default_qualifiers() {
  auto v = rvar("v"), m = rvar("m");
  std::vector<Qualifier> q;
  auto add = [&](const char *n, RExp t, Sort vs, bool um, Sort ms) {
    q.push_back(Qualifier{n, std::move(t), vs, um, ms});
  };
  add("nonneg", rge(v, rint(0)), Sort::Int, false, Sort::Int);
  add("pos", rgt(v, rint(0)), Sort::Int, false, Sort::Int);
  add("eq", req(v, m), Sort::Int, true, Sort::Int);
  add("le", rle(v, m), Sort::Int, true, Sort::Int);
  add("lt", rlt(v, m), Sort::Int, true, Sort::Int);
  add("ge", rge(v, m), Sort::Int, true, Sort::Int);
  add("gt", rgt(v, m), Sort::Int, true, Sort::Int);
  add("succ", req(v, radd(m, rint(1))), Sort::Int, true, Sort::Int);
  add("pred", req(v, rsub(m, rint(1))), Sort::Int, true, Sort::Int);
  add("true", v, Sort::Bool, false, Sort::Bool);
  add("false", rnot(v), Sort::Bool, false, Sort::Bool);
  add("beq", req(v, m), Sort::Bool, true, Sort::Bool);
  return q;
}

Qualifier parse_qualifier(const std::string &text) {
  RExp t = parse_refexpr(text);
  auto fv = free_vars(t);
  if (!fv.count("v")) throw std::runtime_error("qualifier must mention v: " + text);
  for (const auto &n : fv)
    if (n != "v" && n != "m")
      throw std::runtime_error("qualifier may only mention v and m: " + text);
  bool um = fv.count("m") > 0;
  for (Sort vs : {Sort::Int, Sort::Bool}) {
    for (Sort ms : {Sort::Int, Sort::Bool}) {
      if (!um && ms == Sort::Bool) continue;
      SortEnv env{{"v", vs}};
      if (um) env["m"] = ms;
      try {
        if (sortcheck(env, t) == Sort::Bool) return Qualifier{text, t, vs, um, ms};
      } catch (const SortError &) {
      }
    }
  }
  throw std::runtime_error("qualifier does not sort-check: " + text);
}

std::vector<Pred> instantiate_qualifiers(const KVar &k, const std::vector<Qualifier> &qs) {
  std::vector<Pred> out;
  auto push = [&](const Pred &p) {
    for (const auto &o : out)
      if (requal(o, p)) return;
    out.push_back(p);
  };
  for (size_t i = 0; i < k.nvalue && i < k.params.size(); ++i) {
    const auto &[nu, s] = k.params[i];
    for (const auto &q : qs) {
      if (q.vsort != s) continue;
      if (!q.uses_m) {
        push(subst_all(q.tmpl, RSubst{{"v", rvar(nu)}}));
        continue;
      }
      for (size_t j = 0; j < k.params.size(); ++j) {
        if (j == i || k.params[j].second != q.msort) continue;
        push(subst_all(q.tmpl, RSubst{{"v", rvar(nu)}, {"m", rvar(k.params[j].first)}}));
      }
    }
  }
  return out;
}

// dumps

std::string print_clause(const Clause &c) {
  std::ostringstream os;
  os << "clause " << c.id << " [";
  for (size_t i = 0; i < c.binders.size(); ++i)
    os << (i ? ", " : "") << c.binders[i].first << ':' << sort_name(c.binders[i].second);
  os << "] [";
  for (size_t i = 0; i < c.hyps.size(); ++i) os << (i ? "; " : "") << print_rexp(c.hyps[i]);
  os << "] => " << print_rexp(c.head) << " @ " << c.prov.file << ':' << c.prov.span.line << ':'
     << c.prov.span.col << ' ' << c.prov.rule;
  return os.str();
}

std::string print_clauses(const std::vector<Clause> &cs) {
  std::string out;
  for (const auto &c : cs) out += print_clause(c) + "\n";
  return out;
}

std::string clauses_json(const std::vector<Clause> &cs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &c : cs) {
    nlohmann::ordered_json o;
    o["id"] = c.id;
    auto bs = nlohmann::ordered_json::array();
    for (const auto &[n, s] : c.binders) bs.push_back({{"name", n}, {"sort", sort_name(s)}});
    o["binders"] = bs;
    auto hs = nlohmann::ordered_json::array();
    for (const auto &h : c.hyps) hs.push_back(print_rexp(h));
    o["hyps"] = hs;
    o["head"] = print_rexp(c.head);
    o["file"] = c.prov.file;
    o["line"] = c.prov.span.line;
    o["col"] = c.prov.span.col;
    o["rule"] = c.prov.rule;
    arr.push_back(o);
  }
  return arr.dump(2);
}

namespace {

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Sort parse_sort(const std::string &s) {
  if (s == "int") return Sort::Int;
  if (s == "bool") return Sort::Bool;
  if (s == "loc") return Sort::Loc;
  throw std::runtime_error("bad sort '" + s + "'");
}

}  // namespace

std::vector<Clause> parse_clause_dump(const std::string &text) {
  std::vector<Clause> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.rfind("clause ", 0) != 0) continue;
    Clause c;
    size_t p = 7;
    size_t sp = line.find(' ', p);
    c.id = std::stoi(line.substr(p, sp - p));
    size_t b0 = line.find('[', sp), b1 = line.find(']', b0);
    std::string bs = line.substr(b0 + 1, b1 - b0 - 1);
    std::istringstream bss(bs);
    std::string item;
    while (std::getline(bss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      size_t colon = item.find(':');
      c.binders.emplace_back(item.substr(0, colon), parse_sort(item.substr(colon + 1)));
    }
    size_t h0 = line.find('[', b1), h1 = line.find(']', h0);
    std::string hs = line.substr(h0 + 1, h1 - h0 - 1);
    std::istringstream hss(hs);
    while (std::getline(hss, item, ';')) {
      item = trim(item);
      if (!item.empty()) c.hyps.push_back(parse_refexpr(item));
    }
    size_t arrow = line.find("=> ", h1);
    size_t at = line.rfind(" @ ");
    c.head = parse_refexpr(line.substr(arrow + 3, at - arrow - 3));
    std::string prov = line.substr(at + 3);
    size_t sp2 = prov.rfind(' ');
    c.prov.rule = prov.substr(sp2 + 1);
    std::string loc = prov.substr(0, sp2);
    size_t c2 = loc.rfind(':');
    size_t c1 = loc.rfind(':', c2 - 1);
    c.prov.file = loc.substr(0, c1);
    c.prov.span.line = std::stoi(loc.substr(c1 + 1, c2 - c1 - 1));
    c.prov.span.col = std::stoi(loc.substr(c2 + 1));
    out.push_back(std::move(c));
  }
  return out;
}

std::string print_kvar_solution(const KVar &k, const Pred &p) {
  std::ostringstream os;
  os << "kappa " << k.id << '(';
  for (size_t i = 0; i < k.params.size(); ++i) os << (i ? ", " : "") << k.params[i].first;
  os << ") := " << print_rexp(p);
  return os.str();
}

bool clause_equal(const Clause &a, const Clause &b) {
  if (a.id != b.id || a.binders != b.binders || a.hyps.size() != b.hyps.size()) return false;
  for (size_t i = 0; i < a.hyps.size(); ++i)
    if (!requal(a.hyps[i], b.hyps[i])) return false;
  return requal(a.head, b.head) && a.prov.file == b.prov.file &&
         a.prov.span.line == b.prov.span.line && a.prov.span.col == b.prov.span.col &&
         a.prov.rule == b.prov.rule;
}

}  // namespace lr
