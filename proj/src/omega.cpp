// SPDX-License-Identifier: Apache-2.0
// Built-in decision procedure: NNF + disjunctive search over literals, with the
// Omega test deciding each conjunction of linear integer constraints.
#include <algorithm>
#include <numeric>

#include "lr/oracle.hpp"
#include "lr/printer.hpp"

namespace lr {

namespace {

struct Overflow {};

int64_t ck_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
  return r;
}
int64_t ck_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
  return r;
}
int64_t ck_neg(int64_t a) { return ck_mul(a, -1); }

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(ck_neg(a), b); }

// symmetric residue in (-b/2, b/2]
int64_t mod_hat(int64_t a, int64_t b) {
  return ck_add(a, ck_neg(ck_mul(b, floor_div(ck_add(ck_mul(2, a), b), ck_mul(2, b)))));
}

// Σ co[x]·x + c
struct Lin {
  std::map<int, int64_t> co;
  int64_t c = 0;

  void add_term(int v, int64_t k) {
    int64_t n = ck_add(co[v], k);
    if (n == 0) co.erase(v);
    else co[v] = n;
  }
  Lin scaled(int64_t k) const {
    Lin r;
    r.c = ck_mul(c, k);
    if (k != 0)
      for (const auto &[v, a] : co) r.co[v] = ck_mul(a, k);
    return r;
  }
  Lin plus(const Lin &o) const {
    Lin r = *this;
    r.c = ck_add(r.c, o.c);
    for (const auto &[v, a] : o.co) r.add_term(v, a);
    return r;
  }
  int64_t coef(int v) const {
    auto it = co.find(v);
    return it == co.end() ? 0 : it->second;
  }
  // Replace v by e.
  Lin subst(int v, const Lin &e) const {
    int64_t a = coef(v);
    if (a == 0) return *this;
    Lin r = *this;
    r.co.erase(v);
    return r.plus(e.scaled(a));
  }
};

using Model = std::map<int, int64_t>;

int64_t eval_lin(const Lin &l, Model &m) {
  int64_t r = l.c;
  for (const auto &[v, a] : l.co) r = ck_add(r, ck_mul(a, m[v]));
  return r;
}

enum class Res { Sat, Unsat, Unknown };

class Omega {
public:
  explicit Omega(int next_var, size_t budget) : next_var_(next_var), budget_(budget) {}

  Res solve(std::vector<Lin> eqs, std::vector<Lin> ineqs, Model &model) {
    if (budget_ == 0) return Res::Unknown;
    --budget_;
    // normalize
    std::vector<Lin> E, I;
    for (auto &e : eqs) {
      int st = norm_eq(e);
      if (st < 0) return Res::Unsat;
      if (st > 0) E.push_back(std::move(e));
    }
    for (auto &e : ineqs) {
      int st = norm_ineq(e);
      if (st < 0) return Res::Unsat;
      if (st > 0) I.push_back(std::move(e));
    }
    if (!E.empty()) return eliminate_eq(std::move(E), std::move(I), model);
    return solve_ineqs(std::move(I), model);
  }

private:
  int next_var_;
  size_t budget_;

  static int64_t coef_gcd(const Lin &l) {
    int64_t g = 0;
    for (const auto &[v, a] : l.co) g = std::gcd(g, a < 0 ? -a : a);
    return g;
  }

  // -1 unsat, 0 trivially true, 1 keep
  static int norm_eq(Lin &e) {
    if (e.co.empty()) return e.c == 0 ? 0 : -1;
    int64_t g = coef_gcd(e);
    if (e.c % g != 0) return -1;
    if (g > 1) {
      for (auto &[v, a] : e.co) a /= g;
      e.c /= g;
    }
    return 1;
  }
  static int norm_ineq(Lin &e) {
    if (e.co.empty()) return e.c >= 0 ? 0 : -1;
    int64_t g = coef_gcd(e);
    if (g > 1) {
      for (auto &[v, a] : e.co) a /= g;
      e.c = floor_div(e.c, g);
    }
    return 1;
  }

  Res eliminate_eq(std::vector<Lin> E, std::vector<Lin> I, Model &model) {
    // pick the equality with the smallest coefficient
    size_t best = 0;
    int64_t bestabs = INT64_MAX;
    for (size_t i = 0; i < E.size(); ++i)
      for (const auto &[v, a] : E[i].co) {
        int64_t aa = a < 0 ? -a : a;
        if (aa < bestabs) { bestabs = aa; best = i; }
      }
    Lin e = E[best];
    int k = -1;
    int64_t ak = 0;
    for (const auto &[v, a] : e.co) {
      int64_t aa = a < 0 ? -a : a;
      if (k < 0 || aa < (ak < 0 ? -ak : ak)) { k = v; ak = a; }
    }
    Lin xk;  // expression for x_k
    if (ak == 1 || ak == -1) {
      E.erase(E.begin() + static_cast<long>(best));
      Lin rest = e;
      rest.co.erase(k);
      xk = rest.scaled(-ak);
    } else {
      int64_t m = (ak < 0 ? -ak : ak) + 1;
      int sigma = next_var_++;
      int64_t sg = ak < 0 ? -1 : 1;
      Lin r;
      for (const auto &[v, a] : e.co)
        if (v != k) r.co[v] = mod_hat(a, m);
      r.c = mod_hat(e.c, m);
      for (auto it = r.co.begin(); it != r.co.end();) {
        if (it->second == 0) it = r.co.erase(it);
        else ++it;
      }
      r.add_term(sigma, ck_neg(m));
      xk = r.scaled(sg);
    }
    for (auto &o : E) o = o.subst(k, xk);
    for (auto &o : I) o = o.subst(k, xk);
    Res res = solve(std::move(E), std::move(I), model);
    if (res == Res::Sat) model[k] = eval_lin(xk, model);
    return res;
  }

  struct Bounds {
    std::vector<Lin> lo, up, rest;  // lo: a>0, up: a<0
  };

  static Bounds split(const std::vector<Lin> &I, int x) {
    Bounds b;
    for (const auto &c : I) {
      int64_t a = c.coef(x);
      if (a > 0) b.lo.push_back(c);
      else if (a < 0) b.up.push_back(c);
      else b.rest.push_back(c);
    }
    return b;
  }

  // Chooses x in the bounds given values for every other variable.
  static bool pick_value(const Bounds &b, int x, Model &m) {
    bool has_lo = false, has_hi = false;
    int64_t lo = 0, hi = 0;
    for (const auto &c : b.lo) {
      Lin r = c;
      int64_t a = r.coef(x);
      r.co.erase(x);
      int64_t v = ceil_div(ck_neg(eval_lin(r, m)), a);
      if (!has_lo || v > lo) lo = v;
      has_lo = true;
    }
    for (const auto &c : b.up) {
      Lin r = c;
      int64_t a = -r.coef(x);
      r.co.erase(x);
      int64_t v = floor_div(eval_lin(r, m), a);
      if (!has_hi || v < hi) hi = v;
      has_hi = true;
    }
    if (has_lo && has_hi && lo > hi) return false;
    m[x] = has_lo ? lo : (has_hi ? hi : 0);
    return true;
  }

  Res solve_ineqs(std::vector<Lin> I, Model &model) {
    if (I.empty()) return Res::Sat;
    // tighten duplicates and detect opposite pairs
    std::map<std::map<int, int64_t>, int64_t> tight;
    for (const auto &c : I) {
      auto it = tight.find(c.co);
      if (it == tight.end() || c.c < it->second) tight[c.co] = c.c;
    }
    std::vector<Lin> J;
    for (const auto &[co, c] : tight) {
      std::map<int, int64_t> neg;
      for (const auto &[v, a] : co) neg[v] = -a;
      auto it = tight.find(neg);
      if (it != tight.end()) {
        int64_t s = ck_add(c, it->second);
        if (s < 0) return Res::Unsat;
        if (s == 0) {
          Lin e;
          e.co = co;
          e.c = c;
          std::vector<Lin> rest;
          for (const auto &[co2, c2] : tight) {
            if (co2 == co || co2 == neg) continue;
            Lin l;
            l.co = co2;
            l.c = c2;
            rest.push_back(l);
          }
          return solve({e}, std::move(rest), model);
        }
      }
      Lin l;
      l.co = co;
      l.c = c;
      J.push_back(l);
    }
    std::set<int> vars;
    for (const auto &c : J)
      for (const auto &[v, a] : c.co) vars.insert(v);

    // unbounded direction: drop
    for (int x : vars) {
      Bounds b = split(J, x);
      if (b.lo.empty() || b.up.empty()) {
        Res r = solve({}, b.rest, model);
        if (r == Res::Sat && !pick_value(b, x, model)) return Res::Unknown;
        return r;
      }
    }
    // prefer exact elimination
    int best = -1;
    bool best_exact = false;
    size_t best_cost = SIZE_MAX;
    for (int x : vars) {
      Bounds b = split(J, x);
      bool lo1 = std::all_of(b.lo.begin(), b.lo.end(), [&](const Lin &c) { return c.coef(x) == 1; });
      bool up1 = std::all_of(b.up.begin(), b.up.end(), [&](const Lin &c) { return c.coef(x) == -1; });
      bool exact = lo1 || up1;
      size_t cost = b.lo.size() * b.up.size();
      if (best < 0 || (exact && !best_exact) || (exact == best_exact && cost < best_cost)) {
        best = x;
        best_exact = exact;
        best_cost = cost;
      }
    }
    int x = best;
    Bounds b = split(J, x);
    auto combine = [&](bool dark) {
      std::vector<Lin> out = b.rest;
      for (const auto &l : b.lo)
        for (const auto &u : b.up) {
          int64_t a = l.coef(x), bb = -u.coef(x);
          Lin rl = l, ru = u;
          rl.co.erase(x);
          ru.co.erase(x);
          Lin s = ru.scaled(a).plus(rl.scaled(bb));
          if (dark) s.c = ck_add(s.c, ck_neg(ck_mul(a - 1, bb - 1)));
          out.push_back(s);
        }
      return out;
    };
    if (best_exact) {
      Res r = solve({}, combine(false), model);
      if (r == Res::Sat && !pick_value(b, x, model)) return Res::Unknown;
      return r;
    }
    Model dm = model;
    Res dark = solve({}, combine(true), dm);
    if (dark == Res::Sat) {
      if (!pick_value(b, x, dm)) return Res::Unknown;
      model = dm;
      return Res::Sat;
    }
    Model rm = model;
    Res real = solve({}, combine(false), rm);
    if (real == Res::Unsat) return Res::Unsat;
    bool unknown = dark == Res::Unknown || real == Res::Unknown;
    // splinters
    int64_t amax = 0;
    for (const auto &u : b.up) amax = std::max(amax, -u.coef(x));
    for (const auto &l : b.lo) {
      int64_t a = l.coef(x);
      int64_t lim = floor_div(ck_add(ck_mul(amax, a), ck_neg(ck_add(amax, a))), amax);
      for (int64_t j = 0; j <= lim; ++j) {
        Lin e = l;
        e.c = ck_add(e.c, -j);
        Model sm = model;
        Res r = solve({e}, J, sm);
        if (r == Res::Sat) {
          model = sm;
          return Res::Sat;
        }
        if (r == Res::Unknown) unknown = true;
      }
    }
    return unknown ? Res::Unknown : Res::Unsat;
  }
};

// formulas

struct Atom {
  enum Kind { Ge, Eq, Bool } kind = Ge;  // lin >= 0, lin = 0, bool var
  Lin lin;
  int bvar = -1;
  bool neg = false;  // Bool only
};

struct F {
  enum Kind { And, Or, Lit, True, False } kind = True;
  std::vector<F> kids;
  Atom atom;
};

F f_and(F a, F b) {
  if (a.kind == F::False || b.kind == F::False) return F{F::False, {}, {}};
  if (a.kind == F::True) return b;
  if (b.kind == F::True) return a;
  return F{F::And, {std::move(a), std::move(b)}, {}};
}
F f_or(F a, F b) {
  if (a.kind == F::True || b.kind == F::True) return F{F::True, {}, {}};
  if (a.kind == F::False) return b;
  if (b.kind == F::False) return a;
  return F{F::Or, {std::move(a), std::move(b)}, {}};
}
F f_ge(Lin l) {
  if (l.co.empty()) return F{l.c >= 0 ? F::True : F::False, {}, {}};
  F f{F::Lit, {}, {}};
  f.atom.kind = Atom::Ge;
  f.atom.lin = std::move(l);
  return f;
}
F f_eq(Lin l) {
  if (l.co.empty()) return F{l.c == 0 ? F::True : F::False, {}, {}};
  F f{F::Lit, {}, {}};
  f.atom.kind = Atom::Eq;
  f.atom.lin = std::move(l);
  return f;
}

struct Unsupported {
  std::string why;
};

class Translator {
public:
  SortEnv env;
  std::map<std::string, int> ivars, bvars;
  std::vector<std::string> inames, bnames;
  std::map<std::string, std::pair<int, std::pair<RExp, RExp>>> products;
  bool nonlinear = false;

  int ivar(const std::string &n) {
    auto it = ivars.find(n);
    if (it != ivars.end()) return it->second;
    int id = static_cast<int>(inames.size());
    inames.push_back(n);
    ivars[n] = id;
    return id;
  }
  int bvar(const std::string &n) {
    auto it = bvars.find(n);
    if (it != bvars.end()) return it->second;
    int id = static_cast<int>(bnames.size());
    bnames.push_back(n);
    bvars[n] = id;
    return id;
  }

  Lin lin(const RExp &e) {
    Lin l;
    switch (e->op) {
      case ROp::IntC:
      case ROp::LocC: l.c = e->val; return l;
      case ROp::Var: l.co[ivar(e->name)] = 1; return l;
      case ROp::Add: return lin(e->args[0]).plus(lin(e->args[1]));
      case ROp::Sub: return lin(e->args[0]).plus(lin(e->args[1]).scaled(-1));
      case ROp::Mul: {
        Lin a = lin(e->args[0]), b = lin(e->args[1]);
        if (a.co.empty()) return b.scaled(a.c);
        if (b.co.empty()) return a.scaled(b.c);
        nonlinear = true;
        std::string key = "(" + print_rexp(e) + ")";
        int id = ivar(key);
        products[key] = {id, {e->args[0], e->args[1]}};
        l.co[id] = 1;
        return l;
      }
      default: throw Unsupported{"non-integer term " + print_rexp(e)};
    }
  }

  Sort sort_of(const RExp &e) {
    try {
      return sortcheck(env, e);
    } catch (const SortError &err) {
      throw Unsupported{err.what()};
    }
  }

  // NNF of e (pos) or ¬e (!pos)
  F formula(const RExp &e, bool pos) {
    switch (e->op) {
      case ROp::BoolC: return F{(e->val != 0) == pos ? F::True : F::False, {}, {}};
      case ROp::Var: {
        F f{F::Lit, {}, {}};
        f.atom.kind = Atom::Bool;
        f.atom.bvar = bvar(e->name);
        f.atom.neg = !pos;
        return f;
      }
      case ROp::Not: return formula(e->args[0], !pos);
      case ROp::And:
        return pos ? f_and(formula(e->args[0], true), formula(e->args[1], true))
                   : f_or(formula(e->args[0], false), formula(e->args[1], false));
      case ROp::Or:
        return pos ? f_or(formula(e->args[0], true), formula(e->args[1], true))
                   : f_and(formula(e->args[0], false), formula(e->args[1], false));
      case ROp::Lt: return cmp(e->args[0], e->args[1], pos, true);
      case ROp::Le: return cmp(e->args[0], e->args[1], pos, false);
      case ROp::Gt: return cmp(e->args[1], e->args[0], pos, true);
      case ROp::Ge: return cmp(e->args[1], e->args[0], pos, false);
      case ROp::Eq: {
        if (sort_of(e->args[0]) == Sort::Bool) {
          F a = formula(e->args[0], true), na = formula(e->args[0], false);
          F b = formula(e->args[1], true), nb = formula(e->args[1], false);
          return pos ? f_or(f_and(a, b), f_and(na, nb)) : f_or(f_and(a, nb), f_and(na, b));
        }
        Lin d = lin(e->args[0]).plus(lin(e->args[1]).scaled(-1));
        if (pos) return f_eq(d);
        Lin d1 = d, d2 = d.scaled(-1);
        d1.c = ck_add(d1.c, -1);
        d2.c = ck_add(d2.c, -1);
        return f_or(f_ge(d1), f_ge(d2));
      }
      case ROp::KApp: throw Unsupported{"unknown predicate in query"};
      default: throw Unsupported{"non-boolean formula " + print_rexp(e)};
    }
  }

  // a < b (strict) or a <= b
  F cmp(const RExp &a, const RExp &b, bool pos, bool strict) {
    Lin la = lin(a), lb = lin(b);
    if (pos) {
      Lin d = lb.plus(la.scaled(-1));  // b - a (- 1) >= 0
      if (strict) d.c = ck_add(d.c, -1);
      return f_ge(d);
    }
    Lin d = la.plus(lb.scaled(-1));  // a - b (- 1 unless strict) >= 0
    if (!strict) d.c = ck_add(d.c, -1);
    return f_ge(d);
  }
};

struct Search {
  size_t branches = 0;
  size_t limit;
  int nvars;
  bool unknown = false;
  Model model;
  std::map<int, bool> bmodel;

  Res run(std::vector<const F *> agenda, std::vector<Lin> eqs, std::vector<Lin> ineqs,
          std::map<int, bool> bools) {
    // conjuncts first; disjunctions are split only once the literals so far are feasible
    std::vector<const F *> ors;
    while (!agenda.empty()) {
      const F *f = agenda.back();
      agenda.pop_back();
      switch (f->kind) {
        case F::True: break;
        case F::False: return Res::Unsat;
        case F::And:
          for (auto it = f->kids.rbegin(); it != f->kids.rend(); ++it) agenda.push_back(&*it);
          break;
        case F::Lit: {
          const Atom &a = f->atom;
          if (a.kind == Atom::Bool) {
            auto it = bools.find(a.bvar);
            bool val = !a.neg;
            if (it != bools.end() && it->second != val) return Res::Unsat;
            bools[a.bvar] = val;
          } else if (a.kind == Atom::Eq) {
            eqs.push_back(a.lin);
          } else {
            ineqs.push_back(a.lin);
          }
          break;
        }
        case F::Or: ors.push_back(f); break;
      }
    }
    if (!ors.empty()) {
      if (!eqs.empty() || !ineqs.empty()) {
        Omega pre(nvars, 20000);
        Model m;
        if (pre.solve(eqs, ineqs, m) == Res::Unsat) return Res::Unsat;
      }
      const F *f = ors.back();
      ors.pop_back();
      bool any_unknown = false;
      for (const auto &k : f->kids) {
        if (++branches > limit) return Res::Unknown;
        auto ag = ors;
        ag.push_back(&k);
        Res r = run(std::move(ag), eqs, ineqs, bools);
        if (r == Res::Sat) return r;
        if (r == Res::Unknown) any_unknown = true;
      }
      return any_unknown ? Res::Unknown : Res::Unsat;
    }
    Omega om(nvars, 20000);
    Model m;
    Res r = om.solve(eqs, ineqs, m);
    if (r == Res::Sat) {
      model = m;
      bmodel = bools;
    }
    return r;
  }
};

}  // namespace

const char *verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Valid: return "valid";
    case VerdictKind::Invalid: return "invalid";
    default: return "unknown";
  }
}

Verdict BuiltinOracle::check_sat(const std::vector<Param> &binders, const std::vector<RExp> &fs) {
  Verdict out;
  Translator tr;
  for (const auto &[n, s] : binders) tr.env[n] = s;
  // binders get stable low ids
  for (const auto &[n, s] : binders) {
    if (s == Sort::Bool) tr.bvar(n);
    else tr.ivar(n);
  }
  try {
    F all{F::True, {}, {}};
    for (const auto &f : fs) {
      if (tr.sort_of(f) != Sort::Bool) throw Unsupported{"formula is not boolean"};
      all = f_and(std::move(all), tr.formula(f, true));
    }
    Search s;
    s.limit = branch_limit;
    s.nvars = static_cast<int>(tr.inames.size());
    Res r = s.run({&all}, {}, {}, {});
    if (r == Res::Unsat) {
      out.kind = VerdictKind::Valid;
      return out;
    }
    if (r == Res::Unknown) {
      out.kind = VerdictKind::Unknown;
      out.reason = "search budget exhausted";
      return out;
    }
    Assignment model;
    for (const auto &[n, so] : binders) {
      if (so == Sort::Bool) {
        auto it = s.bmodel.find(tr.bvars[n]);
        model[n] = GVal{Sort::Bool, it != s.bmodel.end() && it->second ? 1 : 0};
      } else {
        auto it = s.model.find(tr.ivars[n]);
        model[n] = GVal{so, it != s.model.end() ? it->second : 0};
      }
    }
    bool ok = true;
    try {
      for (const auto &f : fs) ok = ok && eval_bool(f, model);
    } catch (const EvalError &) {
      ok = false;
    }
    if (!ok) {
      out.kind = VerdictKind::Unknown;
      out.reason = tr.nonlinear ? "non-linear arithmetic" : "model check failed";
      return out;
    }
    out.kind = VerdictKind::Invalid;
    out.model = std::move(model);
    return out;
  } catch (const Unsupported &u) {
    out.kind = VerdictKind::Unknown;
    out.reason = u.why;
  } catch (const Overflow &) {
    out.kind = VerdictKind::Unknown;
    out.reason = "integer overflow in decision procedure";
  }
  return out;
}

Verdict BuiltinOracle::valid(const Query &q) {
  std::vector<RExp> fs = q.hyps;
  fs.push_back(rnot(q.goal));
  return check_sat(q.binders, fs);
}

}  // namespace lr
