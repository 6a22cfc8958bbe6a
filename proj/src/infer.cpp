// SPDX-License-Identifier: Apache-2.0
#include "lr/infer.hpp"

#include <algorithm>

#include "lr/printer.hpp"

namespace lr {

std::string NameGen::fresh(const std::string &base) {
  std::string n = fresh_name(base, used);
  used.insert(n);
  return n;
}

const KVar &KVarStore::fresh(std::vector<Param> params, size_t nvalue) {
  KVar k;
  k.id = "k" + std::to_string(ks_.size());
  k.params = std::move(params);
  k.nvalue = nvalue;
  ks_.push_back(std::move(k));
  return ks_.back();
}

const KVar *KVarStore::find(const std::string &id) const {
  for (const auto &k : ks_)
    if (k.id == id) return &k;
  return nullptr;
}

std::vector<Param> kvar_scope(const RefCtx &d) {
  std::vector<Param> out;
  for (const auto &e : d)
    if (e.is_bind && e.sort != Sort::Loc) out.emplace_back(e.name, e.sort);
  return out;
}

std::set<std::string> bound_names(const RefCtx &d) {
  std::set<std::string> out;
  for (const auto &e : d)
    if (e.is_bind) out.insert(e.name);
  return out;
}

TypeP fresh_kvar_type(KVarStore &ks, const std::vector<Param> &scope, const BaseType &base) {
  std::set<std::string> avoid;
  for (const auto &p : scope) avoid.insert(p.first);
  std::string v = fresh_name("v", avoid);
  std::vector<Param> params{{v, getsort(base)}};
  params.insert(params.end(), scope.begin(), scope.end());
  const KVar &k = ks.fresh(params, 1);
  std::vector<RExp> args;
  for (const auto &p : params) args.push_back(rvar(p.first));
  return t_exists(v, base, rkapp(k.id, args));
}

TypeP fresh_kvar_type(KVarStore &ks, const RefCtx &d, const BaseType &base) {
  return fresh_kvar_type(ks, kvar_scope(d), base);
}

TypeP instantiate_type_param(KVarStore &ks, const RefCtx &d, const BaseType &expected) {
  return fresh_kvar_type(ks, d, expected);
}

namespace {

bool mentions_only(const TypeP &t, const std::set<std::string> &outer) {
  for (const auto &n : free_vars(t))
    if (!outer.count(n)) return false;
  return true;
}

bool refined_base(const TypeP &t) {
  return t->kind == TKind::Indexed || t->kind == TKind::Exists;
}

[[noreturn]] void shape_fail(const TypeP &a, const TypeP &b) {
  throw ShapeMismatch("incompatible shapes " + print_type(a) + " and " + print_type(b));
}

}  // namespace

TypeP template_like(KVarStore &ks, const std::vector<Param> &scope,
                    const std::set<std::string> &outer, const TypeP &a, const TypeP &b) {
  if (refined_base(a) && refined_base(b)) {
    if (!base_shape_equal(a->base, b->base)) shape_fail(a, b);
    BaseType base = a->base;
    if (base.kind == BaseKind::Vec) {
      const TypeP &ea = a->base.elem, &eb = b->base.elem;
      if (!(type_equal(ea, eb) && mentions_only(ea, outer)))
        base = b_vec(template_like(ks, scope, outer, ea, eb));
    }
    return fresh_kvar_type(ks, scope, base);
  }
  if (a->kind != b->kind) shape_fail(a, b);
  switch (a->kind) {
    case TKind::Ptr:
      if (!(a->loc == b->loc)) shape_fail(a, b);
      return a;
    case TKind::Uninit:
      if (a->n != b->n) shape_fail(a, b);
      return a;
    case TKind::Ref:
      if (a->mode != b->mode) shape_fail(a, b);
      if (type_equal(a->pointee, b->pointee) && mentions_only(a->pointee, outer)) return a;
      return t_ref(a->mode, template_like(ks, scope, outer, a->pointee, b->pointee));
    case TKind::Fn:
      if (!a->sig || !b->sig || !sig_equal(*a->sig, *b->sig)) shape_fail(a, b);
      return a;
    default: shape_fail(a, b);
  }
}

// loop shapes

namespace {

bool is_param(const RExp &e, const std::vector<Param> &ps) {
  if (e->op != ROp::Var) return false;
  for (const auto &p : ps)
    if (p.first == e->name) return true;
  return false;
}

bool is_template(const TypeP &t, const std::set<std::string> &ids) {
  return t->kind == TKind::Exists && t->pred->op == ROp::KApp && ids.count(t->pred->name);
}

struct Merger {
  KVarStore &ks;
  NameGen &names;
  const std::vector<Param> &scope;
  LoopShape &out;

  // b, c, d, ... before falling back to numbered names
  std::string fresh_param(Sort s) {
    if (s == Sort::Bool) return names.fresh("p");
    for (char c = 'b'; c <= 'h'; ++c) {
      std::string n(1, c);
      if (!names.used.count(n)) return names.fresh(n);
    }
    return names.fresh("b");
  }

  TypeP elem(const TypeP &cur, const TypeP &site) {
    if (type_equal(cur, site) || is_template(cur, out.templates)) return cur;
    if (refined_base(cur) && refined_base(site) && !base_shape_equal(cur->base, site->base))
      shape_fail(cur, site);
    TypeP t = template_like(ks, scope, {}, cur, site);
    if (t->kind == TKind::Exists && t->pred->op == ROp::KApp) out.templates.insert(t->pred->name);
    return t;
  }

  TypeP merge(const TypeP &cur, const TypeP &site) {
    if (type_equal(cur, site)) return cur;
    if (refined_base(cur)) {
      if (!refined_base(site) || !base_shape_equal(cur->base, site->base)) shape_fail(cur, site);
      if (cur->kind == TKind::Exists) return elem(cur, site);
      BaseType base = cur->base;
      if (base.kind == BaseKind::Vec) base = b_vec(elem(cur->base.elem, site->base.elem));
      RExp idx = cur->idx;
      bool same = site->kind == TKind::Indexed && requal(site->idx, idx);
      if (!same && !is_param(idx, out.params)) {
        Sort s = getsort(base);
        std::string p = fresh_param(s);
        out.params.emplace_back(p, s);
        idx = rvar(p);
      }
      return t_indexed(base, idx);
    }
    if (cur->kind != site->kind) shape_fail(cur, site);
    switch (cur->kind) {
      case TKind::Ref:
        if (cur->mode != site->mode) shape_fail(cur, site);
        return t_ref(cur->mode, elem(cur->pointee, site->pointee));
      default: shape_fail(cur, site);
    }
  }
};

}  // namespace

LoopShape infer_rec_signature(KVarStore &ks, NameGen &names, const std::vector<Param> &scope,
                              const LoopShape &cur, const std::vector<LocCtx> &sites) {
  LoopShape out = cur;
  Merger m{ks, names, scope, out};
  for (const auto &site : sites) {
    for (auto &b : out.in) {
      const LocBind *s = nullptr;
      for (const auto &sb : site)
        if (sb.loc == b.loc) s = &sb;
      if (!s) throw ShapeMismatch("location " + print_loc(b.loc) + " is missing at a call site");
      b.ty = m.merge(b.ty, s->ty);
    }
  }
  return out;
}

// solving

std::vector<KVar> used_kvars(const std::vector<Clause> &cs, const std::vector<KVar> &all) {
  std::set<std::string> ids;
  std::vector<RExp> apps;
  for (const auto &c : cs) {
    for (const auto &h : c.hyps) collect_kapps(h, apps);
    collect_kapps(c.head, apps);
  }
  for (const auto &a : apps) ids.insert(a->name);
  std::vector<KVar> out;
  for (const auto &k : all)
    if (ids.count(k.id)) out.push_back(k);
  return out;
}

namespace {

std::vector<std::string> param_names(const KVar &k) {
  std::vector<std::string> out;
  for (const auto &p : k.params) out.push_back(p.first);
  return out;
}

Query clause_query(const Clause &c, const Solution &s, const RExp &goal) {
  Query q;
  q.binders = c.binders;
  for (const auto &h : c.hyps) q.hyps.push_back(apply_solution(h, s));
  q.goal = goal;
  return q;
}

}  // namespace

SolveResult solve(const std::vector<Clause> &cs, const std::vector<KVar> &kvars,
                  const std::vector<Qualifier> &quals, Oracle &oracle) {
  SolveResult r;
  std::map<std::string, std::vector<Pred>> cand;
  std::map<std::string, const KVar *> byid;
  for (const auto &k : kvars) {
    cand[k.id] = instantiate_qualifiers(k, quals);
    byid[k.id] = &k;
  }
  auto current = [&]() {
    Solution s;
    for (const auto &k : kvars) s[k.id] = KSol{param_names(k), rconj(cand[k.id])};
    return s;
  };
  for (const auto &c : cs) {
    std::vector<RExp> apps;
    for (const auto &h : c.hyps) collect_kapps(h, apps);
    collect_kapps(c.head, apps);
    for (const auto &a : apps)
      if (!byid.count(a->name)) throw MissingKVar("undeclared unknown predicate $" + a->name);
  }

  // weaken from the top until every KApp-headed clause holds
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto &c : cs) {
      if (c.head->op != ROp::KApp) continue;
      const KVar &k = *byid[c.head->name];
      auto &qs = cand[k.id];
      if (qs.empty()) continue;
      RSubst th;
      for (size_t i = 0; i < k.params.size(); ++i) th[k.params[i].first] = c.head->args[i];
      Solution s = current();
      std::vector<Pred> inst;
      for (const auto &q : qs) inst.push_back(subst_all(q, th));
      ++r.oracle_calls;
      if (oracle.valid(clause_query(c, s, rconj(inst))).kind == VerdictKind::Valid) continue;
      std::vector<Pred> keep;
      for (size_t i = 0; i < qs.size(); ++i) {
        ++r.oracle_calls;
        if (oracle.valid(clause_query(c, s, inst[i])).kind == VerdictKind::Valid)
          keep.push_back(qs[i]);
      }
      if (keep.size() != qs.size()) {
        qs = keep;
        changed = true;
      }
    }
  }
  r.sol = current();

  bool unknown = false;
  for (const auto &c : cs) {
    RExp goal = apply_solution(c.head, r.sol);
    ++r.oracle_calls;
    Verdict v = oracle.valid(clause_query(c, r.sol, goal));
    if (v.kind == VerdictKind::Invalid) {
      r.status = SolveStatus::Unsat;
      r.failed_clause = c.id;
      r.model = v.model;
      return r;
    }
    if (v.kind == VerdictKind::Unknown && !unknown) {
      unknown = true;
      r.failed_clause = c.id;
      r.reason = v.reason;
    }
  }
  if (unknown) r.status = SolveStatus::Unknown;
  return r;
}

Solution minimize_solution(const Solution &s, const std::vector<KVar> &kvars, Oracle &oracle) {
  Solution out = s;
  for (const auto &k : kvars) {
    auto it = out.find(k.id);
    if (it == out.end()) continue;
    std::vector<Pred> qs;
    // flatten the conjunction
    std::vector<Pred> stack{it->second.pred};
    while (!stack.empty()) {
      Pred p = stack.back();
      stack.pop_back();
      if (p->op == ROp::And) {
        stack.push_back(p->args[1]);
        stack.push_back(p->args[0]);
      } else if (!is_true(p)) {
        qs.push_back(p);
      }
    }
    Query all{k.params, qs, rbool(false)};
    if (!qs.empty() && oracle.valid(all).kind == VerdictKind::Valid) {
      it->second.pred = rbool(false);
      continue;
    }
    // drop inequalities before equalities so b = c is preferred over b <= c && b >= c
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t i = 0; i < qs.size();) {
        if ((qs[i]->op == ROp::Eq) != (pass == 1) || qs.size() < 2) {
          ++i;
          continue;
        }
        Query q;
        q.binders = k.params;
        for (size_t j = 0; j < qs.size(); ++j)
          if (j != i) q.hyps.push_back(qs[j]);
        q.goal = qs[i];
        if (oracle.valid(q).kind == VerdictKind::Valid)
          qs.erase(qs.begin() + static_cast<long>(i));
        else
          ++i;
      }
    }
    it->second.pred = rconj(qs);
  }
  return out;
}

}  // namespace lr
