// SPDX-License-Identifier: Apache-2.0
#include "lr/subtyping.hpp"

#include <set>

#include "lr/printer.hpp"

namespace lr {

namespace {

using Names = std::set<std::string>;

Names names_of(const RefCtx &d) {
  Names n;
  for (const auto &e : d)
    if (e.is_bind) n.insert(e.name);
  return n;
}

[[noreturn]] void mismatch(const TypeP &a, const TypeP &b) {
  throw StructuralError("cannot subtype " + print_type(a) + " with " + print_type(b));
}

CP sub(Names &scope, const TypeP &t1, const TypeP &t2, const Provenance &prov);

CP include(Names &scope, const LocCtx &l1, const LocCtx &l2, const Provenance &prov) {
  std::vector<CP> out;
  for (const auto &b2 : l2) {
    const LocBind *b1 = nullptr;
    for (const auto &b : l1)
      if (b.loc == b2.loc) b1 = &b;
    if (!b1)
      throw StructuralError("location " + print_loc(b2.loc) + " is not available in the context");
    out.push_back(sub(scope, b1->ty, b2.ty, prov));
  }
  return c_conj(std::move(out));
}

CP sub_base(Names &scope, const BaseType &a, const BaseType &b, const TypeP &t1,
            const TypeP &t2, const Provenance &prov) {
  if (a.kind != b.kind) mismatch(t1, t2);
  if (a.kind == BaseKind::Vec) return sub(scope, a.elem, b.elem, prov);
  return c_true();
}

CP sub_sig(Names &scope, const FnSig &s1, const FnSig &s2, const TypeP &t1, const TypeP &t2,
           const Provenance &prov) {
  if (s1.params.size() != s2.params.size() || s1.args.size() != s2.args.size()) mismatch(t1, t2);
  // align s2's parameter names with s1's
  RSubst th;
  for (size_t i = 0; i < s1.params.size(); ++i) {
    if (s1.params[i].second != s2.params[i].second) mismatch(t1, t2);
    th[s2.params[i].first] = rvar(s1.params[i].first);
  }
  auto ren = [&](const TypeP &t) { return subst_all(t, th); };
  Names inner = scope;
  for (const auto &p : s1.params) inner.insert(p.first);
  std::vector<CP> parts;
  RExp req2 = s2.requires_ ? subst_all(s2.requires_, th) : rbool(true);
  if (s1.requires_) parts.push_back(c_implies(req2, c_head(s1.requires_, prov)));
  for (size_t i = 0; i < s1.args.size(); ++i) parts.push_back(sub(inner, ren(s2.args[i]), s1.args[i], prov));
  parts.push_back(include(inner, subst_all(s2.in, th), s1.in, prov));
  parts.push_back(sub(inner, s1.ret, ren(s2.ret), prov));
  parts.push_back(include(inner, s1.out, subst_all(s2.out, th), prov));
  CP c = c_conj(std::move(parts));
  for (auto it = s1.params.rbegin(); it != s1.params.rend(); ++it)
    c = c_forall(it->first, it->second, rbool(true), c);
  return c;
}

CP sub(Names &scope, const TypeP &t1, const TypeP &t2, const Provenance &prov) {
  if (type_equal(t1, t2)) return c_true();
  if (t1->kind == TKind::Exists) {
    // Sub-Unpack
    Names avoid = scope;
    auto f2 = free_vars(t2);
    avoid.insert(f2.begin(), f2.end());
    std::string a = fresh_name(t1->binder, avoid);
    scope.insert(a);
    RExp pred = subst(t1->pred, t1->binder, rvar(a));
    CP body = sub(scope, t_indexed(t1->base, rvar(a)), t2, prov);
    scope.erase(a);
    return c_forall(a, getsort(t1->base), pred, body);
  }
  switch (t1->kind) {
    case TKind::Indexed:
      if (t2->kind == TKind::Indexed) {
        CP b = sub_base(scope, t1->base, t2->base, t1, t2, prov);
        return c_conj({b, c_head(req(t1->idx, t2->idx), prov)});
      }
      if (t2->kind == TKind::Exists) {
        CP b = sub_base(scope, t1->base, t2->base, t1, t2, prov);
        return c_conj({b, c_head(subst(t2->pred, t2->binder, t1->idx), prov)});
      }
      mismatch(t1, t2);
    case TKind::Ptr:
      if (t2->kind == TKind::Ptr && t1->loc == t2->loc) return c_true();
      mismatch(t1, t2);
    case TKind::Uninit:
      if (t2->kind == TKind::Uninit && t1->n == t2->n) return c_true();
      mismatch(t1, t2);
    case TKind::Ref:
      if (t2->kind != TKind::Ref || t1->mode != t2->mode) mismatch(t1, t2);
      if (t1->mode == RefMode::Shr) return sub(scope, t1->pointee, t2->pointee, prov);
      return c_conj({sub(scope, t1->pointee, t2->pointee, prov),
                     sub(scope, t2->pointee, t1->pointee, prov)});
    case TKind::Fn:
      if (t2->kind != TKind::Fn || !t1->sig || !t2->sig) mismatch(t1, t2);
      return sub_sig(scope, *t1->sig, *t2->sig, t1, t2, prov);
    default: mismatch(t1, t2);
  }
}

}  // namespace

CP subtype(const RefCtx &d, const TypeP &t1, const TypeP &t2, const Provenance &prov) {
  Names scope = names_of(d);
  return sub(scope, t1, t2, prov);
}

CP ctx_include(const RefCtx &d, const LocCtx &l1, const LocCtx &l2, const Provenance &prov) {
  Names scope = names_of(d);
  return include(scope, l1, l2, prov);
}

namespace {

void fv_c(const CP &c, Names &out) {
  if (c->hyp) {
    auto f = free_vars(c->hyp);
    out.insert(f.begin(), f.end());
  }
  if (c->goal) {
    auto f = free_vars(c->goal);
    out.insert(f.begin(), f.end());
  }
  for (const auto &k : c->kids) fv_c(k, out);
}

}  // namespace

CP close_under(const RefCtx &d, const CP &c) {
  Names need;
  fv_c(c, need);
  for (const auto &e : d)
    if (!e.is_bind) {
      auto f = free_vars(e.pred);
      need.insert(f.begin(), f.end());
    }
  CP out = c;
  for (auto it = d.rbegin(); it != d.rend(); ++it) {
    if (it->is_bind) {
      if (need.count(it->name)) out = c_forall(it->name, it->sort, rbool(true), out);
    } else {
      out = c_implies(it->pred, out);
    }
  }
  return out;
}

}  // namespace lr
