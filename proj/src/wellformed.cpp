// SPDX-License-Identifier: Apache-2.0
#include "lr/wellformed.hpp"

#include <set>

#include "lr/printer.hpp"

namespace lr {

namespace {

void sort_at(const SortEnv &env, const RExp &e, Sort want, const char *rule,
             const std::string &path) {
  Sort got;
  try {
    got = sortcheck(env, e);
  } catch (const SortError &err) {
    throw WfError(rule, path, err.what());
  }
  if (got != want)
    throw WfError(rule, path, "'" + print_rexp(e) + "' has sort " + sort_name(got) +
                                  ", expected " + sort_name(want));
}

void wf_type_env(const SortEnv &env, const TypeP &t, const std::string &path);
void wf_locctx_env(const SortEnv &env, const LocCtx &l, const std::string &path);

void wf_sig_env(const SortEnv &env, const FnSig &s, const std::string &path) {
  SortEnv inner = env;
  std::set<std::string> seen;
  for (const auto &[n, so] : s.params) {
    if (!seen.insert(n).second) throw WfError("Twf-Fun", path, "duplicate parameter '" + n + "'");
    inner[n] = so;
  }
  if (s.requires_) sort_at(inner, s.requires_, Sort::Bool, "Twf-Fun", path + ".requires");
  wf_locctx_env(inner, s.in, path + ".in");
  for (size_t i = 0; i < s.args.size(); ++i)
    wf_type_env(inner, s.args[i], path + ".arg" + std::to_string(i));
  if (s.ret) wf_type_env(inner, s.ret, path + ".ret");
  wf_locctx_env(inner, s.out, path + ".out");
  for (const auto &o : s.out) {
    bool found = false;
    for (const auto &i : s.in) found = found || i.loc == o.loc;
    if (!found)
      throw WfError("Twf-Fun", path + ".out",
                    "output location " + print_loc(o.loc) + " not among input locations");
  }
}

void wf_loc(const SortEnv &env, const Loc &l, const char *rule, const std::string &path) {
  if (l.concrete) return;
  auto it = env.find(l.var);
  if (it == env.end() || it->second != Sort::Loc)
    throw WfError(rule, path, "location '" + l.var + "' is not bound at sort loc");
}

void wf_base(const SortEnv &env, const BaseType &b, const std::string &path) {
  if (b.kind == BaseKind::Vec) wf_type_env(env, b.elem, path + ".elem");
}

void wf_type_env(const SortEnv &env, const TypeP &t, const std::string &path) {
  switch (t->kind) {
    case TKind::Indexed:
      wf_base(env, t->base, path);
      sort_at(env, t->idx, getsort(t->base), "Twf-Idx", path);
      break;
    case TKind::Exists: {
      wf_base(env, t->base, path);
      SortEnv inner = env;
      inner[t->binder] = getsort(t->base);
      sort_at(inner, t->pred, Sort::Bool, "Twf-Ex", path);
      break;
    }
    case TKind::Ptr: wf_loc(env, t->loc, "Twf-Ptr", path); break;
    case TKind::Ref: wf_type_env(env, t->pointee, path + ".pointee"); break;
    case TKind::Uninit:
      if (t->n < 1) throw WfError("Twf-Uninit", path, "uninit size must be positive");
      break;
    case TKind::Fn:
      if (t->sig) wf_sig_env(env, *t->sig, path);
      break;
  }
}

void wf_locctx_env(const SortEnv &env, const LocCtx &l, const std::string &path) {
  for (size_t i = 0; i < l.size(); ++i) {
    std::string p = path + "[" + print_loc(l[i].loc) + "]";
    for (size_t j = 0; j < i; ++j)
      if (l[j].loc == l[i].loc) throw WfError("Twf-Bind", p, "duplicate location");
    wf_loc(env, l[i].loc, "Twf-Bind", p);
    wf_type_env(env, l[i].ty, p);
  }
}

}  // namespace

void wf_type(const RefCtx &d, const TypeP &t) { wf_type_env(sort_env(d), t, "type"); }

void wf_sig(const RefCtx &d, const FnSig &s) { wf_sig_env(sort_env(d), s, "sig"); }

void wf_valctx(const RefCtx &d, const ValCtx &g) {
  SortEnv env = sort_env(d);
  std::set<std::string> seen;
  for (const auto &[x, t] : g) {
    if (!seen.insert(x).second) throw WfError("Twf-Var", x, "duplicate variable");
    wf_type_env(env, t, x);
  }
}

void wf_locctx(const RefCtx &d, const LocCtx &l) { wf_locctx_env(sort_env(d), l, "L"); }

void wf_dynctx(const RefCtx &d, const DynCtx &s) {
  SortEnv env = sort_env(d);
  for (const auto &[k, t] : s) {
    std::string p = "@" + std::to_string(k.first) + "#" + std::to_string(k.second);
    if (t->kind != TKind::Ptr && t->kind != TKind::Ref)
      throw WfError("Twf-Dyn", p, "dynamic context entry is not a pointer type");
    wf_type_env(env, t, p);
  }
}

void wf_refctx(const RefCtx &d) {
  SortEnv env;
  for (size_t i = 0; i < d.size(); ++i) {
    const auto &en = d[i];
    if (en.is_bind) {
      if (env.count(en.name)) throw WfError("Twf-RBind", en.name, "duplicate refinement binder");
      env[en.name] = en.sort;
    } else {
      sort_at(env, en.pred, Sort::Bool, "Twf-RAssume", "assume" + std::to_string(i));
    }
  }
}

}  // namespace lr
