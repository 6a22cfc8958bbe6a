// SPDX-License-Identifier: Apache-2.0
#ifndef LR_WELLFORMED_HPP
#define LR_WELLFORMED_HPP

#include <stdexcept>
#include <string>

#include "lr/logic.hpp"

namespace lr {

struct WfError : std::runtime_error {
  std::string rule;
  std::string path;
  WfError(const std::string &r, const std::string &p, const std::string &msg)
      : std::runtime_error(r + " at " + p + ": " + msg), rule(r), path(p) {}
};

void wf_type(const RefCtx &d, const TypeP &t);
void wf_sig(const RefCtx &d, const FnSig &s);
void wf_valctx(const RefCtx &d, const ValCtx &g);
void wf_locctx(const RefCtx &d, const LocCtx &l);
void wf_dynctx(const RefCtx &d, const DynCtx &s);
void wf_refctx(const RefCtx &d);

}  // namespace lr

#endif
