// SPDX-License-Identifier: Apache-2.0
#ifndef LR_SUBTYPING_HPP
#define LR_SUBTYPING_HPP

#include <stdexcept>
#include <string>

#include "lr/constraints.hpp"

namespace lr {

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The returned constraint is relative to `d`: it may mention d's binders
// freely; callers close it under d (see close_under).
CP subtype(const RefCtx &d, const TypeP &t1, const TypeP &t2, const Provenance &prov);
CP ctx_include(const RefCtx &d, const LocCtx &l1, const LocCtx &l2, const Provenance &prov);

// Wraps c with the binders and assumptions of d. Binders not mentioned by c
// or by any assumption are omitted.
CP close_under(const RefCtx &d, const CP &c);

}  // namespace lr

#endif
