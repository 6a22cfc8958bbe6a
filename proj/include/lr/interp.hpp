// SPDX-License-Identifier: Apache-2.0
#ifndef LR_INTERP_HPP
#define LR_INTERP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lr/ast.hpp"

namespace lr {

enum class Perm { Unique, SharedRO, Disabled };

struct StackItem {
  Perm perm = Perm::Unique;
  int64_t tag = 0;
  // protector slot: always empty
};

struct AliasInfo {
  std::string event;  // read, write, reborrow, dealloc
  int64_t loc = 0;
  int64_t tag = 0;
};

struct MachineState {
  std::map<int64_t, ValueP> heap;
  std::map<int64_t, std::vector<StackItem>> stacks;
  int64_t next_tag = 1;
  int64_t next_loc = 1;

  // event log, filled when `tracing` is set
  bool tracing = false;
  int64_t step = 0;
  std::vector<std::string> trace;
};

std::string print_stack(const std::vector<StackItem> &s);

struct SbResult {
  bool ok = true;
  int64_t loc = 0;  // alloc
  int64_t tag = 0;  // alloc, reborrow
  AliasInfo err;
};

SbResult sb_alloc(MachineState &st, int64_t n);
SbResult sb_read(MachineState &st, int64_t loc, int64_t tag);
SbResult sb_write(MachineState &st, int64_t loc, int64_t tag);
SbResult sb_reborrow(MachineState &st, int64_t loc, int64_t from, RefMode mode);
// Write access with `tag`, then removal of the cell.
SbResult sb_dealloc(MachineState &st, int64_t loc, int64_t tag);

// dom(heap) = dom(stacks) and every tag is below next_tag.
bool state_invariant(const MachineState &st);

enum class Outcome { Reduced, Done, AliasError, Stuck, FuelExhausted };
const char *outcome_name(Outcome o);

struct StepResult {
  Outcome kind = Outcome::Stuck;
  ExprP expr;     // Reduced
  ValueP value;   // Done
  AliasInfo alias;
  std::string reason;
  std::string rule;  // rule that fired
};

using Globals = std::map<std::string, ValueP>;
Globals program_globals(const Program &p);

StepResult step(MachineState &st, const ExprP &e, const Globals &g);

struct RunResult {
  Outcome outcome = Outcome::Stuck;
  ValueP value;
  AliasInfo alias;
  std::string reason;
  int64_t steps = 0;
  MachineState state;
  std::map<std::string, int64_t> coverage;  // step rule -> count
};

RunResult run(const Program &p, int64_t fuel, bool trace = false);
RunResult run_expr(const ExprP &e, const Globals &g, int64_t fuel, bool trace = false);

}  // namespace lr

#endif
