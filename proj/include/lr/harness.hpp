// SPDX-License-Identifier: Apache-2.0
#ifndef LR_HARNESS_HPP
#define LR_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lr/driver.hpp"
#include "lr/interp.hpp"

namespace lr {

constexpr int64_t kDefaultFuel = 100000;

enum class VerdictTag { Pass, SoundnessBug };

struct HarnessVerdict {
  VerdictTag tag = VerdictTag::Pass;
  RunResult run;
  std::string detail;  // why a bug was flagged, or notes on inconclusive checks
};

// Checks that `v` inhabits `t` in the final machine state. Refinements are
// satisfiability-checked under `delta` after applying `sol`.
bool value_conforms(const ValueP &v, const TypeP &t, const RefCtx &delta, const Solution &sol,
                    const MachineState &st, Oracle &oracle, std::string *why);

// Runs an accepted program and classifies the outcome. `vr` must come from
// verify_program on the same program with exit code 0.
HarnessVerdict run_and_verify(const Program &p, const VerifyResult &vr, Oracle &oracle,
                              int64_t fuel = kDefaultFuel, bool trace = false);

// Deterministic per seed; the result is meant to be accepted by the checker.
std::string generate_source(uint64_t seed, int budget);
Program generate_program(uint64_t seed, int budget);

// Corpus sidecars: `<file>.expect` with key=value lines (exit, rule, line, outcome, value).
struct Expectation {
  int exit = 0;
  std::string rule;
  int line = 0;
  std::string outcome;  // Done, AliasError, FuelExhausted; empty = any passing outcome
  std::string value;    // printed result value, checked when set
};

Expectation read_expectation(const std::string &lr_path);

struct CorpusResult {
  std::string path;
  int exit = 0;
  bool matches = true;  // against the sidecar
  bool ran = false;
  HarnessVerdict verdict;
  std::vector<Diagnostic> diags;
  std::string note;
};

CorpusResult run_corpus_file(const std::string &path, Oracle &oracle, int64_t fuel = kDefaultFuel);
std::vector<std::string> corpus_files(const std::string &root);

}  // namespace lr

#endif
