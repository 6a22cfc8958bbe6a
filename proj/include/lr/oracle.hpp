// SPDX-License-Identifier: Apache-2.0
#ifndef LR_ORACLE_HPP
#define LR_ORACLE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lr/eval.hpp"
#include "lr/logic.hpp"

namespace lr {

struct Query {
  std::vector<Param> binders;
  std::vector<RExp> hyps;
  RExp goal;
};

enum class VerdictKind { Valid, Invalid, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  Assignment model;  // Invalid: a counter-model over the binders
  std::string reason;
};

const char *verdict_name(VerdictKind k);

class Oracle {
public:
  virtual ~Oracle() = default;
  virtual Verdict valid(const Query &q) = 0;
  virtual std::string name() const = 0;
};

// Complete decision procedure for linear integer arithmetic with booleans
// (Omega test under a DNF search). Non-linear products are abstracted; such
// queries may come back Unknown.
class BuiltinOracle : public Oracle {
public:
  Verdict valid(const Query &q) override;
  std::string name() const override { return "builtin"; }
  // Satisfiability of a conjunction; Invalid carries a model, Valid means unsat.
  Verdict check_sat(const std::vector<Param> &binders, const std::vector<RExp> &fs);
  size_t branch_limit = 4096;
};

struct SmtConfig {
  std::string path = "z3";
  std::vector<std::string> args = {"-in"};
  double timeout_s = 10.0;
  std::string transcript_dir;
};

// SMT-LIB2 over a child process pipe, one push/pop per query.
class SmtOracle : public Oracle {
public:
  explicit SmtOracle(SmtConfig cfg);
  ~SmtOracle() override;
  SmtOracle(const SmtOracle &) = delete;
  SmtOracle &operator=(const SmtOracle &) = delete;
  Verdict valid(const Query &q) override;
  std::string name() const override { return "smt:" + cfg_.path; }
  bool available();

private:
  SmtConfig cfg_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buf_;
  std::string transcript_;
  bool start();
  void stop();
  bool send(const std::string &s);
  bool read_response(std::string &out);
  void dump_transcript(const std::string &why);
};

// Memoizes by an alpha-normalized rendering of the query.
class CachedOracle : public Oracle {
public:
  explicit CachedOracle(std::shared_ptr<Oracle> inner) : inner_(std::move(inner)) {}
  Verdict valid(const Query &q) override;
  std::string name() const override { return inner_->name(); }
  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }

private:
  std::shared_ptr<Oracle> inner_;
  std::map<std::string, Verdict> cache_;
  std::mutex mu_;
  size_t hits_ = 0, misses_ = 0;
};

// Canonical form used as the cache key; also returns the renaming applied.
std::string canonical_query(const Query &q, std::map<std::string, std::string> *renaming);

std::string smt_term(const RExp &e);
std::string smt_query_text(const Query &q);

}  // namespace lr

#endif
