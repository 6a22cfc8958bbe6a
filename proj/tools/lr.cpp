// SPDX-License-Identifier: Apache-2.0
// lr: batch front end for the checker, solver and interpreter.
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lr/driver.hpp"
#include "lr/harness.hpp"
#include "lr/parser.hpp"
#include "lr/printer.hpp"

using namespace lr;

namespace {

enum Exit { kOk = 0, kTypeError = 1, kUsage = 2, kUnknown = 3 };

struct Settings {
  std::string smt;  // empty: builtin procedure
  double timeout = 10.0;
  int64_t fuel = kDefaultFuel;
  int jobs = 1;
  bool debug_wf = false;
  std::vector<std::string> quals;
  int seeds = 1000;
  int budget = 10;
  std::string corpus = "corpus";
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool parse_bool(const std::string &v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

void apply_config_file(const std::string &path, Settings &s) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string x) {
      x.erase(0, x.find_first_not_of(" \t\r"));
      x.erase(x.find_last_not_of(" \t\r") + 1);
      return x;
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(n) + ": expected key=value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    try {
      if (k == "smt") s.smt = v;
      else if (k == "timeout") s.timeout = std::stod(v);
      else if (k == "fuel") s.fuel = std::stoll(v);
      else if (k == "jobs") s.jobs = std::stoi(v);
      else if (k == "debug_wf") s.debug_wf = parse_bool(v);
      else if (k == "qualifier") s.quals.push_back(v);
      else if (k == "seeds") s.seeds = std::stoi(v);
      else if (k == "budget") s.budget = std::stoi(v);
      else if (k == "corpus") s.corpus = v;
      else throw ConfigError(path + ":" + std::to_string(n) + ": unknown key '" + k + "'");
    } catch (const std::logic_error &) {
      throw ConfigError(path + ":" + std::to_string(n) + ": bad value for '" + k + "'");
    }
  }
}

// Each worker owns its oracle; SMT workers each run their own solver process.
std::shared_ptr<Oracle> make_oracle(const Settings &s, std::string *err) {
  if (s.smt.empty()) return std::make_shared<CachedOracle>(std::make_shared<BuiltinOracle>());
  SmtConfig cfg;
  cfg.path = s.smt;
  cfg.timeout_s = s.timeout;
  auto smt = std::make_shared<SmtOracle>(cfg);
  if (!smt->available()) {
    *err = "cannot start SMT solver '" + s.smt + "'";
    return nullptr;
  }
  return std::make_shared<CachedOracle>(smt);
}

std::optional<std::string> slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int, int)> &fn) {
  jobs = std::max(1, std::min(jobs, n));
  std::atomic<int> next{0};
  auto worker = [&](int w) {
    for (int i; (i = next++) < n;) fn(i, w);
  };
  if (jobs == 1) {
    worker(0);
    return;
  }
  std::vector<std::thread> ts;
  for (int w = 0; w < jobs; ++w) ts.emplace_back(worker, w);
  for (auto &t : ts) t.join();
}

struct FileOutput {
  int exit = kOk;
  std::string out, err;
};

class Sink {
public:
  explicit Sink(const std::string &path) {
    if (!path.empty()) {
      file_.open(path);
      ok_ = static_cast<bool>(file_);
    }
  }
  bool ok() const { return ok_; }
  std::ostream &os() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
  bool ok_ = true;
};

int worst(int a, int b) {
  // usage beats oracle trouble beats type errors
  auto rank = [](int e) { return e == kUsage ? 3 : e == kUnknown ? 2 : e == kTypeError ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

int cmd_check(const std::vector<std::string> &paths, const Settings &s, bool dump_c, bool dump_s,
              const std::string &out_path) {
  VerifyOptions vo;
  vo.check.debug_wf = s.debug_wf;
  try {
    for (const auto &q : s.quals) vo.quals.push_back(parse_qualifier(q));
  } catch (const std::exception &e) {
    std::cerr << "lr: bad qualifier: " << e.what() << "\n";
    return kUsage;
  }
  Sink sink(out_path);
  if (!sink.ok()) {
    std::cerr << "lr: cannot write " << out_path << "\n";
    return kUsage;
  }
  int jobs = std::max(1, s.jobs);
  std::vector<std::shared_ptr<Oracle>> oracles(static_cast<size_t>(jobs));
  for (auto &o : oracles) {
    std::string err;
    o = make_oracle(s, &err);
    if (!o) {
      std::cerr << "lr: " << err << "\n";
      return kUnknown;
    }
  }
  std::vector<FileOutput> results(paths.size());
  parallel_for(static_cast<int>(paths.size()), jobs, [&](int i, int w) {
    FileOutput &fo = results[static_cast<size_t>(i)];
    const std::string &path = paths[static_cast<size_t>(i)];
    auto src = slurp(path);
    if (!src) {
      fo.exit = kUsage;
      fo.err = "lr: cannot read " + path + "\n";
      return;
    }
    Program p;
    try {
      p = parse_program(*src, path);
    } catch (const ParseError &e) {
      fo.exit = kUsage;
      fo.err = path + ":" + std::to_string(e.span.line) + ":" + std::to_string(e.span.col) +
               ": error[parse]: " + e.what() + "\n";
      return;
    }
    VerifyResult vr = verify_program(p, *oracles[static_cast<size_t>(w)], vo);
    fo.exit = vr.exit_code;
    for (const auto &d : vr.diags) fo.err += print_diagnostic(d) + "\n";
    if (vr.exit_code == kUnknown)
      fo.err += path + ": oracle could not decide: " + vr.solve.reason + "\n";
    if (dump_c || dump_s) {
      if (paths.size() > 1) fo.out += "== " + path + "\n";
      if (dump_c) fo.out += dump_constraints(vr);
      if (dump_s) fo.out += dump_solution(vr);
    }
  });
  int code = kOk;
  for (const auto &fo : results) {
    sink.os() << fo.out;
    std::cerr << fo.err;
    code = worst(code, fo.exit);
  }
  sink.os().flush();
  return code;
}

int cmd_run(const std::string &path, const Settings &s, const std::string &trace_path) {
  auto src = slurp(path);
  if (!src) {
    std::cerr << "lr: cannot read " << path << "\n";
    return kUsage;
  }
  Program p;
  try {
    p = parse_program(*src, path);
  } catch (const ParseError &e) {
    std::cerr << path << ":" << e.span.line << ":" << e.span.col << ": error[parse]: " << e.what() << "\n";
    return kUsage;
  }
  RunResult r = run(p, s.fuel, !trace_path.empty());
  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    if (!t) {
      std::cerr << "lr: cannot write " << trace_path << "\n";
      return kUsage;
    }
    for (const auto &l : r.state.trace) t << l << "\n";
  }
  std::cout << "outcome: " << outcome_name(r.outcome) << "\n";
  if (r.value) std::cout << "value: " << print_value(r.value) << "\n";
  if (!r.reason.empty()) std::cout << "reason: " << r.reason << "\n";
  std::cout << "steps: " << r.steps << "\n";
  return r.outcome == Outcome::Stuck ? kTypeError : kOk;
}

int cmd_soundness(const Settings &s, const std::string &out_path) {
  Sink sink(out_path);
  if (!sink.ok()) {
    std::cerr << "lr: cannot write " << out_path << "\n";
    return kUsage;
  }
  int jobs = std::max(1, s.jobs);
  std::vector<std::shared_ptr<Oracle>> oracles(static_cast<size_t>(jobs));
  for (auto &o : oracles) {
    std::string err;
    o = make_oracle(s, &err);
    if (!o) {
      std::cerr << "lr: " << err << "\n";
      return kUnknown;
    }
  }
  std::vector<std::string> files = corpus_files(s.corpus);
  std::vector<CorpusResult> cres(files.size());
  parallel_for(static_cast<int>(files.size()), jobs, [&](int i, int w) {
    cres[static_cast<size_t>(i)] =
        run_corpus_file(files[static_cast<size_t>(i)], *oracles[static_cast<size_t>(w)], s.fuel);
  });

  struct GenResult {
    int exit = 0;
    HarnessVerdict v;
  };
  std::vector<GenResult> gres(static_cast<size_t>(std::max(0, s.seeds)));
  parallel_for(s.seeds, jobs, [&](int i, int w) {
    Oracle &o = *oracles[static_cast<size_t>(w)];
    Program p = generate_program(static_cast<uint64_t>(i), s.budget);
    VerifyResult vr = verify_program(p, o);
    GenResult &g = gres[static_cast<size_t>(i)];
    g.exit = vr.exit_code;
    if (vr.exit_code == 0) g.v = run_and_verify(p, vr, o, s.fuel);
  });

  std::ostream &os = sink.os();
  int code = kOk;
  int mism = 0;
  for (const auto &c : cres) {
    std::string status = c.matches ? "ok" : "MISMATCH";
    os << status << " " << c.path << " exit=" << c.exit;
    if (c.ran) os << " outcome=" << outcome_name(c.verdict.run.outcome);
    if (!c.note.empty()) os << " (" << c.note << ")";
    if (c.ran && c.verdict.tag == VerdictTag::SoundnessBug) os << " BUG: " << c.verdict.detail;
    os << "\n";
    if (!c.matches) ++mism;
  }
  std::map<std::string, int> outcomes;
  std::map<std::string, int64_t> coverage;
  int rejected = 0, bugs = 0;
  for (size_t i = 0; i < gres.size(); ++i) {
    const GenResult &g = gres[i];
    if (g.exit != 0) {
      ++rejected;
      os << "seed " << i << ": generated program rejected (exit " << g.exit << ")\n";
      continue;
    }
    ++outcomes[outcome_name(g.v.run.outcome)];
    for (const auto &[k, n] : g.v.run.coverage) coverage[k] += n;
    if (g.v.tag == VerdictTag::SoundnessBug) {
      ++bugs;
      os << "seed " << i << ": SOUNDNESS BUG: " << g.v.detail << "\n";
    }
  }
  os << "corpus: " << files.size() << " files, " << mism << " mismatches\n";
  os << "generated: " << gres.size() << " programs, " << rejected << " rejected, " << bugs
     << " soundness bugs\n";
  for (const auto &[k, n] : outcomes) os << "  " << k << ": " << n << "\n";
  os << "rule coverage:";
  for (const auto &[k, n] : coverage) os << " " << k << "=" << n;
  os << "\n";
  if (mism || rejected || bugs) code = kTypeError;
  return code;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"refinement type checker and interpreter for the lr core calculus"};
  app.require_subcommand(1);
  Settings flags;
  std::string config_path, out_path, trace_path;
  bool dump_c = false, dump_s = false;
  std::vector<std::string> paths;
  std::string one_path;

  auto add_common = [&](CLI::App *c) {
    c->add_option("--config", config_path, "key=value settings file");
    c->add_option("--smt", flags.smt, "SMT-LIB2 solver executable (default: builtin procedure)");
    c->add_option("--timeout", flags.timeout, "per-query solver timeout in seconds");
    c->add_option("--jobs", flags.jobs, "worker threads");
    c->add_option("--out", out_path, "write dumps here instead of standard output");
  };

  auto *check = app.add_subcommand("check", "verify programs");
  check->add_option("paths", paths, "program files")->required();
  check->add_flag("--dump-constraints", dump_c, "print the Horn clauses");
  check->add_flag("--dump-solution", dump_s, "print the inferred kappa solutions");
  check->add_flag("--debug-wf", flags.debug_wf, "check well-formedness after every step");
  add_common(check);

  auto *constraints = app.add_subcommand("constraints", "print the Horn clauses of a program");
  constraints->add_option("path", one_path)->required();
  constraints->add_flag("--debug-wf", flags.debug_wf);
  add_common(constraints);

  auto *solve = app.add_subcommand("solve", "print the inferred kappa solutions");
  solve->add_option("path", one_path)->required();
  solve->add_flag("--debug-wf", flags.debug_wf);
  add_common(solve);

  auto *runc = app.add_subcommand("run", "execute the entry expression");
  runc->add_option("path", one_path)->required();
  runc->add_option("--fuel", flags.fuel, "step limit");
  runc->add_option("--trace", trace_path, "write the borrow-stack event trace here");
  runc->add_option("--config", config_path, "key=value settings file");

  auto *sound = app.add_subcommand("soundness", "differential run over the corpus and generated programs");
  sound->add_option("--seeds", flags.seeds, "number of generated programs");
  sound->add_option("--budget", flags.budget, "statements per generated program");
  sound->add_option("--corpus", flags.corpus, "corpus root directory");
  sound->add_option("--fuel", flags.fuel, "step limit");
  add_common(sound);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  // flags > config file > defaults
  Settings s;
  try {
    if (!config_path.empty()) apply_config_file(config_path, s);
  } catch (const ConfigError &e) {
    std::cerr << "lr: " << e.what() << "\n";
    return kUsage;
  }
  CLI::App *sub = app.get_subcommands().front();
  auto given = [&](const char *name) {
    try {
      return sub->get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound &) {
      return false;
    }
  };
  if (given("--smt")) s.smt = flags.smt;
  if (given("--timeout")) s.timeout = flags.timeout;
  if (given("--jobs")) s.jobs = flags.jobs;
  if (given("--fuel")) s.fuel = flags.fuel;
  if (given("--seeds")) s.seeds = flags.seeds;
  if (given("--budget")) s.budget = flags.budget;
  if (given("--corpus")) s.corpus = flags.corpus;
  if (given("--debug-wf")) s.debug_wf = true;
  if (s.jobs < 1 || s.fuel < 0 || s.timeout <= 0) {
    std::cerr << "lr: --jobs, --fuel and --timeout must be positive\n";
    return kUsage;
  }

  if (sub == check) return cmd_check(paths, s, dump_c, dump_s, out_path);
  if (sub == constraints) return cmd_check({one_path}, s, true, false, out_path);
  if (sub == solve) return cmd_check({one_path}, s, false, true, out_path);
  if (sub == runc) return cmd_run(one_path, s, trace_path);
  if (sub == sound) return cmd_soundness(s, out_path);
  return kUsage;
}
