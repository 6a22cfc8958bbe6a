// SPDX-License-Identifier: Apache-2.0
#include "lr/oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "lr/printer.hpp"

namespace lr {

// SMT-LIB rendering

namespace {

std::string smt_sym(const std::string &n) { return "|" + n + "|"; }

std::string smt_int(int64_t z) {
  if (z < 0) return "(- " + std::to_string(z).substr(1) + ")";
  return std::to_string(z);
}

const char *smt_op(ROp op) {
  switch (op) {
    case ROp::Eq: return "=";
    case ROp::And: return "and";
    case ROp::Or: return "or";
    case ROp::Add: return "+";
    case ROp::Sub: return "-";
    case ROp::Mul: return "*";
    case ROp::Lt: return "<";
    case ROp::Le: return "<=";
    case ROp::Gt: return ">";
    case ROp::Ge: return ">=";
    default: return "?";
  }
}

}  // namespace

std::string smt_term(const RExp &e) {
  switch (e->op) {
    case ROp::Var: return smt_sym(e->name);
    case ROp::IntC:
    case ROp::LocC: return smt_int(e->val);
    case ROp::BoolC: return e->val ? "true" : "false";
    case ROp::Not: return "(not " + smt_term(e->args[0]) + ")";
    case ROp::KApp: throw std::runtime_error("unknown predicate in SMT query");
    default:
      return std::string("(") + smt_op(e->op) + " " + smt_term(e->args[0]) + " " +
             smt_term(e->args[1]) + ")";
  }
}

std::string smt_query_text(const Query &q) {
  std::ostringstream os;
  for (const auto &[n, s] : q.binders)
    os << "(declare-const " << smt_sym(n) << ' ' << (s == Sort::Bool ? "Bool" : "Int") << ")\n";
  for (const auto &h : q.hyps) os << "(assert " << smt_term(h) << ")\n";
  os << "(assert (not " << smt_term(q.goal) << "))\n";
  return os.str();
}

// SmtOracle

SmtOracle::SmtOracle(SmtConfig cfg) : cfg_(std::move(cfg)) {}

SmtOracle::~SmtOracle() { stop(); }

bool SmtOracle::available() { return pid_ > 0 || start(); }

bool SmtOracle::start() {
  int in[2], out[2];
  if (pipe(in) != 0) return false;
  if (pipe(out) != 0) {
    close(in[0]);
    close(in[1]);
    return false;
  }
  // exec failure is reported through this pipe
  int err[2];
  if (pipe2(err, O_CLOEXEC) != 0) return false;
  pid_t pid = fork();
  if (pid < 0) return false;
  if (pid == 0) {
    dup2(in[0], 0);
    dup2(out[1], 1);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, 2);
    close(in[1]);
    close(out[0]);
    close(err[0]);
    std::vector<char *> argv;
    argv.push_back(const_cast<char *>(cfg_.path.c_str()));
    for (auto &a : cfg_.args) argv.push_back(const_cast<char *>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    char c = 1;
    (void)!write(err[1], &c, 1);
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  close(err[1]);
  char c;
  ssize_t n = read(err[0], &c, 1);
  close(err[0]);
  if (n > 0) {
    waitpid(pid, nullptr, 0);
    close(in[1]);
    close(out[0]);
    return false;
  }
  signal(SIGPIPE, SIG_IGN);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  buf_.clear();
  transcript_.clear();
  return send("(set-option :print-success false)\n(set-logic QF_LIA)\n");
}

void SmtOracle::stop() {
  if (pid_ <= 0) return;
  close(to_child_);
  close(from_child_);
  kill(pid_, SIGKILL);
  waitpid(pid_, nullptr, 0);
  pid_ = -1;
}

bool SmtOracle::send(const std::string &s) {
  transcript_ += s;
  size_t off = 0;
  while (off < s.size()) {
    ssize_t n = write(to_child_, s.data() + off, s.size() - off);
    if (n <= 0) return false;
    off += static_cast<size_t>(n);
  }
  return true;
}

// Reads one complete s-expression or atom line.
bool SmtOracle::read_response(std::string &out) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(static_cast<int64_t>(cfg_.timeout_s * 1000));
  for (;;) {
    // try to extract a complete response from buf_
    size_t i = buf_.find_first_not_of(" \t\r\n");
    if (i != std::string::npos) {
      if (buf_[i] == '(') {
        int depth = 0;
        bool in_str = false;
        for (size_t j = i; j < buf_.size(); ++j) {
          char c = buf_[j];
          if (c == '"') in_str = !in_str;
          if (in_str) continue;
          if (c == '(') ++depth;
          if (c == ')' && --depth == 0) {
            out = buf_.substr(i, j - i + 1);
            buf_.erase(0, j + 1);
            return true;
          }
        }
      } else {
        size_t nl = buf_.find('\n', i);
        if (nl != std::string::npos) {
          out = buf_.substr(i, nl - i);
          buf_.erase(0, nl + 1);
          return true;
        }
      }
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return false;
    int ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    pollfd p{from_child_, POLLIN, 0};
    int r = poll(&p, 1, ms);
    if (r <= 0) return false;
    char tmp[4096];
    ssize_t n = read(from_child_, tmp, sizeof tmp);
    if (n <= 0) return false;
    buf_.append(tmp, static_cast<size_t>(n));
  }
}

void SmtOracle::dump_transcript(const std::string &why) {
  if (cfg_.transcript_dir.empty()) return;
  std::filesystem::create_directories(cfg_.transcript_dir);
  std::string name = cfg_.transcript_dir + "/query_" +
                     std::to_string(std::hash<std::string>{}(transcript_)) + ".smt2";
  std::ofstream f(name);
  f << "; " << why << "\n" << transcript_;
}

namespace {

// tiny s-expression reader for (get-value ...) replies
struct SExp {
  std::string atom;
  std::vector<SExp> kids;
  bool list = false;
};

SExp parse_sexp(const std::string &s, size_t &i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  SExp e;
  if (i < s.size() && s[i] == '(') {
    e.list = true;
    ++i;
    for (;;) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) break;
      if (s[i] == ')') {
        ++i;
        break;
      }
      e.kids.push_back(parse_sexp(s, i));
    }
    return e;
  }
  if (i < s.size() && s[i] == '|') {
    size_t j = s.find('|', i + 1);
    e.atom = s.substr(i + 1, j - i - 1);
    i = j + 1;
    return e;
  }
  size_t j = i;
  while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
         s[j] != ')')
    ++j;
  e.atom = s.substr(i, j - i);
  i = j;
  return e;
}

bool sexp_value(const SExp &e, int64_t &out) {
  if (!e.list) {
    if (e.atom == "true") { out = 1; return true; }
    if (e.atom == "false") { out = 0; return true; }
    try {
      out = std::stoll(e.atom);
      return true;
    } catch (...) {
      return false;
    }
  }
  if (e.kids.size() == 2 && !e.kids[0].list && e.kids[0].atom == "-") {
    int64_t v;
    if (!sexp_value(e.kids[1], v)) return false;
    out = -v;
    return true;
  }
  return false;
}

}  // namespace

Verdict SmtOracle::valid(const Query &q) {
  Verdict v;
  if (pid_ <= 0 && !start()) {
    v.reason = "solver backend unavailable: " + cfg_.path;
    return v;
  }
  transcript_.clear();
  std::string body;
  try {
    body = smt_query_text(q);
  } catch (const std::exception &e) {
    v.reason = e.what();
    return v;
  }
  if (!send("(push 1)\n" + body + "(check-sat)\n")) {
    stop();
    v.reason = "solver pipe closed";
    return v;
  }
  std::string resp;
  if (!read_response(resp)) {
    dump_transcript("timeout or no reply");
    stop();
    v.reason = "solver timeout";
    return v;
  }
  if (resp == "unsat") {
    v.kind = VerdictKind::Valid;
  } else if (resp == "sat") {
    v.kind = VerdictKind::Invalid;
    if (!q.binders.empty()) {
      std::string names;
      for (const auto &[n, s] : q.binders) names += " " + smt_sym(n);
      std::string mv;
      if (!send("(get-value (" + names.substr(1) + "))\n") || !read_response(mv)) {
        dump_transcript("no model reply");
        stop();
        v.kind = VerdictKind::Unknown;
        v.reason = "malformed model reply";
        return v;
      }
      size_t i = 0;
      SExp m = parse_sexp(mv, i);
      for (const auto &pair : m.kids) {
        if (!pair.list || pair.kids.size() != 2) continue;
        int64_t val;
        if (!sexp_value(pair.kids[1], val)) continue;
        for (const auto &[n, s] : q.binders)
          if (n == pair.kids[0].atom) v.model[n] = GVal{s, val};
      }
    }
  } else {
    dump_transcript("reply: " + resp);
    v.kind = VerdictKind::Unknown;
    v.reason = "solver replied: " + resp;
    if (resp.rfind("(error", 0) == 0) {
      // an error may leave the assertion stack in an unknown state
      stop();
      return v;
    }
  }
  send("(pop 1)\n");
  return v;
}

// cache

std::string canonical_query(const Query &q, std::map<std::string, std::string> *renaming) {
  std::map<std::string, std::string> ren;
  RSubst th;
  std::ostringstream os;
  int i = 0;
  for (const auto &[n, s] : q.binders) {
    std::string c = "x" + std::to_string(i++);
    ren[n] = c;
    th[n] = rvar(c);
    os << c << ':' << sort_name(s) << ',';
  }
  os << '|';
  for (const auto &h : q.hyps) os << print_rexp(subst_all(h, th)) << ';';
  os << "|-" << print_rexp(subst_all(q.goal, th));
  if (renaming) *renaming = ren;
  return os.str();
}

Verdict CachedOracle::valid(const Query &q) {
  std::map<std::string, std::string> ren;
  std::string key = canonical_query(q, &ren);
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      Verdict v = it->second;
      Assignment m;
      for (const auto &[orig, canon] : ren) {
        auto mi = v.model.find(canon);
        if (mi != v.model.end()) m[orig] = mi->second;
      }
      v.model = m;
      return v;
    }
  }
  Verdict v = inner_->valid(q);
  Verdict stored = v;
  Assignment cm;
  for (const auto &[orig, canon] : ren) {
    auto mi = v.model.find(orig);
    if (mi != v.model.end()) cm[canon] = mi->second;
  }
  stored.model = cm;
  std::lock_guard<std::mutex> g(mu_);
  ++misses_;
  cache_[key] = stored;
  return v;
}

}  // namespace lr
