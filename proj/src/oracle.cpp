#include "treesynth/oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "treesynth/printer.hpp"
#include "treesynth/sexpr.hpp"

namespace treesynth {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

bool is_error(const std::string& response) { return response.rfind("(error", 0) == 0; }

bool looks_like_z3(const std::vector<std::string>& command) {
  if (command.empty()) return false;
  const std::string& exe = command.front();
  auto slash = exe.find_last_of('/');
  std::string base = slash == std::string::npos ? exe : exe.substr(slash + 1);
  return base.rfind("z3", 0) == 0;
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Valid:
      return "valid";
    case Verdict::Invalid:
      return "invalid";
    case Verdict::Unknown:
      return "unknown";
  }
  return "unknown";
}

SolverProcess::SolverProcess(const std::vector<std::string>& command) {
  if (command.empty()) throw SolverCrash("empty solver command");
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SolverCrash(std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw SolverCrash(std::strerror(errno));
  }
  std::vector<std::string> args = command;
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw SolverCrash(std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SolverProcess::~SolverProcess() {
  if (to_child_ >= 0) ::close(to_child_);
  if (pid_ > 0) {
    // Closing stdin lets a well-behaved solver exit on its own.
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (pid_ > 0) kill();
  }
  if (from_child_ >= 0) ::close(from_child_);
}

void SolverProcess::kill() {
  if (pid_ <= 0) return;
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
  pid_ = -1;
}

void SolverProcess::send(const std::string& text) {
  std::size_t done = 0;
  while (done < text.size()) {
    ssize_t n = ::write(to_child_, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverCrash(std::string("solver input closed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> SolverProcess::take_buffered() {
  std::size_t start = 0;
  while (start < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[start]))) ++start;
  if (start == buffer_.size()) {
    buffer_.clear();
    return std::nullopt;
  }
  std::size_t end = start;
  if (buffer_[start] == '(') {
    int depth = 0;
    bool in_string = false;
    for (; end < buffer_.size(); ++end) {
      char c = buffer_[end];
      if (in_string) {
        if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '(') ++depth;
      else if (c == ')' && --depth == 0) break;
    }
    if (end == buffer_.size()) return std::nullopt;
    ++end;
  } else {
    while (end < buffer_.size() && !std::isspace(static_cast<unsigned char>(buffer_[end]))) ++end;
    if (end == buffer_.size()) return std::nullopt;  // atom may continue
  }
  std::string out = buffer_.substr(start, end - start);
  buffer_.erase(0, end);
  return out;
}

std::optional<std::string> SolverProcess::read_response(Clock::time_point deadline) {
  while (true) {
    if (auto r = take_buffered()) return r;
    auto now = Clock::now();
    if (now >= deadline) return std::nullopt;
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd pfd{from_child_, POLLIN, 0};
    int ready = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(1, wait)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw SolverCrash(std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverCrash(std::strerror(errno));
    }
    if (n == 0) throw SolverCrash("solver closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string validity_script(const Term& phi, const std::vector<Term>& vars) {
  std::string out;
  for (const Term& v : vars) {
    out += "(declare-const " + v.name() + " " + std::string(sort_name(v.sort())) + ")\n";
  }
  out += "(assert (not " + print_term(phi) + "))\n(check-sat)\n";
  return out;
}

Assignment parse_model(const std::string& response, const std::vector<Term>& vars) {
  Assignment out;
  for (const Term& v : vars) out[v.name()] = v.sort() == Sort::Int ? Value::of_int(0) : Value::of_bool(false);
  std::vector<SExpr> parsed = parse_sexprs(response);
  if (parsed.size() != 1 || !parsed.front().is_list()) throw ProtocolError("malformed model: " + response);
  for (const SExpr& def : parsed.front().items) {
    if (!def.is_list() || def.items.size() != 5 || !def.items[0].is_symbol("define-fun")) continue;
    const std::string& name = def.items[1].atom;
    auto it = out.find(name);
    if (it == out.end()) continue;
    const SExpr& value = def.items[4];
    if (value.is_symbol("true") || value.is_symbol("false")) {
      it->second = Value::of_bool(value.atom == "true");
    } else if (value.is_numeral()) {
      it->second = Value::of_int(std::stoll(value.atom));
    } else if (value.is_list() && value.items.size() == 2 && value.items[0].is_symbol("-") &&
               value.items[1].is_numeral()) {
      it->second = Value::of_int(std::stoll("-" + value.items[1].atom));
    } else {
      throw ProtocolError("unsupported model value for " + name + ": " + value.to_string());
    }
  }
  return out;
}

Oracle::Oracle(SolverConfig config) : config_(std::move(config)) {}

Oracle::~Oracle() = default;

void Oracle::shutdown() { process_.reset(); }

std::optional<std::string> Oracle::expect(Clock::time_point deadline) {
  return process_->read_response(deadline);
}

void Oracle::ensure_started() {
  if (process_ && process_->alive()) return;
  process_ = std::make_unique<SolverProcess>(config_.command);
  std::string setup = "(set-option :print-success false)\n(set-option :produce-models true)\n";
  if (looks_like_z3(config_.command)) {
    setup += "(set-option :timeout " + std::to_string(config_.timeout.count()) + ")\n";
  }
  setup += "(set-logic LIA)\n";
  process_->send(setup);
  incremental_ = false;
  if (!config_.incremental) return;
  // Probe push/pop support; a solver that rejects either answers with an error.
  process_->send("(push 1)\n(pop 1)\n(get-info :name)\n");
  auto deadline = Clock::now() + std::chrono::seconds(5);
  bool errors = false;
  while (true) {
    auto r = expect(deadline);
    if (!r) throw SolverCrash("solver did not answer the startup probe");
    if (is_error(*r)) {
      errors = true;
      continue;
    }
    break;
  }
  incremental_ = !errors;
}

VerificationResult Oracle::solve(const Term& phi, const std::vector<Term>& vars) {
  auto started = Clock::now();
  if (!incremental_ && process_) process_.reset();
  ensure_started();
  ++stats_.solver_calls;
  const std::string script = validity_script(phi, vars);
  process_->send(incremental_ ? "(push 1)\n" + script : script);
  // Grace period on top of the solver's own timeout before we pull the plug.
  auto deadline = started + config_.timeout + std::chrono::seconds(1);

  VerificationResult result;
  auto answer = expect(deadline);
  if (!answer) {
    process_->kill();
    process_.reset();
    ++stats_.restarts;
    result.verdict = Verdict::Unknown;
    result.elapsed = Clock::now() - started;
    return result;
  }
  if (is_error(*answer)) {
    process_.reset();
    ++stats_.restarts;
    throw ProtocolError("solver error: " + *answer);
  }
  if (*answer == "unsat") {
    result.verdict = Verdict::Valid;
  } else if (*answer == "sat") {
    result.verdict = Verdict::Invalid;
    process_->send("(get-model)\n");
    auto model = expect(deadline + std::chrono::seconds(1));
    if (model && !is_error(*model)) {
      try {
        result.counterexample = parse_model(*model, vars);
      } catch (const std::out_of_range&) {
        // Model values beyond 64 bits: keep the verdict, drop the model.
      }
    }
  } else if (*answer == "unknown" || *answer == "timeout") {
    result.verdict = Verdict::Unknown;
  } else {
    process_.reset();
    ++stats_.restarts;
    throw ProtocolError("unexpected solver answer: " + *answer);
  }
  if (incremental_) process_->send("(pop 1)\n");
  result.elapsed = Clock::now() - started;
  return result;
}

VerificationResult Oracle::query(const Term& phi, const std::vector<Term>& declared) {
  std::vector<Term> vars = declared;
  std::set<std::string> names;
  for (const Term& v : vars) names.insert(v.name());
  for (const Term& v : free_variables(phi)) {
    if (names.insert(v.name()).second) vars.push_back(v);
  }
  return solve(phi, vars);
}

VerificationResult Oracle::verify(const SygusProblem& p, const Term& body) {
  ++stats_.queries;
  if (!body.valid() || !body.is_complete()) throw SortError("only complete programs can be verified");
  if (body.sort() != p.target.result) throw SortError("candidate has the wrong sort");
  MemoKey key{p.constraint, body};
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++stats_.memo_hits;
    return it->second;
  }
  auto started = Clock::now();
  const Term phi = instantiate(p, body);
  VerificationResult result;
  if (!is_linear(phi)) {
    // Outside the theory; never a solution.
    result.verdict = Verdict::Unknown;
  } else {
    std::vector<Assignment>& known = counterexamples_[p.constraint];
    bool rejected = false;
    if (config_.counterexample_filter) {
      for (const Assignment& cex : known) {
        auto v = evaluate(phi, cex);
        if (v && !v->boolean) {
          result.verdict = Verdict::Invalid;
          result.counterexample = cex;
          rejected = true;
          ++stats_.filtered;
          break;
        }
      }
    }
    if (!rejected) {
      result = query(phi, p.variables);
      if (result.counterexample) known.push_back(*result.counterexample);
    }
  }
  result.elapsed = Clock::now() - started;
  memo_.emplace(std::move(key), result);
  return result;
}

void Oracle::forget() {
  memo_.clear();
  counterexamples_.clear();
}

VerificationResult Oracle::check_validity(const Term& phi, const std::vector<Term>& vars) {
  ++stats_.queries;
  if (phi.sort() != Sort::Bool) throw SortError("validity needs a Bool formula");
  if (!is_linear(phi)) return {};
  return query(phi, vars);
}

}  // namespace treesynth
