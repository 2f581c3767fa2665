#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "treesynth/eval.hpp"
#include "treesynth/problem.hpp"
#include "treesynth/term.hpp"

namespace treesynth {

/// The solver process died or could not be started.
class SolverCrash : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver answered something we cannot interpret.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Verdict { Valid, Invalid, Unknown };

std::string_view verdict_name(Verdict v);

struct VerificationResult {
  Verdict verdict = Verdict::Unknown;
  /// Present only for Invalid when a model was obtained.
  std::optional<Assignment> counterexample;
  std::chrono::duration<double> elapsed{0};
};

struct SolverConfig {
  std::vector<std::string> command = {"z3", "-in"};
  std::chrono::milliseconds timeout{5000};
  /// Use push/pop on one long-lived process when the solver accepts it.
  bool incremental = true;
  /// Reject candidates against earlier counterexamples before asking the
  /// solver. Only ever produces Invalid verdicts that the evaluator proves.
  bool counterexample_filter = true;
};

/// An SMT-LIB v2 solver running as a child process, speaking over pipes.
/// Owns the process; it is reaped on destruction.
class SolverProcess {
 public:
  explicit SolverProcess(const std::vector<std::string>& command);
  ~SolverProcess();
  SolverProcess(const SolverProcess&) = delete;
  SolverProcess& operator=(const SolverProcess&) = delete;

  void send(const std::string& text);
  /// Next complete response (atom or balanced s-expression); nullopt when
  /// `deadline` passes first. Throws SolverCrash on end of stream.
  std::optional<std::string> read_response(std::chrono::steady_clock::time_point deadline);

  bool alive() const { return pid_ > 0; }
  int pid() const { return pid_; }
  void kill();

 private:
  std::optional<std::string> take_buffered();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct OracleStats {
  std::size_t queries = 0;
  std::size_t solver_calls = 0;
  std::size_t memo_hits = 0;
  std::size_t filtered = 0;
  std::size_t restarts = 0;
};

/// SMT-backed verification of candidate programs. Not shareable between
/// threads; give every search worker its own instance.
class Oracle {
 public:
  explicit Oracle(SolverConfig config = {});
  ~Oracle();
  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  /// Checks whether `body` solves `p`. Results are memoized per
  /// (constraint, body).
  VerificationResult verify(const SygusProblem& p, const Term& body);

  /// Validity of the universal closure of `phi` over `vars`.
  VerificationResult check_validity(const Term& phi, const std::vector<Term>& vars);

  const OracleStats& stats() const { return stats_; }
  const SolverConfig& config() const { return config_; }
  /// Drops the memo and stored counterexamples, e.g. between problems.
  void forget();
  /// Terminates the solver process; the next query starts a fresh one.
  void shutdown();

 private:
  VerificationResult query(const Term& phi, const std::vector<Term>& vars);
  VerificationResult solve(const Term& phi, const std::vector<Term>& vars);
  void ensure_started();
  std::optional<std::string> expect(std::chrono::steady_clock::time_point deadline);

  struct MemoKey {
    Term constraint;
    Term body;
    friend bool operator==(const MemoKey& a, const MemoKey& b) {
      return a.constraint == b.constraint && a.body == b.body;
    }
  };
  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const { return k.constraint.hash() * 31 + k.body.hash(); }
  };

  SolverConfig config_;
  std::unique_ptr<SolverProcess> process_;
  bool incremental_ = false;
  std::unordered_map<MemoKey, VerificationResult, MemoHash> memo_;
  std::unordered_map<Term, std::vector<Assignment>, TermHash> counterexamples_;
  OracleStats stats_;
};

/// Parses a get-model response into values for `vars`; variables the model
/// omits default to 0 / false.
Assignment parse_model(const std::string& response, const std::vector<Term>& vars);

/// The SMT-LIB script asking whether `phi` has a falsifying assignment.
std::string validity_script(const Term& phi, const std::vector<Term>& vars);

}  // namespace treesynth
