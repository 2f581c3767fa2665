#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treesynth/gbt.hpp"
#include "treesynth/oracle.hpp"
#include "treesynth/problem.hpp"
#include "treesynth/search.hpp"
#include "treesynth/training.hpp"

namespace treesynth {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> problem_paths;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  SearchBudget budget;
  std::size_t hash_base = kDefaultHashBase;
  GbtParams policy_params = GbtParams::for_kind(ModelKind::Policy);
  GbtParams value_params = GbtParams::for_kind(ModelKind::Value);
  std::size_t iterations = 3;
  std::size_t window = 4;
  std::size_t workers = 1;
  SolverConfig solver;
  std::string output_dir = ".";

  /// Reads `key = value` lines; '#' starts a comment. Unknown keys and
  /// malformed values are errors. Keys: problems (comma separated), split,
  /// seed, bigsteps, rollouts, timeout_ms, gamma, decay, max_nodes,
  /// hash_base, policy_depth, value_depth, rounds, learning_rate,
  /// iterations, window, workers, solver, solver_timeout_ms, output.
  static RunConfig parse(const std::string& text);
  /// Canonical text form; parse(dump()) reproduces the configuration.
  std::string dump() const;
  std::uint64_t hash() const;
  void validate() const;
};

/// Iterations whose rows train the models used after `completed`: the last
/// `window` of them, `completed` included.
std::vector<int> training_window(int completed, std::size_t window);

/// Cores minus one, at least one.
std::size_t default_workers();

struct NamedProblem {
  std::string name;
  SygusProblem problem;
  std::string split = "train";
};

/// Loads .sl files (directories are scanned, sorted by name).
std::vector<NamedProblem> load_problems(const std::vector<std::string>& paths);

/// Deterministic split: shuffles the names with the seed and tags the first
/// round(fraction * n) as "train", the rest as "test". Input order is kept.
void split_problems(std::vector<NamedProblem>& problems, double train_fraction, std::uint64_t seed);

struct ProblemOutcome {
  std::string problem;
  std::string split;
  bool solved = false;
  double seconds = 0.0;
  std::uint64_t oracle_calls = 0;
  std::string solution;
  std::string error;
};

struct IterationReport {
  int iteration = 0;
  std::vector<ProblemOutcome> outcomes;
  std::size_t train_solved = 0;
  std::size_t test_solved = 0;
  std::optional<std::string> policy_model;
  std::optional<std::string> value_model;
  std::uint64_t config_hash = 0;

  std::string to_json() const;
};

struct IterationRun {
  IterationReport report;
  std::vector<SearchTrace> traces;  // parallel to report.outcomes
};

/// Searches every problem with the given guidance; problems are dealt to
/// workers round-robin, each worker owning its own solver. Per-problem
/// errors are recorded in the outcome.
IterationRun run_iteration(const std::vector<NamedProblem>& problems, const Guidance& guidance,
                           const RunConfig& config, int iteration = 0);

/// Training rows from the traces of "train" problems only.
std::vector<TrainingRow> collect_rows(const std::vector<NamedProblem>& problems, const IterationRun& run,
                                      std::size_t hash_base);

/// Baseline plus `config.iterations` guided iterations. After each iteration
/// the rows of the last `window` iterations train fresh models for the next.
/// Writes results/iter<k>.report.json, results/iter<k>.rows.csv,
/// results/summary.csv and models/iter<k>.{policy,value}.json under the
/// output directory.
std::vector<IterationReport> rl_loop(const RunConfig& config);

/// One evaluation pass without data collection; writes the report and
/// summary rows like an iteration.
IterationReport bench(const std::vector<NamedProblem>& problems, const Guidance& guidance, const RunConfig& config,
                      int iteration = 0);

/// Index of the iteration with the most solved training problems (first on ties).
std::size_t best_iteration(const std::vector<IterationReport>& reports);

/// Loads models/iter<k>.{policy,value}.json from `dir`, using the highest k
/// present unless one is given. Missing files leave the default in place.
Guidance load_guidance(const std::string& dir, std::size_t hash_base, std::optional<int> iteration = std::nullopt);

/// Writes the report JSON and appends its rows to summary.csv.
void write_report(const IterationReport& report, const std::string& output_dir);

}  // namespace treesynth
