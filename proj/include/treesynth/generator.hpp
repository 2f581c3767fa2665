#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesynth/oracle.hpp"
#include "treesynth/problem.hpp"
#include "treesynth/unification.hpp"

namespace treesynth {

class GenerationError : public std::runtime_error {
 public:
  enum class Kind { InvalidSource, VerificationFailed, NoCandidates };
  GenerationError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Integer subterm occurrences chosen for anti-unification, with their
/// generalization. Source variables left in the LGG are lifted to
/// parameters, and parameters are renamed x1..xn in pre-order.
struct SubtermSet {
  std::vector<Path> paths;
  GeneralizationResult generalization;
  std::size_t lgg_size = 0;
};

struct GeneratedSource {
  std::string file;
  std::vector<Path> paths;
  std::vector<Substitution> witnesses;
  /// Sorted top-level symbols of the source assertions.
  std::vector<std::string> assertion_heads;
  /// True when the negated source was the valid formula.
  bool negated = false;
};

struct GeneratedProblem {
  SygusProblem problem;
  Term known_solution;
  GeneratedSource source;
};

enum class Category { Basic, StraightLine, ControlFlow, Unsolved };
const char* category_name(Category c);

/// The valid formula to generate from: the conjunction of the assertions if
/// its universal closure is valid, else its negation if that is valid.
/// Throws GenerationError(InvalidSource) otherwise.
Term prepare_source(Oracle& oracle, const SmtProblem& smt, bool* negated = nullptr);

/// Candidate sets of k pairwise non-nested Int occurrences in `formula`,
/// ranked by LGG size (descending), then fewer parameters, then path order.
/// Sets whose LGG is a single variable or has no parameter are dropped.
std::vector<SubtermSet> select_subterms(const Term& formula, std::size_t k = 2, std::size_t budget = 16);

/// Replaces each selected occurrence by an application of the target and
/// checks that the LGG solves the resulting problem.
/// Throws GenerationError on an invalid source or a failed check.
GeneratedProblem generate_sygus(Oracle& oracle, const Term& formula, const std::vector<Term>& vars,
                                const SubtermSet& s, const std::string& source_file = "");

struct ClassifyBudget {
  std::size_t enumeration_size = 6;
  std::chrono::milliseconds search_time{30000};
  std::size_t search_rollouts = 6500;
  std::size_t search_bigsteps = 30;
};

/// Basic if a parameter or grammar constant verifies; StraightLine if the
/// ite-free grammar yields a solution (enumeration, then search); else
/// ControlFlow if the full grammar does; else Unsolved. Relative to the
/// in-repo solver and the given budget.
Category classify(Oracle& oracle, const SygusProblem& p, const ClassifyBudget& budget = {});

/// Source file stem with digits and separators removed.
std::string family_stem(const std::string& file);

/// Keeps the first problem of each (family stem, assertion heads) group.
std::vector<GeneratedProblem> filter_similar(const std::vector<GeneratedProblem>& problems);

struct GeneratorOptions {
  std::size_t k = 2;
  /// Candidate sets tried per source file.
  std::size_t budget = 16;
  /// Problems emitted per source file at most.
  std::size_t per_file = 3;
  bool classify = true;
  ClassifyBudget classify_budget;
  bool filter = true;
  bool drop_basic = false;
  SolverConfig solver;
};

struct GenerationSummary {
  std::size_t sources = 0;
  std::size_t emitted = 0;
  std::size_t filtered_out = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // file, reason
  std::vector<std::string> outputs;
};

/// Reads every .smt2 file in `smt_dir` (sorted by name), writes one .sl file
/// per problem into `out_dir` and a manifest.jsonl describing them.
GenerationSummary generate_directory(const std::string& smt_dir, const std::string& out_dir,
                                     const GeneratorOptions& options);

}  // namespace treesynth
