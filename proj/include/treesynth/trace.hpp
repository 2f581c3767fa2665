#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treesynth/term.hpp"

namespace treesynth {

struct TraceChild {
  std::size_t rule = 0;
  Term state;
  std::uint64_t visits = 0;
  double cumulative_value = 0.0;
  double prior_policy = 1.0;
};

struct TraceNode {
  Term state;
  std::uint64_t visits = 0;
  double cumulative_value = 0.0;
  double prior_value = 0.0;
  std::vector<TraceChild> children;
};

struct SearchCounters {
  std::uint64_t nodes_expanded = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t bigsteps = 0;
};

/// Record of one search. `path` holds the big-step active nodes from the
/// root; on success it continues with the final rollout's descent, so its
/// last entry is the solved program.
struct SearchTrace {
  Term constraint;
  std::vector<TraceNode> path;
  std::optional<Term> solution;
  std::string failure_reason;
  SearchCounters counters;
  double seconds = 0.0;
  double gamma = 0.0;
  double decay_base = 0.0;
  std::uint64_t seed = 0;

  bool solved() const { return solution.has_value(); }
  std::string to_json() const;
};

}  // namespace treesynth
