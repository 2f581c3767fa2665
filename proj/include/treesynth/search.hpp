#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "treesynth/features.hpp"
#include "treesynth/gbt.hpp"
#include "treesynth/grammar.hpp"
#include "treesynth/oracle.hpp"
#include "treesynth/problem.hpp"
#include "treesynth/trace.hpp"

namespace treesynth {

struct SearchBudget {
  std::size_t max_bigsteps = 30;
  std::size_t max_rollouts = 6500;
  std::chrono::milliseconds wall_clock{100000};
  double gamma = 2.0;
  double decay_base = 0.98;
  /// Partial programs larger than this are failed leaves.
  std::size_t max_nodes = 200;
  /// After each big-step, drop the subtrees below the siblings of the
  /// committed child. Later rollouts never reach them.
  bool prune = true;

  /// Throws std::invalid_argument unless every field is positive and
  /// decay_base lies in (0, 1].
  void validate() const;
};

/// Policy and value estimators; a missing model means the default
/// (policy 1, value 0.95^#NT).
struct Guidance {
  std::shared_ptr<const Model> policy;
  std::shared_ptr<const Model> value;
  std::size_t hash_base = kDefaultHashBase;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = UINT32_MAX;

/// UCT of a child: C/v + g * policy * sqrt(ln(parent_visits) / v), or with
/// v = 0, prior_value + g * policy * sqrt(ln(parent_visits)).
double uct_score(double cumulative_value, std::uint64_t visits, std::uint64_t parent_visits, double prior_value,
                 double policy, double g);

enum class Terminal { Solved, Failed };

struct Edge {
  std::size_t rule;
  NodeId child;
  double prior_policy;
};

struct SearchNode {
  PartialProgram state;
  NodeId parent = kNoNode;
  std::uint64_t visits = 0;
  double cumulative_value = 0.0;
  double prior_value = 0.0;
  std::vector<Edge> edges;
  bool expanded = false;
  std::optional<Terminal> terminal;
  /// Descendants released after a big-step; the node keeps its own state and
  /// statistics only if it was a sibling of the committed child.
  bool pruned = false;
};

enum class RolloutStatus { Solution, Continue, Timeout };

struct RolloutResult {
  RolloutStatus status = RolloutStatus::Continue;
  std::vector<NodeId> path;
};

struct SearchResult {
  std::optional<Term> solution;
  SearchTrace trace;
};

/// One grammar tree search. Single-threaded; statistics persist across
/// big-steps.
class Search {
 public:
  Search(const SygusProblem& problem, Oracle& oracle, Guidance guidance, SearchBudget budget, std::uint64_t seed);

  NodeId root() const { return 0; }
  const SearchNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  /// Exploration coefficient at big-step b: gamma * decay_base^b.
  double gamma_at(std::size_t b) const;
  double uct(NodeId parent, const Edge& edge, std::size_t bigstep) const;
  /// Child with maximal UCT; ties broken uniformly with the seeded generator.
  NodeId best_successor(NodeId id, std::size_t bigstep);
  /// Materializes one child per applicable rule with its priors. The node's
  /// visits become 1 and its cumulative value its prior value.
  /// Throws std::logic_error if already expanded or complete.
  void expand(NodeId id);
  RolloutResult rollout(NodeId active, std::size_t bigstep);
  void backpropagate(const std::vector<NodeId>& path, double value);
  /// Most visited child; ties broken with the seeded generator.
  NodeId most_visited_child(NodeId id);
  NodeId active() const { return active_; }

  /// Runs the big-step loop once.
  SearchResult run();

  /// Checks visits = 1 + sum of child visits on every expanded non-terminal
  /// node (at most that on ancestors of the active node, which later
  /// rollouts no longer pass through) and average values in [0, 1].
  /// Pruned nodes are skipped.
  /// Returns a description of the first violation, or nothing.
  std::optional<std::string> audit() const;

  const SearchCounters& counters() const { return counters_; }
  /// Solved leaf and rollout path of the last successful rollout.
  std::optional<NodeId> solved_node() const { return solved_; }

 private:
  /// `features` is the state's featurization when the caller already has it.
  NodeId add_node(PartialProgram state, NodeId parent, const FeatureVector* features = nullptr);
  bool guided() const { return guidance_.policy || guidance_.value; }
  bool out_of_time() const;
  SearchTrace snapshot(const std::vector<NodeId>& path) const;
  void prune_siblings(NodeId parent, NodeId keep);
  std::size_t pick(std::size_t n);

  const SygusProblem& problem_;
  Oracle& oracle_;
  Guidance guidance_;
  SearchBudget budget_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  FeatureVector phi_features_;
  std::optional<BoundModel> policy_;
  std::optional<BoundModel> value_;
  std::vector<SearchNode> nodes_;
  SearchCounters counters_;
  std::chrono::steady_clock::time_point started_;
  std::optional<NodeId> solved_;
  NodeId active_ = 0;
};

/// Big-steps search from the grammar tree root. Oracle failures end the
/// search as a failure with the error as reason.
SearchResult big_steps(const SygusProblem& problem, Oracle& oracle, const Guidance& guidance,
                       const SearchBudget& budget, std::uint64_t seed);

}  // namespace treesynth
