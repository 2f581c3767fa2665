#include "treesynth/search.hpp"

#include <cmath>
#include <stdexcept>

namespace treesynth {

void SearchBudget::validate() const {
  if (max_nodes == 0 || wall_clock.count() < 0 || gamma < 0 || !(decay_base > 0.0 && decay_base <= 1.0)) {
    throw std::invalid_argument("search budget out of range");
  }
}

Search::Search(const SygusProblem& problem, Oracle& oracle, Guidance guidance, SearchBudget budget,
               std::uint64_t seed)
    : problem_(problem),
      oracle_(oracle),
      guidance_(std::move(guidance)),
      budget_(budget),
      seed_(seed),
      rng_(seed),
      started_(std::chrono::steady_clock::now()) {
  budget_.validate();
  if (guided()) phi_features_ = featurize_term(problem_.constraint, guidance_.hash_base);
  if (guidance_.policy) policy_.emplace(*guidance_.policy, phi_features_);
  if (guidance_.value) value_.emplace(*guidance_.value, phi_features_);
  add_node(PartialProgram::start(problem_.grammar), kNoNode);
}

NodeId Search::add_node(PartialProgram state, NodeId parent, const FeatureVector* features) {
  SearchNode n;
  n.parent = parent;
  n.state = std::move(state);
  if (!value_) n.prior_value = default_value(n.state);
  else if (features) n.prior_value = value_->predict(*features);
  else n.prior_value = value_->predict(featurize_term(n.state.tree(), guidance_.hash_base));
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

double Search::gamma_at(std::size_t b) const {
  return budget_.gamma * std::pow(budget_.decay_base, static_cast<double>(b));
}

double uct_score(double cumulative_value, std::uint64_t visits, std::uint64_t parent_visits, double prior_value,
                 double policy, double g) {
  const double log_p = std::log(static_cast<double>(parent_visits));
  if (visits == 0) return prior_value + g * policy * std::sqrt(log_p);
  const double v = static_cast<double>(visits);
  return cumulative_value / v + g * policy * std::sqrt(log_p / v);
}

double Search::uct(NodeId parent, const Edge& edge, std::size_t bigstep) const {
  const SearchNode& c = nodes_[edge.child];
  return uct_score(c.cumulative_value, c.visits, nodes_[parent].visits, c.prior_value, edge.prior_policy,
                   gamma_at(bigstep));
}

std::size_t Search::pick(std::size_t n) { return n == 1 ? 0 : static_cast<std::size_t>(rng_() % n); }

NodeId Search::best_successor(NodeId id, std::size_t bigstep) {
  const SearchNode& n = nodes_[id];
  if (!n.expanded || n.edges.empty()) throw std::logic_error("best_successor on an unexpanded node");
  std::vector<NodeId> best;
  double best_score = -INFINITY;
  for (const Edge& e : n.edges) {
    double s = uct(id, e, bigstep);
    if (s > best_score) {
      best_score = s;
      best.assign(1, e.child);
    } else if (s == best_score) {
      best.push_back(e.child);
    }
  }
  return best[pick(best.size())];
}

NodeId Search::most_visited_child(NodeId id) {
  const SearchNode& n = nodes_[id];
  if (!n.expanded || n.edges.empty()) throw std::logic_error("most_visited_child on an unexpanded node");
  std::vector<NodeId> best;
  std::uint64_t most = 0;
  for (const Edge& e : n.edges) {
    std::uint64_t v = nodes_[e.child].visits;
    if (best.empty() || v > most) {
      most = v;
      best.assign(1, e.child);
    } else if (v == most) {
      best.push_back(e.child);
    }
  }
  return best[pick(best.size())];
}

void Search::expand(NodeId id) {
  if (nodes_[id].expanded) throw std::logic_error("node already expanded");
  if (nodes_[id].state.complete()) throw std::logic_error("complete programs are not expanded");
  const PartialProgram state = nodes_[id].state;
  FeatureVector h_features;
  if (guided()) h_features = featurize_term(state.tree(), guidance_.hash_base);
  std::vector<Edge> edges;
  for (std::size_t r : applicable_rules(state, problem_.grammar)) {
    PartialProgram next = expand_leftmost(state, problem_.grammar, r);
    double policy = default_policy();
    FeatureVector next_features;
    if (guided()) next_features = featurize_term(next.tree(), guidance_.hash_base);
    if (policy_) policy = policy_->predict(h_features.concat(next_features));
    NodeId child = add_node(std::move(next), id, guided() ? &next_features : nullptr);
    edges.push_back({r, child, policy});
  }
  SearchNode& n = nodes_[id];
  n.edges = std::move(edges);
  n.expanded = true;
  n.visits = 1;
  n.cumulative_value = n.prior_value;
  ++counters_.nodes_expanded;
}

void Search::backpropagate(const std::vector<NodeId>& path, double value) {
  for (NodeId id : path) {
    nodes_[id].visits += 1;
    nodes_[id].cumulative_value += value;
  }
}

bool Search::out_of_time() const {
  return std::chrono::steady_clock::now() - started_ >= budget_.wall_clock;
}

RolloutResult Search::rollout(NodeId active, std::size_t bigstep) {
  RolloutResult r;
  if (out_of_time()) {
    r.status = RolloutStatus::Timeout;
    return r;
  }
  NodeId cur = active;
  r.path.push_back(cur);
  while (nodes_[cur].expanded) {
    cur = best_successor(cur, bigstep);
    r.path.push_back(cur);
  }
  SearchNode& leaf = nodes_[cur];
  if (leaf.terminal == Terminal::Failed) {
    backpropagate(r.path, 0.0);
    return r;
  }
  if (leaf.state.complete()) {
    ++counters_.oracle_calls;
    Verdict v = oracle_.verify(problem_, leaf.state.tree()).verdict;
    SearchNode& checked = nodes_[cur];
    if (v == Verdict::Valid) {
      checked.terminal = Terminal::Solved;
      solved_ = cur;
      r.status = RolloutStatus::Solution;
      return r;
    }
    checked.terminal = Terminal::Failed;
    checked.cumulative_value = 0.0;
    backpropagate(r.path, 0.0);
    return r;
  }
  if (leaf.state.tree().size() > budget_.max_nodes) {
    leaf.terminal = Terminal::Failed;
    leaf.cumulative_value = 0.0;
    backpropagate(r.path, 0.0);
    return r;
  }
  expand(cur);
  // The new node's own visit and value come from the expansion.
  std::vector<NodeId> above(r.path.begin(), r.path.end() - 1);
  backpropagate(above, nodes_[cur].prior_value);
  return r;
}

SearchTrace Search::snapshot(const std::vector<NodeId>& path) const {
  SearchTrace t;
  t.constraint = problem_.constraint;
  t.counters = counters_;
  t.gamma = budget_.gamma;
  t.decay_base = budget_.decay_base;
  t.seed = seed_;
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  for (NodeId id : path) {
    const SearchNode& n = nodes_[id];
    TraceNode tn{n.state.tree(), n.visits, n.cumulative_value, n.prior_value, {}};
    for (const Edge& e : n.edges) {
      const SearchNode& c = nodes_[e.child];
      tn.children.push_back({e.rule, c.state.tree(), c.visits, c.cumulative_value, e.prior_policy});
    }
    t.path.push_back(std::move(tn));
  }
  return t;
}

SearchResult Search::run() {
  std::vector<NodeId> path = {root()};
  active_ = root();
  auto fail = [&](std::string reason) {
    SearchResult res;
    res.trace = snapshot(path);
    res.trace.failure_reason = std::move(reason);
    return res;
  };
  if (budget_.max_bigsteps == 0) return fail("no big-steps allowed");
  try {
    if (!nodes_[root()].expanded) expand(root());
    for (std::size_t b = 0; b < budget_.max_bigsteps; ++b) {
      ++counters_.bigsteps;
      for (std::size_t i = 0; i < budget_.max_rollouts; ++i) {
        RolloutResult r = rollout(active_, b);
        if (r.status == RolloutStatus::Timeout) return fail("timeout");
        ++counters_.rollouts;
        if (r.status == RolloutStatus::Solution) {
          path.insert(path.end(), r.path.begin() + 1, r.path.end());
          SearchResult res;
          res.solution = nodes_[*solved_].state.tree();
          res.trace = snapshot(path);
          res.trace.solution = res.solution;
          return res;
        }
      }
      if (!nodes_[active_].expanded) return fail("dead end");
      const NodeId parent = active_;
      active_ = most_visited_child(parent);
      if (budget_.prune) prune_siblings(parent, active_);
      path.push_back(active_);
    }
  } catch (const SolverCrash& e) {
    return fail(std::string("solver crash: ") + e.what());
  } catch (const ProtocolError& e) {
    return fail(std::string("solver protocol error: ") + e.what());
  }
  return fail("budget exhausted");
}

void Search::prune_siblings(NodeId parent, NodeId keep) {
  std::vector<NodeId> stack;
  for (const Edge& e : nodes_[parent].edges) {
    if (e.child == keep) continue;
    SearchNode& sibling = nodes_[e.child];
    for (const Edge& g : sibling.edges) stack.push_back(g.child);
    std::vector<Edge>().swap(sibling.edges);
    sibling.pruned = true;
  }
  while (!stack.empty()) {
    SearchNode& n = nodes_[stack.back()];
    stack.pop_back();
    for (const Edge& g : n.edges) stack.push_back(g.child);
    std::vector<Edge>().swap(n.edges);
    n.state = PartialProgram();
    n.pruned = true;
  }
}

std::optional<std::string> Search::audit() const {
  std::vector<bool> ancestor(nodes_.size(), false);
  for (NodeId a = nodes_[active_].parent; a != kNoNode; a = nodes_[a].parent) ancestor[a] = true;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const SearchNode& n = nodes_[id];
    if (n.pruned) continue;
    if (n.visits > 0) {
      double avg = n.cumulative_value / static_cast<double>(n.visits);
      if (avg < -1e-12 || avg > 1.0 + 1e-12) return "node " + std::to_string(id) + " average value out of range";
    }
    if (n.expanded && n.visits < 1) return "expanded node " + std::to_string(id) + " has no visits";
    if (n.terminal && !n.state.complete() && n.state.tree().size() <= budget_.max_nodes) {
      return "terminal node " + std::to_string(id) + " is an incomplete program";
    }
    if (!n.expanded) continue;
    std::uint64_t below = 1;
    for (const Edge& e : n.edges) below += nodes_[e.child].visits;
    bool ok = ancestor[id] ? n.visits <= below : n.visits == below;
    if (!ok) {
      return "node " + std::to_string(id) + ": visits " + std::to_string(n.visits) + " vs 1 + children " +
             std::to_string(below - 1);
    }
  }
  return std::nullopt;
}

SearchResult big_steps(const SygusProblem& problem, Oracle& oracle, const Guidance& guidance,
                       const SearchBudget& budget, std::uint64_t seed) {
  Search s(problem, oracle, guidance, budget, seed);
  return s.run();
}

}  // namespace treesynth
