#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "treesynth/printer.hpp"
#include "treesynth/search.hpp"

using namespace treesynth;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SygusProblem max2() { return parse_sygus(read_file(TREESYNTH_TEST_DATA "/max2.sl")); }

/// S -> (+ S S) | 1 for a nullary target that must be negative: never solvable.
SygusProblem hopeless() {
  return parse_sygus(
      "(set-logic LIA)(synth-fun f () Int ((S Int)) ((S Int ((+ S S) 1))))"
      "(constraint (< (f) 0))(check-synth)");
}

SearchBudget small_budget(std::size_t rollouts = 200) {
  SearchBudget b;
  b.max_bigsteps = 5;
  b.max_rollouts = rollouts;
  return b;
}

std::string stable_json(SearchTrace t) {
  t.seconds = 0;
  return t.to_json();
}

}  // namespace

TEST_CASE("uct examples") {
  CHECK(uct_score(0.9, 2, 8, 0.3, 0.5, 0.0) == 0.45);
  CHECK(uct_score(0.0, 1, 1, 0.3, 1.0, 1.0) == 0.0);
  const double hand = 0.45 + 1.0 * std::sqrt(std::log(8.0) / 2.0);
  CHECK(std::abs(uct_score(0.9, 2, 8, 0.0, 0.5, 2.0) - 1.46967) < 1e-5);
  CHECK(uct_score(0.9, 2, 8, 0.0, 0.5, 2.0) == doctest::Approx(hand).epsilon(1e-12));
  // An unvisited child with a high prior beats the visited sibling above.
  double fresh = uct_score(0.0, 0, 8, 0.9, 0.5, 2.0);
  CHECK(fresh == doctest::Approx(0.9 + std::sqrt(std::log(8.0))));
  CHECK(fresh > 1.46967);
}

TEST_CASE("property: scaling sibling policies keeps the argmax when exploitation terms tie") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::size_t k = 2 + rng() % 5;
    double q = static_cast<double>(rng() % 100) / 100.0;
    std::uint64_t parent = 2 + rng() % 50;
    std::vector<double> pol(k);
    std::vector<std::uint64_t> visits(k);
    for (std::size_t c = 0; c < k; ++c) {
      pol[c] = static_cast<double>(1 + rng() % 100) / 100.0;
      visits[c] = 1 + rng() % 10;
    }
    double scale = static_cast<double>(1 + rng() % 400) / 100.0;
    auto argmax = [&](double s) {
      std::size_t best = 0;
      double best_score = -1;
      for (std::size_t c = 0; c < k; ++c) {
        double u = uct_score(q * visits[c], visits[c], parent, 0.0, pol[c] * s, 2.0);
        if (u > best_score + 1e-12) {
          best_score = u;
          best = c;
        }
      }
      return best;
    };
    REQUIRE(argmax(1.0) == argmax(scale));
  }
}

TEST_CASE("scaling sibling policies can move the argmax when exploitation terms differ") {
  // Scaling only shrinks the exploration term, so the better-valued child wins.
  auto a = [](double s) { return uct_score(0.9, 1, 10, 0.0, 0.1 * s, 1.0); };
  auto b = [](double s) { return uct_score(0.1, 1, 10, 0.0, 1.0 * s, 1.0); };
  CHECK(b(1.0) > a(1.0));
  CHECK(a(0.1) > b(0.1));
}

TEST_CASE("expand on the two-rule root") {
  SygusProblem p = parse_sygus(
      "(set-logic LIA)(synth-fun f () Int ((E Int) (C Int)) ((E Int ((+ E E) C)) (C Int (1 2))))"
      "(constraint (= (f) 3))(check-synth)");
  Oracle oracle;
  Search s(p, oracle, Guidance{}, small_budget(), 1);
  s.expand(s.root());
  const SearchNode& root = s.node(s.root());
  REQUIRE(root.edges.size() == 2);
  CHECK(root.visits == 1);
  CHECK(root.prior_value == doctest::Approx(0.95));
  CHECK(root.cumulative_value == root.prior_value);
  for (const Edge& e : root.edges) CHECK(e.prior_policy == 1.0);
  CHECK(s.node(root.edges[0].child).prior_value == doctest::Approx(0.9025));
  CHECK(s.node(root.edges[1].child).prior_value == doctest::Approx(0.95));
  CHECK_THROWS_AS(s.expand(s.root()), std::logic_error);
}

TEST_CASE("a forced candidate is found by the first rollout") {
  SygusProblem p = parse_sygus(
      "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int ((S Int)) ((S Int ((ite (>= x y) x y)))))"
      "(declare-var a Int)(declare-var b Int)"
      "(constraint (>= (f a b) a))(constraint (>= (f a b) b))(check-synth)");
  Oracle oracle;
  Search s(p, oracle, Guidance{}, small_budget(), 1);
  s.expand(s.root());
  RolloutResult r = s.rollout(s.root(), 0);
  CHECK(r.status == RolloutStatus::Solution);
  CHECK(r.path.size() == 2);
}

TEST_CASE("failed leaves add nothing but visits; expansions add the new prior") {
  SygusProblem p = hopeless();
  Oracle oracle;
  Search s(p, oracle, Guidance{}, small_budget(), 1);
  s.expand(s.root());
  // First rollout: the complete child 1 (prior 1.0) outranks (+ S S) (0.9025).
  RolloutResult first = s.rollout(s.root(), 0);
  REQUIRE(first.path.size() == 2);
  CHECK(print_term(s.node(first.path[1]).state.tree()) == "1");
  CHECK(s.node(first.path[1]).terminal == Terminal::Failed);
  CHECK(s.node(s.root()).visits == 2);
  CHECK(s.node(s.root()).cumulative_value == doctest::Approx(0.95));
  CHECK(s.node(first.path[1]).visits == 1);
  CHECK(s.node(first.path[1]).cumulative_value == 0.0);

  RolloutResult second = s.rollout(s.root(), 0);
  REQUIRE(second.path.size() == 2);
  const SearchNode& grown = s.node(second.path[1]);
  CHECK(grown.expanded);
  CHECK(grown.state.nonterminal_count() == 2);
  CHECK(grown.visits == 1);
  CHECK(grown.cumulative_value == doctest::Approx(0.9025));
  CHECK(s.node(s.root()).visits == 3);
  CHECK(s.node(s.root()).cumulative_value == doctest::Approx(0.95 + 0.9025));
  std::size_t calls = oracle.stats().queries;

  // A failed leaf is never verified twice.
  for (int i = 0; i < 30; ++i) s.rollout(s.root(), 0);
  CHECK(s.node(first.path[1]).terminal == Terminal::Failed);
  CHECK(oracle.stats().queries >= calls);
  CHECK_FALSE(s.audit().has_value());
}

TEST_CASE("backpropagate is additive") {
  SygusProblem p = hopeless();
  Oracle oracle;
  Search s(p, oracle, Guidance{}, small_budget(), 1);
  s.expand(s.root());
  std::vector<NodeId> path = {s.root(), s.node(s.root()).edges[0].child};
  s.backpropagate(path, 0.0);
  CHECK(s.node(s.root()).visits == 2);
  CHECK(s.node(s.root()).cumulative_value == doctest::Approx(0.95));
  s.backpropagate(path, 0.25);
  s.backpropagate(path, 0.5);
  CHECK(s.node(path[1]).visits == 3);
  CHECK(s.node(path[1]).cumulative_value == doctest::Approx(0.75));
}

TEST_CASE("most visited child and tie-breaking") {
  SygusProblem p = parse_sygus(
      "(set-logic LIA)(synth-fun f () Int ((S Int)) ((S Int (1 2))))(constraint (< (f) 0))(check-synth)");
  Oracle oracle;
  Search s(p, oracle, Guidance{}, small_budget(), 99);
  s.expand(s.root());
  const NodeId a = s.node(s.root()).edges[0].child;
  const NodeId b = s.node(s.root()).edges[1].child;

  // Equal statistics: best_successor picks each about half the time.
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) first += s.best_successor(s.root(), 0) == a;
  double expected = draws / 2.0;
  double chi2 = std::pow(first - expected, 2) / expected + std::pow(draws - first - expected, 2) / expected;
  CHECK(chi2 < 10.83);  // one degree of freedom, p = 0.001

  for (int i = 0; i < 5; ++i) s.backpropagate({a}, 0.0);
  for (int i = 0; i < 100; ++i) s.backpropagate({b}, 0.0);
  CHECK(s.most_visited_child(s.root()) == b);
}

TEST_CASE("big_steps solves max2 with default guidance and the solution re-verifies") {
  SygusProblem p = max2();
  p.grammar = default_grammar(p.target.params);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    Oracle oracle;
    SearchResult r = big_steps(p, oracle, Guidance{}, SearchBudget{}, seed);
    REQUIRE(r.solution.has_value());
    CHECK(r.trace.solved());
    CHECK(r.trace.path.front().state == Term::nonterminal(p.grammar.start(), Sort::Int));
    CHECK(r.trace.path.back().state == *r.solution);
    for (std::size_t i = 0; i + 1 < r.trace.path.size(); ++i) {
      bool linked = false;
      for (const TraceChild& c : r.trace.path[i].children) linked |= c.state == r.trace.path[i + 1].state;
      REQUIRE(linked);
    }
    Oracle fresh;
    CHECK(fresh.verify(p, *r.solution).verdict == Verdict::Valid);
  }
}

TEST_CASE("zero big-steps fail immediately") {
  SygusProblem p = max2();
  Oracle oracle;
  SearchBudget b;
  b.max_bigsteps = 0;
  SearchResult r = big_steps(p, oracle, Guidance{}, b, 0);
  CHECK_FALSE(r.solution.has_value());
  CHECK(r.trace.path.size() == 1);
  CHECK(r.trace.counters.rollouts == 0);
}

TEST_CASE("search is reproducible and keeps visit counts consistent") {
  for (SygusProblem p : {max2(), hopeless()}) {
    Oracle o1, o2;
    Search a(p, o1, Guidance{}, small_budget(), 7);
    Search b(p, o2, Guidance{}, small_budget(), 7);
    SearchResult ra = a.run();
    SearchResult rb = b.run();
    CHECK(stable_json(ra.trace) == stable_json(rb.trace));
    CHECK_FALSE(a.audit().has_value());
  }
}

TEST_CASE("pruning released subtrees does not change the search") {
  for (SygusProblem p : {max2(), hopeless()}) {
    SearchBudget kept = small_budget();
    kept.prune = false;
    Oracle o1, o2;
    Search a(p, o1, Guidance{}, small_budget(), 11);
    Search b(p, o2, Guidance{}, kept, 11);
    SearchResult ra = a.run();
    SearchResult rb = b.run();
    CHECK(stable_json(ra.trace) == stable_json(rb.trace));
    CHECK_FALSE(b.audit().has_value());
    CHECK_FALSE(a.audit().has_value());
  }
}

TEST_CASE("the node limit turns oversized programs into failed leaves") {
  SygusProblem p = hopeless();
  Oracle oracle;
  SearchBudget b = small_budget(400);
  b.max_nodes = 5;
  Search s(p, oracle, Guidance{}, b, 3);
  SearchResult r = s.run();
  CHECK_FALSE(r.solution.has_value());
  for (NodeId id = 0; id < s.size(); ++id) {
    const SearchNode& n = s.node(id);
    if (n.expanded && !n.pruned) CHECK(n.state.tree().size() <= 5);
  }
  CHECK_FALSE(s.audit().has_value());
}

TEST_CASE("a timeout ends the search as a failure") {
  SygusProblem p = hopeless();
  Oracle oracle;
  SearchBudget b;
  b.wall_clock = std::chrono::milliseconds(0);
  SearchResult r = big_steps(p, oracle, Guidance{}, b, 0);
  CHECK_FALSE(r.solution.has_value());
  CHECK(r.trace.failure_reason == "timeout");
}

TEST_CASE("learned guidance with the wrong input length is rejected") {
  SygusProblem p = max2();
  Oracle oracle;
  Guidance g;
  g.value = std::make_shared<Model>(ModelKind::Value, 10, 0.5);
  CHECK_THROWS_AS(Search(p, oracle, g, small_budget(), 0), ModelError);
  g.value = std::make_shared<Model>(ModelKind::Value, 2 * kDefaultHashBase, 0.5);
  Search s(p, oracle, g, small_budget(), 0);
  CHECK(s.node(s.root()).prior_value == 0.5);
}
