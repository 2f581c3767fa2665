#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "treesynth/harness.hpp"

using namespace treesynth;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kLinear =
    "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)"
    "(declare-var x Int)(declare-var y Int)(constraint (= (f x y) BODY))(check-synth)";

/// A scratch directory of small problems: f(x, y) = body for a few bodies.
fs::path small_corpus(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("treesynth_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir / "problems");
  const std::vector<std::string> bodies = {"x", "y", "(+ x y)", "(+ x 1)", "(- x y)", "(+ y y)", "(- y 1)", "(+ x x)"};
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    std::string text = kLinear;
    text.replace(text.find("BODY"), 4, bodies[i]);
    std::ofstream(dir / "problems" / ("p" + std::to_string(i) + ".sl")) << text;
  }
  std::ofstream(dir / "problems" / "max2.sl") << read_file(TREESYNTH_TEST_DATA "/max2.sl");
  return dir;
}

RunConfig small_config(const fs::path& dir) {
  RunConfig c;
  c.problem_paths = {(dir / "problems").string()};
  c.budget.max_rollouts = 300;
  c.budget.max_bigsteps = 10;
  c.budget.wall_clock = std::chrono::milliseconds(5000);
  c.policy_params.rounds = c.value_params.rounds = 10;
  c.iterations = 2;
  c.workers = 2;
  c.seed = 7;
  c.output_dir = (dir / "out").string();
  return c;
}

}  // namespace

TEST_CASE("config text round-trips and rejects bad input") {
  RunConfig c = RunConfig::parse(
      "# comment\nproblems = a, b\nsplit = 0.5\nseed = 11\nwindow = 2\ntimeout_ms = 10000\n"
      "solver = z3 -in\nlearning_rate = 0.1\n");
  CHECK(c.problem_paths == std::vector<std::string>{"a", "b"});
  CHECK(c.train_fraction == 0.5);
  CHECK(c.window == 2);
  CHECK(c.budget.wall_clock.count() == 10000);
  CHECK(c.policy_params.learning_rate == 0.1);
  CHECK(c.policy_params.max_depth == 25);
  CHECK(c.value_params.max_depth == 20);
  RunConfig again = RunConfig::parse(c.dump());
  CHECK(again.dump() == c.dump());
  CHECK(again.hash() == c.hash());
  CHECK_THROWS_AS(RunConfig::parse("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("window = 0\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("seed = -x\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("split\n"), ConfigError);
}

TEST_CASE("training window") {
  CHECK(training_window(6, 4) == std::vector<int>{3, 4, 5, 6});
  CHECK(training_window(1, 4) == std::vector<int>{0, 1});
  CHECK(training_window(5, 1) == std::vector<int>{5});
}

TEST_CASE("split is seeded and proportional") {
  std::vector<NamedProblem> ps;
  for (int i = 0; i < 40; ++i) ps.push_back({"p" + std::to_string(i), {}, ""});
  auto a = ps, b = ps, c = ps;
  split_problems(a, 0.75, 1);
  split_problems(b, 0.75, 1);
  split_problems(c, 0.75, 2);
  int train = 0;
  bool same = true, differs = false;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    train += a[i].split == "train";
    same = same && a[i].split == b[i].split;
    differs = differs || a[i].split != c[i].split;
  }
  CHECK(train == 30);
  CHECK(same);
  CHECK(differs);
  // Input order does not matter.
  std::reverse(b.begin(), b.end());
  split_problems(b, 0.75, 1);
  for (const NamedProblem& p : b) {
    auto it = std::find_if(a.begin(), a.end(), [&](const NamedProblem& q) { return q.name == p.name; });
    CHECK(it->split == p.split);
  }
}

TEST_CASE("empty problem list gives an empty report") {
  RunConfig c;
  IterationRun r = run_iteration({}, Guidance{}, c);
  CHECK(r.report.outcomes.empty());
  CHECK(r.report.train_solved == 0);
  CHECK(r.report.test_solved == 0);
}

TEST_CASE("per-problem errors do not abort the batch") {
  fs::path dir = small_corpus("errors");
  RunConfig c = small_config(dir);
  c.solver.command = {"no-such-solver-binary"};
  auto problems = load_problems(c.problem_paths);
  IterationRun r = run_iteration(problems, Guidance{}, c);
  REQUIRE(r.report.outcomes.size() == problems.size());
  for (const ProblemOutcome& o : r.report.outcomes) {
    CHECK_FALSE(o.solved);
    CHECK_FALSE(o.error.empty());
  }
}

TEST_CASE("rl loop bookkeeping") {
  fs::path dir = small_corpus("loop");
  RunConfig c = small_config(dir);
  std::vector<IterationReport> reports = rl_loop(c);
  REQUIRE(reports.size() == 3);
  CHECK_FALSE(reports[0].policy_model);
  CHECK_FALSE(reports[0].value_model);
  std::set<std::string> ever;
  std::size_t last_ever = 0;
  for (const IterationReport& r : reports) {
    std::size_t train = 0, test = 0;
    for (const ProblemOutcome& o : r.outcomes) {
      if (o.solved) {
        (o.split == "train" ? train : test)++;
        ever.insert(o.problem);
      }
    }
    CHECK(train == r.train_solved);
    CHECK(test == r.test_solved);
    CHECK(ever.size() >= last_ever);
    last_ever = ever.size();
    CHECK(fs::exists(fs::path(c.output_dir) / "results" / ("iter" + std::to_string(r.iteration) + ".report.json")));
  }
  CHECK(reports[1].value_model);
  CHECK(fs::exists(*reports[1].value_model));

  // Every stored row comes from a training problem.
  std::set<std::string> test_names;
  for (const ProblemOutcome& o : reports[0].outcomes) {
    if (o.split == "test") test_names.insert(o.problem);
  }
  CHECK_FALSE(test_names.empty());
  for (const IterationReport& r : reports) {
    auto rows = rows_from_csv(read_file(fs::path(c.output_dir) / "results" / ("iter" + std::to_string(r.iteration) + ".rows.csv")));
    for (const TrainingRow& row : rows) {
      CHECK(row.split == "train");
      CHECK(test_names.count(row.problem) == 0);
      CHECK(row.iteration == r.iteration);
    }
  }

  // summary.csv: header plus one line per problem per iteration.
  std::istringstream csv(read_file(fs::path(c.output_dir) / "results" / "summary.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "problem,iteration,solved,seconds,oracle_calls");
  std::size_t lines = 0, solved = 0;
  while (std::getline(csv, line)) {
    ++lines;
    std::stringstream fields(line);
    std::string f;
    std::vector<std::string> parts;
    while (std::getline(fields, f, ',')) parts.push_back(f);
    REQUIRE(parts.size() == 5);
    solved += parts[2] == "1";
  }
  std::size_t expected_solved = 0;
  for (const IterationReport& r : reports) expected_solved += r.train_solved + r.test_solved;
  CHECK(lines == 3 * reports[0].outcomes.size());
  CHECK(solved == expected_solved);

  auto json = nlohmann::json::parse(read_file(fs::path(c.output_dir) / "results" / "iter1.report.json"));
  CHECK(json["iteration"] == 1);
  CHECK(json["train_solved"] == reports[1].train_solved);
  CHECK(json["outcomes"].size() == reports[1].outcomes.size());

  Guidance g = load_guidance((fs::path(c.output_dir) / "models").string(), c.hash_base);
  CHECK(g.value);
  CHECK(best_iteration(reports) < reports.size());
}

TEST_CASE("bench is reproducible and honours the budget") {
  fs::path dir = small_corpus("bench");
  RunConfig c = small_config(dir);
  c.workers = 1;
  auto problems = load_problems(c.problem_paths);
  IterationReport a = bench(problems, Guidance{}, c);
  c.workers = 3;
  IterationReport b = bench(problems, Guidance{}, c);
  REQUIRE(a.outcomes.size() == b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    CHECK(a.outcomes[i].solved == b.outcomes[i].solved);
    CHECK(a.outcomes[i].solution == b.outcomes[i].solution);
  }
  CHECK(a.train_solved >= 8);

  c.budget.wall_clock = std::chrono::milliseconds(0);
  IterationReport none = bench(problems, Guidance{}, c);
  CHECK(none.train_solved + none.test_solved == 0);
}
