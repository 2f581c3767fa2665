#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "treesynth/generator.hpp"
#include "treesynth/harness.hpp"
#include "treesynth/printer.hpp"

using namespace treesynth;

namespace {

constexpr int kSolved = 0;
constexpr int kNotSolved = 1;
constexpr int kUsage = 2;
constexpr int kInternal = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct BudgetFlags {
  std::size_t bigsteps = SearchBudget{}.max_bigsteps;
  std::size_t rollouts = SearchBudget{}.max_rollouts;
  long long timeout_ms = SearchBudget{}.wall_clock.count();
  std::size_t max_nodes = SearchBudget{}.max_nodes;

  void attach(CLI::App* app) {
    app->add_option("--bigsteps", bigsteps, "Big-step limit");
    app->add_option("--rollouts", rollouts, "Rollout limit");
    app->add_option("--timeout-ms", timeout_ms, "Wall clock per problem");
    app->add_option("--max-nodes", max_nodes, "Largest program size explored");
  }
  SearchBudget budget() const {
    SearchBudget b;
    b.max_bigsteps = bigsteps;
    b.max_rollouts = rollouts;
    b.wall_clock = std::chrono::milliseconds(timeout_ms);
    b.max_nodes = max_nodes;
    return b;
  }
};

void print_report(const IterationReport& r) {
  for (const ProblemOutcome& o : r.outcomes) {
    std::cout << o.problem << '\t' << (o.solved ? "solved" : "unsolved") << '\t' << o.seconds << "s\t"
              << (o.solved ? o.solution : o.error) << '\n';
  }
  std::cout << "iteration " << r.iteration << ": train " << r.train_solved << ", test " << r.test_solved << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SyGuS LIA synthesis with guided tree search"};
  app.require_subcommand(1);
  std::string solver = "z3 -in";
  app.add_option("--solver", solver, "SMT solver command")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve one SyGuS problem");
  std::string problem_file, models_dir;
  std::uint64_t seed = 0;
  std::optional<int> model_iteration;
  BudgetFlags solve_budget;
  solve->add_option("file", problem_file)->required();
  solve->add_option("--models", models_dir, "Directory with iter<k>.{policy,value}.json");
  solve->add_option("--iteration", model_iteration, "Model iteration (default: latest)");
  solve->add_option("--seed", seed);
  solve_budget.attach(solve);

  auto* generate = app.add_subcommand("generate", "Derive SyGuS problems from SMT files");
  std::string smt_dir, out_dir;
  GeneratorOptions gen;
  long long classify_ms = gen.classify_budget.search_time.count();
  bool no_classify = false, no_filter = false;
  generate->add_option("smt-dir", smt_dir)->required();
  generate->add_option("out-dir", out_dir)->required();
  generate->add_option("--k", gen.k)->capture_default_str();
  generate->add_option("--budget", gen.budget, "Candidate subterm sets per file")->capture_default_str();
  generate->add_option("--per-file", gen.per_file)->capture_default_str();
  generate->add_option("--classify-ms", classify_ms, "Search time per classification step")->capture_default_str();
  generate->add_flag("--no-classify", no_classify);
  generate->add_flag("--no-filter", no_filter);
  generate->add_flag("--drop-basic", gen.drop_basic);

  auto* train = app.add_subcommand("train", "Run the reinforcement-learning loop");
  std::string config_file;
  train->add_option("config", config_file)->required();

  auto* benchmark = app.add_subcommand("bench", "Evaluate a directory of problems");
  std::string bench_dir, bench_out = ".";
  BudgetFlags bench_budget;
  std::size_t workers = default_workers();
  benchmark->add_option("dir", bench_dir)->required();
  benchmark->add_option("--models", models_dir);
  benchmark->add_option("--iteration", model_iteration);
  benchmark->add_option("--seed", seed);
  benchmark->add_option("--output", bench_out, "Where results/ is written");
  benchmark->add_option("--workers", workers)->capture_default_str();
  bench_budget.attach(benchmark);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  SolverConfig solver_config;
  std::istringstream words(solver);
  solver_config.command.clear();
  for (std::string w; words >> w;) solver_config.command.push_back(w);
  if (solver_config.command.empty()) {
    std::cerr << "error: empty solver command\n";
    return kUsage;
  }

  try {
    if (*solve) {
      SygusProblem p = parse_sygus(read_file(problem_file));
      Guidance g = models_dir.empty() ? Guidance{} : load_guidance(models_dir, kDefaultHashBase, model_iteration);
      Oracle oracle(solver_config);
      SearchResult r = big_steps(p, oracle, g, solve_budget.budget(), seed);
      if (!r.solution) {
        std::cerr << "not solved: " << r.trace.failure_reason << '\n';
        return kNotSolved;
      }
      std::cout << "(define-fun " << p.target.name << " (";
      for (std::size_t i = 0; i < p.target.params.size(); ++i) {
        const Term& v = p.target.params[i];
        std::cout << (i ? " " : "") << '(' << v.name() << ' ' << sort_name(v.sort()) << ')';
      }
      std::cout << ") " << sort_name(p.target.result) << ' ' << print_term(*r.solution) << ")\n";
      return kSolved;
    }
    if (*generate) {
      gen.classify = !no_classify;
      gen.filter = !no_filter;
      gen.classify_budget.search_time = std::chrono::milliseconds(classify_ms);
      gen.solver = solver_config;
      GenerationSummary s = generate_directory(smt_dir, out_dir, gen);
      for (const auto& [file, reason] : s.skipped) std::cerr << "skipped " << file << ": " << reason << '\n';
      std::cout << s.sources << " sources, " << s.emitted << " problems written, " << s.filtered_out
                << " filtered as similar\n";
      return kSolved;
    }
    if (*train) {
      RunConfig c = RunConfig::parse(read_file(config_file));
      std::vector<IterationReport> reports = rl_loop(c);
      for (const IterationReport& r : reports) {
        std::cout << "iteration " << r.iteration << ": train " << r.train_solved << ", test " << r.test_solved << '\n';
      }
      std::cout << "best iteration " << reports[best_iteration(reports)].iteration << '\n';
      return kSolved;
    }
    if (*benchmark) {
      RunConfig c;
      c.problem_paths = {bench_dir};
      c.seed = seed;
      c.budget = bench_budget.budget();
      c.workers = workers;
      c.solver = solver_config;
      c.output_dir = bench_out;
      c.validate();
      Guidance g = models_dir.empty() ? Guidance{} : load_guidance(models_dir, c.hash_base, model_iteration);
      IterationReport r = bench(load_problems(c.problem_paths), g, c, model_iteration.value_or(0));
      print_report(r);
      return kSolved;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
