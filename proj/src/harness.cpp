#include "treesynth/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "treesynth/printer.hpp"

namespace treesynth {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("bad value for " + key + ": " + v);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string exact(double d) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<int> training_window(int completed, std::size_t window) {
  std::vector<int> out;
  for (int k = std::max(0, completed - static_cast<int>(window) + 1); k <= completed; ++k) out.push_back(k);
  return out;
}

std::size_t default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n > 1 ? n - 1 : 1;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  c.workers = default_workers();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = unquote(trim(line.substr(eq + 1)));
    if (key == "problems") c.problem_paths = split_on(v, ',');
    else if (key == "split") c.train_fraction = number<double>(key, v);
    else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
    else if (key == "bigsteps") c.budget.max_bigsteps = number<std::size_t>(key, v);
    else if (key == "rollouts") c.budget.max_rollouts = number<std::size_t>(key, v);
    else if (key == "timeout_ms") c.budget.wall_clock = std::chrono::milliseconds(number<std::int64_t>(key, v));
    else if (key == "gamma") c.budget.gamma = number<double>(key, v);
    else if (key == "decay") c.budget.decay_base = number<double>(key, v);
    else if (key == "max_nodes") c.budget.max_nodes = number<std::size_t>(key, v);
    else if (key == "hash_base") c.hash_base = number<std::size_t>(key, v);
    else if (key == "policy_depth") c.policy_params.max_depth = number<int>(key, v);
    else if (key == "value_depth") c.value_params.max_depth = number<int>(key, v);
    else if (key == "rounds") c.policy_params.rounds = c.value_params.rounds = number<int>(key, v);
    else if (key == "learning_rate") c.policy_params.learning_rate = c.value_params.learning_rate = number<double>(key, v);
    else if (key == "iterations") c.iterations = number<std::size_t>(key, v);
    else if (key == "window") c.window = number<std::size_t>(key, v);
    else if (key == "workers") c.workers = number<std::size_t>(key, v);
    else if (key == "solver") c.solver.command = split_on(v, ' ');
    else if (key == "solver_timeout_ms") c.solver.timeout = std::chrono::milliseconds(number<std::int64_t>(key, v));
    else if (key == "output") c.output_dir = v;
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + key);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("split must lie in (0, 1]");
  if (window < 1) throw ConfigError("window must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (hash_base < 2) throw ConfigError("hash_base must be at least 2");
  if (solver.command.empty()) throw ConfigError("solver command is empty");
  try {
    budget.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  out << "problems = ";
  for (std::size_t i = 0; i < problem_paths.size(); ++i) out << (i ? "," : "") << problem_paths[i];
  out << "\nsplit = " << exact(train_fraction) << "\nseed = " << seed << "\nbigsteps = " << budget.max_bigsteps
      << "\nrollouts = " << budget.max_rollouts << "\ntimeout_ms = " << budget.wall_clock.count()
      << "\ngamma = " << exact(budget.gamma) << "\ndecay = " << exact(budget.decay_base)
      << "\nmax_nodes = " << budget.max_nodes << "\nhash_base = " << hash_base
      << "\npolicy_depth = " << policy_params.max_depth << "\nvalue_depth = " << value_params.max_depth
      << "\nrounds = " << policy_params.rounds << "\nlearning_rate = " << exact(policy_params.learning_rate)
      << "\niterations = " << iterations << "\nwindow = " << window << "\nworkers = " << workers << "\nsolver = ";
  for (std::size_t i = 0; i < solver.command.size(); ++i) out << (i ? " " : "") << solver.command[i];
  out << "\nsolver_timeout_ms = " << solver.timeout.count() << "\noutput = " << output_dir << "\n";
  return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(dump()); }

std::vector<NamedProblem> load_problems(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const std::string& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> here;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".sl") here.push_back(e.path());
      }
      std::sort(here.begin(), here.end());
      files.insert(files.end(), here.begin(), here.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<NamedProblem> out;
  for (const fs::path& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + f.string());
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back({f.filename().string(), parse_sygus(ss.str()), "train"});
  }
  return out;
}

void split_problems(std::vector<NamedProblem>& problems, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(problems.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return problems[a].name < problems[b].name; });
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(problems.size())));
  for (std::size_t i = 0; i < order.size(); ++i) problems[order[i]].split = i < n_train ? "train" : "test";
}

std::string IterationReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["iteration"] = iteration;
  j["train_solved"] = train_solved;
  j["test_solved"] = test_solved;
  j["policy_model"] = policy_model ? ordered_json(*policy_model) : ordered_json(nullptr);
  j["value_model"] = value_model ? ordered_json(*value_model) : ordered_json(nullptr);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;
  ordered_json outcomes = ordered_json::array();
  for (const ProblemOutcome& o : this->outcomes) {
    outcomes.push_back({{"problem", o.problem},
                        {"split", o.split},
                        {"solved", o.solved},
                        {"seconds", o.seconds},
                        {"oracle_calls", o.oracle_calls},
                        {"solution", o.solution},
                        {"error", o.error}});
  }
  j["outcomes"] = outcomes;
  return j.dump(1) + "\n";
}

namespace {

std::uint64_t problem_seed(std::uint64_t seed, const std::string& name) {
  return fnv1a(std::to_string(seed) + '\x1f' + name);
}

}  // namespace

IterationRun run_iteration(const std::vector<NamedProblem>& problems, const Guidance& guidance,
                           const RunConfig& config, int iteration) {
  IterationRun run;
  run.report.iteration = iteration;
  run.report.config_hash = config.hash();
  run.report.outcomes.resize(problems.size());
  run.traces.resize(problems.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, problems.size()));
  auto work = [&](std::size_t w) {
    std::unique_ptr<Oracle> oracle;
    for (std::size_t i = w; i < problems.size(); i += workers) {
      const NamedProblem& p = problems[i];
      ProblemOutcome& out = run.report.outcomes[i];
      out.problem = p.name;
      out.split = p.split;
      auto start = std::chrono::steady_clock::now();
      try {
        if (!oracle) oracle = std::make_unique<Oracle>(config.solver);
        oracle->forget();
        SearchResult r = big_steps(p.problem, *oracle, guidance, config.budget, problem_seed(config.seed, p.name));
        out.solved = r.solution.has_value();
        if (r.solution) out.solution = print_term(*r.solution);
        else out.error = r.trace.failure_reason;
        out.oracle_calls = r.trace.counters.oracle_calls;
        run.traces[i] = std::move(r.trace);
      } catch (const std::exception& e) {
        out.error = e.what();
        oracle.reset();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (const ProblemOutcome& o : run.report.outcomes) {
    if (!o.solved) continue;
    (o.split == "test" ? run.report.test_solved : run.report.train_solved)++;
  }
  return run;
}

std::vector<TrainingRow> collect_rows(const std::vector<NamedProblem>& problems, const IterationRun& run,
                                      std::size_t hash_base) {
  std::vector<TrainingRow> rows;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (problems[i].split != "train") continue;
    const SearchTrace& t = run.traces[i];
    if (t.path.empty()) continue;  // the search errored out before starting
    auto more = extract_training_data(t, t.solved(), {run.report.iteration, problems[i].name, "train"}, hash_base);
    rows.insert(rows.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return rows;
}

void write_report(const IterationReport& report, const std::string& output_dir) {
  fs::path results = fs::path(output_dir) / "results";
  fs::create_directories(results);
  {
    std::ofstream out(results / ("iter" + std::to_string(report.iteration) + ".report.json"), std::ios::binary);
    out << report.to_json();
  }
  fs::path csv = results / "summary.csv";
  bool fresh = !fs::exists(csv);
  std::ofstream out(csv, std::ios::binary | std::ios::app);
  if (fresh) out << "problem,iteration,solved,seconds,oracle_calls\n";
  for (const ProblemOutcome& o : report.outcomes) {
    out << o.problem << ',' << report.iteration << ',' << (o.solved ? 1 : 0) << ',' << o.seconds << ','
        << o.oracle_calls << '\n';
  }
}

std::size_t best_iteration(const std::vector<IterationReport>& reports) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].train_solved > reports[best].train_solved) best = i;
  }
  return best;
}

namespace {

std::string model_path(const std::string& dir, int iteration, ModelKind kind) {
  return (fs::path(dir) / ("iter" + std::to_string(iteration) + "." + model_kind_name(kind) + ".json")).string();
}

}  // namespace

Guidance load_guidance(const std::string& dir, std::size_t hash_base, std::optional<int> iteration) {
  Guidance g;
  g.hash_base = hash_base;
  if (!iteration) {
    int best = -1;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        int k = 0;
        if (std::sscanf(name.c_str(), "iter%d.", &k) == 1) best = std::max(best, k);
      }
    }
    if (best < 0) return g;
    iteration = best;
  }
  if (fs::exists(model_path(dir, *iteration, ModelKind::Policy))) {
    g.policy = std::make_shared<Model>(Model::load(model_path(dir, *iteration, ModelKind::Policy)));
  }
  if (fs::exists(model_path(dir, *iteration, ModelKind::Value))) {
    g.value = std::make_shared<Model>(Model::load(model_path(dir, *iteration, ModelKind::Value)));
  }
  return g;
}

std::vector<IterationReport> rl_loop(const RunConfig& config) {
  config.validate();
  std::vector<NamedProblem> problems = load_problems(config.problem_paths);
  split_problems(problems, config.train_fraction, config.seed);
  const fs::path models = fs::path(config.output_dir) / "models";
  const fs::path results = fs::path(config.output_dir) / "results";
  fs::create_directories(models);
  fs::create_directories(results);
  fs::remove(results / "summary.csv");
  {
    std::ofstream out(results / "config.txt", std::ios::binary);
    out << config.dump();
  }

  std::vector<IterationReport> reports;
  std::vector<std::vector<TrainingRow>> rows_by_iteration;
  Guidance guidance;
  guidance.hash_base = config.hash_base;
  for (std::size_t k = 0; k <= config.iterations; ++k) {
    const int it = static_cast<int>(k);
    if (k > 0) {
      std::vector<TrainingRow> pool;
      for (int j : training_window(it - 1, config.window)) {
        pool.insert(pool.end(), rows_by_iteration[j].begin(), rows_by_iteration[j].end());
      }
      for (const TrainingRow& r : pool) {
        if (r.split != "train") throw std::logic_error("a test-set row reached training");
      }
      guidance = Guidance{};
      guidance.hash_base = config.hash_base;
      bool has_policy = std::any_of(pool.begin(), pool.end(), [](const TrainingRow& r) { return r.kind == ModelKind::Policy; });
      bool has_value = std::any_of(pool.begin(), pool.end(), [](const TrainingRow& r) { return r.kind == ModelKind::Value; });
      GbtParams pp = config.policy_params;
      GbtParams vp = config.value_params;
      pp.seed = vp.seed = config.seed;
      if (has_policy) {
        auto m = std::make_shared<Model>(train(pool, ModelKind::Policy, pp));
        m->save(model_path(models.string(), it, ModelKind::Policy));
        guidance.policy = m;
      }
      if (has_value) {
        auto m = std::make_shared<Model>(train(pool, ModelKind::Value, vp));
        m->save(model_path(models.string(), it, ModelKind::Value));
        guidance.value = m;
      }
    }
    IterationRun run = run_iteration(problems, guidance, config, it);
    if (guidance.policy) run.report.policy_model = model_path(models.string(), it, ModelKind::Policy);
    if (guidance.value) run.report.value_model = model_path(models.string(), it, ModelKind::Value);
    rows_by_iteration.push_back(collect_rows(problems, run, config.hash_base));
    {
      std::ofstream out(results / ("iter" + std::to_string(it) + ".rows.csv"), std::ios::binary);
      out << rows_to_csv(rows_by_iteration.back());
    }
    write_report(run.report, config.output_dir);
    reports.push_back(std::move(run.report));
  }
  return reports;
}

IterationReport bench(const std::vector<NamedProblem>& problems, const Guidance& guidance, const RunConfig& config,
                      int iteration) {
  IterationRun run = run_iteration(problems, guidance, config, iteration);
  write_report(run.report, config.output_dir);
  return run.report;
}

}  // namespace treesynth
