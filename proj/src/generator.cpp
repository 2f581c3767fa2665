#include "treesynth/generator.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "treesynth/enumerate.hpp"
#include "treesynth/printer.hpp"
#include "treesynth/search.hpp"

namespace treesynth {

namespace fs = std::filesystem;

const char* category_name(Category c) {
  switch (c) {
    case Category::Basic:
      return "B";
    case Category::StraightLine:
      return "S";
    case Category::ControlFlow:
      return "C";
    case Category::Unsolved:
      return "U";
  }
  return "?";
}

Term prepare_source(Oracle& oracle, const SmtProblem& smt, bool* negated) {
  if (smt.assertions.empty()) throw GenerationError(GenerationError::Kind::InvalidSource, "no assertions");
  Term phi = conjunction(smt.assertions);
  Verdict v = oracle.check_validity(phi, smt.variables).verdict;
  if (v == Verdict::Valid) {
    if (negated) *negated = false;
    return phi;
  }
  if (v == Verdict::Invalid) {
    Term neg = Term::apply(Op::Not, {phi});
    if (oracle.check_validity(neg, smt.variables).verdict == Verdict::Valid) {
      if (negated) *negated = true;
      return neg;
    }
  }
  throw GenerationError(GenerationError::Kind::InvalidSource, "neither the formula nor its negation is valid");
}

namespace {

bool nested(const Path& a, const Path& b) {
  const Path& shorter = a.size() <= b.size() ? a : b;
  const Path& longer = a.size() <= b.size() ? b : a;
  return std::equal(shorter.begin(), shorter.end(), longer.begin());
}

/// Lifts source variables in the LGG to parameters and renames all
/// parameters x1..xn in pre-order, avoiding the formula's variable names.
GeneralizationResult lift(const GeneralizationResult& g, const std::set<std::string>& taken) {
  std::set<std::string> fresh;
  for (const Term& v : g.fresh) fresh.insert(v.name());
  Substitution rename;
  GeneralizationResult out;
  out.witnesses.resize(g.witnesses.size());
  std::size_t next = 1;
  for (const Term& v : free_variables(g.lgg)) {
    std::string name;
    do {
      name = "x" + std::to_string(next++);
    } while (taken.count(name));
    Term param = Term::var(name, v.sort());
    rename.bind(v, param);
    out.fresh.push_back(param);
    for (std::size_t i = 0; i < g.witnesses.size(); ++i) {
      out.witnesses[i].bind(param, fresh.count(v.name()) ? *g.witnesses[i].find(v.name()) : v);
    }
  }
  out.lgg = substitute(g.lgg, rename);
  return out;
}

void collect_int_constants(const Term& t, std::vector<std::int64_t>& out) {
  for (const Occurrence& o : subterms(t)) {
    if (o.term.kind() != Kind::IntConst) continue;
    std::int64_t c = o.term.int_value();
    if (c != 0 && c != 1 && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
}

constexpr std::size_t kMaxHarvestedConstants = 6;

Grammar grammar_for(const std::vector<Term>& params, const Term& lgg, const Term& constraint) {
  std::vector<std::int64_t> constants;
  collect_int_constants(lgg, constants);
  std::vector<std::int64_t> harvested;
  collect_int_constants(constraint, harvested);
  for (std::int64_t c : harvested) {
    if (constants.size() >= kMaxHarvestedConstants) break;
    if (std::find(constants.begin(), constants.end(), c) == constants.end()) constants.push_back(c);
  }
  Grammar base = extended_default_grammar(params, Sort::Int, constants, {});
  std::string int_nt = base.start();
  std::string bool_nt;
  for (const auto& [nt, sort] : base.nonterminals()) {
    if (sort == Sort::Bool) bool_nt = nt;
  }
  auto placeholder = [&](Sort s) { return Term::nonterminal(s == Sort::Int ? int_nt : bool_nt, s); };
  std::vector<Rule> rules = base.rules();
  auto present = [&](const Term& rhs) {
    return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.rhs == rhs; });
  };
  // Shapes the LGG uses but the template lacks, e.g. (* I I) or a ternary +.
  for (const Occurrence& o : subterms(lgg)) {
    Term shape;
    if (o.term.kind() == Kind::BoolConst) {
      shape = o.term;
    } else if (o.term.kind() == Kind::Apply && o.term.op() != Op::Call) {
      std::vector<Term> args;
      for (const Term& a : o.term.args()) args.push_back(placeholder(a.sort()));
      shape = Term::apply(o.term.op(), std::move(args));
    } else {
      continue;
    }
    if (!present(shape)) rules.push_back({shape.sort() == Sort::Int ? int_nt : bool_nt, shape});
  }
  return Grammar(int_nt, base.nonterminals(), std::move(rules));
}

std::string unused_name(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string n = base + std::to_string(i);
    if (!taken.count(n)) return n;
  }
}

std::set<std::string> variable_names(const Term& t) {
  std::set<std::string> names;
  for (const Term& v : free_variables(t)) names.insert(v.name());
  return names;
}

}  // namespace

std::vector<SubtermSet> select_subterms(const Term& formula, std::size_t k, std::size_t budget) {
  if (k < 2) throw std::invalid_argument("subterm sets need at least two members");
  std::vector<Occurrence> occ;
  for (Occurrence& o : subterms(formula)) {
    if (o.term.sort() == Sort::Int && !o.term.is_leaf()) occ.push_back(std::move(o));
  }
  std::vector<SubtermSet> found;
  if (occ.size() < k || budget == 0) return found;
  const std::set<std::string> taken = variable_names(formula);

  constexpr std::size_t kMaxCombinations = 20000;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (std::size_t tried = 0; tried < kMaxCombinations; ++tried) {
    bool ok = true;
    for (std::size_t a = 0; a < k && ok; ++a) {
      for (std::size_t b = a + 1; b < k && ok; ++b) ok = !nested(occ[idx[a]].path, occ[idx[b]].path);
    }
    if (ok) {
      std::vector<Term> terms;
      SubtermSet s;
      for (std::size_t i : idx) {
        terms.push_back(occ[i].term);
        s.paths.push_back(occ[i].path);
      }
      s.generalization = lift(anti_unify(terms), taken);
      s.lgg_size = s.generalization.lgg.size();
      if (s.generalization.lgg.kind() != Kind::Var && !s.generalization.fresh.empty()) found.push_back(std::move(s));
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == occ.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  std::stable_sort(found.begin(), found.end(), [](const SubtermSet& a, const SubtermSet& b) {
    if (a.lgg_size != b.lgg_size) return a.lgg_size > b.lgg_size;
    if (a.generalization.fresh.size() != b.generalization.fresh.size()) {
      return a.generalization.fresh.size() < b.generalization.fresh.size();
    }
    return a.paths < b.paths;
  });
  if (found.size() > budget) found.resize(budget);
  return found;
}

GeneratedProblem generate_sygus(Oracle& oracle, const Term& formula, const std::vector<Term>& vars,
                                const SubtermSet& s, const std::string& source_file) {
  using K = GenerationError::Kind;
  if (s.paths.size() < 2) throw GenerationError(K::NoCandidates, "a subterm set needs at least two members");
  if (oracle.check_validity(formula, vars).verdict != Verdict::Valid) {
    throw GenerationError(K::InvalidSource, "source formula is not valid");
  }
  const GeneralizationResult& g = s.generalization;
  std::set<std::string> taken = variable_names(formula);
  for (const Term& v : vars) taken.insert(v.name());
  const std::string name = unused_name("f", taken);

  Term constraint = formula;
  for (std::size_t i = 0; i < s.paths.size(); ++i) {
    std::vector<Term> args;
    for (const Term& p : g.fresh) args.push_back(*g.witnesses.at(i).find(p.name()));
    constraint = replace_at(constraint, s.paths[i], Term::call(name, Sort::Int, std::move(args)));
  }
  if (inline_calls(constraint, name, g.fresh, g.lgg) != formula) {
    throw GenerationError(K::VerificationFailed, "inlining the LGG does not give back the source");
  }

  GeneratedProblem out;
  SygusProblem& p = out.problem;
  p.target = {name, g.fresh, Sort::Int};
  p.constraint = constraint;
  p.grammar = grammar_for(g.fresh, g.lgg, constraint);
  const std::set<std::string> used = variable_names(constraint);
  for (const Term& v : vars) {
    if (used.count(v.name())) p.variables.push_back(v);
  }
  out.known_solution = g.lgg;
  if (!derivable(p.grammar, g.lgg)) {
    throw GenerationError(K::VerificationFailed, "LGG is not derivable in the generated grammar");
  }
  VerificationResult r = oracle.verify(p, g.lgg);
  if (r.verdict != Verdict::Valid) {
    throw GenerationError(K::VerificationFailed,
                          "LGG does not verify: " + std::string(verdict_name(r.verdict)));
  }
  out.source.file = source_file;
  out.source.paths = s.paths;
  out.source.witnesses = g.witnesses;
  return out;
}

namespace {

bool solves(Oracle& oracle, const SygusProblem& p, const Term& body) {
  return oracle.verify(p, body).verdict == Verdict::Valid;
}

bool solvable_in(Oracle& oracle, const SygusProblem& p, const ClassifyBudget& budget) {
  EnumerationLimits limits;
  limits.max_size = budget.enumeration_size;
  limits.deadline = std::chrono::steady_clock::now() + budget.search_time;
  if (enumerate_terms(p.grammar, limits, [&](const Term& t) { return solves(oracle, p, t); })) return true;
  SearchBudget sb;
  sb.wall_clock = budget.search_time;
  sb.max_rollouts = budget.search_rollouts;
  sb.max_bigsteps = budget.search_bigsteps;
  return big_steps(p, oracle, Guidance{}, sb, 0).solution.has_value();
}

}  // namespace

Category classify(Oracle& oracle, const SygusProblem& p, const ClassifyBudget& budget) {
  for (std::size_t r : p.grammar.rules_for(p.grammar.start())) {
    const Term& rhs = p.grammar.rule(r).rhs;
    if (rhs.is_leaf() && rhs.kind() != Kind::NonTerminal && solves(oracle, p, rhs)) return Category::Basic;
  }
  try {
    SygusProblem flat = p;
    flat.grammar = p.grammar.without_operator(Op::Ite);
    if (solvable_in(oracle, flat, budget)) return Category::StraightLine;
  } catch (const GrammarError&) {
    // No ite-free program exists in this grammar.
  }
  if (solvable_in(oracle, p, budget)) return Category::ControlFlow;
  return Category::Unsolved;
}

std::string family_stem(const std::string& file) {
  std::string base = fs::path(file).filename().string();
  base = base.substr(0, base.find('.'));
  std::string out;
  for (char c : base) {
    if (std::isdigit(static_cast<unsigned char>(c))) continue;
    bool sep = c == '_' || c == '-';
    if (sep && (out.empty() || out.back() == '_')) continue;
    out += sep ? '_' : c;
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::vector<GeneratedProblem> filter_similar(const std::vector<GeneratedProblem>& problems) {
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  std::vector<GeneratedProblem> out;
  for (const GeneratedProblem& p : problems) {
    if (seen.insert({family_stem(p.source.file), p.source.assertion_heads}).second) out.push_back(p);
  }
  return out;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

GenerationSummary generate_directory(const std::string& smt_dir, const std::string& out_dir,
                                     const GeneratorOptions& options) {
  GenerationSummary summary;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(smt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".smt2") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(out_dir);

  Oracle oracle(options.solver);
  struct Emitted {
    GeneratedProblem problem;
    Category category;
    std::size_t index;
  };
  std::vector<Emitted> emitted;
  for (const fs::path& file : files) {
    ++summary.sources;
    const std::string name = file.filename().string();
    oracle.forget();
    try {
      SmtProblem smt = parse_smt(read_text(file));
      bool negated = false;
      Term formula = prepare_source(oracle, smt, &negated);
      std::vector<std::string> heads;
      for (const Term& a : smt.assertions) heads.push_back(a.symbol());
      std::sort(heads.begin(), heads.end());
      auto sets = select_subterms(formula, options.k, options.budget);
      if (sets.empty()) throw GenerationError(GenerationError::Kind::NoCandidates, "no usable subterm set");
      std::size_t count = 0;
      std::string last_error;
      for (const SubtermSet& s : sets) {
        if (count >= options.per_file) break;
        try {
          GeneratedProblem g = generate_sygus(oracle, formula, smt.variables, s, name);
          g.source.assertion_heads = heads;
          g.source.negated = negated;
          Category c = options.classify ? classify(oracle, g.problem, options.classify_budget) : Category::Unsolved;
          if (options.drop_basic && c == Category::Basic) continue;
          emitted.push_back({std::move(g), c, count++});
        } catch (const GenerationError& e) {
          last_error = e.what();
        }
      }
      if (count == 0) summary.skipped.push_back({name, last_error.empty() ? "only basic problems" : last_error});
    } catch (const ParseError& e) {
      summary.skipped.push_back({name, e.what()});
    } catch (const GenerationError& e) {
      summary.skipped.push_back({name, e.what()});
    } catch (const SortError& e) {
      summary.skipped.push_back({name, e.what()});
    }
  }

  std::vector<GeneratedProblem> problems;
  for (const Emitted& e : emitted) problems.push_back(e.problem);
  std::set<const GeneratedProblem*> keep;
  if (options.filter) {
    auto survivors = filter_similar(problems);
    std::size_t j = 0;
    for (const GeneratedProblem& p : problems) {
      if (j < survivors.size() && survivors[j].source.file == p.source.file &&
          survivors[j].source.paths == p.source.paths) {
        keep.insert(&p);
        ++j;
      }
    }
  } else {
    for (const GeneratedProblem& p : problems) keep.insert(&p);
  }

  std::ofstream manifest(fs::path(out_dir) / "manifest.jsonl", std::ios::binary);
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (!keep.count(&problems[i])) {
      ++summary.filtered_out;
      continue;
    }
    const GeneratedProblem& g = problems[i];
    const std::string out_name = fs::path(g.source.file).stem().string() + "_" + std::to_string(emitted[i].index) + ".sl";
    std::ofstream out(fs::path(out_dir) / out_name, std::ios::binary);
    out << print_sygus(g.problem);
    nlohmann::ordered_json j;
    j["file"] = out_name;
    j["source"] = g.source.file;
    j["category"] = options.classify ? category_name(emitted[i].category) : "unclassified";
    j["known_solution"] = print_term(g.known_solution);
    j["lgg_size"] = g.known_solution.size();
    j["paths"] = g.source.paths;
    nlohmann::ordered_json witnesses = nlohmann::ordered_json::array();
    for (const Substitution& w : g.source.witnesses) {
      nlohmann::ordered_json m = nlohmann::ordered_json::object();
      for (const Term& p : g.problem.target.params) m[p.name()] = print_term(*w.find(p.name()));
      witnesses.push_back(m);
    }
    j["witnesses"] = witnesses;
    j["negated_source"] = g.source.negated;
    manifest << j.dump() << "\n";
    summary.outputs.push_back(out_name);
    ++summary.emitted;
  }
  return summary;
}

}  // namespace treesynth
