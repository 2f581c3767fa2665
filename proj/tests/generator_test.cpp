#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "treesynth/enumerate.hpp"
#include "treesynth/generator.hpp"
#include "treesynth/printer.hpp"

using namespace treesynth;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Term conj(const SmtProblem& smt) { return conjunction(smt.assertions); }

const char* kSums =
    "(set-logic QF_LIA)(assert (>= (+ (* 2 1) 8) 8))(assert (>= (+ (* 1 3) 5) 3))(check-sat)";

ClassifyBudget quick() {
  ClassifyBudget b;
  b.search_time = std::chrono::milliseconds(2000);
  return b;
}

}  // namespace

TEST_CASE("enumeration counts binary trees over two leaves") {
  SygusProblem p = parse_sygus(
      "(set-logic LIA)(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 1 (+ S S)))))(declare-var x Int)"
      "(constraint (= (f x) x))(check-synth)");
  std::map<std::size_t, int> by_size;
  EnumerationLimits limits;
  limits.max_size = 7;
  enumerate_terms(p.grammar, limits, [&](const Term& t) {
    by_size[t.size()]++;
    return false;
  });
  // n internal nodes: Catalan(n) shapes times 2^(n+1) leaf choices.
  CHECK(by_size[1] == 2);
  CHECK(by_size[3] == 4);
  CHECK(by_size[5] == 2 * 8);
  CHECK(by_size[7] == 5 * 16);
  CHECK(by_size.size() == 4);
}

TEST_CASE("enumeration returns the first accepted term in size order") {
  SygusProblem p = parse_sygus(read_file(TREESYNTH_TEST_DATA "/max2.sl"));
  EnumerationLimits limits;
  std::size_t last = 0;
  bool monotone = true;
  auto hit = enumerate_terms(p.grammar, limits, [&](const Term& t) {
    monotone = monotone && t.size() >= last;
    last = t.size();
    return print_term(t) == "(+ x y)";
  });
  REQUIRE(hit);
  CHECK(print_term(*hit) == "(+ x y)");
  CHECK(monotone);
}

TEST_CASE("select_subterms ranks the two sums first") {
  Term f = conj(parse_smt(kSums));
  auto sets = select_subterms(f, 2, 16);
  REQUIRE_FALSE(sets.empty());
  const SubtermSet& top = sets.front();
  CHECK(top.lgg_size == 5);
  CHECK(print_term(top.generalization.lgg) == "(+ (* x1 x2) x3)");
  CHECK(top.generalization.fresh.size() == 3);
  for (std::size_t i = 0; i < top.paths.size(); ++i) {
    Term inst = substitute(top.generalization.lgg, top.generalization.witnesses[i]);
    CHECK(inst == subterm_at(f, top.paths[i]));
  }
  for (const SubtermSet& s : sets) {
    CHECK(s.generalization.lgg.kind() != Kind::Var);
    CHECK(s.paths.size() == 2);
  }
}

TEST_CASE("select_subterms drops identity generalizations and oversized k") {
  Term f = conj(parse_smt(
      "(set-logic QF_LIA)(declare-fun x () Int)(assert (>= (+ 5 4) (* 9 x)))(check-sat)"));
  CHECK(select_subterms(f, 2, 16).empty());
  Term g = conj(parse_smt(kSums));
  CHECK(select_subterms(g, 5, 16).empty());
  CHECK(select_subterms(g, 2, 1).size() == 1);
}

TEST_CASE("generate_sygus replays the sums example") {
  Oracle oracle;
  SmtProblem smt = parse_smt(kSums);
  Term f = prepare_source(oracle, smt);
  auto sets = select_subterms(f, 2, 16);
  REQUIRE_FALSE(sets.empty());
  GeneratedProblem g = generate_sygus(oracle, f, smt.variables, sets.front(), "sums.smt2");
  CHECK(print_term(g.problem.constraint) == "(and (>= (f 2 1 8) 8) (>= (f 1 3 5) 3))");
  CHECK(print_term(g.known_solution) == "(+ (* x1 x2) x3)");
  CHECK(g.problem.target.params.size() == 3);
  CHECK(derivable(g.problem.grammar, g.known_solution));
  Oracle fresh;
  CHECK(fresh.verify(g.problem, g.known_solution).verdict == Verdict::Valid);
  // The printed problem parses back to the same problem.
  SygusProblem again = parse_sygus(print_sygus(g.problem));
  CHECK(again.constraint == g.problem.constraint);
  CHECK(fresh.verify(again, g.known_solution).verdict == Verdict::Valid);
}

TEST_CASE("invalid sources are rejected") {
  Oracle oracle;
  SmtProblem smt = parse_smt("(set-logic QF_LIA)(declare-fun x () Int)(assert (> x x))(check-sat)");
  bool negated = false;
  // x > x is unsatisfiable, so its negation is the valid formula.
  Term f = prepare_source(oracle, smt, &negated);
  CHECK(negated);
  CHECK(print_term(f) == "(not (> x x))");
  SmtProblem sat = parse_smt("(set-logic QF_LIA)(declare-fun x () Int)(assert (> x 0))(check-sat)");
  CHECK_THROWS_AS(prepare_source(oracle, sat), GenerationError);
  Term bad = conj(parse_smt(
      "(set-logic QF_LIA)(declare-fun x () Int)(assert (> (+ x (* 2 x)) (+ x (* 2 x))))(check-sat)"));
  auto sets = select_subterms(bad, 2, 16);
  REQUIRE_FALSE(sets.empty());
  try {
    generate_sygus(oracle, bad, {Term::var("x", Sort::Int)}, sets.front());
    FAIL("expected an invalid-source error");
  } catch (const GenerationError& e) {
    CHECK(e.kind() == GenerationError::Kind::InvalidSource);
  }
}

TEST_CASE("classify: forced solution is basic") {
  Oracle oracle;
  SygusProblem p = parse_sygus(
      "(set-logic LIA)(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S) (- S S)))))"
      "(declare-var x Int)(constraint (>= (f x) x))(constraint (<= (f x) x))(check-synth)");
  CHECK(classify(oracle, p, quick()) == Category::Basic);
}

TEST_CASE("classify: max of two needs control flow") {
  Oracle oracle;
  SygusProblem p = parse_sygus(read_file(TREESYNTH_TEST_DATA "/max2.sl"));
  // Brute force over the ite-free grammar: nothing verifies.
  EnumerationLimits limits;
  limits.max_size = 7;
  auto hit = enumerate_terms(p.grammar.without_operator(Op::Ite), limits,
                             [&](const Term& t) { return oracle.verify(p, t).verdict == Verdict::Valid; });
  CHECK_FALSE(hit);
  CHECK(classify(oracle, p, quick()) == Category::ControlFlow);
}

TEST_CASE("classify: the sums example is straight-line") {
  Oracle oracle;
  SmtProblem smt = parse_smt(kSums);
  Term f = prepare_source(oracle, smt);
  GeneratedProblem g = generate_sygus(oracle, f, smt.variables, select_subterms(f).front());
  Category c = classify(oracle, g.problem, quick());
  // A constant or parameter may already work here; either way no branch is needed.
  CHECK((c == Category::Basic || c == Category::StraightLine));
}

TEST_CASE("family stems and similarity filter") {
  CHECK(family_stem("bench_01.smt2") == "bench");
  CHECK(family_stem("bench_02.smt2") == "bench");
  CHECK(family_stem("a-b_3x.smt2") == "a_b_x");
  auto make = [](const std::string& file, std::vector<std::string> heads) {
    GeneratedProblem g;
    g.known_solution = Term::int_const(0);
    g.problem.constraint = Term::bool_const(true);
    g.source.file = file;
    g.source.assertion_heads = std::move(heads);
    return g;
  };
  std::vector<GeneratedProblem> in = {make("bench_01.smt2", {">="}), make("bench_02.smt2", {">="}),
                                      make("bench_03.smt2", {"<=", ">="}), make("other_01.smt2", {">="})};
  auto out = filter_similar(in);
  REQUIRE(out.size() == 3);
  CHECK(out[0].source.file == "bench_01.smt2");
  CHECK(out[1].source.file == "bench_03.smt2");
  CHECK(out[2].source.file == "other_01.smt2");
  CHECK(filter_similar(out).size() == out.size());
  CHECK(filter_similar({}).empty());
}
