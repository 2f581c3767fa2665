#include <signal.h>

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "treesynth/oracle.hpp"
#include "treesynth/problem.hpp"

using namespace treesynth;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SygusProblem max2() { return parse_sygus(read_file(TREESYNTH_TEST_DATA "/max2.sl")); }

Term body(const SygusProblem& p, const std::string& text) { return parse_term(text, p.target.params); }

}  // namespace

TEST_CASE("verify the max-of-two problem") {
  SygusProblem p = max2();
  Oracle oracle;
  CHECK(oracle.verify(p, body(p, "(ite (>= x y) x y)")).verdict == Verdict::Valid);

  VerificationResult wrong = oracle.verify(p, body(p, "x"));
  REQUIRE(wrong.verdict == Verdict::Invalid);
  REQUIRE(wrong.counterexample.has_value());
  CHECK(wrong.counterexample->at("y").integer > wrong.counterexample->at("x").integer);
  auto value = evaluate(instantiate(p, body(p, "x")), *wrong.counterexample);
  REQUIRE(value.has_value());
  CHECK_FALSE(value->boolean);
}

TEST_CASE("check_validity examples") {
  const Term x = Term::var("x", Sort::Int);
  Oracle oracle;
  CHECK(oracle.check_validity(parse_term("(= x x)", {x}), {x}).verdict == Verdict::Valid);
  CHECK(oracle.check_validity(parse_term("(> x x)", {x}), {x}).verdict == Verdict::Invalid);
  CHECK(oracle.check_validity(parse_term("(= (+ x 0) x)", {x}), {x}).verdict == Verdict::Valid);
}

TEST_CASE("memoized and fresh verdicts agree") {
  SygusProblem p = max2();
  Oracle memo;
  for (const char* text : {"x", "y", "(+ x y)", "(ite (<= x y) y x)", "(ite (>= x y) y x)"}) {
    Term b = body(p, text);
    Verdict first = memo.verify(p, b).verdict;
    Verdict again = memo.verify(p, b).verdict;
    Oracle fresh;
    CHECK_MESSAGE(first == again, text);
    CHECK_MESSAGE(first == fresh.verify(p, b).verdict, text);
  }
  CHECK(memo.stats().memo_hits == 5);
}

TEST_CASE("counterexample filter only rejects with a falsifying model") {
  SygusProblem p = max2();
  Oracle oracle;
  oracle.verify(p, body(p, "x"));
  std::size_t calls = oracle.stats().solver_calls;
  VerificationResult r = oracle.verify(p, body(p, "(+ x 0)"));
  CHECK(r.verdict == Verdict::Invalid);
  CHECK(oracle.stats().solver_calls == calls);  // answered from the stored model
  auto v = evaluate(instantiate(p, body(p, "(+ x 0)")), *r.counterexample);
  CHECK_FALSE(v->boolean);
}

TEST_CASE("non-incremental mode gives the same verdicts") {
  SolverConfig cfg;
  cfg.incremental = false;
  cfg.counterexample_filter = false;
  Oracle oracle(cfg);
  SygusProblem p = max2();
  CHECK(oracle.verify(p, body(p, "(ite (>= x y) x y)")).verdict == Verdict::Valid);
  CHECK(oracle.verify(p, body(p, "y")).verdict == Verdict::Invalid);
}

TEST_CASE("nonlinear instantiations are never solutions") {
  SygusProblem p = max2();
  Oracle oracle;
  // (* x y) is outside the linear fragment.
  Term prod = Term::apply(Op::Mul, {p.target.params[0], p.target.params[1]});
  CHECK(oracle.verify(p, prod).verdict == Verdict::Unknown);
}

TEST_CASE("a missing solver binary is a crash, not a verdict") {
  SolverConfig cfg;
  cfg.command = {"/nonexistent/solver-binary"};
  Oracle oracle(cfg);
  const Term x = Term::var("x", Sort::Int);
  CHECK_THROWS_AS(oracle.check_validity(parse_term("(= x x)", {x}), {x}), SolverCrash);
}

TEST_CASE("solver process is reaped on shutdown") {
  int pid = 0;
  {
    SolverProcess proc({"z3", "-in"});
    pid = proc.pid();
    CHECK(::kill(pid, 0) == 0);
  }
  CHECK(::kill(pid, 0) != 0);
}

TEST_CASE("parse_model handles negative values and omissions") {
  const Term a = Term::var("a", Sort::Int);
  const Term b = Term::var("b", Sort::Bool);
  const Term c = Term::var("c", Sort::Int);
  Assignment m = parse_model("((define-fun a () Int (- 4)) (define-fun b () Bool true))", {a, b, c});
  CHECK(m.at("a").integer == -4);
  CHECK(m.at("b").boolean);
  CHECK(m.at("c").integer == 0);
  CHECK_THROWS_AS(parse_model("sat", {a}), ProtocolError);
}

TEST_CASE("validity script shape") {
  const Term x = Term::var("x", Sort::Int);
  CHECK(validity_script(parse_term("(>= x 0)", {x}), {x}) ==
        "(declare-const x Int)\n(assert (not (>= x 0)))\n(check-sat)\n");
}
