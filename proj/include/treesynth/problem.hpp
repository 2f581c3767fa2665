#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "treesynth/grammar.hpp"
#include "treesynth/sexpr.hpp"
#include "treesynth/term.hpp"

namespace treesynth {

struct TargetFunction {
  std::string name;
  std::vector<Term> params;  // Var terms
  Sort result = Sort::Int;
};

/// A synthesis problem: find a body for `target`, derivable in `grammar`,
/// that makes `constraint` valid for all values of `variables`.
struct SygusProblem {
  std::string logic = "LIA";
  TargetFunction target;
  Term constraint;
  Grammar grammar;
  std::vector<Term> variables;
};

struct SmtProblem {
  std::vector<Term> assertions;
  std::vector<Term> variables;
};

/// SyGuS-IF v2 subset: set-logic LIA, one synth-fun with an optional
/// grammar, declare-var, constraint, check-synth. Without a grammar block
/// the default LIA grammar over the parameters is attached.
SygusProblem parse_sygus(std::string_view text);

/// SMT-LIB v2 subset: declare-const / nullary declare-fun over Int and
/// Bool, assert, let (expanded in place).
SmtProblem parse_smt(std::string_view text);

/// Parses a single term over the given variables.
Term parse_term(std::string_view text, const std::vector<Term>& variables);

std::string print_sygus(const SygusProblem& p);
std::string print_smt(const SmtProblem& p);

/// Applies `body` as the target's definition and returns the resulting
/// constraint (no target applications left).
Term instantiate(const SygusProblem& p, const Term& body);

}  // namespace treesynth
