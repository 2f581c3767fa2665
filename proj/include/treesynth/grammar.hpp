#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesynth/term.hpp"

namespace treesynth {

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rule {
  std::string lhs;
  /// Template whose NonTerminal leaves are placeholders for further expansion.
  Term rhs;
};

/// Context-free grammar G = (N, T, R, S). Rule order is significant: it is
/// the child order of every node in the grammar tree.
class Grammar {
 public:
  Grammar() = default;

  /// Validates and builds a grammar. Throws GrammarError when a rule's lhs
  /// is undeclared, a template is ill-sorted or mentions an undeclared
  /// nonterminal, a nonterminal doubles as a variable name, or some
  /// nonterminal derives no complete term.
  Grammar(std::string start, std::vector<std::pair<std::string, Sort>> nonterminals,
          std::vector<Rule> rules);

  const std::string& start() const { return start_; }
  Sort start_sort() const { return sort_of(start_); }
  Sort sort_of(const std::string& nonterminal) const;
  bool is_nonterminal(const std::string& name) const { return sorts_.count(name) != 0; }
  const std::vector<std::pair<std::string, Sort>>& nonterminals() const { return nonterminals_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(std::size_t index) const { return rules_.at(index); }
  /// Indices of the rules for `nonterminal`, in grammar order.
  const std::vector<std::size_t>& rules_for(const std::string& nonterminal) const;

  /// Copy without any rule whose template applies `op`.
  Grammar without_operator(Op op) const;

  /// Stable text form, one rule per line.
  std::string dump() const;

 private:
  void check_productive() const;

  std::string start_;
  std::vector<std::pair<std::string, Sort>> nonterminals_;
  std::map<std::string, Sort> sorts_;
  std::vector<Rule> rules_;
  std::map<std::string, std::vector<std::size_t>> by_lhs_;
};

/// Derivation state: a term whose leaves may be nonterminal placeholders.
class PartialProgram {
 public:
  PartialProgram() = default;
  explicit PartialProgram(Term tree) : tree_(std::move(tree)) {}

  static PartialProgram start(const Grammar& g) {
    return PartialProgram(Term::nonterminal(g.start(), g.start_sort()));
  }

  const Term& tree() const { return tree_; }
  std::size_t nonterminal_count() const { return tree_.nonterminal_count(); }
  bool complete() const { return nonterminal_count() == 0; }

  friend bool operator==(const PartialProgram& a, const PartialProgram& b) {
    return a.tree_ == b.tree_;
  }

 private:
  Term tree_;
};

inline std::size_t count_nonterminals(const PartialProgram& h) { return h.nonterminal_count(); }

/// Path of the first nonterminal leaf in pre-order, if any.
std::optional<Path> leftmost_nonterminal(const Term& t);

/// Rules whose lhs is the leftmost nonterminal of `h`.
/// Throws GrammarError when `h` is complete.
std::vector<std::size_t> applicable_rules(const PartialProgram& h, const Grammar& g);

/// Replaces the leftmost nonterminal by the rule's template.
/// Throws GrammarError when the rule's lhs is a different nonterminal.
PartialProgram expand_leftmost(const PartialProgram& h, const Grammar& g, std::size_t rule);

/// Fixed LIA template over the given parameters:
///   I -> params:Int | 0 | 1 | (+ I I) | (- I I) | (ite B I I)
///   B -> params:Bool | (>= I I) | (<= I I) | (= I I) | (and B B) | (or B B) | (not B)
/// Start symbol is I unless `start_sort` is Bool.
Grammar default_grammar(const std::vector<Term>& params, Sort start_sort = Sort::Int);

/// Default grammar plus extra integer constants (placed after 0 and 1) and
/// one rule for each extra operator, with nonterminal arguments.
Grammar extended_default_grammar(const std::vector<Term>& params, Sort start_sort,
                                 const std::vector<std::int64_t>& constants,
                                 const std::vector<Op>& operators);

/// True when `t` (complete) can be derived from the grammar's start symbol.
bool derivable(const Grammar& g, const Term& t);

}  // namespace treesynth
