#include "treesynth/problem.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "treesynth/printer.hpp"

namespace treesynth {

namespace {

[[noreturn]] void syntax(const SExpr& at, const std::string& msg) {
  throw ParseError(ParseError::Kind::Syntax, at.where, msg);
}
[[noreturn]] void unsupported(const SExpr& at, const std::string& msg) {
  throw ParseError(ParseError::Kind::Unsupported, at.where, msg);
}
[[noreturn]] void sort_error(const SExpr& at, const std::string& msg) {
  throw ParseError(ParseError::Kind::Sort, at.where, msg);
}

Sort parse_sort(const SExpr& e) {
  if (e.is_symbol("Int")) return Sort::Int;
  if (e.is_symbol("Bool")) return Sort::Bool;
  unsupported(e, "unsupported sort " + e.to_string());
}

std::int64_t parse_numeral(const SExpr& e, bool negate) {
  std::string digits = (negate ? "-" : "") + e.atom;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    unsupported(e, "integer constant does not fit in 64 bits: " + digits);
  }
  return value;
}

const std::string& head_symbol(const SExpr& e) {
  if (!e.is_list() || e.items.empty() || !e.items[0].is_atom()) syntax(e, "expected a command");
  return e.items[0].atom;
}

struct FunctionSig {
  std::vector<Sort> params;
  Sort result;
};

/// Converts s-expressions to terms within a lexical scope.
class TermBuilder {
 public:
  std::map<std::string, Term> variables;
  std::map<std::string, FunctionSig> functions;
  std::map<std::string, Sort> nonterminals;

  Term build(const SExpr& e) {
    try {
      return build_unchecked(e);
    } catch (const SortError& err) {
      sort_error(e, err.what());
    }
  }

 private:
  std::vector<std::map<std::string, Term>> lets_;

  const Term* lookup_let(const std::string& name) const {
    for (auto it = lets_.rbegin(); it != lets_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  Term build_atom(const SExpr& e) {
    if (e.is_numeral()) return Term::int_const(parse_numeral(e, false));
    if (!e.quoted && e.atom == "true") return Term::bool_const(true);
    if (!e.quoted && e.atom == "false") return Term::bool_const(false);
    if (const Term* bound = lookup_let(e.atom)) return *bound;
    if (auto nt = nonterminals.find(e.atom); nt != nonterminals.end()) {
      return Term::nonterminal(e.atom, nt->second);
    }
    if (auto v = variables.find(e.atom); v != variables.end()) return v->second;
    if (auto f = functions.find(e.atom); f != functions.end() && f->second.params.empty()) {
      return Term::call(e.atom, f->second.result, {});
    }
    if (!e.atom.empty() && (e.atom[0] == '#' || e.atom.find('.') != std::string::npos)) {
      unsupported(e, "unsupported literal " + e.atom);
    }
    syntax(e, "unknown symbol " + e.atom);
  }

  Term build_let(const SExpr& e) {
    if (e.items.size() != 3 || !e.items[1].is_list()) syntax(e, "malformed let");
    std::map<std::string, Term> frame;
    for (const SExpr& binding : e.items[1].items) {
      if (!binding.is_list() || binding.items.size() != 2 || !binding.items[0].is_atom()) {
        syntax(binding, "malformed let binding");
      }
      // Bindings are parallel: evaluate every right-hand side in the outer scope.
      frame[binding.items[0].atom] = build(binding.items[1]);
    }
    lets_.push_back(std::move(frame));
    Term body = build(e.items[2]);
    lets_.pop_back();
    return body;
  }

  Term build_unchecked(const SExpr& e) {
    if (e.is_atom()) return build_atom(e);
    if (e.items.empty()) syntax(e, "empty application");
    const SExpr& head = e.items[0];
    if (!head.is_atom()) unsupported(head, "higher-order or indexed application");
    const std::string& name = head.atom;
    if (name == "let") return build_let(e);
    if (name == "forall" || name == "exists") unsupported(e, "quantifiers are not supported");
    if (name == "_" || name == "!") unsupported(e, "indexed or annotated terms are not supported");

    // Negative literal convention: (- 3).
    if (name == "-" && e.items.size() == 2 && e.items[1].is_numeral()) {
      return Term::int_const(parse_numeral(e.items[1], true));
    }

    std::vector<Term> args;
    args.reserve(e.items.size() - 1);
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(build(e.items[i]));

    if (auto f = functions.find(name); f != functions.end()) {
      if (f->second.params.size() != args.size()) {
        sort_error(e, "wrong number of arguments to " + name);
      }
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].sort() != f->second.params[i]) sort_error(e.items[i + 1], "argument sort mismatch");
      }
      return Term::call(name, f->second.result, std::move(args));
    }
    if (name == "distinct") {
      if (args.size() != 2) unsupported(e, "distinct with more than two arguments");
      return Term::apply(Op::Not, {Term::apply(Op::Eq, std::move(args))});
    }
    auto op = op_from_spelling(name);
    if (!op) unsupported(head, "unsupported operator " + name);
    if (*op == Op::Implies && args.size() > 2) {
      // Right associative.
      Term acc = args.back();
      for (std::size_t i = args.size() - 1; i-- > 0;) acc = Term::apply(Op::Implies, {args[i], acc});
      return acc;
    }
    return Term::apply(*op, std::move(args));
  }
};

void check_logic(const SExpr& cmd, bool quantifier_free_ok) {
  if (cmd.items.size() != 2 || !cmd.items[1].is_atom()) syntax(cmd, "malformed set-logic");
  const std::string& logic = cmd.items[1].atom;
  if (logic == "LIA" || logic == "ALL" || (quantifier_free_ok && logic == "QF_LIA")) return;
  unsupported(cmd.items[1], "unsupported logic " + logic);
}

Grammar build_grammar(const SExpr& predecl, const SExpr* rule_list,
                      const std::vector<Term>& params) {
  // v2: ((N1 S1) ...) ((N1 S1 (rhs...)) ...); v1 form omits the first list.
  std::vector<std::pair<std::string, Sort>> nts;
  const SExpr& groups = rule_list ? *rule_list : predecl;
  if (rule_list) {
    for (const SExpr& d : predecl.items) {
      if (!d.is_list() || d.items.size() != 2 || !d.items[0].is_atom()) {
        syntax(d, "malformed nonterminal declaration");
      }
      nts.emplace_back(d.items[0].atom, parse_sort(d.items[1]));
    }
  } else {
    for (const SExpr& g : groups.items) {
      if (!g.is_list() || g.items.size() != 3 || !g.items[0].is_atom()) syntax(g, "malformed grammar group");
      nts.emplace_back(g.items[0].atom, parse_sort(g.items[1]));
    }
  }
  if (nts.empty()) syntax(predecl, "grammar declares no nonterminals");

  TermBuilder tb;
  for (const Term& p : params) tb.variables[p.name()] = p;
  for (const auto& [name, sort] : nts) tb.nonterminals[name] = sort;

  std::vector<Rule> rules;
  for (const SExpr& g : groups.items) {
    if (!g.is_list() || g.items.size() != 3 || !g.items[0].is_atom() || !g.items[2].is_list()) {
      syntax(g, "malformed grammar group");
    }
    const std::string& lhs = g.items[0].atom;
    if (tb.nonterminals.count(lhs) == 0) syntax(g.items[0], "rules for undeclared nonterminal " + lhs);
    if (parse_sort(g.items[1]) != tb.nonterminals[lhs]) sort_error(g.items[1], "nonterminal sort mismatch");
    for (const SExpr& rhs : g.items[2].items) {
      if (rhs.is_list() && !rhs.items.empty() &&
          (rhs.items[0].is_symbol("Constant") || rhs.items[0].is_symbol("Variable"))) {
        unsupported(rhs, "Constant/Variable grammar terms are not supported");
      }
      Term t = tb.build(rhs);
      if (t.sort() != tb.nonterminals[lhs]) sort_error(rhs, "rule has the wrong sort for " + lhs);
      rules.push_back({lhs, t});
    }
  }
  try {
    return Grammar(nts.front().first, nts, std::move(rules));
  } catch (const GrammarError& err) {
    sort_error(predecl, err.what());
  }
}

}  // namespace

SygusProblem parse_sygus(std::string_view text) {
  std::vector<SExpr> commands = parse_sexprs(text);
  if (commands.empty()) throw ParseError(ParseError::Kind::Syntax, {}, "empty input");

  SygusProblem p;
  TermBuilder tb;
  bool have_target = false;
  std::optional<Grammar> grammar;
  std::vector<Term> constraints;

  for (const SExpr& cmd : commands) {
    const std::string& head = head_symbol(cmd);
    if (head == "set-logic") {
      check_logic(cmd, false);
      p.logic = "LIA";
    } else if (head == "set-option" || head == "set-info" || head == "check-synth") {
      continue;
    } else if (head == "synth-fun") {
      if (have_target) unsupported(cmd, "multiple synth-fun declarations");
      if (cmd.items.size() < 4 || !cmd.items[1].is_atom() || !cmd.items[2].is_list()) {
        syntax(cmd, "malformed synth-fun");
      }
      have_target = true;
      p.target.name = cmd.items[1].atom;
      std::set<std::string> seen;
      for (const SExpr& param : cmd.items[2].items) {
        if (!param.is_list() || param.items.size() != 2 || !param.items[0].is_atom()) {
          syntax(param, "malformed parameter");
        }
        if (!seen.insert(param.items[0].atom).second) syntax(param, "duplicate parameter");
        p.target.params.push_back(Term::var(param.items[0].atom, parse_sort(param.items[1])));
      }
      p.target.result = parse_sort(cmd.items[3]);
      FunctionSig sig{{}, p.target.result};
      for (const Term& param : p.target.params) sig.params.push_back(param.sort());
      tb.functions[p.target.name] = sig;
      if (cmd.items.size() == 5) {
        if (!cmd.items[4].is_list()) syntax(cmd.items[4], "malformed grammar");
        grammar = build_grammar(cmd.items[4], nullptr, p.target.params);
      } else if (cmd.items.size() == 6) {
        if (!cmd.items[4].is_list() || !cmd.items[5].is_list()) syntax(cmd, "malformed grammar");
        grammar = build_grammar(cmd.items[4], &cmd.items[5], p.target.params);
      } else if (cmd.items.size() != 4) {
        syntax(cmd, "malformed synth-fun");
      }
      if (grammar && grammar->start_sort() != p.target.result) {
        sort_error(cmd, "grammar start symbol does not produce the return sort");
      }
    } else if (head == "declare-var") {
      if (cmd.items.size() != 3 || !cmd.items[1].is_atom()) syntax(cmd, "malformed declare-var");
      Term v = Term::var(cmd.items[1].atom, parse_sort(cmd.items[2]));
      if (tb.variables.count(v.name())) syntax(cmd, "variable declared twice: " + v.name());
      tb.variables[v.name()] = v;
      p.variables.push_back(v);
    } else if (head == "constraint") {
      if (cmd.items.size() != 2) syntax(cmd, "malformed constraint");
      Term c = tb.build(cmd.items[1]);
      if (c.sort() != Sort::Bool) sort_error(cmd.items[1], "constraint must be Bool");
      constraints.push_back(c);
    } else if (head == "synth-inv" || head == "inv-constraint" || head == "define-fun" ||
               head == "declare-fun" || head == "declare-datatype" || head == "declare-datatypes") {
      unsupported(cmd, "unsupported command " + head);
    } else {
      unsupported(cmd, "unknown command " + head);
    }
  }
  if (!have_target) syntax(commands.front(), "no synth-fun declaration");
  p.constraint = conjunction(std::move(constraints));
  p.grammar = grammar ? *grammar : default_grammar(p.target.params, p.target.result);
  return p;
}

SmtProblem parse_smt(std::string_view text) {
  std::vector<SExpr> commands = parse_sexprs(text);
  if (commands.empty()) throw ParseError(ParseError::Kind::Syntax, {}, "empty input");
  SmtProblem p;
  TermBuilder tb;
  for (const SExpr& cmd : commands) {
    const std::string& head = head_symbol(cmd);
    if (head == "set-logic") {
      check_logic(cmd, true);
    } else if (head == "declare-const" || head == "declare-fun") {
      const bool is_fun = head == "declare-fun";
      if (cmd.items.size() != (is_fun ? 4u : 3u) || !cmd.items[1].is_atom()) {
        syntax(cmd, "malformed " + head);
      }
      if (is_fun && (!cmd.items[2].is_list() || !cmd.items[2].items.empty())) {
        unsupported(cmd, "uninterpreted functions are not supported");
      }
      Term v = Term::var(cmd.items[1].atom, parse_sort(cmd.items.back()));
      if (tb.variables.count(v.name())) syntax(cmd, "constant declared twice: " + v.name());
      tb.variables[v.name()] = v;
      p.variables.push_back(v);
    } else if (head == "assert") {
      if (cmd.items.size() != 2) syntax(cmd, "malformed assert");
      Term a = tb.build(cmd.items[1]);
      if (a.sort() != Sort::Bool) sort_error(cmd.items[1], "assertion must be Bool");
      p.assertions.push_back(a);
    } else if (head == "check-sat" || head == "exit" || head == "set-info" || head == "set-option" ||
               head == "get-model" || head == "get-info" || head == "push" || head == "pop") {
      continue;
    } else {
      unsupported(cmd, "unsupported command " + head);
    }
  }
  return p;
}

Term parse_term(std::string_view text, const std::vector<Term>& variables) {
  std::vector<SExpr> items = parse_sexprs(text);
  if (items.size() != 1) throw ParseError(ParseError::Kind::Syntax, {}, "expected exactly one term");
  TermBuilder tb;
  for (const Term& v : variables) tb.variables[v.name()] = v;
  return tb.build(items.front());
}

std::string print_sygus(const SygusProblem& p) {
  std::ostringstream out;
  out << "(set-logic " << p.logic << ")\n";
  out << "(synth-fun " << p.target.name << " (";
  for (std::size_t i = 0; i < p.target.params.size(); ++i) {
    if (i) out << ' ';
    out << '(' << p.target.params[i].name() << ' ' << sort_name(p.target.params[i].sort()) << ')';
  }
  out << ") " << sort_name(p.target.result) << "\n  (";
  const auto& nts = p.grammar.nonterminals();
  // The start symbol must come first in the declaration list.
  std::vector<std::pair<std::string, Sort>> ordered;
  for (const auto& nt : nts) {
    if (nt.first == p.grammar.start()) ordered.insert(ordered.begin(), nt);
    else ordered.push_back(nt);
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i) out << ' ';
    out << '(' << ordered[i].first << ' ' << sort_name(ordered[i].second) << ')';
  }
  out << ")\n  (";
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i) out << "\n   ";
    out << '(' << ordered[i].first << ' ' << sort_name(ordered[i].second) << " (";
    bool first = true;
    for (std::size_t r : p.grammar.rules_for(ordered[i].first)) {
      if (!first) out << ' ';
      first = false;
      out << print_term(p.grammar.rule(r).rhs);
    }
    out << "))";
  }
  out << "))\n";
  for (const Term& v : p.variables) {
    out << "(declare-var " << v.name() << ' ' << sort_name(v.sort()) << ")\n";
  }
  out << "(constraint " << print_term(p.constraint) << ")\n";
  out << "(check-synth)\n";
  return out.str();
}

std::string print_smt(const SmtProblem& p) {
  std::ostringstream out;
  out << "(set-logic LIA)\n";
  for (const Term& v : p.variables) {
    out << "(declare-const " << v.name() << ' ' << sort_name(v.sort()) << ")\n";
  }
  for (const Term& a : p.assertions) out << "(assert " << print_term(a) << ")\n";
  out << "(check-sat)\n";
  return out.str();
}

Term instantiate(const SygusProblem& p, const Term& body) {
  return inline_calls(p.constraint, p.target.name, p.target.params, body);
}

}  // namespace treesynth
