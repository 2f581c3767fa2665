#include "treesynth/grammar.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "treesynth/printer.hpp"

namespace treesynth {

namespace {

void collect_names(const Term& t, std::set<std::string>& nts, std::set<std::string>& vars) {
  if (t.kind() == Kind::NonTerminal) nts.insert(t.name());
  if (t.kind() == Kind::Var) vars.insert(t.name());
  for (const Term& a : t.args()) collect_names(a, nts, vars);
}

bool contains_op(const Term& t, Op op) {
  if (t.kind() == Kind::Apply && t.op() == op) return true;
  return std::any_of(t.args().begin(), t.args().end(),
                     [op](const Term& a) { return contains_op(a, op); });
}

std::string fresh_symbol(std::string base, const std::vector<Term>& params) {
  auto clashes = [&](const std::string& s) {
    return std::any_of(params.begin(), params.end(), [&](const Term& p) { return p.name() == s; });
  };
  while (clashes(base)) base += "_";
  return base;
}

}  // namespace

Grammar::Grammar(std::string start, std::vector<std::pair<std::string, Sort>> nonterminals,
                 std::vector<Rule> rules)
    : start_(std::move(start)), nonterminals_(std::move(nonterminals)), rules_(std::move(rules)) {
  for (const auto& [name, sort] : nonterminals_) {
    if (!sorts_.emplace(name, sort).second) {
      throw GrammarError("nonterminal declared twice: " + name);
    }
    by_lhs_[name];
  }
  if (sorts_.count(start_) == 0) throw GrammarError("start symbol is not a nonterminal: " + start_);
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    auto it = sorts_.find(r.lhs);
    if (it == sorts_.end()) throw GrammarError("rule for undeclared nonterminal: " + r.lhs);
    if (!r.rhs.valid() || r.rhs.sort() != it->second) {
      throw GrammarError("rule template for " + r.lhs + " has the wrong sort");
    }
    std::set<std::string> nts;
    std::set<std::string> vars;
    collect_names(r.rhs, nts, vars);
    for (const std::string& n : nts) {
      auto decl = sorts_.find(n);
      if (decl == sorts_.end()) throw GrammarError("undeclared nonterminal in template: " + n);
    }
    for (const std::string& v : vars) {
      if (sorts_.count(v)) throw GrammarError("symbol is both terminal and nonterminal: " + v);
    }
    by_lhs_[r.lhs].push_back(i);
  }
  check_productive();
}

void Grammar::check_productive() const {
  std::set<std::string> productive;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule& r : rules_) {
      if (productive.count(r.lhs)) continue;
      std::set<std::string> nts;
      std::set<std::string> vars;
      collect_names(r.rhs, nts, vars);
      if (std::all_of(nts.begin(), nts.end(),
                      [&](const std::string& n) { return productive.count(n) != 0; })) {
        productive.insert(r.lhs);
        changed = true;
      }
    }
  }
  for (const auto& [name, sort] : nonterminals_) {
    if (!productive.count(name)) throw GrammarError("unproductive nonterminal: " + name);
  }
}

Sort Grammar::sort_of(const std::string& nonterminal) const {
  auto it = sorts_.find(nonterminal);
  if (it == sorts_.end()) throw GrammarError("unknown nonterminal: " + nonterminal);
  return it->second;
}

const std::vector<std::size_t>& Grammar::rules_for(const std::string& nonterminal) const {
  auto it = by_lhs_.find(nonterminal);
  if (it == by_lhs_.end()) throw GrammarError("unknown nonterminal: " + nonterminal);
  return it->second;
}

Grammar Grammar::without_operator(Op op) const {
  std::vector<Rule> kept;
  for (const Rule& r : rules_) {
    if (!contains_op(r.rhs, op)) kept.push_back(r);
  }
  // Nonterminals that lose all their rules would be unproductive; drop them
  // together with every rule that mentions them.
  std::vector<std::pair<std::string, Sort>> nts = nonterminals_;
  while (true) {
    std::set<std::string> with_rules;
    for (const Rule& r : kept) with_rules.insert(r.lhs);
    std::vector<std::pair<std::string, Sort>> alive;
    for (const auto& nt : nts) {
      if (with_rules.count(nt.first)) alive.push_back(nt);
    }
    if (alive.size() == nts.size()) break;
    nts = alive;
    std::set<std::string> names;
    for (const auto& nt : nts) names.insert(nt.first);
    std::vector<Rule> next;
    for (const Rule& r : kept) {
      std::set<std::string> used;
      std::set<std::string> vars;
      collect_names(r.rhs, used, vars);
      if (std::all_of(used.begin(), used.end(),
                      [&](const std::string& n) { return names.count(n) != 0; })) {
        next.push_back(r);
      }
    }
    kept = std::move(next);
  }
  return Grammar(start_, std::move(nts), std::move(kept));
}

std::string Grammar::dump() const {
  std::ostringstream out;
  out << "start " << start_ << "\n";
  for (const auto& [name, sort] : nonterminals_) out << "nonterminal " << name << " " << sort_name(sort) << "\n";
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    out << i << ": " << rules_[i].lhs << " -> " << print_term(rules_[i].rhs) << "\n";
  }
  return out.str();
}

std::optional<Path> leftmost_nonterminal(const Term& t) {
  if (t.nonterminal_count() == 0) return std::nullopt;
  Path path;
  const Term* cur = &t;
  while (cur->kind() != Kind::NonTerminal) {
    for (std::size_t i = 0; i < cur->arity(); ++i) {
      if (cur->args()[i].nonterminal_count() > 0) {
        path.push_back(i);
        cur = &cur->args()[i];
        break;
      }
    }
  }
  return path;
}

std::vector<std::size_t> applicable_rules(const PartialProgram& h, const Grammar& g) {
  auto path = leftmost_nonterminal(h.tree());
  if (!path) throw GrammarError("no rules apply to a complete program");
  return g.rules_for(subterm_at(h.tree(), *path).name());
}

PartialProgram expand_leftmost(const PartialProgram& h, const Grammar& g, std::size_t rule) {
  auto path = leftmost_nonterminal(h.tree());
  if (!path) throw GrammarError("cannot expand a complete program");
  const Rule& r = g.rule(rule);
  if (subterm_at(h.tree(), *path).name() != r.lhs) {
    throw GrammarError("rule " + std::to_string(rule) + " does not rewrite the leftmost nonterminal");
  }
  return PartialProgram(replace_at(h.tree(), *path, r.rhs));
}

Grammar default_grammar(const std::vector<Term>& params, Sort start_sort) {
  return extended_default_grammar(params, start_sort, {}, {});
}

Grammar extended_default_grammar(const std::vector<Term>& params, Sort start_sort,
                                 const std::vector<std::int64_t>& constants,
                                 const std::vector<Op>& operators) {
  const std::string int_nt = fresh_symbol("I", params);
  const std::string bool_nt = fresh_symbol("B", params);
  const Term i = Term::nonterminal(int_nt, Sort::Int);
  const Term b = Term::nonterminal(bool_nt, Sort::Bool);

  std::vector<Rule> rules;
  for (const Term& p : params) {
    if (p.sort() == Sort::Int) rules.push_back({int_nt, p});
  }
  std::vector<std::int64_t> consts = {0, 1};
  for (std::int64_t c : constants) {
    if (std::find(consts.begin(), consts.end(), c) == consts.end()) consts.push_back(c);
  }
  for (std::int64_t c : consts) rules.push_back({int_nt, Term::int_const(c)});
  rules.push_back({int_nt, Term::apply(Op::Add, {i, i})});
  rules.push_back({int_nt, Term::apply(Op::Sub, {i, i})});
  rules.push_back({int_nt, Term::apply(Op::Ite, {b, i, i})});

  for (const Term& p : params) {
    if (p.sort() == Sort::Bool) rules.push_back({bool_nt, p});
  }
  rules.push_back({bool_nt, Term::apply(Op::Ge, {i, i})});
  rules.push_back({bool_nt, Term::apply(Op::Le, {i, i})});
  rules.push_back({bool_nt, Term::apply(Op::Eq, {i, i})});
  rules.push_back({bool_nt, Term::apply(Op::And, {b, b})});
  rules.push_back({bool_nt, Term::apply(Op::Or, {b, b})});
  rules.push_back({bool_nt, Term::apply(Op::Not, {b})});

  for (Op op : operators) {
    switch (op) {
      case Op::Mul:
        rules.push_back({int_nt, Term::apply(Op::Mul, {i, i})});
        break;
      case Op::Gt:
      case Op::Lt:
        rules.push_back({bool_nt, Term::apply(op, {i, i})});
        break;
      case Op::Implies:
        rules.push_back({bool_nt, Term::apply(Op::Implies, {b, b})});
        break;
      default:
        break;  // already part of the template
    }
  }

  const std::string start = start_sort == Sort::Int ? int_nt : bool_nt;
  return Grammar(start, {{int_nt, Sort::Int}, {bool_nt, Sort::Bool}}, std::move(rules));
}

namespace {

using Visiting = std::set<std::pair<std::string, const void*>>;

bool matches(const Grammar& g, const Term& tmpl, const Term& t, Visiting& visiting);

bool derives(const Grammar& g, const std::string& nt, const Term& t, Visiting& visiting) {
  // Unit-rule cycles (A -> B, B -> A) would otherwise recurse forever.
  auto key = std::make_pair(nt, t.identity());
  if (!visiting.insert(key).second) return false;
  bool found = false;
  for (std::size_t r : g.rules_for(nt)) {
    if (matches(g, g.rule(r).rhs, t, visiting)) {
      found = true;
      break;
    }
  }
  visiting.erase(key);
  return found;
}

bool matches(const Grammar& g, const Term& tmpl, const Term& t, Visiting& visiting) {
  if (tmpl.kind() == Kind::NonTerminal) {
    return tmpl.sort() == t.sort() && derives(g, tmpl.name(), t, visiting);
  }
  if (tmpl.kind() != t.kind() || tmpl.sort() != t.sort()) return false;
  if (tmpl.kind() != Kind::Apply) return tmpl == t;
  if (tmpl.op() != t.op() || tmpl.name() != t.name() || tmpl.arity() != t.arity()) return false;
  for (std::size_t k = 0; k < t.arity(); ++k) {
    if (!matches(g, tmpl.args()[k], t.args()[k], visiting)) return false;
  }
  return true;
}

}  // namespace

bool derivable(const Grammar& g, const Term& t) {
  Visiting visiting;
  return t.valid() && t.is_complete() && g.start_sort() == t.sort() &&
         derives(g, g.start(), t, visiting);
}

}  // namespace treesynth
