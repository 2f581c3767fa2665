#include "treesynth/unification.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "treesynth/printer.hpp"

namespace treesynth {

std::string UnificationFailure::describe() const {
  const char* what = reason == Reason::Clash ? "symbol clash" : "occurs check";
  return std::string(what) + " between " + print_term(left) + " and " + print_term(right);
}

namespace {

bool same_head(const Term& a, const Term& b) {
  if (a.kind() != b.kind() || a.sort() != b.sort()) return false;
  switch (a.kind()) {
    case Kind::Apply:
      return a.op() == b.op() && a.name() == b.name() && a.arity() == b.arity();
    default:
      return a == b;
  }
}

}  // namespace

UnifyResult unify(const Term& a, const Term& b) {
  Substitution sigma;
  std::deque<std::pair<Term, Term>> work;
  work.emplace_back(a, b);
  while (!work.empty()) {
    auto [s, t] = work.front();
    work.pop_front();
    s = substitute(s, sigma);
    t = substitute(t, sigma);
    if (s == t) continue;
    if (s.kind() != Kind::Var && t.kind() == Kind::Var) std::swap(s, t);
    if (s.kind() == Kind::Var) {
      if (s.sort() != t.sort()) return UnificationFailure{UnificationFailure::Reason::Clash, s, t};
      if (occurs(s.name(), t)) return UnificationFailure{UnificationFailure::Reason::OccursCheck, s, t};
      Substitution single;
      single.bind(s, t);
      Substitution next;
      for (const auto& [name, image] : sigma.bindings()) {
        next.bind(Term::var(name, image.sort()), substitute(image, single));
      }
      next.bind(s, t);
      sigma = std::move(next);
      continue;
    }
    if (!same_head(s, t)) return UnificationFailure{UnificationFailure::Reason::Clash, s, t};
    for (std::size_t i = 0; i < s.arity(); ++i) work.emplace_back(s.args()[i], t.args()[i]);
  }
  return sigma;
}

namespace {

class Generalizer {
 public:
  explicit Generalizer(const std::vector<Term>& inputs) : witnesses_(inputs.size()) {
    for (const Term& t : inputs) {
      for (const Term& v : free_variables(t)) taken_.insert(v.name());
    }
  }

  Term run(const std::vector<Term>& tuple) {
    if (std::all_of(tuple.begin(), tuple.end(), [&](const Term& t) { return t == tuple.front(); })) {
      return tuple.front();
    }
    const Term& head = tuple.front();
    bool descend = head.kind() == Kind::Apply &&
                   std::all_of(tuple.begin(), tuple.end(), [&](const Term& t) { return same_head(head, t); });
    if (descend) {
      for (std::size_t i = 0; i < head.arity() && descend; ++i) {
        for (const Term& t : tuple) descend = descend && t.args()[i].sort() == head.args()[i].sort();
      }
    }
    if (!descend) return variable_for(tuple);
    std::vector<Term> args;
    args.reserve(head.arity());
    std::vector<Term> column(tuple.size());
    for (std::size_t i = 0; i < head.arity(); ++i) {
      for (std::size_t k = 0; k < tuple.size(); ++k) column[k] = tuple[k].args()[i];
      args.push_back(run(column));
    }
    if (head.op() == Op::Call) return Term::call(head.name(), head.sort(), std::move(args));
    return Term::apply(head.op(), std::move(args));
  }

  std::vector<Substitution> take_witnesses() { return std::move(witnesses_); }
  std::vector<Term> take_fresh() { return std::move(fresh_); }

 private:
  Term variable_for(const std::vector<Term>& tuple) {
    auto it = by_tuple_.find(tuple);
    if (it != by_tuple_.end()) return it->second;
    std::string name;
    do {
      name = "x" + std::to_string(++counter_);
    } while (taken_.count(name));
    Term v = Term::var(name, tuple.front().sort());
    by_tuple_.emplace(tuple, v);
    fresh_.push_back(v);
    for (std::size_t k = 0; k < tuple.size(); ++k) witnesses_[k].bind(v, tuple[k]);
    return v;
  }

  std::set<std::string> taken_;
  std::map<std::vector<Term>, Term> by_tuple_;
  std::vector<Substitution> witnesses_;
  std::vector<Term> fresh_;
  std::size_t counter_ = 0;
};

}  // namespace

GeneralizationResult anti_unify(const std::vector<Term>& terms) {
  if (terms.empty()) throw SortError("anti-unification needs at least one term");
  for (const Term& t : terms) {
    if (t.sort() != terms.front().sort()) throw SortError("anti-unification over mixed sorts");
  }
  Generalizer g(terms);
  GeneralizationResult r;
  r.lgg = g.run(terms);
  r.witnesses = g.take_witnesses();
  r.fresh = g.take_fresh();
  return r;
}

}  // namespace treesynth
