#include "treesynth/enumerate.hpp"

#include <map>
#include <unordered_set>

namespace treesynth {

namespace {

struct Hole {
  Path path;
  std::string nt;
};

class Bank {
 public:
  Bank(const Grammar& g, const EnumerationLimits& limits) : g_(g), limits_(limits) {
    for (const auto& [nt, sort] : g.nonterminals()) {
      by_size_[nt].resize(limits.max_size + 1);
      seen_[nt];
    }
    for (std::size_t r = 0; r < g.rules().size(); ++r) {
      std::vector<Hole> holes;
      for (const Occurrence& o : subterms(g.rule(r).rhs)) {
        if (o.term.kind() == Kind::NonTerminal) holes.push_back({o.path, o.term.name()});
      }
      holes_.push_back(std::move(holes));
    }
  }

  bool expired() const { return limits_.deadline && std::chrono::steady_clock::now() >= *limits_.deadline; }

  /// Fills all banks at size `s`; returns the new start-symbol terms in order.
  std::vector<Term> grow(std::size_t s) {
    std::vector<Term> fresh_start;
    bool changed = true;
    // Unit rules can add terms of the same size; iterate to a fixpoint.
    while (changed && !expired()) {
      changed = false;
      for (std::size_t r = 0; r < g_.rules().size(); ++r) {
        const Rule& rule = g_.rule(r);
        const auto& holes = holes_[r];
        if (full(rule.lhs)) continue;
        const std::size_t fixed = rule.rhs.size() - holes.size();
        if (s < fixed + holes.size()) continue;
        if (holes.empty()) {
          if (rule.rhs.size() == s) changed |= add(rule.lhs, s, rule.rhs, fresh_start);
          continue;
        }
        std::vector<std::size_t> sizes(holes.size(), 1);
        fill(rule, holes, s - fixed, 0, sizes, s, fresh_start, changed);
      }
    }
    return fresh_start;
  }

 private:
  void fill(const Rule& rule, const std::vector<Hole>& holes, std::size_t remaining, std::size_t i,
            std::vector<std::size_t>& sizes, std::size_t s, std::vector<Term>& fresh_start, bool& changed) {
    if (expired()) return;
    if (i + 1 == holes.size()) {
      if (remaining == 0) return;
      sizes[i] = remaining;
      combine(rule, holes, sizes, 0, rule.rhs, s, fresh_start, changed);
      return;
    }
    for (std::size_t k = 1; k + (holes.size() - i - 1) <= remaining; ++k) {
      sizes[i] = k;
      fill(rule, holes, remaining - k, i + 1, sizes, s, fresh_start, changed);
    }
  }

  void combine(const Rule& rule, const std::vector<Hole>& holes, const std::vector<std::size_t>& sizes,
               std::size_t i, const Term& partial, std::size_t s, std::vector<Term>& fresh_start, bool& changed) {
    if (i == holes.size()) {
      changed |= add(rule.lhs, s, partial, fresh_start);
      return;
    }
    // Copy: add() may append to the same bucket through unit rules.
    const std::vector<Term> options = by_size_[holes[i].nt][sizes[i]];
    for (const Term& t : options) {
      if (expired() || full(rule.lhs)) return;
      combine(rule, holes, sizes, i + 1, replace_at(partial, holes[i].path, t), s, fresh_start, changed);
    }
  }

  bool full(const std::string& nt) { return seen_[nt].size() >= limits_.max_terms; }

  bool add(const std::string& nt, std::size_t s, const Term& t, std::vector<Term>& fresh_start) {
    auto& seen = seen_[nt];
    if (seen.size() >= limits_.max_terms || !seen.insert(t).second) return false;
    by_size_[nt][s].push_back(t);
    if (nt == g_.start()) fresh_start.push_back(t);
    return true;
  }

  const Grammar& g_;
  const EnumerationLimits& limits_;
  std::vector<std::vector<Hole>> holes_;
  std::map<std::string, std::vector<std::vector<Term>>> by_size_;
  std::map<std::string, std::unordered_set<Term, TermHash>> seen_;
};

}  // namespace

std::optional<Term> enumerate_terms(const Grammar& g, const EnumerationLimits& limits,
                                    const std::function<bool(const Term&)>& accept) {
  Bank bank(g, limits);
  for (std::size_t s = 1; s <= limits.max_size; ++s) {
    for (const Term& t : bank.grow(s)) {
      if (bank.expired()) return std::nullopt;
      if (accept(t)) return t;
    }
    if (bank.expired()) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace treesynth
