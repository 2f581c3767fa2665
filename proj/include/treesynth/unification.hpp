#pragma once

#include <string>
#include <variant>
#include <vector>

#include "treesynth/term.hpp"

namespace treesynth {

struct UnificationFailure {
  enum class Reason { Clash, OccursCheck };
  Reason reason;
  Term left;
  Term right;

  std::string describe() const;
};

using UnifyResult = std::variant<Substitution, UnificationFailure>;

/// Most general syntactic unifier. Every variable is a unification variable;
/// constants, nonterminals and operator symbols are rigid. The returned
/// substitution is normalized (idempotent).
UnifyResult unify(const Term& a, const Term& b);

inline bool unified(const UnifyResult& r) { return std::holds_alternative<Substitution>(r); }

struct GeneralizationResult {
  Term lgg;
  /// One per input term; substitute(lgg, witnesses[i]) == inputs[i].
  std::vector<Substitution> witnesses;
  /// Fresh variables in order of first occurrence.
  std::vector<Term> fresh;
};

/// Least general generalization of n terms, computed directly on n-tuples.
/// Positions where all inputs agree are kept; every distinct disagreeing
/// tuple becomes one fresh variable x1, x2, ... (names already used by an
/// input are skipped). Throws SortError on an empty input or mixed sorts.
GeneralizationResult anti_unify(const std::vector<Term>& terms);

inline std::size_t lgg_size(const GeneralizationResult& r) { return r.lgg.size(); }

}  // namespace treesynth
