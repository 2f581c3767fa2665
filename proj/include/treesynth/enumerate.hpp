#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "treesynth/grammar.hpp"

namespace treesynth {

struct EnumerationLimits {
  std::size_t max_size = 6;
  /// Cap on the terms kept per nonterminal, all sizes together.
  std::size_t max_terms = 50000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Bottom-up enumeration of the complete terms derivable from the start
/// symbol, in nondecreasing size, duplicates removed. Stops at the first term
/// for which `accept` returns true and returns it.
std::optional<Term> enumerate_terms(const Grammar& g, const EnumerationLimits& limits,
                                    const std::function<bool(const Term&)>& accept);

}  // namespace treesynth
