#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "treesynth/grammar.hpp"
#include "treesynth/term.hpp"

namespace treesynth {

inline constexpr std::size_t kDefaultHashBase = 4093;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Count vector of fixed length. Entries are stored sparsely (sorted by
/// index, zeros omitted) but the value semantics are those of a dense vector.
class FeatureVector {
 public:
  using Entry = std::pair<std::uint32_t, std::uint32_t>;

  FeatureVector() = default;
  explicit FeatureVector(std::size_t length) : length_(length) {}
  FeatureVector(std::size_t length, std::vector<Entry> entries);

  std::size_t length() const { return length_; }
  std::uint32_t operator[](std::size_t i) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t mass() const;
  std::vector<std::uint32_t> dense() const;

  void add(std::size_t index, std::uint32_t count = 1);
  /// Concatenation; indices of `tail` are shifted by this vector's length.
  FeatureVector concat(const FeatureVector& tail) const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
    return a.length_ == b.length_ && a.entries_ == b.entries_;
  }
  friend bool operator!=(const FeatureVector& a, const FeatureVector& b) { return !(a == b); }

 private:
  std::size_t length_ = 0;
  std::vector<Entry> entries_;
};

/// Bag of hashed words: one word per leaf (constant, variable, or
/// nonterminal placeholder) and one per parent/child edge.
FeatureVector featurize_term(const Term& t, std::size_t n = kDefaultHashBase);

/// [featurize(phi) | featurize(h)], length 2n.
FeatureVector encode_state(const Term& phi, const PartialProgram& h, std::size_t n = kDefaultHashBase);

/// [featurize(phi) | featurize(h) | featurize(h_next)], length 3n.
FeatureVector encode_action(const Term& phi, const PartialProgram& h, const PartialProgram& h_next,
                            std::size_t n = kDefaultHashBase);

/// 0.95 ^ #NT(h).
double default_value(const PartialProgram& h);
inline double default_policy() { return 1.0; }

}  // namespace treesynth
