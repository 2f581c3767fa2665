#include "treesynth/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace treesynth {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

FeatureVector::FeatureVector(std::size_t length, std::vector<Entry> entries) : length_(length) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [i, c] : entries) {
    if (i >= length) throw std::out_of_range("feature index beyond vector length");
    if (c == 0) continue;
    if (!entries_.empty() && entries_.back().first == i) entries_.back().second += c;
    else entries_.push_back({i, c});
  }
}

std::uint32_t FeatureVector::operator[](std::size_t i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{static_cast<std::uint32_t>(i), 0});
  return it != entries_.end() && it->first == i ? it->second : 0;
}

std::uint64_t FeatureVector::mass() const {
  std::uint64_t m = 0;
  for (const auto& e : entries_) m += e.second;
  return m;
}

std::vector<std::uint32_t> FeatureVector::dense() const {
  std::vector<std::uint32_t> out(length_, 0);
  for (const auto& [i, c] : entries_) out[i] = c;
  return out;
}

void FeatureVector::add(std::size_t index, std::uint32_t count) {
  if (index >= length_) throw std::out_of_range("feature index beyond vector length");
  if (count == 0) return;
  auto key = static_cast<std::uint32_t>(index);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{key, 0});
  if (it != entries_.end() && it->first == key) it->second += count;
  else entries_.insert(it, {key, count});
}

FeatureVector FeatureVector::concat(const FeatureVector& tail) const {
  FeatureVector out(length_ + tail.length_);
  out.entries_ = entries_;
  out.entries_.reserve(entries_.size() + tail.entries_.size());
  for (const auto& [i, c] : tail.entries_) out.entries_.push_back({static_cast<std::uint32_t>(i + length_), c});
  return out;
}

namespace {

void collect(const Term& t, std::size_t n, std::vector<FeatureVector::Entry>& words) {
  auto push = [&](std::uint64_t h) { words.push_back({static_cast<std::uint32_t>(h % n), 1}); };
  const std::string parent = t.symbol();
  if (t.is_leaf()) {
    push(fnv1a(parent));
    return;
  }
  for (const Term& child : t.args()) {
    push(fnv1a(parent + '\x1f' + child.symbol()));
    collect(child, n, words);
  }
}

}  // namespace

FeatureVector featurize_term(const Term& t, std::size_t n) {
  if (n < 2) throw std::invalid_argument("hash base must be at least 2");
  std::vector<FeatureVector::Entry> words;
  words.reserve(2 * t.size());
  collect(t, n, words);
  return FeatureVector(n, std::move(words));
}

FeatureVector encode_state(const Term& phi, const PartialProgram& h, std::size_t n) {
  return featurize_term(phi, n).concat(featurize_term(h.tree(), n));
}

FeatureVector encode_action(const Term& phi, const PartialProgram& h, const PartialProgram& h_next,
                            std::size_t n) {
  return encode_state(phi, h, n).concat(featurize_term(h_next.tree(), n));
}

double default_value(const PartialProgram& h) {
  return std::pow(0.95, static_cast<double>(h.nonterminal_count()));
}

}  // namespace treesynth
