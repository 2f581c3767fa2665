#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace treesynth {

enum class Sort : std::uint8_t { Int, Bool };

std::string_view sort_name(Sort s);

/// Operators of quantifier-free linear integer arithmetic with Booleans.
/// `Call` is an application of the synthesis target (or any named function
/// symbol); its name lives on the node.
enum class Op : std::uint8_t {
  Add, Sub, Mul, Ite, Ge, Le, Gt, Lt, Eq, And, Or, Not, Implies, Call
};

std::string_view op_spelling(Op op);
std::optional<Op> op_from_spelling(std::string_view s);

enum class Kind : std::uint8_t { Var, IntConst, BoolConst, Apply, NonTerminal };

/// Raised when a term would be ill-sorted or malformed.
class SortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Term;

namespace detail {
struct Node;
}

/// Immutable, structurally shared first-order term. Copies are cheap.
///
/// Nonterminal placeholders are leaves naming a grammar symbol; a term
/// without them is a complete program.
class Term {
 public:
  Term() = default;

  static Term var(std::string name, Sort sort);
  static Term int_const(std::int64_t value);
  static Term bool_const(bool value);
  static Term nonterminal(std::string symbol, Sort sort);
  /// Builds an operator application, checking arity and argument sorts.
  static Term apply(Op op, std::vector<Term> args);
  /// Application of a named function with a declared result sort.
  static Term call(std::string name, Sort result, std::vector<Term> args);

  bool valid() const { return node_ != nullptr; }
  Kind kind() const;
  Sort sort() const;
  /// Variable name, nonterminal symbol, or called function name.
  const std::string& name() const;
  std::int64_t int_value() const;
  bool bool_value() const;
  Op op() const;
  const std::vector<Term>& args() const;
  std::size_t arity() const { return args().size(); }

  std::size_t size() const;
  std::size_t nonterminal_count() const;
  std::size_t hash() const;

  bool is_leaf() const { return kind() != Kind::Apply; }
  bool is_complete() const { return nonterminal_count() == 0; }

  /// Canonical spelling used for printing and feature hashing.
  std::string symbol() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  /// Total order, structural. Used for deterministic containers.
  friend bool operator<(const Term& a, const Term& b);

  const void* identity() const { return node_.get(); }

 private:
  explicit Term(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

using Path = std::vector<std::size_t>;

struct Occurrence {
  Term term;
  Path path;
};

/// Pre-order enumeration of every node, `t` itself first at the empty path.
std::vector<Occurrence> subterms(const Term& t);
Term subterm_at(const Term& t, const Path& path);
/// Returns `t` with the node at `path` replaced by `replacement`.
Term replace_at(const Term& t, const Path& path, const Term& replacement);

/// Simultaneous replacement of variables by terms.
class Substitution {
 public:
  Substitution() = default;

  /// Throws SortError when the image sort differs from the variable sort.
  void bind(const Term& var, Term image);
  bool contains(const std::string& name) const { return map_.count(name) != 0; }
  const Term* find(const std::string& name) const;
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, Term>& bindings() const { return map_; }

  /// Resolves chains so no bound variable occurs in any image.
  Substitution normalized() const;

  friend bool operator==(const Substitution& a, const Substitution& b) {
    return a.map_ == b.map_;
  }

 private:
  std::map<std::string, Term> map_;
};

Term substitute(const Term& t, const Substitution& s);

/// Names of free variables in first-occurrence (pre-order) order.
std::vector<Term> free_variables(const Term& t);
bool occurs(const std::string& var, const Term& t);

/// Replaces every application of `name` by `body` with parameters bound to
/// the call arguments.
Term inline_calls(const Term& t, const std::string& name,
                  const std::vector<Term>& params, const Term& body);

/// True when every multiplication has at most one non-constant factor.
bool is_linear(const Term& t);

/// Conjunction that flattens to a single term when only one conjunct.
Term conjunction(std::vector<Term> conjuncts);

}  // namespace treesynth

template <>
struct std::hash<treesynth::Term> {
  std::size_t operator()(const treesynth::Term& t) const { return t.hash(); }
};
