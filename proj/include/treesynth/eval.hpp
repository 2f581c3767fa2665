#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "treesynth/term.hpp"

namespace treesynth {

struct Value {
  Sort sort = Sort::Int;
  std::int64_t integer = 0;
  bool boolean = false;

  static Value of_int(std::int64_t v) { return {Sort::Int, v, false}; }
  static Value of_bool(bool b) { return {Sort::Bool, 0, b}; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.sort == b.sort && (a.sort == Sort::Int ? a.integer == b.integer : a.boolean == b.boolean);
  }
};

using Assignment = std::map<std::string, Value>;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluates a term with no nonterminals or function calls. Returns nullopt
/// when 64-bit arithmetic overflows. Throws EvalError on unbound variables.
std::optional<Value> evaluate(const Term& t, const Assignment& env);

std::string format_assignment(const Assignment& a);

}  // namespace treesynth
