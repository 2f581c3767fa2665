#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treesynth {

/// Position in the source text, both 1-based.
struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Unsupported, Sort };

  ParseError(Kind kind, SourceLocation where, const std::string& message);

  Kind kind() const { return kind_; }
  SourceLocation where() const { return where_; }

 private:
  Kind kind_;
  SourceLocation where_;
};

struct SExpr {
  enum class Type { Atom, List };

  Type type = Type::Atom;
  std::string atom;  // unquoted spelling for |symbols| and "strings"
  bool quoted = false;
  std::vector<SExpr> items;
  SourceLocation where;

  bool is_atom() const { return type == Type::Atom; }
  bool is_list() const { return type == Type::List; }
  bool is_symbol(std::string_view s) const { return is_atom() && !quoted && atom == s; }
  bool is_numeral() const;
  std::string to_string() const;
};

/// Parses every top-level s-expression in `text`. `;` starts a line comment.
std::vector<SExpr> parse_sexprs(std::string_view text);

}  // namespace treesynth
