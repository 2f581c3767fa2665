#include "treesynth/sexpr.hpp"

#include <algorithm>
#include <cctype>

namespace treesynth {

namespace {

std::string describe(SourceLocation where, const std::string& message) {
  return std::to_string(where.line) + ":" + std::to_string(where.column) + ": " + message;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_blank();
    while (!at_end()) {
      out.push_back(read());
      skip_blank();
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else {
      ++loc_.column;
    }
    return c;
  }

  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(SourceLocation where, const std::string& msg) const {
    throw ParseError(ParseError::Kind::Syntax, where, msg);
  }

  SExpr read() {
    SExpr e;
    e.where = loc_;
    char c = peek();
    if (c == ')') fail(loc_, "unexpected ')'");
    if (c == '(') {
      advance();
      e.type = SExpr::Type::List;
      skip_blank();
      while (true) {
        if (at_end()) fail(e.where, "unterminated list");
        if (peek() == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
        skip_blank();
      }
      return e;
    }
    if (c == '|' || c == '"') {
      const char close = c;
      advance();
      e.quoted = true;
      while (true) {
        if (at_end()) fail(e.where, "unterminated quoted token");
        char d = advance();
        if (d == close) {
          // SMT-LIB escapes a double quote inside a string by doubling it.
          if (close == '"' && !at_end() && peek() == '"') {
            e.atom.push_back(advance());
            continue;
          }
          break;
        }
        e.atom.push_back(d);
      }
      return e;
    }
    while (!at_end()) {
      char d = peek();
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      e.atom.push_back(advance());
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  SourceLocation loc_;
};

}  // namespace

ParseError::ParseError(Kind kind, SourceLocation where, const std::string& message)
    : std::runtime_error(describe(where, message)), kind_(kind), where_(where) {}

bool SExpr::is_numeral() const {
  return is_atom() && !quoted && !atom.empty() &&
         std::all_of(atom.begin(), atom.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

std::string SExpr::to_string() const {
  if (is_atom()) return quoted ? "|" + atom + "|" : atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    out += items[i].to_string();
  }
  return out + ")";
}

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

}  // namespace treesynth
