#include "treesynth/printer.hpp"

namespace treesynth {

namespace {

void print(const Term& t, std::string& out) {
  switch (t.kind()) {
    case Kind::Var:
    case Kind::NonTerminal:
    case Kind::BoolConst:
      out += t.symbol();
      return;
    case Kind::IntConst:
      if (t.int_value() < 0) {
        // Magnitude of INT64_MIN is not representable; print via unsigned.
        auto mag = static_cast<std::uint64_t>(-(t.int_value() + 1)) + 1;
        out += "(- " + std::to_string(mag) + ")";
      } else {
        out += std::to_string(t.int_value());
      }
      return;
    case Kind::Apply:
      break;
  }
  out += '(';
  out += t.symbol();
  for (const Term& a : t.args()) {
    out += ' ';
    print(a, out);
  }
  out += ')';
}

}  // namespace

std::string print_term(const Term& t) {
  std::string out;
  print(t, out);
  return out;
}

}  // namespace treesynth
