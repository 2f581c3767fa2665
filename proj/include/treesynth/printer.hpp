#pragma once

#include <string>

#include "treesynth/term.hpp"

namespace treesynth {

/// SMT-LIB s-expression form. Negative literals print as `(- n)`.
std::string print_term(const Term& t);

}  // namespace treesynth
