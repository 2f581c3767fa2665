#pragma once

#include <random>
#include <vector>

#include "treesynth/term.hpp"

namespace treesynth::testing {

/// Random well-sorted terms over a small LIA signature, for property tests.
class TermGenerator {
 public:
  explicit TermGenerator(std::uint64_t seed, std::vector<Term> int_vars = default_ints(),
                         std::vector<Term> bool_vars = default_bools())
      : rng_(seed), ints_(std::move(int_vars)), bools_(std::move(bool_vars)) {}

  static std::vector<Term> default_ints() {
    return {Term::var("x", Sort::Int), Term::var("y", Sort::Int), Term::var("z", Sort::Int)};
  }
  static std::vector<Term> default_bools() { return {Term::var("p", Sort::Bool)}; }

  Term int_term(int depth) {
    if (depth <= 0 || coin(0.3)) {
      if (ints_.empty() || coin(0.4)) return Term::int_const(pick(-6, 6));
      return ints_[pick(0, static_cast<int>(ints_.size()) - 1)];
    }
    switch (pick(0, 5)) {
      case 0:
        return Term::apply(Op::Add, {int_term(depth - 1), int_term(depth - 1)});
      case 1:
        if (coin(0.2)) {
          Term arg = int_term(depth - 1);
          // (- <literal>) reads back as a negative literal; keep unary minus on non-literals.
          if (arg.kind() == Kind::IntConst) return arg;
          return Term::apply(Op::Sub, {arg});
        }
        return Term::apply(Op::Sub, {int_term(depth - 1), int_term(depth - 1)});
      case 2:
        return Term::apply(Op::Mul, {Term::int_const(pick(-3, 3)), int_term(depth - 1)});
      case 3:
        return Term::apply(Op::Add, {int_term(depth - 1), int_term(depth - 1), int_term(depth - 1)});
      default:
        return Term::apply(Op::Ite, {bool_term(depth - 1), int_term(depth - 1), int_term(depth - 1)});
    }
  }

  Term bool_term(int depth) {
    if (depth <= 0 || coin(0.2)) {
      if (bools_.empty() || coin(0.5)) return Term::bool_const(coin(0.5));
      return bools_[pick(0, static_cast<int>(bools_.size()) - 1)];
    }
    static constexpr Op kCmp[] = {Op::Ge, Op::Le, Op::Gt, Op::Lt, Op::Eq};
    switch (pick(0, 4)) {
      case 0:
        return Term::apply(kCmp[pick(0, 4)], {int_term(depth - 1), int_term(depth - 1)});
      case 1:
        return Term::apply(coin(0.5) ? Op::And : Op::Or, {bool_term(depth - 1), bool_term(depth - 1)});
      case 2:
        return Term::apply(Op::Not, {bool_term(depth - 1)});
      case 3:
        return Term::apply(Op::Implies, {bool_term(depth - 1), bool_term(depth - 1)});
      default:
        return Term::apply(Op::Eq, {bool_term(depth - 1), bool_term(depth - 1)});
    }
  }

  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::vector<Term> ints_;
  std::vector<Term> bools_;
};

}  // namespace treesynth::testing
