#include "treesynth/eval.hpp"

namespace treesynth {

namespace {

struct Overflow {};

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Overflow{};
  return r;
}
std::int64_t sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw Overflow{};
  return r;
}
std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
  return r;
}

Value eval(const Term& t, const Assignment& env) {
  switch (t.kind()) {
    case Kind::IntConst:
      return Value::of_int(t.int_value());
    case Kind::BoolConst:
      return Value::of_bool(t.bool_value());
    case Kind::Var: {
      auto it = env.find(t.name());
      if (it == env.end()) throw EvalError("unbound variable " + t.name());
      if (it->second.sort != t.sort()) throw EvalError("value of wrong sort for " + t.name());
      return it->second;
    }
    case Kind::NonTerminal:
      throw EvalError("cannot evaluate a partial program");
    case Kind::Apply:
      break;
  }
  const auto& args = t.args();
  auto i = [&](std::size_t k) { return eval(args[k], env).integer; };
  auto b = [&](std::size_t k) { return eval(args[k], env).boolean; };
  switch (t.op()) {
    case Op::Add: {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < args.size(); ++k) acc = add(acc, i(k));
      return Value::of_int(acc);
    }
    case Op::Sub: {
      if (args.size() == 1) return Value::of_int(sub(0, i(0)));
      std::int64_t acc = i(0);
      for (std::size_t k = 1; k < args.size(); ++k) acc = sub(acc, i(k));
      return Value::of_int(acc);
    }
    case Op::Mul: {
      std::int64_t acc = 1;
      for (std::size_t k = 0; k < args.size(); ++k) acc = mul(acc, i(k));
      return Value::of_int(acc);
    }
    case Op::Ite:
      return b(0) ? eval(args[1], env) : eval(args[2], env);
    case Op::Ge:
      return Value::of_bool(i(0) >= i(1));
    case Op::Le:
      return Value::of_bool(i(0) <= i(1));
    case Op::Gt:
      return Value::of_bool(i(0) > i(1));
    case Op::Lt:
      return Value::of_bool(i(0) < i(1));
    case Op::Eq:
      return Value::of_bool(eval(args[0], env) == eval(args[1], env));
    case Op::And:
      for (std::size_t k = 0; k < args.size(); ++k) {
        if (!b(k)) return Value::of_bool(false);
      }
      return Value::of_bool(true);
    case Op::Or:
      for (std::size_t k = 0; k < args.size(); ++k) {
        if (b(k)) return Value::of_bool(true);
      }
      return Value::of_bool(false);
    case Op::Not:
      return Value::of_bool(!b(0));
    case Op::Implies:
      return Value::of_bool(!b(0) || b(1));
    case Op::Call:
      break;
  }
  throw EvalError("cannot evaluate an application of " + t.name());
}

}  // namespace

std::optional<Value> evaluate(const Term& t, const Assignment& env) {
  try {
    return eval(t, env);
  } catch (const Overflow&) {
    return std::nullopt;
  }
}

std::string format_assignment(const Assignment& a) {
  std::string out = "{";
  bool first = true;
  for (const auto& [name, v] : a) {
    if (!first) out += ", ";
    first = false;
    out += name + "=" + (v.sort == Sort::Int ? std::to_string(v.integer) : (v.boolean ? "true" : "false"));
  }
  return out + "}";
}

}  // namespace treesynth
