#include "treesynth/term.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

namespace treesynth {

namespace detail {

struct Node {
  Kind kind;
  Sort sort;
  Op op = Op::Call;
  std::int64_t value = 0;
  std::string name;
  std::vector<Term> args;
  std::size_t size = 1;
  std::size_t nt_count = 0;
  std::size_t hash = 0;
};

}  // namespace detail

namespace {

constexpr std::array<std::string_view, 14> kOpSpelling = {
    "+", "-", "*", "ite", ">=", "<=", ">", "<", "=", "and", "or", "not", "=>", "call"};

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

void finish(detail::Node& n) {
  std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
  h = mix(h, static_cast<std::size_t>(n.sort));
  h = mix(h, static_cast<std::size_t>(n.op));
  h = mix(h, std::hash<std::int64_t>{}(n.value));
  if (!n.name.empty()) h = mix(h, std::hash<std::string>{}(n.name));
  n.size = 1;
  n.nt_count = n.kind == Kind::NonTerminal ? 1 : 0;
  for (const Term& a : n.args) {
    h = mix(h, a.hash());
    n.size += a.size();
    n.nt_count += a.nonterminal_count();
  }
  n.hash = h;
}

void require(bool cond, Op op, const char* what) {
  if (!cond) {
    throw SortError(std::string("ill-sorted application of '") +
                    std::string(op_spelling(op)) + "': " + what);
  }
}

bool all_sort(const std::vector<Term>& args, Sort s) {
  return std::all_of(args.begin(), args.end(), [s](const Term& a) { return a.sort() == s; });
}

Sort check_signature(Op op, const std::vector<Term>& args) {
  for (const Term& a : args) require(a.valid(), op, "null argument");
  switch (op) {
    case Op::Add:
    case Op::Mul:
      require(args.size() >= 2, op, "expects at least two arguments");
      require(all_sort(args, Sort::Int), op, "expects Int arguments");
      return Sort::Int;
    case Op::Sub:
      require(!args.empty(), op, "expects at least one argument");
      require(all_sort(args, Sort::Int), op, "expects Int arguments");
      return Sort::Int;
    case Op::Ite:
      require(args.size() == 3, op, "expects three arguments");
      require(args[0].sort() == Sort::Bool, op, "condition must be Bool");
      require(args[1].sort() == args[2].sort(), op, "branches must share a sort");
      return args[1].sort();
    case Op::Ge:
    case Op::Le:
    case Op::Gt:
    case Op::Lt:
      require(args.size() == 2, op, "expects two arguments");
      require(all_sort(args, Sort::Int), op, "expects Int arguments");
      return Sort::Bool;
    case Op::Eq:
      require(args.size() == 2, op, "expects two arguments");
      require(args[0].sort() == args[1].sort(), op, "arguments must share a sort");
      return Sort::Bool;
    case Op::And:
    case Op::Or:
      require(!args.empty(), op, "expects at least one argument");
      require(all_sort(args, Sort::Bool), op, "expects Bool arguments");
      return Sort::Bool;
    case Op::Not:
      require(args.size() == 1, op, "expects one argument");
      require(args[0].sort() == Sort::Bool, op, "expects a Bool argument");
      return Sort::Bool;
    case Op::Implies:
      require(args.size() == 2, op, "expects two arguments");
      require(all_sort(args, Sort::Bool), op, "expects Bool arguments");
      return Sort::Bool;
    case Op::Call:
      break;
  }
  throw SortError("function applications need an explicit result sort");
}

std::strong_ordering compare(const Term& a, const Term& b) {
  if (a.identity() == b.identity()) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.sort() <=> b.sort(); c != 0) return c;
  switch (a.kind()) {
    case Kind::Var:
    case Kind::NonTerminal:
      return a.name().compare(b.name()) <=> 0;
    case Kind::IntConst:
      return a.int_value() <=> b.int_value();
    case Kind::BoolConst:
      return a.bool_value() <=> b.bool_value();
    case Kind::Apply:
      break;
  }
  if (auto c = a.op() <=> b.op(); c != 0) return c;
  if (auto c = a.name().compare(b.name()) <=> 0; c != 0) return c;
  if (auto c = a.arity() <=> b.arity(); c != 0) return c;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (auto c = compare(a.args()[i], b.args()[i]); c != 0) return c;
  }
  return std::strong_ordering::equal;
}

const std::string kEmpty;
const std::vector<Term> kNoArgs;

}  // namespace

std::string_view sort_name(Sort s) { return s == Sort::Int ? "Int" : "Bool"; }

std::string_view op_spelling(Op op) { return kOpSpelling[static_cast<std::size_t>(op)]; }

std::optional<Op> op_from_spelling(std::string_view s) {
  for (std::size_t i = 0; i + 1 < kOpSpelling.size(); ++i) {
    if (kOpSpelling[i] == s) return static_cast<Op>(i);
  }
  return std::nullopt;
}

Term Term::var(std::string name, Sort sort) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::Var;
  n->sort = sort;
  n->name = std::move(name);
  finish(*n);
  return Term(std::move(n));
}

Term Term::int_const(std::int64_t value) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::IntConst;
  n->sort = Sort::Int;
  n->value = value;
  finish(*n);
  return Term(std::move(n));
}

Term Term::bool_const(bool value) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::BoolConst;
  n->sort = Sort::Bool;
  n->value = value ? 1 : 0;
  finish(*n);
  return Term(std::move(n));
}

Term Term::nonterminal(std::string symbol, Sort sort) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::NonTerminal;
  n->sort = sort;
  n->name = std::move(symbol);
  finish(*n);
  return Term(std::move(n));
}

Term Term::apply(Op op, std::vector<Term> args) {
  const Sort result = check_signature(op, args);
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::Apply;
  n->sort = result;
  n->op = op;
  n->args = std::move(args);
  finish(*n);
  return Term(std::move(n));
}

Term Term::call(std::string name, Sort result, std::vector<Term> args) {
  for (const Term& a : args) {
    if (!a.valid()) throw SortError("null argument in call to " + name);
  }
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::Apply;
  n->sort = result;
  n->op = Op::Call;
  n->name = std::move(name);
  n->args = std::move(args);
  finish(*n);
  return Term(std::move(n));
}

Kind Term::kind() const { return node_->kind; }
Sort Term::sort() const { return node_->sort; }
const std::string& Term::name() const { return node_ ? node_->name : kEmpty; }
std::int64_t Term::int_value() const { return node_->value; }
bool Term::bool_value() const { return node_->value != 0; }
Op Term::op() const { return node_->op; }
const std::vector<Term>& Term::args() const { return node_ ? node_->args : kNoArgs; }
std::size_t Term::size() const { return node_ ? node_->size : 0; }
std::size_t Term::nonterminal_count() const { return node_ ? node_->nt_count : 0; }
std::size_t Term::hash() const { return node_ ? node_->hash : 0; }

std::string Term::symbol() const {
  switch (kind()) {
    case Kind::Var:
    case Kind::NonTerminal:
      return name();
    case Kind::IntConst:
      return std::to_string(int_value());
    case Kind::BoolConst:
      return bool_value() ? "true" : "false";
    case Kind::Apply:
      return op() == Op::Call ? name() : std::string(op_spelling(op()));
  }
  return {};
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return compare(a, b) == 0;
}

bool operator<(const Term& a, const Term& b) {
  if (!a.node_ || !b.node_) return a.node_ == nullptr && b.node_ != nullptr;
  return compare(a, b) < 0;
}

namespace {

void collect(const Term& t, Path& path, std::vector<Occurrence>& out) {
  out.push_back({t, path});
  for (std::size_t i = 0; i < t.arity(); ++i) {
    path.push_back(i);
    collect(t.args()[i], path, out);
    path.pop_back();
  }
}

Term rebuild(const Term& t, std::vector<Term> args) {
  if (t.op() == Op::Call) return Term::call(t.name(), t.sort(), std::move(args));
  return Term::apply(t.op(), std::move(args));
}

Term replace_rec(const Term& t, const Path& path, std::size_t depth, const Term& repl) {
  if (depth == path.size()) return repl;
  if (path[depth] >= t.arity()) throw std::out_of_range("path does not address a node");
  std::vector<Term> args = t.args();
  args[path[depth]] = replace_rec(args[path[depth]], path, depth + 1, repl);
  return rebuild(t, std::move(args));
}

}  // namespace

std::vector<Occurrence> subterms(const Term& t) {
  std::vector<Occurrence> out;
  out.reserve(t.size());
  Path path;
  collect(t, path, out);
  return out;
}

Term subterm_at(const Term& t, const Path& path) {
  Term cur = t;
  for (std::size_t i : path) {
    if (i >= cur.arity()) throw std::out_of_range("path does not address a node");
    cur = cur.args()[i];
  }
  return cur;
}

Term replace_at(const Term& t, const Path& path, const Term& replacement) {
  if (subterm_at(t, path).sort() != replacement.sort()) {
    throw SortError("replacement changes the sort at the addressed position");
  }
  return replace_rec(t, path, 0, replacement);
}

void Substitution::bind(const Term& var, Term image) {
  if (var.kind() != Kind::Var) throw SortError("only variables can be bound");
  if (var.sort() != image.sort()) {
    throw SortError("sort mismatch binding " + var.name());
  }
  map_[var.name()] = std::move(image);
}

const Term* Substitution::find(const std::string& name) const {
  auto it = map_.find(name);
  return it == map_.end() ? nullptr : &it->second;
}

Substitution Substitution::normalized() const {
  // Iterate to a fixpoint; terminates for substitutions produced by an
  // occurs-checked unifier (acyclic bindings).
  Substitution out = *this;
  for (std::size_t round = 0; round <= map_.size(); ++round) {
    bool changed = false;
    for (auto& [name, image] : out.map_) {
      Term next = substitute(image, out);
      if (next != image) {
        image = std::move(next);
        changed = true;
      }
    }
    if (!changed) return out;
  }
  throw SortError("substitution has cyclic bindings");
}

Term substitute(const Term& t, const Substitution& s) {
  if (s.empty()) return t;
  if (t.kind() == Kind::Var) {
    const Term* image = s.find(t.name());
    if (image == nullptr) return t;
    if (image->sort() != t.sort()) throw SortError("sort mismatch substituting " + t.name());
    return *image;
  }
  if (t.kind() != Kind::Apply) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(substitute(a, s));
    changed = changed || args.back().identity() != a.identity();
  }
  return changed ? rebuild(t, std::move(args)) : t;
}

std::vector<Term> free_variables(const Term& t) {
  std::vector<Term> out;
  std::set<std::string> seen;
  for (const Occurrence& o : subterms(t)) {
    if (o.term.kind() == Kind::Var && seen.insert(o.term.name()).second) out.push_back(o.term);
  }
  return out;
}

bool occurs(const std::string& var, const Term& t) {
  if (t.kind() == Kind::Var) return t.name() == var;
  return std::any_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return occurs(var, a); });
}

Term inline_calls(const Term& t, const std::string& name, const std::vector<Term>& params,
                  const Term& body) {
  if (t.kind() != Kind::Apply) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(inline_calls(a, name, params, body));
  if (t.op() == Op::Call && t.name() == name) {
    if (args.size() != params.size()) {
      throw SortError("call to " + name + " has wrong arity");
    }
    Substitution s;
    for (std::size_t i = 0; i < params.size(); ++i) s.bind(params[i], args[i]);
    Term out = substitute(body, s);
    if (out.sort() != t.sort()) throw SortError("inlined body has the wrong sort");
    return out;
  }
  return rebuild(t, std::move(args));
}

namespace {

bool is_ground(const Term& t) {
  if (t.kind() == Kind::Var || t.kind() == Kind::NonTerminal) return false;
  if (t.kind() == Kind::Apply && t.op() == Op::Call) return false;
  return std::all_of(t.args().begin(), t.args().end(), [](const Term& a) { return is_ground(a); });
}

}  // namespace

bool is_linear(const Term& t) {
  if (t.kind() != Kind::Apply) return true;
  if (t.op() == Op::Mul) {
    auto non_constant = std::count_if(t.args().begin(), t.args().end(),
                                      [](const Term& a) { return !is_ground(a); });
    if (non_constant > 1) return false;
  }
  return std::all_of(t.args().begin(), t.args().end(), [](const Term& a) { return is_linear(a); });
}

Term conjunction(std::vector<Term> conjuncts) {
  if (conjuncts.empty()) return Term::bool_const(true);
  if (conjuncts.size() == 1) return conjuncts.front();
  return Term::apply(Op::And, std::move(conjuncts));
}

}  // namespace treesynth
