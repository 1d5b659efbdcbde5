#include "webrank/expr.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace webrank {

namespace detail {

using NodePtr = std::shared_ptr<const Node>;

struct Key {
  Op op;
  Var var;
  std::int64_t num;
  std::int64_t den;
  const Node* a;
  const Node* b;
  bool operator==(const Key&) const = default;
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 29);
}

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.op) * 131 + static_cast<std::uint64_t>(k.var);
    h = mix(h, static_cast<std::uint64_t>(k.num));
    h = mix(h, static_cast<std::uint64_t>(k.den));
    h = mix(h, reinterpret_cast<std::uintptr_t>(k.a));
    h = mix(h, reinterpret_cast<std::uintptr_t>(k.b));
    return static_cast<std::size_t>(h);
  }
};

struct Node : std::enable_shared_from_this<Node> {
  Op op;
  Var var;
  Rational value;
  NodePtr a;
  NodePtr b;
  std::uint64_t hash;
  bool constant;
  mutable std::array<std::weak_ptr<const Node>, kVarCount> derivative;

  Key key() const { return Key{op, var, value.num(), value.den(), a.get(), b.get()}; }
  ~Node();
};

struct Table {
  std::mutex mu;
  std::unordered_map<Key, std::weak_ptr<const Node>, KeyHash> nodes;
};

Table& table() {
  static Table* t = new Table;  // never destroyed: nodes may outlive static teardown
  return *t;
}

std::mutex& derivative_mutex() {
  static std::mutex mu;
  return mu;
}

Node::~Node() {
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.mu);
  auto it = t.nodes.find(key());
  if (it != t.nodes.end() && it->second.expired()) t.nodes.erase(it);
}

NodePtr intern(Op op, Var var, const Rational& value, NodePtr a, NodePtr b) {
  Key key{op, var, value.num(), value.den(), a.get(), b.get()};
  Table& t = table();
  std::lock_guard<std::mutex> lock(t.mu);
  auto it = t.nodes.find(key);
  if (it != t.nodes.end()) {
    if (NodePtr existing = it->second.lock()) return existing;
  }
  auto* n = new Node;
  n->op = op;
  n->var = var;
  n->value = value;
  std::uint64_t h = mix(static_cast<std::uint64_t>(op) + 1, static_cast<std::uint64_t>(var));
  h = mix(h, static_cast<std::uint64_t>(value.num()));
  h = mix(h, static_cast<std::uint64_t>(value.den()));
  if (a) h = mix(h, a->hash);
  if (b) h = mix(h, b->hash);
  n->hash = h;
  n->constant = op == Op::Rational || op == Op::E || ((!a || a->constant) && (!b || b->constant) && op != Op::Var);
  n->a = std::move(a);
  n->b = std::move(b);
  NodePtr p(n);
  t.nodes[key] = p;
  return p;
}

struct Access {
  static Expr wrap(NodePtr p) { return Expr(std::move(p)); }
  static const NodePtr& ptr(const Expr& e) { return e.node_; }
};

// Visits every distinct node reachable from root once, children first.
// pre(n) returning true marks n as already handled: its subtree is skipped.
template <class Pre, class Post>
void walk(const Node* root, Pre&& pre, Post&& post) {
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<const Node*, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    if (expanded) {
      stack.pop_back();
      post(n);
      continue;
    }
    if (!seen.insert(n).second || pre(n)) {
      stack.pop_back();
      continue;
    }
    stack.back().second = true;
    if (n->b) stack.push_back({n->b.get(), false});
    if (n->a) stack.push_back({n->a.get(), false});
  }
}

}  // namespace detail

using detail::Access;
using detail::Node;
using detail::NodePtr;

// ---------------------------------------------------------------- Rational

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMax64 = std::numeric_limits<std::int64_t>::max();

}  // namespace

std::optional<Rational> Rational::from_int128(__int128 num, __int128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax64 || num < -kMax64 || den > kMax64) return std::nullopt;
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error("rational with zero denominator");
  auto r = from_int128(num, den);
  if (!r) throw Error("rational constant out of 64-bit range");
  *this = *r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Rational> Rational::checked_add(const Rational& a, const Rational& b) {
  return from_int128(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_sub(const Rational& a, const Rational& b) {
  return from_int128(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_mul(const Rational& a, const Rational& b) {
  return from_int128(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::checked_div(const Rational& a, const Rational& b) {
  if (b.num_ == 0) return std::nullopt;
  return from_int128(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::optional<Rational> Rational::checked_pow(const Rational& a, std::int64_t exponent) {
  if (exponent < 0) {
    if (a.num_ == 0) return std::nullopt;
    auto inv = checked_div(Rational(1), a);
    if (!inv) return std::nullopt;
    return checked_pow(*inv, -exponent);
  }
  if (exponent > 128) return std::nullopt;
  Rational r(1);
  for (std::int64_t i = 0; i < exponent; ++i) {
    auto next = checked_mul(r, a);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

// ---------------------------------------------------------------- Var

std::string_view var_name(Var v) {
  switch (v) {
    case Var::X: return "x";
    case Var::Y: return "y";
    case Var::T: return "t";
    case Var::U1: return "u1";
    case Var::U2: return "u2";
    case Var::U3: return "u3";
  }
  return "?";
}

std::optional<Var> var_from_name(std::string_view name) {
  for (int i = 0; i < kVarCount; ++i) {
    auto v = static_cast<Var>(i);
    if (var_name(v) == name) return v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- Expr

namespace {

Expr leaf_rational(const Rational& q) { return Access::wrap(detail::intern(Op::Rational, Var::X, q, nullptr, nullptr)); }

Expr node1(Op op, const Expr& a) {
  return Access::wrap(detail::intern(op, Var::X, Rational(), Access::ptr(a), nullptr));
}

Expr node2(Op op, const Expr& a, const Expr& b) {
  return Access::wrap(detail::intern(op, Var::X, Rational(), Access::ptr(a), Access::ptr(b)));
}

bool is_rational_value(const Expr& e, std::int64_t v) {
  return e.op() == Op::Rational && e.value().den() == 1 && e.value().num() == v;
}

}  // namespace

Expr::Expr() : Expr(leaf_rational(Rational(0))) {}
Expr::Expr(int value) : Expr(leaf_rational(Rational(value))) {}
Expr::Expr(std::int64_t value) : Expr(leaf_rational(Rational(value))) {}

Expr Expr::rational(const Rational& q) { return leaf_rational(q); }

Expr Expr::variable(Var v) { return Access::wrap(detail::intern(Op::Var, v, Rational(), nullptr, nullptr)); }

Expr Expr::euler() { return Access::wrap(detail::intern(Op::E, Var::X, Rational(), nullptr, nullptr)); }

Op Expr::op() const noexcept { return node_->op; }
Expr Expr::lhs() const {
  if (!node_->a) throw PreconditionError("expression node has no children");
  return Expr(node_->a);
}
Expr Expr::rhs() const {
  if (!node_->b) throw PreconditionError("expression node has no second child");
  return Expr(node_->b);
}
const Rational& Expr::value() const { return node_->value; }
Var Expr::var() const { return node_->var; }
bool Expr::is_zero() const noexcept { return node_->op == Op::Rational && node_->value.is_zero(); }
bool Expr::is_one() const noexcept { return node_->op == Op::Rational && node_->value.is_one(); }
std::uint64_t Expr::hash() const noexcept { return node_->hash; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) {
    if (auto r = Rational::checked_add(a.value(), b.value())) return Expr::rational(*r);
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.op() == Op::Neg) return a - b.lhs();
  return node2(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) {
    if (auto r = Rational::checked_sub(a.value(), b.value())) return Expr::rational(*r);
  }
  if (b.is_zero()) return a;
  if (a == b) return Expr(0);
  if (a.is_zero()) return -b;
  if (b.op() == Op::Neg) return a + b.lhs();
  return node2(Op::Sub, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_rational()) {
    if (auto r = Rational::checked_sub(Rational(0), a.value())) return Expr::rational(*r);
  }
  if (a.op() == Op::Neg) return a.lhs();
  if (a.op() == Op::Sub) return a.rhs() - a.lhs();
  return node1(Op::Neg, a);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) {
    if (auto r = Rational::checked_mul(a.value(), b.value())) return Expr::rational(*r);
  }
  if (a.is_zero() || b.is_zero()) return Expr(0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (is_rational_value(a, -1)) return -b;
  if (is_rational_value(b, -1)) return -a;
  if (a.op() == Op::Neg) return -(a.lhs() * b);
  if (b.op() == Op::Neg) return -(a * b.lhs());
  return node2(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational() && !b.is_zero()) {
    if (auto r = Rational::checked_div(a.value(), b.value())) return Expr::rational(*r);
  }
  if (a.is_zero() && !b.is_zero()) return Expr(0);
  if (b.is_one()) return a;
  if (a == b && !b.is_zero()) return Expr(1);
  if (is_rational_value(b, -1)) return -a;
  if (a.op() == Op::Neg) return -(a.lhs() / b);
  if (b.op() == Op::Neg) return -(a / b.lhs());
  return node2(Op::Div, a, b);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return Expr(1);
  if (base.is_rational() && exponent.is_rational() && exponent.value().is_integer()) {
    if (auto r = Rational::checked_pow(base.value(), exponent.value().num())) return Expr::rational(*r);
  }
  return node2(Op::Pow, base, exponent);
}

Expr pow(const Expr& base, int exponent) { return pow(base, Expr(exponent)); }

Expr exp(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return node1(Op::Exp, a);
}

Expr log(const Expr& a) {
  if (a.is_one()) return Expr(0);
  return node1(Op::Log, a);
}

Expr sqrt(const Expr& a) {
  if (a.is_zero() || a.is_one()) return a;
  return node1(Op::Sqrt, a);
}

Expr sin(const Expr& a) {
  if (a.is_zero()) return Expr(0);
  return node1(Op::Sin, a);
}

Expr cos(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return node1(Op::Cos, a);
}

namespace {

Expr rebuild(Op op, const Expr& a, const Expr& b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return pow(a, b);
    case Op::Neg: return -a;
    case Op::Exp: return exp(a);
    case Op::Log: return log(a);
    case Op::Sqrt: return sqrt(a);
    case Op::Sin: return sin(a);
    case Op::Cos: return cos(a);
    default: break;
  }
  throw PreconditionError("rebuild of a leaf node");
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    default: return nullptr;
  }
}

}  // namespace

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse_all() {
    Expr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    __int128 mant = 0;
    std::int64_t scale = 0;
    bool digits = false;
    auto push_digit = [&](char d) {
      mant = mant * 10 + (d - '0');
      if (mant > kMax64) {
        pos_ = start;
        fail("numeric literal out of range");
      }
    };
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      push_digit(s_[pos_++]);
      digits = true;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        push_digit(s_[pos_++]);
        --scale;
        digits = true;
      }
    }
    if (!digits) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      int sign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        if (s_[pos_] == '-') sign = -1;
        ++pos_;
      }
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        std::int64_t ex = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          ex = ex * 10 + (s_[pos_++] - '0');
          if (ex > 40) {
            pos_ = start;
            fail("numeric literal out of range");
          }
        }
        scale += sign * ex;
      } else {
        pos_ = save;  // the constant e follows, e.g. "2e" is rejected later
      }
    }
    __int128 num = mant;
    __int128 den = 1;
    for (; scale > 0; --scale) num *= 10;
    for (; scale < 0; ++scale) den *= 10;
    auto q = Rational::from_int128(num, den);
    if (!q) {
      pos_ = start;
      fail("numeric literal out of range");
    }
    return Expr::rational(*q);
  }

  Expr name() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string_view id = s_.substr(start, pos_ - start);
    if (id == "e") return Expr::euler();
    if (auto v = var_from_name(id)) return Expr::variable(*v);
    static constexpr std::pair<std::string_view, Expr (*)(const Expr&)> kFunctions[] = {
        {"exp", &webrank::exp}, {"log", &webrank::log}, {"sqrt", &webrank::sqrt},
        {"sin", &webrank::sin}, {"cos", &webrank::cos}};
    for (const auto& [fname, fn] : kFunctions) {
      if (id == fname) {
        if (!accept('(')) fail("expected '(' after " + std::string(fname));
        Expr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return fn(arg);
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------- printer

namespace {

// Binding strength of the printed form; an operand printed where a stronger
// form is required gets parentheses.
int level(const Node* n) {
  switch (n->op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Rational:
      if (!n->value.is_integer()) return 2;
      return n->value.is_negative() ? 3 : 5;
    default: return 5;
  }
}

struct Budget {};

class Printer {
 public:
  explicit Printer(std::size_t max) : max_(max) {}

  void print(const Node* n, int min_level) {
    if (out_.size() > max_) throw Budget{};
    bool paren = level(n) < min_level;
    if (paren) out_ += '(';
    switch (n->op) {
      case Op::Rational: out_ += n->value.str(); break;
      case Op::E: out_ += 'e'; break;
      case Op::Var: out_ += var_name(n->var); break;
      case Op::Add: binary(n, " + ", 1, 2); break;
      case Op::Sub: binary(n, " - ", 1, 2); break;
      case Op::Mul: binary(n, "*", 2, 3); break;
      case Op::Div: binary(n, "/", 2, 3); break;
      case Op::Pow: binary(n, "^", 5, 3); break;
      case Op::Neg:
        out_ += '-';
        print(n->a.get(), 4);
        break;
      default:
        out_ += function_name(n->op);
        out_ += '(';
        print(n->a.get(), 0);
        out_ += ')';
        break;
    }
    if (paren) out_ += ')';
  }

  std::string take() { return std::move(out_); }

 private:
  void binary(const Node* n, const char* sym, int left, int right) {
    print(n->a.get(), left);
    out_ += sym;
    print(n->b.get(), right);
  }

  std::size_t max_;
  std::string out_;
};

constexpr std::size_t kUnboundedPrint = std::size_t{1} << 28;

}  // namespace

std::optional<std::string> to_string_bounded(const Expr& e, std::size_t max_chars) {
  Printer p(max_chars);
  try {
    p.print(e.node(), 0);
  } catch (const Budget&) {
    return std::nullopt;
  }
  std::string s = p.take();
  if (s.size() > max_chars) return std::nullopt;
  return s;
}

std::string to_string(const Expr& e) {
  auto s = to_string_bounded(e, kUnboundedPrint);
  if (!s) throw ResourceError("expression too large to print");
  return *s;
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

// ---------------------------------------------------------------- calculus

namespace {

Expr derivative_of(const Node* n, Var v, const std::unordered_map<const Node*, Expr>& d) {
  auto child = [](const NodePtr& p) { return Access::wrap(p); };
  auto da = [&] { return d.at(n->a.get()); };
  auto db = [&] { return d.at(n->b.get()); };
  switch (n->op) {
    case Op::Rational:
    case Op::E: return Expr(0);
    case Op::Var: return Expr(n->var == v ? 1 : 0);
    case Op::Add: return da() + db();
    case Op::Sub: return da() - db();
    case Op::Mul: return da() * child(n->b) + child(n->a) * db();
    case Op::Div: {
      Expr a = child(n->a), b = child(n->b), dA = da(), dB = db();
      if (dB.is_zero()) return dA / b;
      return (dA * b - a * dB) / pow(b, 2);
    }
    case Op::Pow: {
      Expr a = child(n->a), b = child(n->b), dA = da(), dB = db();
      if (dB.is_zero()) {
        if (dA.is_zero()) return Expr(0);
        return b * pow(a, b - Expr(1)) * dA;
      }
      return pow(a, b) * (dB * log(a) + b * dA / a);
    }
    case Op::Neg: return -da();
    case Op::Exp: return Access::wrap(n->shared_from_this()) * da();
    case Op::Log: return da() / child(n->a);
    case Op::Sqrt: return da() / (Expr(2) * Access::wrap(n->shared_from_this()));
    case Op::Sin: return cos(child(n->a)) * da();
    case Op::Cos: return -(sin(child(n->a)) * da());
  }
  return Expr(0);
}

}  // namespace

Expr differentiate(const Expr& e, Var v) {
  const int slot = static_cast<int>(v);
  std::unordered_map<const Node*, Expr> d;
  std::mutex& mu = detail::derivative_mutex();
  detail::walk(
      e.node(),
      [&](const Node* n) {
        if (n->constant) {
          d.emplace(n, Expr(0));
          return true;
        }
        std::lock_guard<std::mutex> lock(mu);
        if (auto cached = n->derivative[slot].lock()) {
          d.emplace(n, Access::wrap(std::move(cached)));
          return true;
        }
        return false;
      },
      [&](const Node* n) {
        Expr r = derivative_of(n, v, d);
        {
          std::lock_guard<std::mutex> lock(mu);
          n->derivative[slot] = Access::ptr(r);
        }
        d.emplace(n, std::move(r));
      });
  return d.at(e.node());
}

Expr substitute(const Expr& e, const std::vector<std::pair<Var, Expr>>& replacements) {
  std::unordered_map<const Node*, Expr> out;
  detail::walk(
      e.node(),
      [&](const Node* n) {
        if (n->constant) {
          out.emplace(n, Access::wrap(n->shared_from_this()));
          return true;
        }
        return false;
      },
      [&](const Node* n) {
        if (n->op == Op::Var) {
          Expr r = Access::wrap(n->shared_from_this());
          for (const auto& [v, rep] : replacements) {
            if (v == n->var) r = rep;
          }
          out.emplace(n, r);
          return;
        }
        Expr a = out.at(n->a.get());
        Expr b = n->b ? out.at(n->b.get()) : Expr();
        if (a.node() == n->a.get() && (!n->b || b.node() == n->b.get())) {
          out.emplace(n, Access::wrap(n->shared_from_this()));
        } else {
          out.emplace(n, rebuild(n->op, a, b));
        }
      });
  return out.at(e.node());
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) { return substitute(e, {{v, replacement}}); }

std::size_t dag_size(const Expr& e) {
  std::size_t count = 0;
  detail::walk(e.node(), [](const Node*) { return false; }, [&](const Node*) { ++count; });
  return count;
}

bool depends_on(const Expr& e, Var v) {
  bool found = false;
  detail::walk(
      e.node(), [&](const Node* n) { return found || n->constant; },
      [&](const Node* n) {
        if (n->op == Op::Var && n->var == v) found = true;
      });
  return found;
}

// ---------------------------------------------------------------- evaluation

namespace {
std::atomic<std::size_t> g_node_cap{2'000'000};
}

std::size_t node_cap() { return g_node_cap.load(); }
void set_node_cap(std::size_t cap) { g_node_cap.store(cap); }

CompiledExpr::CompiledExpr(const Expr& e) : root_(e) {
  const std::size_t cap = node_cap();
  std::unordered_map<const Node*, std::uint32_t> index;
  detail::walk(
      e.node(), [](const Node*) { return false; },
      [&](const Node* n) {
        if (code_.size() >= cap) {
          throw ResourceError("expression exceeds the node cap of " + std::to_string(cap) + " nodes");
        }
        Instr in{n->op, 0, 0, 0.0L, static_cast<int>(n->var), n};
        if (n->op == Op::Rational) in.constant = n->value.to_long_double();
        if (n->op == Op::E) in.constant = std::exp(1.0L);
        if (n->a) in.a = index.at(n->a.get());
        if (n->b) in.b = index.at(n->b.get());
        index.emplace(n, static_cast<std::uint32_t>(code_.size()));
        code_.push_back(in);
      });
}

namespace {

[[noreturn]] void domain_fail(const char* what, const Node* n) {
  Expr sub = Access::wrap(n->shared_from_this());
  auto text = to_string_bounded(sub, 240);
  throw DomainError(what, text ? *text : "<subexpression of " + std::to_string(dag_size(sub)) + " nodes>");
}

}  // namespace

CompiledExpr::Value CompiledExpr::eval(const Env& env, bool with_scale) const {
  std::vector<long double> v(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    long double r = 0;
    switch (in.op) {
      case Op::Rational:
      case Op::E: r = in.constant; break;
      case Op::Var: r = env[in.var]; break;
      case Op::Add: r = v[in.a] + v[in.b]; break;
      case Op::Sub: r = v[in.a] - v[in.b]; break;
      case Op::Mul: r = v[in.a] * v[in.b]; break;
      case Op::Div:
        if (v[in.b] == 0) domain_fail("division by zero", in.node);
        r = v[in.a] / v[in.b];
        break;
      case Op::Pow: {
        long double base = v[in.a], ex = v[in.b];
        if (base == 0 && ex < 0) domain_fail("division by zero", in.node);
        if (base < 0 && ex != std::floor(ex)) domain_fail("non-integer power of a negative value", in.node);
        const Node* en = in.node->b.get();
        if (en->op == Op::Rational && en->value.is_integer() && std::llabs(en->value.num()) <= 64) {
          long double acc = 1;
          long double b = base;
          std::int64_t k = std::llabs(en->value.num());
          for (; k > 0; k >>= 1) {
            if (k & 1) acc *= b;
            b *= b;
          }
          r = en->value.num() < 0 ? 1 / acc : acc;
        } else {
          r = std::pow(base, ex);
        }
        break;
      }
      case Op::Neg: r = -v[in.a]; break;
      case Op::Exp: r = std::exp(v[in.a]); break;
      case Op::Log:
        if (!(v[in.a] > 0)) domain_fail("log of a non-positive value", in.node);
        r = std::log(v[in.a]);
        break;
      case Op::Sqrt:
        if (v[in.a] < 0) domain_fail("sqrt of a negative value", in.node);
        r = std::sqrt(v[in.a]);
        break;
      case Op::Sin: r = std::sin(v[in.a]); break;
      case Op::Cos: r = std::cos(v[in.a]); break;
    }
    if (!std::isfinite(r)) domain_fail("non-finite value", in.node);
    v[i] = r;
  }
  Value out{v.back(), 0};
  if (with_scale) {
    std::vector<long double> mags;
    mags.reserve(v.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
      if (!code_[i].node->constant) mags.push_back(std::fabs(v[i]));
    }
    if (!mags.empty()) {
      auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
      std::nth_element(mags.begin(), mid, mags.end());
      out.scale = *mid;
    }
  }
  return out;
}

double evaluate(const Expr& e, const Env& env) { return CompiledExpr(e)(env); }
double evaluate(const Expr& e, const Point& p) { return CompiledExpr(e)(p); }

// ---------------------------------------------------------------- sampling

void SampleConfig::validate() const {
  if (samples < 8) throw ValidationError("sample count must be at least 8");
  if (!(tol > 0)) throw ValidationError("zero-test tolerance must be positive");
  if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw ValidationError("sample box must have positive area");
  if (retry_factor < 1) throw ValidationError("retry factor must be positive");
}

PointStream::PointStream(const SampleConfig& cfg) : box_(cfg.box), rng_(cfg.seed) {}

Point PointStream::next() {
  auto unit = [this] { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; };
  double u = unit();
  double w = unit();
  return Point{box_.xmin + u * (box_.xmax - box_.xmin), box_.ymin + w * (box_.ymax - box_.ymin)};
}

std::vector<Point> valid_points(const std::vector<Expr>& exprs, const SampleConfig& cfg, int count) {
  cfg.validate();
  std::vector<CompiledExpr> compiled;
  compiled.reserve(exprs.size());
  for (const auto& e : exprs) compiled.emplace_back(e);
  PointStream stream(cfg);
  std::vector<Point> pts;
  const long long budget = static_cast<long long>(count) * cfg.retry_factor;
  for (long long tries = 0; tries < budget && static_cast<int>(pts.size()) < count; ++tries) {
    Point p = stream.next();
    bool ok = true;
    for (const auto& c : compiled) {
      try {
        c.eval(p.env());
      } catch (const DomainError&) {
        ok = false;
        break;
      }
    }
    if (ok) pts.push_back(p);
  }
  if (static_cast<int>(pts.size()) < count) {
    throw InsufficientDomainError("found only " + std::to_string(pts.size()) + " of " + std::to_string(count) +
                                  " valid sample points in the box");
  }
  return pts;
}

ZeroCheck check_zero(const Expr& e, const SampleConfig& cfg) {
  cfg.validate();
  ZeroCheck r;
  if (e.is_constant()) {
    double v = e.is_zero() ? 0.0 : std::fabs(CompiledExpr(e)(Env{}));
    r.zero = v <= cfg.tol;
    r.max_residual = r.max_abs = v;
    r.points = cfg.samples;
    return r;
  }
  CompiledExpr c(e);
  PointStream stream(cfg);
  const long long budget = static_cast<long long>(cfg.samples) * cfg.retry_factor;
  for (long long tries = 0; tries < budget && r.points < cfg.samples; ++tries) {
    Point p = stream.next();
    CompiledExpr::Value val;
    try {
      val = c.eval(p.env(), true);
    } catch (const DomainError&) {
      continue;
    }
    ++r.points;
    long double a = std::fabs(val.value);
    long double residual = a / (1 + val.scale);
    r.max_abs = std::max(r.max_abs, static_cast<double>(a));
    r.max_residual = std::max(r.max_residual, static_cast<double>(residual));
  }
  if (r.points < cfg.samples) {
    throw InsufficientDomainError("found only " + std::to_string(r.points) + " of " + std::to_string(cfg.samples) +
                                  " valid sample points in the box");
  }
  r.zero = r.max_residual <= cfg.tol;
  return r;
}

bool is_identically_zero(const Expr& e, const SampleConfig& cfg) { return check_zero(e, cfg).zero; }

}  // namespace webrank
