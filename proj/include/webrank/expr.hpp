#pragma once

// Immutable, hash-consed symbolic expressions in a handful of real variables.
//
// Every other module of the library is a client of this one: web functions,
// connection forms, curvature and every derived invariant are Expr values.
// Nodes are interned, so two structurally equal trees share one node and
// compare equal by pointer. There is no general simplifier: builders only
// fold rational constants, apply 0/1 identities and collapse neg/sub pairs.
// Identity testing is delegated to random sampling (see check_zero).

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "webrank/error.hpp"

namespace webrank {

/// Variables an expression may mention. x and y are the plane coordinates;
/// t is the argument of one-variable functions (abelian relations);
/// u1..u3 are the ambient coordinates of a web equation.
enum class Var : std::uint8_t { X = 0, Y, T, U1, U2, U3 };
inline constexpr int kVarCount = 6;

std::string_view var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);

/// Exact rational number with 64-bit numerator and denominator. Arithmetic
/// is overflow checked: the checked_* helpers return nullopt on overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_one() const noexcept { return num_ == 1 && den_ == 1; }
  bool is_integer() const noexcept { return den_ == 1; }
  bool is_negative() const noexcept { return num_ < 0; }
  long double to_long_double() const noexcept {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }
  double to_double() const noexcept { return static_cast<double>(to_long_double()); }
  std::string str() const;

  static std::optional<Rational> checked_add(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_sub(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_mul(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_div(const Rational& a, const Rational& b);
  static std::optional<Rational> checked_pow(const Rational& a, std::int64_t exponent);
  static std::optional<Rational> from_int128(__int128 num, __int128 den);

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

enum class Op : std::uint8_t {
  Rational,
  E,  // Euler's number
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Exp,
  Log,
  Sqrt,
  Sin,
  Cos,
};

namespace detail {
struct Node;
struct Access;
}  // namespace detail

class Expr {
 public:
  /// The constant 0.
  Expr();
  Expr(int value);  // NOLINT(google-explicit-constructor)
  Expr(std::int64_t value);  // NOLINT(google-explicit-constructor)

  static Expr rational(const Rational& q);
  static Expr rational(std::int64_t num, std::int64_t den) { return rational(Rational(num, den)); }
  static Expr variable(Var v);
  static Expr euler();

  Op op() const noexcept;
  /// Children; only meaningful for unary (lhs) and binary nodes.
  Expr lhs() const;
  Expr rhs() const;
  const Rational& value() const;
  Var var() const;

  bool is_rational() const noexcept { return op() == Op::Rational; }
  bool is_constant() const noexcept { return op() == Op::Rational || op() == Op::E; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;

  /// Structural hash (stable across runs, independent of addresses).
  std::uint64_t hash() const noexcept;
  /// Address of the interned node; equal iff structurally equal.
  const void* id() const noexcept { return node_.get(); }
  const detail::Node* node() const noexcept { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b) noexcept { return a.node_ == b.node_; }

 private:
  friend struct detail::Access;
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);

inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
inline Expr& operator/=(Expr& a, const Expr& b) { return a = a / b; }

namespace vars {
inline Expr x() { return Expr::variable(Var::X); }
inline Expr y() { return Expr::variable(Var::Y); }
inline Expr t() { return Expr::variable(Var::T); }
}  // namespace vars

/// Parse infix text. Grammar (see docs/expression-grammar.md):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | name | func '(' expr ')' | '(' expr ')'
Expr parse(std::string_view text);

/// Print in the parse grammar; parse(to_string(e)) == e.
std::string to_string(const Expr& e);
/// Like to_string but gives up (returns nullopt) past max_chars characters.
/// Printing expands shared subtrees, so derived invariants can be enormous.
std::optional<std::string> to_string_bounded(const Expr& e, std::size_t max_chars);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Exact symbolic partial derivative. Results are cached on the node while
/// alive, so repeated calls return the identical tree.
Expr differentiate(const Expr& e, Var v);
Expr substitute(const Expr& e, Var v, const Expr& replacement);
Expr substitute(const Expr& e, const std::vector<std::pair<Var, Expr>>& replacements);

/// Number of distinct nodes reachable from e.
std::size_t dag_size(const Expr& e);
bool depends_on(const Expr& e, Var v);

/// Per-expression node cap, default 2'000'000. Compiling a larger expression
/// for evaluation raises ResourceError.
std::size_t node_cap();
void set_node_cap(std::size_t cap);

using Env = std::array<double, kVarCount>;

struct Point {
  double x = 0.0;
  double y = 0.0;
  Env env() const {
    Env e{};
    e[static_cast<int>(Var::X)] = x;
    e[static_cast<int>(Var::Y)] = y;
    return e;
  }
};

/// Flattened evaluation tape for one expression. Evaluation runs in extended
/// precision and checks every node for domain violations.
class CompiledExpr {
 public:
  explicit CompiledExpr(const Expr& e);

  double operator()(const Env& env) const { return static_cast<double>(eval(env).value); }
  double operator()(const Point& p) const { return (*this)(p.env()); }

  struct Value {
    long double value;
    /// Median magnitude of the non-constant subterms at the point.
    long double scale;
  };
  Value eval(const Env& env, bool with_scale = false) const;

  std::size_t size() const noexcept { return code_.size(); }
  const Expr& expr() const noexcept { return root_; }

 private:
  struct Instr {
    Op op;
    std::uint32_t a;
    std::uint32_t b;
    long double constant;
    int var;
    const detail::Node* node;
  };
  Expr root_;
  std::vector<Instr> code_;
};

double evaluate(const Expr& e, const Point& p);
double evaluate(const Expr& e, const Env& env);

struct Box {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
  double area() const { return (xmax - xmin) * (ymax - ymin); }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Sampling parameters shared by every identity test.
struct SampleConfig {
  int samples = 24;
  double tol = 1e-9;
  std::uint64_t seed = 20240601;
  Box box{};
  /// Candidate points tried per requested sample before giving up.
  int retry_factor = 20;

  /// Throws ValidationError unless samples >= 8, tol > 0 and the box has
  /// positive area.
  void validate() const;
  SampleConfig with_seed(std::uint64_t s) const {
    SampleConfig c = *this;
    c.seed = s;
    return c;
  }
};

/// Deterministic stream of candidate points in the box.
class PointStream {
 public:
  explicit PointStream(const SampleConfig& cfg);
  Point next();

 private:
  Box box_;
  std::mt19937_64 rng_;
};

/// First `count` points of the box at which every given expression evaluates
/// without a domain error.
std::vector<Point> valid_points(const std::vector<Expr>& exprs, const SampleConfig& cfg,
                                int count);

struct ZeroCheck {
  bool zero = true;
  /// max over points of |e(p)| / (1 + scale(p)).
  double max_residual = 0.0;
  /// max over points of |e(p)|.
  double max_abs = 0.0;
  int points = 0;
};

/// Probabilistic identity test: e is declared identically zero when
/// |e(p)| <= tol * (1 + scale(p)) at every one of cfg.samples random points,
/// where scale(p) is the median magnitude of the non-constant subterms of e at
/// p. Points where evaluation fails are skipped and replaced; fewer than
/// cfg.samples valid points raise InsufficientDomainError.
ZeroCheck check_zero(const Expr& e, const SampleConfig& cfg);
bool is_identically_zero(const Expr& e, const SampleConfig& cfg);

}  // namespace webrank
