#pragma once

// Operator algebra on jets of the abelian equation.
//
// A jet u_{k,l} stands for delta_1^k delta_2^l u (all delta_2 applied first).
// Operators are linear combinations of words over delta_1, delta_2 and
// multiplication by weighted expressions; applying one to a JetPolynomial
// normal-orders the result with the commutation relation
// delta_2 delta_1 = delta_1 delta_2 + s K on weight-s objects.
//
// kappa_reduce_4web / kappa_reduce_5web expand the compatibility obstruction
// kappa and reduce it modulo the abelian equation and its prolongations to the
// basis {v_{0,1}, v, u} (d = 4) or {w_{0,2}, w_{0,1}, v_{0,1}, w, u, v} (d = 5).

#include <array>
#include <map>
#include <string>
#include <vector>

#include "webrank/covariant.hpp"

namespace webrank {

struct Jet {
  char sym = 'u';
  int k = 0;  // delta_1 count
  int l = 0;  // delta_2 count
  int order() const { return k + l; }
  /// Unknowns have weight one; each delta adds one.
  int weight() const { return 1 + k + l; }
  std::string name() const;
  friend auto operator<=>(const Jet&, const Jet&) = default;
};

/// Finite linear combination of jets with expression coefficients, homogeneous
/// of total weight `weight` (coefficient weight = weight - jet weight).
class JetPolynomial {
 public:
  JetPolynomial() = default;
  explicit JetPolynomial(int weight) : weight_(weight) {}
  static JetPolynomial of(const Jet& j) {
    JetPolynomial p(j.weight());
    p.add(j, Expr(1));
    return p;
  }

  int weight() const { return weight_; }
  const std::map<Jet, Expr>& terms() const { return terms_; }
  Expr coeff(const Jet& j) const;
  bool empty() const { return terms_.empty(); }
  int max_order() const;

  /// Adds c * j; structurally zero results are pruned.
  void add(const Jet& j, const Expr& c);
  void add(const JetPolynomial& p, const Expr& scale = Expr(1));
  JetPolynomial scaled(const Expr& c, int c_weight) const;

  std::string str(std::size_t max_chars = 2000) const;

 private:
  int weight_ = 0;
  std::map<Jet, Expr> terms_;
};

JetPolynomial operator+(const JetPolynomial& a, const JetPolynomial& b);
JetPolynomial operator-(const JetPolynomial& a, const JetPolynomial& b);

struct OpAtom {
  enum class Kind { Delta1, Delta2, Multiply };
  Kind kind = Kind::Delta1;
  Expr factor{};  // Multiply only
  int factor_weight = 0;

  static OpAtom delta(int i) { return OpAtom{i == 1 ? Kind::Delta1 : Kind::Delta2, Expr(), 0}; }
  static OpAtom multiply(Expr c, int weight = 0) { return OpAtom{Kind::Multiply, std::move(c), weight}; }
};

/// Atoms applied right to left: {delta_2, multiply(a)} is delta_2 o a.
using OperatorWord = std::vector<OpAtom>;

struct LinearOperator {
  std::vector<std::pair<int, OperatorWord>> terms;  // integer coefficient, word

  static LinearOperator word(OperatorWord w) { return LinearOperator{{{1, std::move(w)}}}; }
  static LinearOperator delta(int i) { return word({OpAtom::delta(i)}); }
  /// Delta_a = delta_1 - delta_2 o a.
  static LinearOperator Delta(const Expr& a);
};

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);  // composition
LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);

/// Normal-ordering engine bound to one charted web.
class JetCalculus {
 public:
  explicit JetCalculus(ChartedWeb web);

  const ChartedWeb& web() const { return web_; }
  JetPolynomial delta(int i, const JetPolynomial& p);
  JetPolynomial apply_word(const OperatorWord& w, const JetPolynomial& p);
  JetPolynomial apply(const LinearOperator& op, const JetPolynomial& p);
  /// delta_2 of a single jet, normal ordered (memoized).
  const JetPolynomial& delta2_of(const Jet& j);

 private:
  Expr covariant(const Expr& c, int weight, int i);

  ChartedWeb web_;
  Expr K_;
  std::map<Jet, JetPolynomial> delta2_cache_;
};

/// The abelian system of a 4- or 5-web in jet form.
struct AbelianSystem {
  std::vector<char> unknowns;         // u, v (d = 4); w, u, v (d = 5)
  std::vector<Expr> invariants;       // a_i paired with the unknowns (first is 1)
  std::vector<JetPolynomial> first_order;  // the relations (each == 0)
  std::vector<Jet> basis;
  int depth = 0;                      // d - 2
};

AbelianSystem abelian_system(JetCalculus& calc);

struct ReductionOptions {
  /// Permutation applied to the relations before elimination.
  std::vector<int> relation_order;
  /// Index of the sample point used to choose pivots.
  int pivot_point = 0;
  /// Highest prolongation order to build; 0 means d - 2.
  int depth = 0;
};

/// Rules expressing every non-basis jet of order 1..depth in the basis.
class ReductionRules {
 public:
  ReductionRules(JetCalculus& calc, const AbelianSystem& sys, const ReductionOptions& opts = {});
  const std::map<Jet, JetPolynomial>& rules() const { return rules_; }
  /// Substitutes rules; jets above `depth` are left untouched.
  JetPolynomial reduce(const JetPolynomial& p) const;

 private:
  std::map<Jet, JetPolynomial> rules_;
};

/// Which operator multiplies u in the 4-web obstruction.
enum class KappaForm {
  /// Delta1 Delta2 delta1 - delta1 Delta2 Delta1 (each unknown's own operator
  /// applied last).
  Box,
  /// Delta1 Delta2 delta1 - delta1 Delta1 Delta2 (as printed for the u term).
  Printed,
};

struct KappaResult {
  std::vector<Jet> basis;
  std::vector<Expr> coefficients;  // raw, in basis order
  JetPolynomial kappa;             // expanded and normal ordered, unreduced
  int max_unreduced_order = 0;
};

/// The expanded obstruction before reduction.
JetPolynomial kappa_expanded(JetCalculus& calc, const AbelianSystem& sys, KappaForm form = KappaForm::Box);

/// Reduced kappa; throws ReductionIncompleteError if jets outside the basis
/// survive with non-vanishing coefficients.
KappaResult kappa_reduce(const ChartedWeb& web, KappaForm form = KappaForm::Box, const ReductionOptions& opts = {});

/// The operator expansion yields N times the normalized obstruction, with
/// N = 4a(1-a) for 4-webs and N = -10(1-a)(1-b) for 5-webs.
Expr kappa_normalization(const ChartedWeb& web);

/// (c0, c1, c2) of kappa = c0 v_{0,1} + c1 v + c2 u, normalized so that c0 is
/// the curvature function.
std::array<Expr, 3> kappa_reduce_4web(const WebSpec& web);
/// (c0..c5) of kappa = c0 w22 + c1 w2 + c2 v2 + c3 w + c4 u + c5 v,
/// normalized so that c0 is the curvature function.
std::array<Expr, 6> kappa_reduce_5web(const WebSpec& web);

}  // namespace webrank
