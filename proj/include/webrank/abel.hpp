#pragma once

// Abel's elimination method for an abelian relation F1(f1) + ... + Fd(fd) =
// const, and numerical verification of candidate relations.
//
// An AbelEquation is a linear combination of the derivatives F_i^(k)(f_i)
// with coefficients in x, y. A scalar equation reads sum c F_i^(k) = 0; a
// one-form equation reads sum F_i^(k) (p dx + q dy) = 0. Functions are
// indexed from 0 in the order of the web.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "webrank/web.hpp"

namespace webrank {

enum class FormDegree { Scalar, OneForm };

/// Coefficient of one F_i^(k): `dx` is the scalar coefficient of a scalar
/// equation, `dy` is used by one-forms only.
struct AbelCoefficient {
  Expr dx;
  Expr dy;
};

class AbelEquation {
 public:
  using Key = std::pair<int, int>;  // (function, derivative order)

  explicit AbelEquation(FormDegree degree = FormDegree::Scalar) : degree_(degree) {}

  /// F_1 + ... + F_d (all k = 0).
  static AbelEquation relation(int d);

  FormDegree degree() const { return degree_; }
  const std::map<Key, AbelCoefficient>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  bool contains(int function) const;
  /// Highest derivative of F_function present, or -1.
  int order(int function) const;
  /// Functions with at least one term, ascending.
  std::vector<int> functions() const;

  void add(int function, int k, const Expr& dx, const Expr& dy = Expr(0));
  /// Drops terms whose coefficients vanish identically on the sample points.
  void prune(const SampleConfig& cfg);

  /// "c*F2''(f2) + ... = 0"; one-form terms print as "F2''(f2)*(p*dx + q*dy)".
  std::string str(std::size_t max_chars = 400) const;

 private:
  FormDegree degree_;
  std::map<Key, AbelCoefficient> terms_;
};

struct AbelRule {
  enum class Kind {
    Differentiate,     // scalar -> one-form
    Wedge,             // df_function ^ (one-form), divided by dx ^ dy
    DivideByLeading,   // scalar / coefficient of the top derivative of F_function
    Substitute,        // replace the top derivative of F_function by its value from `from`
    Contract,          // one-form proportional to df_function -> its factor
  };
  Kind kind = Kind::Differentiate;
  /// For DivideByLeading and Substitute, -1 selects the lowest function index
  /// present.
  int function = -1;
  std::optional<AbelEquation> from;

  static AbelRule differentiate() { return {Kind::Differentiate, -1, std::nullopt}; }
  static AbelRule wedge(int j) { return {Kind::Wedge, j, std::nullopt}; }
  static AbelRule divide(int j = -1) { return {Kind::DivideByLeading, j, std::nullopt}; }
  static AbelRule substitute(AbelEquation from, int j = -1) { return {Kind::Substitute, j, std::move(from)}; }
  static AbelRule contract(int j) { return {Kind::Contract, j, std::nullopt}; }
  std::string name() const;
};

/// Applies one rule. Throws PreconditionError when the rule does not apply to
/// the equation's form degree (or, for Contract, when some term is not
/// proportional to df_j) and VanishingCoefficientError when a division would
/// be by an identically vanishing coefficient.
AbelEquation eliminate_step(const AbelEquation& eq, const AbelRule& rule, const WebSpec& web);

struct AbelStep {
  char label = 'a';
  AbelRule::Kind rule = AbelRule::Kind::Differentiate;
  int function = -1;
  AbelEquation equation;
};

struct AbelTraceOptions {
  /// Functions eliminated first to last; the last one is the terminal
  /// unknown. Empty means the web's order.
  std::vector<int> order;
  /// Cap on recorded steps before the trace stops with a diagnostic.
  int max_steps = 200;
};

struct AbelTrace {
  std::vector<AbelStep> steps;
  int terminal_function = -1;
  /// The lowest-order normalized equation in F_terminal to which every other
  /// equation of the terminal system reduces.
  std::optional<AbelEquation> terminal;
  /// Every equation in F_terminal alone that the trace produced.
  std::vector<AbelEquation> terminal_system;
  int terminal_order = -1;
  /// Every coefficient ratio of the terminal equation is a function of the
  /// terminal web function alone.
  bool separable = false;
  /// Set when the trace stopped early; the steps up to that point are kept.
  std::string diagnostic;

  /// "label: equation" per line.
  std::string str(std::size_t max_chars = 400) const;
};

/// Steps a)-g): differentiate the relation, wedge with df of the first
/// function, then eliminate the remaining functions but the last one by
/// repeated divide / differentiate / wedge. The terminal equation is split,
/// when its coefficient ratios depend on more than the terminal function, by
/// differentiating along the level curves of that function and reducing.
/// Labels: a the differential, b the first wedge, c the elimination of the
/// second function, d-f that of the third (d divide and differentiate, e a
/// wedge that leaves lower derivatives, f the wedge that removes the
/// function), g everything after, including the terminal splitting.
AbelTrace abel_trace(const WebSpec& web, const AbelTraceOptions& opts = {});

/// Evaluates the left-hand side of a scalar equation with F_i replaced by
/// closed forms in t. Returns the dx / dy components for one-forms.
AbelCoefficient abel_residual(const WebSpec& web, const AbelEquation& eq, const std::map<int, Expr>& solutions);

/// Back-substitution (step h): replaces the F_function terms by the closed
/// form F(t) and its derivatives. The result has a known part, reported in
/// the returned pair's second member, and the remaining unknown terms.
std::pair<AbelEquation, AbelCoefficient> substitute_solution(const WebSpec& web, const AbelEquation& eq,
                                                             int function, const Expr& F);

struct RelationCheck {
  bool holds = false;
  double mean = 0.0;
  double stddev = 0.0;
  ZeroCheck d_dx;
  ZeroCheck d_dy;
};

/// F holds one closed form in t per web function. The relation holds when
/// the sample standard deviation of sum F_i(f_i) is at most
/// tol * (1 + |mean|) and both partial derivatives of the sum vanish
/// identically.
RelationCheck check_relation(const WebSpec& web, const std::vector<Expr>& F);
bool verify_relation(const WebSpec& web, const std::vector<Expr>& F);

}  // namespace webrank
