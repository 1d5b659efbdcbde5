#pragma once

// The projective structure of a planar 4-web, geodesic webs, the Liouville
// tensor and linearizability.
//
// Coordinates are the chart (X, Y) = (f1, f2) of the web; for webs listed as
// x, y, ... that is the plane itself. The coframe is omega1 = -f_X dX,
// omega2 = -f_Y dY, omega3 = df, omega4 = -(a omega1 + omega2).

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "webrank/web.hpp"

namespace webrank {

struct ProjectiveRep {
  /// (a1 - a a2) / (a (1 - a)) with frame derivatives a_i.
  Expr z;
  /// theta_i = A_i omega1 + B_i omega2, i = 1..4.
  std::array<std::pair<Expr, Expr>, 4> theta;
  /// Gamma^X_XX, Gamma^X_XY, Gamma^X_YY, Gamma^Y_XX, Gamma^Y_XY, Gamma^Y_YY.
  std::array<Expr, 6> christoffel;

  /// Gamma^i_jk with indices 0 = X, 1 = Y.
  const Expr& gamma(int i, int j, int k) const;
};

/// The representative with theta1 = (z/2) omega3. Throws PreconditionError
/// unless the web is a 4-web with a not identically 0 or 1.
ProjectiveRep projective_rep(const WebSpec& web);

/// z = (a1 - a a2) / (a (1 - a)) for an invariant `a` of the charted web.
Expr z_invariant(const ChartedWeb& web, const Expr& a);

/// Symmetric covariant differential of the one-form p dX + q dY under the
/// connection: S_jk = (d_j w_k + d_k w_j) / 2 - Gamma^i_jk w_i, listed as
/// (XX, XY, YY).
std::array<Expr, 3> symmetric_differential(const ChartedWeb& web, const ProjectiveRep& rep, const Expr& p,
                                           const Expr& q);

/// For d >= 5: z_b - z_a for every basic invariant b beyond the first.
/// Vanishes identically iff the web is geodesic.
std::vector<Expr> geodesic_defects(const WebSpec& web);
/// z b (1 - b) - (b1 - b b2) for the fifth and later foliations: the
/// coefficient of omega1^2 in d_s(omega_5) beyond theta5 . omega5.
std::vector<Expr> geodesic_defect_forms(const WebSpec& web);
bool geodesic_test(const WebSpec& web);

struct LiouvilleData {
  Expr w;      // f_Y / f_X
  Expr alpha;  // (a a_Y - w a_X) / (w a (1 - a))
  Expr k;      // (log w)_XY
  Expr L1;
  Expr L2;
};

/// Printed: the k terms enter 3L1 as -w (k w)_x and 3L2 as -w^2 (k/w)_y.
/// Reconciled: -(k w)_x / w and -w (k/w)_y, which makes L1, L2 agree with
/// the Ricci route (L(dX, dY, dX) = -L1, L(dX, dY, dY) = -L2) and vanish on
/// every linear web. When alpha = 0 the printed L1, L2 are w^2 L1, w L2 of
/// the reconciled ones.
enum class LiouvilleReading { Printed, Reconciled };

/// Explicit relative invariants of order three, in plain chart partials.
LiouvilleData liouville(const WebSpec& web, LiouvilleReading reading = LiouvilleReading::Reconciled);

/// L(dX, dY, dX) and L(dX, dY, dY) of the tensor
/// L(X, Y, Z) = (nabla_X P)(Y, Z) - (nabla_Y P)(X, Z),
/// P = (2/3) Ric + (1/3) Ric^T, from the Christoffels of `rep`.
std::array<Expr, 2> liouville_via_ricci(const WebSpec& web, const ProjectiveRep& rep);
std::array<Expr, 2> liouville_via_ricci(const WebSpec& web);

enum class Linearizability { Linearizable, NotLinearizable, Indeterminate };
std::string to_string(Linearizability v);

struct LinearizabilityReport {
  Linearizability verdict = Linearizability::Indeterminate;
  /// Always true for 4-webs.
  bool geodesic = true;
  bool liouville_vanishes = false;
  /// Largest residual among the L1, L2 tests.
  double liouville_residual = 0.0;
};

/// d = 4: L1 = L2 = 0. d >= 5: geodesic and the Liouville tensor of the
/// 4-subweb of the first four functions vanishes. Every identity is sampled
/// under the web's seed and a second seed; disagreement gives Indeterminate.
LinearizabilityReport linearizability_verdict(const WebSpec& web);

/// The first four functions of a web.
WebSpec first_four(const WebSpec& web);

}  // namespace webrank
