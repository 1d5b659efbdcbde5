#pragma once

// Planar d-webs given by web functions f1..fd in the plane (x, y).
//
// A ChartedWeb fixes an ordering of the functions: the first two serve as
// chart coordinates (X, Y) = (f_i, f_j), the third is the closed function f
// with omega_3 = df, and the rest are the extra functions g used by the basic
// invariants. All derived quantities are expressions in the original x, y,
// with chart derivatives pulled back by the chain rule.

#include <array>
#include <string>
#include <vector>

#include "webrank/expr.hpp"

namespace webrank {

struct PairCertificate {
  int i = 0;  // 1-based
  int j = 0;
  /// Smallest |J(f_i, f_j)| seen at the sample points.
  double min_abs_jacobian = 0.0;
};

struct WebSpec {
  std::string name;
  std::vector<Expr> functions;
  SampleConfig cfg;
  std::vector<PairCertificate> certificates;

  int degree() const { return static_cast<int>(functions.size()); }
  const Box& box() const { return cfg.box; }
};

/// Validates general position (every pairwise Jacobian sampled nonzero) and
/// evaluability of the functions on the box. The box in cfg is replaced by
/// `box`.
WebSpec make_web(std::vector<Expr> functions, const Box& box, SampleConfig cfg, std::string name = {});

/// The same web with its functions listed in a different order
/// (`order` holds 0-based indices into web.functions).
WebSpec reorder(const WebSpec& web, const std::vector<int>& order);

/// Jacobian determinant d(a, b)/d(x, y).
Expr jacobian(const Expr& a, const Expr& b);

/// (f_X, f_Y) partial derivatives in the chart (X, Y) = (chart_x, chart_y),
/// expressed in x, y.
class Chart {
 public:
  Chart(Expr chart_x, Expr chart_y);
  Expr dX(const Expr& h) const;
  Expr dY(const Expr& h) const;
  Expr d(int axis, const Expr& h) const { return axis == 0 ? dX(h) : dY(h); }
  const Expr& det() const { return det_; }
  bool is_identity() const { return identity_; }

 private:
  Expr X_, Y_;
  Expr Xx_, Xy_, Yx_, Yy_;
  Expr det_;
  bool identity_;
};

class ChartedWeb {
 public:
  /// order: 0-based indices of the functions to use; at least three. The
  /// default takes the web's own ordering.
  explicit ChartedWeb(const WebSpec& web);
  ChartedWeb(const WebSpec& web, std::vector<int> order);

  const WebSpec& web() const { return web_; }
  const std::vector<int>& order() const { return order_; }
  int degree() const { return static_cast<int>(order_.size()); }
  const Chart& chart() const { return chart_; }
  const SampleConfig& cfg() const { return web_.cfg; }

  /// The closed function f (= third function of the ordering).
  const Expr& f() const { return f_; }
  const Expr& fX() const { return fX_; }
  const Expr& fY() const { return fY_; }
  /// Extra functions g_1..g_{d-3}.
  const std::vector<Expr>& g() const { return g_; }

  /// Dual frame: d1 = -f_X^{-1} d/dX, d2 = -f_Y^{-1} d/dY.
  Expr partial(int i, const Expr& h) const;
  /// Connection coefficient; gamma = H (omega_1 + omega_2), so g1 = g2 = H.
  const Expr& H() const { return H_; }
  /// Curvature from the explicit chart formula -(log(f_X/f_Y))_{XY}/(f_X f_Y).
  Expr K() const;
  /// Curvature from the frame: d1(g2) - d2(g1).
  Expr K_structure() const;
  /// a_1 = 1, a_i = f_Y g_{i-1,X} / (f_X g_{i-1,Y}) for i = 2..d-2.
  std::vector<Expr> basic_invariants() const;
  /// omega_1 ^ omega_2 = area_density() dx ^ dy.
  Expr area_density() const;

 private:
  WebSpec web_;
  std::vector<int> order_;
  Chart chart_;
  Expr f_, fX_, fY_, H_;
  std::vector<Expr> g_;
};

Expr curvature_K(const ChartedWeb& web);

struct WebEquation {
  Expr W;  // in u1, u2, u3
  std::array<Expr, 3> params;  // u_r(x, y)
};

/// Validates W(u1(x,y), u2(x,y), u3(x,y)) == 0 on the box.
void validate(const WebEquation& weq, const SampleConfig& cfg);
/// Curvature from the web equation: A12 + A23 + A31,
/// A_rs = (1 / (W_r W_s)) d^2/du_r du_s log(W_r / W_s).
Expr curvature_from_web_equation(const WebEquation& weq, const SampleConfig& cfg);

/// Curvature of the 3-subweb (f_i, f_j, f_k), 1-based indices, charted with
/// (f_i, f_j) as coordinates and f = f_k.
Expr subweb_curvature(const WebSpec& web, std::array<int, 3> indices);
/// Curvature form of the 3-subweb divided by omega_1 ^ omega_2 of the web's
/// own normalization: the subweb curvature in the gauge of the whole web.
Expr subweb_curvature_normalized(const WebSpec& web, std::array<int, 3> indices);
/// Mean of the normalized curvatures of all 3-subwebs (d = 4 or 5).
Expr curvature_function(const WebSpec& web);

std::vector<Expr> basic_invariants(const WebSpec& web);
bool is_parallelizable(const WebSpec& web);
int max_rank_bound(int d);

/// All k-element subsets of {1..n}, lexicographic.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace webrank
