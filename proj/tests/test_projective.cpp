#include "webrank/projective.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "webrank/error.hpp"

using namespace webrank;
using namespace webrank::testing;

namespace {

const std::vector<std::string> kFourWebs{"W4-PAR", "W4-R3", "W4-R2", "W4-R1", "W4-R0", "W4-R2NL", "W4-R1NL"};

Expr dx(const Expr& e) { return differentiate(e, Var::X); }
Expr dy(const Expr& e) { return differentiate(e, Var::Y); }

// z coded through plain partials of a = f_y g_x / (f_x g_y), independent of
// the frame.
Expr z_plain(const Expr& f, const Expr& g) {
  const Expr a = dy(f) * dx(g) / (dx(f) * dy(g));
  const Expr w = dy(f) / dx(f);
  const Expr alpha = (a * dy(a) - w * dx(a)) / (w * a * (Expr(1) - a));
  return alpha / dx(f);
}

// Christoffels of the representative for a web [x, y, f, g], solved by hand
// from the two defining symmetric differentials (the system is diagonal).
std::array<Expr, 6> christoffel_oracle(const Expr& f, const Expr& g) {
  const Expr z = z_plain(f, g);
  const Expr fx = dx(f), fy = dy(f);
  const Expr two(2), four(4);
  return {dx(fx) / fx - z * fx / two, dy(fx) / (two * fx) - z * fy / four, Expr(0),
          Expr(0),                    z * fx / four + dy(fx) / (two * fy), z * fy / two + dy(fy) / fy};
}

// omega_i = (p, q) in chart coordinates.
std::array<std::pair<Expr, Expr>, 4> coframe(const ChartedWeb& cw) {
  const Expr a = cw.basic_invariants().at(1);
  const Expr fX = cw.fX(), fY = cw.fY();
  return {{{-fX, Expr(0)}, {Expr(0), -fY}, {fX, fY}, {a * fX, fY}}};
}

Expr quadratic(const std::array<Expr, 3>& S, const Expr& vx, const Expr& vy) {
  return S[0] * vx * vx + Expr(2) * S[1] * vx * vy + S[2] * vy * vy;
}

bool both_zero(const std::array<Expr, 2>& c, const SampleConfig& cfg) { return zero(c[0], cfg) && zero(c[1], cfg); }

}  // namespace

TEST(ProjectiveRep, ParallelWebIsFlat) {
  WebSpec w = fixture("W4-PAR");
  ProjectiveRep rep = projective_rep(w);
  EXPECT_TRUE(zero(rep.z, w.cfg));
  for (const Expr& g : rep.christoffel) EXPECT_TRUE(zero(g, w.cfg));
}

TEST(ProjectiveRep, ChristoffelsMatchHandSolution) {
  RandomExpr r(41);
  std::vector<WebSpec> webs;
  for (const char* n : {"W4-R3", "W4-R2", "W4-R1", "W4-R0", "W4-R2NL", "W4-R1NL"}) webs.push_back(fixture(n));
  for (int i = 0; i < 3; ++i) webs.push_back(random_web(r, 4));
  for (const WebSpec& w : webs) {
    ProjectiveRep rep = projective_rep(w);
    auto oracle = christoffel_oracle(w.functions[2], w.functions[3]);
    for (int i = 0; i < 6; ++i) EXPECT_TRUE(zero(rep.christoffel[i] - oracle[i], w.cfg)) << w.name << " " << i;
  }
}

TEST(ProjectiveRep, GoldenChristoffelsAtPoint) {
  WebSpec w = fixture("W4-R2NL");
  ProjectiveRep rep = projective_rep(w);
  // (2, 4): XXX, XXY, XYY, YXX, YXY, YYY.
  const std::array<double, 6> golden{0.075, -0.14375, 0.0, 0.0, 0.2125, -0.4625};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(at(rep.christoffel[i], 2, 4), golden[i], 1e-12) << i;
}

TEST(ProjectiveRep, TwoCodingsOfZAgree) {
  for (const std::string& n : kFourWebs) {
    if (n == "W4-PAR") continue;
    WebSpec w = fixture(n);
    ProjectiveRep rep = projective_rep(w);
    EXPECT_TRUE(zero(rep.z - z_plain(w.functions[2], w.functions[3]), w.cfg)) << n;
  }
  WebSpec r3 = fixture("W4-R3");
  EXPECT_NEAR(at(projective_rep(r3).z, 2, 4), at(z_plain(r3.functions[2], r3.functions[3]), 2, 4), 1e-12);
}

TEST(ProjectiveRep, SymmetricDifferentialsOfTheCoframe) {
  RandomExpr r(43);
  std::vector<WebSpec> webs{fixture("W4-R1"), fixture("W4-R2NL"), fixture("W4-R1NL")};
  for (int i = 0; i < 2; ++i) webs.push_back(random_web(r, 4));
  for (const WebSpec& w : webs) {
    ChartedWeb cw(w);
    ProjectiveRep rep = projective_rep(w);
    auto omega = coframe(cw);
    const Expr fX = cw.fX(), fY = cw.fY();
    for (int i = 0; i < 4; ++i) {
      const auto& [p, q] = omega[static_cast<std::size_t>(i)];
      const auto& [A, B] = rep.theta[static_cast<std::size_t>(i)];
      const Expr tX = -(A * fX), tY = -(B * fY);
      auto S = symmetric_differential(cw, rep, p, q);
      const Expr half(Expr::rational(1, 2));
      EXPECT_TRUE(zero(S[0] - tX * p, w.cfg)) << w.name << " omega" << i + 1;
      EXPECT_TRUE(zero(S[1] - half * (tX * q + tY * p), w.cfg)) << w.name << " omega" << i + 1;
      EXPECT_TRUE(zero(S[2] - tY * q, w.cfg)) << w.name << " omega" << i + 1;
    }
  }
}

TEST(ProjectiveRep, LeavesAreGeodesic) {
  RandomExpr r(47);
  std::vector<WebSpec> webs{fixture("W4-R0"), fixture("W4-R2NL")};
  webs.push_back(random_web(r, 4));
  for (const WebSpec& w : webs) {
    ChartedWeb cw(w);
    ProjectiveRep rep = projective_rep(w);
    for (const Expr& f : w.functions) {
      const Expr p = cw.chart().dX(f), q = cw.chart().dY(f);
      EXPECT_TRUE(zero(quadratic(symmetric_differential(cw, rep, p, q), q, -p), w.cfg)) << w.name;
    }
  }
}

TEST(ProjectiveRep, Errors) {
  EXPECT_THROW(projective_rep(fixture("W5-BOL")), PreconditionError);
  EXPECT_THROW(projective_rep(fixture("W3-PAR")), PreconditionError);
  EXPECT_THROW(liouville(fixture("W5-BOL")), PreconditionError);
}

TEST(Geodesic, Examples) {
  const Box box{1, 2, 1, 2};
  EXPECT_TRUE(geodesic_test(web_of({"x", "y", "x+y", "x+2*y", "x+3*y"}, box)));
  WebSpec bent = web_of({"x", "y", "x+y", "x+2*y", "x+y^2"}, box);
  EXPECT_FALSE(geodesic_test(bent));
  auto defects = geodesic_defects(bent);
  ASSERT_EQ(defects.size(), 1u);
  EXPECT_TRUE(zero(defects[0] + Expr(1) / (vars::y() * (Expr(2) * vars::y() - Expr(1))), bent.cfg));
  EXPECT_THROW(geodesic_test(fixture("W4-R3")), PreconditionError);
}

TEST(Geodesic, BolWebVerdictIsReproducible) {
  for (std::uint64_t seed : {7u, 11u, 99u}) EXPECT_FALSE(geodesic_test(fixture("W5-BOL", seed)));
}

TEST(Geodesic, FifthFoliationDefect) {
  RandomExpr r(53);
  std::vector<WebSpec> webs{fixture("W5-BOL"), web_of({"x", "y", "x+y", "x+2*y", "x+y^2"}, {1, 2, 1, 2})};
  webs.push_back(random_web(r, 5));
  for (const WebSpec& w : webs) {
    ChartedWeb cw(w);
    ProjectiveRep rep = projective_rep(first_four(w));
    const Expr b = cw.basic_invariants().at(2);
    const Expr fX = cw.fX(), fY = cw.fY();
    const Expr vX = fY, vY = -(b * fX);
    const Expr S = quadratic(symmetric_differential(cw, rep, b * fX, fY), vX, vY);
    const Expr w1 = -(fX * vX);
    auto forms = geodesic_defect_forms(w);
    auto defects = geodesic_defects(w);
    ASSERT_EQ(forms.size(), 1u);
    EXPECT_TRUE(zero(S - forms[0] * w1 * w1, w.cfg)) << w.name;
    EXPECT_TRUE(zero(forms[0] + defects[0] * b * (Expr(1) - b), w.cfg)) << w.name;
  }
}

TEST(Liouville, ParallelWeb) {
  WebSpec w = fixture("W4-PAR");
  LiouvilleData L = liouville(w);
  for (const Expr* e : {&L.alpha, &L.k, &L.L1, &L.L2}) EXPECT_TRUE(zero(*e, w.cfg));
}

TEST(Liouville, ConstantInvariantSeparableRatio) {
  // a = 2, w = x/y.
  WebSpec w = web_of({"x", "y", "x*y", "x^2*y"}, {1, 2, 1, 2});
  LiouvilleData L = liouville(w);
  EXPECT_TRUE(zero(L.alpha, w.cfg));
  EXPECT_TRUE(zero(L.L1, w.cfg));
  EXPECT_TRUE(zero(L.L2, w.cfg));
}

TEST(Liouville, ReadingsAgreeWhenAlphaVanishes) {
  WebSpec w = web_of({"x", "y", "x^2+x*y", "y/x-2*log(x)"}, {1, 2, 1, 2});
  LiouvilleData r = liouville(w), p = liouville(w, LiouvilleReading::Printed);
  EXPECT_TRUE(zero(r.alpha, w.cfg));
  EXPECT_FALSE(zero(r.k, w.cfg));
  EXPECT_TRUE(zero(p.L1 - r.w * r.w * r.L1, w.cfg));
  EXPECT_TRUE(zero(p.L2 - r.w * r.L2, w.cfg));
  EXPECT_FALSE(zero(r.L1, w.cfg) && zero(r.L2, w.cfg));
}

TEST(Liouville, VanishesOnLinearWebs) {
  const Box box{1, 2, 1, 2};
  // Lines tangent to a parabola, pencils of lines, parallel lines.
  for (auto fs : std::vector<std::vector<const char*>>{
           {"x", "y", "(sqrt(x^2+4*y)-x)/2", "(y+1)/(x+2)"},
           {"x", "y", "(y+1)/(x+2)", "(sqrt(x^2+4*y)-x)/2"},
           {"x", "y", "(sqrt(x^2+4*y)-x)/2", "(sqrt(x^2+8*y)-x)/4"},
           {"x", "y", "(y+1)/(x+2)", "(y-3)/(x+1)"}}) {
    WebSpec w = web_of(fs, box);
    LiouvilleData L = liouville(w);
    EXPECT_TRUE(zero(L.L1, w.cfg)) << fs[2] << ", " << fs[3];
    EXPECT_TRUE(zero(L.L2, w.cfg)) << fs[2] << ", " << fs[3];
    EXPECT_TRUE(both_zero(liouville_via_ricci(w), w.cfg));
    EXPECT_EQ(linearizability_verdict(w).verdict, Linearizability::Linearizable);
  }
  WebSpec tangent = web_of({"x", "y", "(sqrt(x^2+4*y)-x)/2", "(y+1)/(x+2)"}, box);
  LiouvilleData printed = liouville(tangent, LiouvilleReading::Printed);
  EXPECT_FALSE(zero(printed.L1, tangent.cfg) && zero(printed.L2, tangent.cfg));
}

TEST(Liouville, RicciRouteIsProjectivelyInvariant) {
  const Expr rho[2] = {parse("sin(x*y)+x^2"), parse("exp(x-y)/y")};
  for (const char* n : {"W4-R1", "W4-R2NL"}) {
    WebSpec w = fixture(n);
    ProjectiveRep rep = projective_rep(w);
    ProjectiveRep moved = rep;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = j; k < 2; ++k) {
          Expr shift = Expr(0);
          if (i == j) shift = shift + rho[k];
          if (i == k) shift = shift + rho[j];
          moved.christoffel[static_cast<std::size_t>(3 * i + j + k)] = rep.gamma(i, j, k) + shift;
        }
      }
    }
    auto a = liouville_via_ricci(w, rep), b = liouville_via_ricci(w, moved);
    EXPECT_TRUE(zero(a[0] - b[0], w.cfg)) << n;
    EXPECT_TRUE(zero(a[1] - b[1], w.cfg)) << n;
  }
}

TEST(Liouville, RicciRatioIsConstant) {
  RandomExpr r(59);
  std::vector<WebSpec> webs;
  for (const char* n : {"W4-R2", "W4-R1", "W4-R0", "W4-R2NL", "W4-R1NL"}) webs.push_back(fixture(n));
  webs.push_back(random_web(r, 4));
  std::optional<double> ratio;
  for (const WebSpec& w : webs) {
    LiouvilleData L = liouville(w);
    auto C = liouville_via_ricci(w);
    const Expr Ls[2] = {L.L1, L.L2};
    for (int c = 0; c < 2; ++c) {
      for (const Point& p : valid_points({Ls[c], C[c]}, w.cfg, 20)) {
        const double l = evaluate(Ls[c], p);
        if (std::fabs(l) < 1e-9) continue;
        const double q = evaluate(C[c], p) / l;
        if (!ratio) ratio = q;
        EXPECT_NEAR(q, *ratio, 1e-7) << w.name << " component " << c;
      }
    }
  }
  ASSERT_TRUE(ratio);
  EXPECT_NEAR(*ratio, -1.0, 1e-7);
}

TEST(Liouville, ZeroSetsAgreeOnFixtures) {
  for (const std::string& n : kFourWebs) {
    WebSpec w = fixture(n);
    LiouvilleData L = liouville(w);
    EXPECT_EQ(zero(L.L1, w.cfg) && zero(L.L2, w.cfg), both_zero(liouville_via_ricci(w), w.cfg)) << n;
  }
}

TEST(Linearizability, Verdicts) {
  EXPECT_EQ(linearizability_verdict(fixture("W4-PAR")).verdict, Linearizability::Linearizable);
  EXPECT_EQ(linearizability_verdict(fixture("W4-R2NL")).verdict, Linearizability::NotLinearizable);
  EXPECT_EQ(linearizability_verdict(fixture("W4-R1NL")).verdict, Linearizability::NotLinearizable);
  LinearizabilityReport bol = linearizability_verdict(fixture("W5-BOL"));
  EXPECT_EQ(bol.verdict, Linearizability::NotLinearizable);
  EXPECT_FALSE(bol.geodesic);
  EXPECT_EQ(to_string(Linearizability::Indeterminate), "indeterminate");
}

TEST(Linearizability, RankThreeWebsAreLinearizableAndFlat) {
  for (const char* n : {"W4-PAR", "W4-R3"}) {
    WebSpec w = fixture(n);
    EXPECT_EQ(linearizability_verdict(w).verdict, Linearizability::Linearizable) << n;
    EXPECT_TRUE(zero(curvature_function(w), w.cfg)) << n;
  }
}

TEST(Linearizability, ConstantInvariantChain) {
  const Box box{1, 2, 1, 2};
  for (auto fs : std::vector<std::vector<const char*>>{{"x", "y", "x+y", "x+2*y"},
                                                       {"x", "y", "x^2+x*y", "y/x-2*log(x)"},
                                                       {"x", "y", "x*y", "x^2*y"}}) {
    WebSpec w = web_of(fs, box);
    ASSERT_TRUE(zero(ChartedWeb(w).partial(1, basic_invariants(w).at(1)), w.cfg));
    const bool lin = linearizability_verdict(w).verdict == Linearizability::Linearizable;
    EXPECT_EQ(lin, is_parallelizable(w)) << fs[2];
  }
  WebSpec counterpart = web_of({"x", "y", "x^2+x*y", "y/x-2*log(x)"}, box);
  EXPECT_FALSE(is_parallelizable(counterpart));
  EXPECT_EQ(linearizability_verdict(counterpart).verdict, Linearizability::NotLinearizable);
}

TEST(Linearizability, FirstFourKeepsOrder) {
  WebSpec bol = fixture("W5-BOL");
  WebSpec sub = first_four(bol);
  ASSERT_EQ(sub.degree(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(sub.functions[i], bol.functions[i]);
  for (const auto& c : sub.certificates) EXPECT_LE(std::max(c.i, c.j), 4);
}
