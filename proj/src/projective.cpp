#include "webrank/projective.hpp"

#include <cmath>

#include "webrank/error.hpp"

namespace webrank {

namespace {

constexpr std::uint64_t kConfirmOffset = 0x9e3779b97f4a7c15ULL;

Expr half(const Expr& e) { return e / Expr(2); }

// Gauss-Jordan elimination on expressions; pivots are chosen by magnitude at
// one sample point.
std::vector<Expr> solve(std::vector<std::vector<Expr>> M, std::vector<Expr> rhs, const SampleConfig& cfg) {
  const std::size_t n = rhs.size();
  std::vector<Expr> all;
  for (const auto& row : M) all.insert(all.end(), row.begin(), row.end());
  const std::vector<Point> pts = valid_points(all, cfg, 1);
  const Env env = pts.front().env();
  std::vector<std::vector<double>> shadow(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) shadow[r][c] = M[r][c].is_zero() ? 0.0 : evaluate(M[r][c], env);
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c; r < n; ++r) {
      if (std::fabs(shadow[r][c]) > std::fabs(shadow[p][c])) p = r;
    }
    if (shadow[p][c] == 0.0) throw Error("Christoffel system is singular at the sample point");
    std::swap(M[p], M[c]);
    std::swap(shadow[p], shadow[c]);
    std::swap(rhs[p], rhs[c]);
    const Expr pivot = M[c][c];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || M[r][c].is_zero()) continue;
      const Expr f = M[r][c] / pivot;
      const double fs = shadow[r][c] / shadow[c][c];
      for (std::size_t k = c; k < n; ++k) {
        M[r][k] = M[r][k] - f * M[c][k];
        shadow[r][k] -= fs * shadow[c][k];
      }
      rhs[r] = rhs[r] - f * rhs[c];
    }
  }
  std::vector<Expr> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / M[i][i];
  return x;
}

Expr basic_a(const ChartedWeb& cw, const SampleConfig& cfg) {
  const Expr a = cw.basic_invariants().at(1);
  if (is_identically_zero(a, cfg) || is_identically_zero(a - Expr(1), cfg)) {
    throw PreconditionError("basic invariant a vanishes or equals one identically");
  }
  return a;
}

bool all_zero(const std::vector<Expr>& es, const SampleConfig& cfg, double* residual = nullptr) {
  bool ok = true;
  for (const Expr& e : es) {
    ZeroCheck z = check_zero(e, cfg);
    ok = ok && z.zero;
    if (residual) *residual = std::max(*residual, z.max_residual);
  }
  return ok;
}

}  // namespace

const Expr& ProjectiveRep::gamma(int i, int j, int k) const {
  if (j > k) std::swap(j, k);
  return christoffel.at(static_cast<std::size_t>(3 * i + j + k));
}

Expr z_invariant(const ChartedWeb& web, const Expr& a) {
  const Expr a1 = web.partial(1, a), a2 = web.partial(2, a);
  return (a1 - a * a2) / (a * (Expr(1) - a));
}

ProjectiveRep projective_rep(const WebSpec& web) {
  if (web.degree() != 4) throw PreconditionError("projective_rep needs a 4-web");
  ChartedWeb cw(web);
  const Expr a = basic_a(cw, web.cfg);
  const Chart& ch = cw.chart();
  const Expr fX = cw.fX(), fY = cw.fY();

  ProjectiveRep rep;
  rep.z = z_invariant(cw, a);
  const Expr A1 = -half(rep.z);
  const Expr a1 = cw.partial(1, a);
  rep.theta = {{{A1, A1}, {A1 + rep.z, A1 + rep.z}, {A1, A1 + rep.z}, {A1 + a1 / a, A1 + rep.z}}};

  // d_s(omega1) = (z/2) omega3 . omega1, d_s(omega2) = -(z/2) omega3 . omega2.
  struct Form {
    std::array<Expr, 2> w;
    std::array<Expr, 2> theta;
  };
  const Expr hz = half(rep.z);
  const std::array<Form, 2> forms{Form{{-fX, Expr(0)}, {hz * fX, hz * fY}},
                                  Form{{Expr(0), -fY}, {-(hz * fX), -(hz * fY)}}};
  const std::array<std::pair<int, int>, 3> pairs{{{0, 0}, {0, 1}, {1, 1}}};
  std::vector<std::vector<Expr>> M;
  std::vector<Expr> rhs;
  for (const Form& f : forms) {
    for (const auto& [j, k] : pairs) {
      std::vector<Expr> row(6, Expr(0));
      row[static_cast<std::size_t>(j + k)] = -f.w[0];
      row[static_cast<std::size_t>(3 + j + k)] = -f.w[1];
      const auto wj = static_cast<std::size_t>(j), wk = static_cast<std::size_t>(k);
      const Expr sym = half(ch.d(j, f.w[wk]) + ch.d(k, f.w[wj]));
      const Expr prod = half(f.theta[wj] * f.w[wk] + f.theta[wk] * f.w[wj]);
      M.push_back(row);
      rhs.push_back(prod - sym);
    }
  }
  std::vector<Expr> g = solve(M, rhs, web.cfg);
  for (std::size_t i = 0; i < 6; ++i) rep.christoffel[i] = g[i];

  std::vector<Expr> residuals;
  for (std::size_t r = 0; r < M.size(); ++r) {
    Expr s = -rhs[r];
    for (std::size_t c = 0; c < 6; ++c) {
      if (!M[r][c].is_zero()) s = s + M[r][c] * g[c];
    }
    residuals.push_back(s);
  }
  if (!all_zero(residuals, web.cfg)) throw Error("Christoffel solve left a nonzero residual");
  return rep;
}

std::array<Expr, 3> symmetric_differential(const ChartedWeb& web, const ProjectiveRep& rep, const Expr& p,
                                           const Expr& q) {
  const Chart& ch = web.chart();
  const std::array<Expr, 2> w{p, q};
  std::array<Expr, 3> out;
  const std::array<std::pair<int, int>, 3> pairs{{{0, 0}, {0, 1}, {1, 1}}};
  for (std::size_t n = 0; n < 3; ++n) {
    const auto [j, k] = pairs[n];
    Expr s = half(ch.d(j, w[static_cast<std::size_t>(k)]) + ch.d(k, w[static_cast<std::size_t>(j)]));
    for (int i = 0; i < 2; ++i) s = s - rep.gamma(i, j, k) * w[static_cast<std::size_t>(i)];
    out[n] = s;
  }
  return out;
}

std::vector<Expr> geodesic_defects(const WebSpec& web) {
  if (web.degree() < 5) throw PreconditionError("geodesic_test needs d >= 5");
  ChartedWeb cw(web);
  const std::vector<Expr> inv = cw.basic_invariants();
  const Expr za = z_invariant(cw, inv.at(1));
  std::vector<Expr> out;
  for (std::size_t i = 2; i < inv.size(); ++i) out.push_back(z_invariant(cw, inv[i]) - za);
  return out;
}

std::vector<Expr> geodesic_defect_forms(const WebSpec& web) {
  if (web.degree() < 5) throw PreconditionError("geodesic_test needs d >= 5");
  ChartedWeb cw(web);
  const std::vector<Expr> inv = cw.basic_invariants();
  const Expr za = z_invariant(cw, inv.at(1));
  std::vector<Expr> out;
  for (std::size_t i = 2; i < inv.size(); ++i) {
    const Expr& b = inv[i];
    out.push_back(za * b * (Expr(1) - b) - (cw.partial(1, b) - b * cw.partial(2, b)));
  }
  return out;
}

bool geodesic_test(const WebSpec& web) { return all_zero(geodesic_defects(web), web.cfg); }

LiouvilleData liouville(const WebSpec& web, LiouvilleReading reading) {
  if (web.degree() != 4) throw PreconditionError("liouville needs a 4-web");
  ChartedWeb cw(web);
  const Expr a = basic_a(cw, web.cfg);
  const Chart& ch = cw.chart();
  auto dx = [&](const Expr& e) { return ch.dX(e); };
  auto dy = [&](const Expr& e) { return ch.dY(e); };

  LiouvilleData L;
  const Expr w = cw.fY() / cw.fX();
  const Expr one(1), two(2), three(3);
  L.w = w;
  L.alpha = (a * dy(a) - w * dx(a)) / (w * a * (one - a));
  L.k = dx(dy(log(w)));
  const Expr& al = L.alpha;
  const Expr& k = L.k;
  const Expr ax = dx(al), ay = dy(al), axx = dx(ax), axy = dx(ay), ayy = dy(ay);
  const Expr wx = dx(w), wy = dy(w), wxx = dx(wx), wxy = dx(wy);

  const bool printed = reading == LiouvilleReading::Printed;
  const Expr k1 = printed ? -(w * dx(k * w)) : -(dx(k * w) / w);
  const Expr k2 = printed ? -(w * w * dy(k / w)) : -(w * dy(k / w));
  const Expr L1x3 = k1 + w * (axx + al * ax) +
                    (al * wxx + (al * al + three * ax) * wx - two * axy - two * al * ay) +
                    (-(al * wxy) - two * ay * wx + al * wx * wx) / w + al * wx * wy / (w * w);
  const Expr L2x3 = k2 + w * w * (two * al * ax) + w * (two * al * al * wx - two * axy - al * ay) +
                    (-(al * wxy) - two * ay * wx + ayy) + (al * wx * wy - ay * wy) / w;
  L.L1 = L1x3 / three;
  L.L2 = L2x3 / three;
  return L;
}

std::array<Expr, 2> liouville_via_ricci(const WebSpec& web, const ProjectiveRep& rep) {
  ChartedWeb cw(web);
  const Chart& ch = cw.chart();
  auto G = [&](int i, int j, int k) -> const Expr& { return rep.gamma(i, j, k); };

  // R^d_cab = d_a G^d_bc - d_b G^d_ac + G^e_bc G^d_ae - G^e_ac G^d_be; Ric_bc = R^a_cab.
  Expr ric[2][2];
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 2; ++c) {
      Expr s = Expr(0);
      for (int a = 0; a < 2; ++a) {
        s = s + ch.d(a, G(a, b, c)) - ch.d(b, G(a, a, c));
        for (int e = 0; e < 2; ++e) s = s + G(e, b, c) * G(a, a, e) - G(e, a, c) * G(a, b, e);
      }
      ric[b][c] = s;
    }
  }
  Expr P[2][2];
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 2; ++c) P[b][c] = (Expr(2) * ric[b][c] + ric[c][b]) / Expr(3);
  }
  auto nablaP = [&](int i, int j, int k) {
    Expr s = ch.d(i, P[j][k]);
    for (int m = 0; m < 2; ++m) s = s - G(m, i, j) * P[m][k] - G(m, i, k) * P[j][m];
    return s;
  };
  return {nablaP(0, 1, 0) - nablaP(1, 0, 0), nablaP(0, 1, 1) - nablaP(1, 0, 1)};
}

std::array<Expr, 2> liouville_via_ricci(const WebSpec& web) { return liouville_via_ricci(web, projective_rep(web)); }

std::string to_string(Linearizability v) {
  switch (v) {
    case Linearizability::Linearizable: return "linearizable";
    case Linearizability::NotLinearizable: return "not linearizable";
    case Linearizability::Indeterminate: return "indeterminate";
  }
  return "?";
}

WebSpec first_four(const WebSpec& web) {
  if (web.degree() < 4) throw PreconditionError("web has fewer than four functions");
  WebSpec sub = web;
  sub.functions.resize(4);
  std::erase_if(sub.certificates, [](const PairCertificate& c) { return c.i > 4 || c.j > 4; });
  return sub;
}

LinearizabilityReport linearizability_verdict(const WebSpec& web) {
  if (web.degree() < 4) throw PreconditionError("linearizability needs d >= 4");
  LinearizabilityReport report;
  const SampleConfig confirm = web.cfg.with_seed(web.cfg.seed + kConfirmOffset);
  bool consistent = true;

  if (web.degree() >= 5) {
    const std::vector<Expr> defects = geodesic_defects(web);
    const bool g1 = all_zero(defects, web.cfg), g2 = all_zero(defects, confirm);
    consistent = consistent && g1 == g2;
    report.geodesic = g1;
  }
  const LiouvilleData L = liouville(first_four(web));
  double residual = 0.0;
  const bool l1 = all_zero({L.L1, L.L2}, web.cfg, &residual);
  const bool l2 = all_zero({L.L1, L.L2}, confirm, &residual);
  consistent = consistent && l1 == l2;
  report.liouville_vanishes = l1;
  report.liouville_residual = residual;

  if (!consistent) {
    report.verdict = Linearizability::Indeterminate;
  } else {
    report.verdict =
        report.geodesic && report.liouville_vanishes ? Linearizability::Linearizable : Linearizability::NotLinearizable;
  }
  return report;
}

}  // namespace webrank
