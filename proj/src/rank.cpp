#include "webrank/rank.hpp"

#include <cmath>

#include "webrank/obstruction.hpp"

namespace webrank {

namespace {

Expr num(std::int64_t n) { return Expr(n); }

}  // namespace

int c_weight(int index) { return index == 0 ? 2 : 3; }

std::array<Expr, 3> c_explicit(JetTable& t, C1Reading reading) {
  const Expr a = t("a"), a1 = t("a", "1"), a2 = t("a", "2");
  const Expr a11 = t("a", "11"), a12 = t("a", "12"), a22 = t("a", "22");
  const Expr a112 = t("a", "112"), a122 = t("a", "122");
  const Expr K = t("K"), K1 = t("K", "1"), K2 = t("K", "2");
  const Expr one(1), b = one - a;

  Expr c0 = K + (a11 - a * a22 - num(2) * b * a12) / (num(4) * a * b) +
            ((num(-1) + num(2) * a) * a1 * a1 - a * a * a2 * a2 + num(2) * b * b * a1 * a2) / (num(4) * b * b * a * a);

  Expr kterm;
  if (reading == C1Reading::Printed) {
    kterm = ((a - num(4)) * a1 + (num(11) - num(20) * a + num(12) * a * a) * a2) / (num(12) * b * b * a) * K;
  } else {
    kterm = (-a1 + (num(3) - num(6) * a + num(4) * a * a) * a2) / (num(4) * b * b * a) * K;
  }
  Expr c1 = (K2 - K1) / (num(4) * b) + kterm + (a112 - a122) / (num(4) * a * b) +
            (a1 - a * a2) / (num(4) * a * a * b) * a22 + (num(2) * a - one) * (a1 - a * a2) / (num(4) * b * b * a * a) * a12 -
            a2 * a2 * ((one - num(2) * a) * a1 + a * a2) / (num(4) * b * b * a * a);

  Expr c2 = (a * K2 - K1) / (num(4) * a * b) + ((one - num(2) * a) * a1 - (a - num(2)) * a * a2) / (num(4) * b * b * a * a) * K;
  return {c0, c1, c2};
}

std::array<Expr, 3> c_explicit(const WebSpec& web, C1Reading reading) {
  if (web.degree() != 4) throw PreconditionError("c_explicit needs a 4-web");
  JetTable t{ChartedWeb(web)};
  return c_explicit(t, reading);
}

namespace {

struct Jets {
  ChartedWeb web;
  Expr a, a1, a2, a12, a22, K;

  explicit Jets(const WebSpec& w) : web(w) {
    JetTable t(web);
    a = t("a");
    a1 = t("a", "1");
    a2 = t("a", "2");
    a12 = t("a", "12");
    a22 = t("a", "22");
    K = t("K");
  }

  Expr d(const Expr& e, int weight, std::string_view seq, JetOrder order) const {
    return jet(WeightedField{e, weight}, seq, order, web).value;
  }
};

}  // namespace

std::array<Expr, 4> g_matrix(const WebSpec& web, const std::array<Expr, 3>& c) {
  if (web.degree() != 4) throw PreconditionError("g_matrix needs a 4-web");
  if (is_identically_zero(c[0], web.cfg)) throw PreconditionError("G_ij need c0 not identically zero");
  Jets j(web);
  const Expr& a = j.a;
  const Expr one(1);
  auto cj = [&](int i, const char* s) { return j.d(c[i], c_weight(i), s, JetOrder::Application); };
  const Expr &c0 = c[0], &c1 = c[1], &c2 = c[2];
  const Expr c01 = cj(0, "1"), c02 = cj(0, "2"), c11 = cj(1, "1"), c12 = cj(1, "2"), c21 = cj(2, "1"), c22 = cj(2, "2");

  Expr G11 = a * c0 * (c22 - c21) + a * c2 * (c01 - c02) - a * (one - a) * c1 * c2 +
             (num(2) * j.a2 - j.a1 - a * j.a2) * c0 * c2 - j.K * c0 * c0;
  Expr G12 = a * c0 * (c12 - c11) + a * c1 * (c01 - c02) - a * (one - a) * c1 * c1 +
             (num(2) * j.a2 - j.a1 - num(2) * a * j.a2) * c0 * c1 + (j.a2 * j.a2 + j.a12 - j.a22) * c0 * c0;
  Expr G21 = c0 * (c21 - a * c22) + c2 * (a * c02 - c01) - num(2) * j.a2 * c0 * c2 + a * (one - a) * c2 * c2;
  Expr G22 = c0 * (c11 - a * c12) + c1 * (a * c02 - c01) + a * (one - a) * c1 * c2 - j.a2 * c0 * c1 -
             j.a2 * (one - a) * c0 * c2 + (j.a22 - j.K) * c0 * c0;
  return {G11, G12, G21, G22};
}

std::vector<RankOneCase> j_invariants(const WebSpec& web, const std::array<Expr, 3>& c,
                                      const std::optional<std::array<Expr, 4>>& G, const JInvariantOptions& opts) {
  if (web.degree() != 4) throw PreconditionError("j_invariants needs a 4-web");
  const SampleConfig& cfg = web.cfg;
  Jets j(web);
  const Expr& a = j.a;
  const Expr one(1);
  const Expr &c0 = c[0], &c1 = c[1], &c2 = c[2];
  auto cj = [&](int i, const char* s) { return j.d(c[i], c_weight(i), s, opts.jets); };

  const bool c0z = is_identically_zero(c0, cfg);
  const bool c1z = is_identically_zero(c1, cfg);
  const bool c2z = is_identically_zero(c2, cfg);
  const bool c12eq = is_identically_zero(c1 - c2, cfg);

  std::vector<RankOneCase> out(4);
  for (int i = 0; i < 4; ++i) out[i].index = i + 1;

  if (c0z && !c12eq && !c1z) {
    const Expr c11 = cj(1, "1"), c12 = cj(1, "2"), c21 = cj(2, "1"), c22 = cj(2, "2");
    const Expr c111 = cj(1, "11"), c112 = cj(1, "12"), c211 = cj(2, "11"), c212 = cj(2, "12");
    Expr J1 = j.a2 * c1 * c2 * (c1 - c2) + a * c2 * c2 * (c12 - c11) + c1 * c2 * (c11 + a * (c21 - c12 - c22)) +
              c1 * c1 * (a * c22 - c21);
    Expr J2 = c1 * c1 * (c1 - c2) * (c1 - c2) * j.K + (c111 - c112) * c1 * c2 * (c2 - c1) +
              c1 * c1 * (c1 - c2) * (c211 - c212) - c2 * (num(2) * c1 - c2) * c11 * (c12 - c11) +
              c1 * c1 * c21 * (c12 - c22 + c21) + c1 * c1 * c11 * (c22 - num(2) * c21);
    out[0].applicable = true;
    out[0].invariants = {{"J1", J1, 10}, {"J2", J2, 14}};
  }
  if (c0z && c12eq && !c1z) {
    Expr J3 = (j.a22 - j.a12) * (one - a) + j.a2 * (j.a2 - j.a1) - (one - a) * (one - a) * j.K;
    out[1].applicable = true;
    out[1].invariants = {{"J3", J3, 2}};
  }
  if (c0z && c1z && !c2z) {
    Expr J4 = j.a12 * a - j.a1 * j.a2 - j.K * a * a;
    out[2].applicable = true;
    out[2].invariants = {{"J4", J4, 2}};
  }
  if (!c0z) {
    if (!G) throw PreconditionError("case 4 needs the G_ij");
    const auto& g = *G;
    const Expr &G11 = g[0], &G12 = g[1], &G21 = g[2], &G22 = g[3];
    const int gw = 6;
    const Expr G211 = j.d(G21, gw, "1", opts.jets), G221 = j.d(G22, gw, "1", opts.jets);
    const Expr G212 = j.d(G21, gw, "2", opts.jets), G222 = j.d(G22, gw, "2", opts.jets);
    Expr J10 = G11 * G22 - G21 * G12;
    Expr J11 = c0 * (G211 * G22 - G221 * G21) + (j.a2 * c0 - a * c1) * G21 * G21 +
               (a * c2 - j.a2 * c0 + a * c1) * G21 * G22 - a * c2 * G22 * G22;
    const Expr mixed = opts.j12 == J12Reading::Printed ? a * (c2 - c1) : c1 + a * c2;
    Expr J12 = c0 * (G212 * G22 - G222 * G21) + (j.a2 * c0 - a * c1) * G21 * G21 + mixed * G21 * G22 -
               c2 * G22 * G22;
    out[3].applicable = true;
    out[3].invariants = {{"J10", J10, 12}, {"J11", J11, 15}, {"J12", J12, 15}};
  }
  return out;
}

// ---------------------------------------------------------------- classification

namespace {

class Sampler {
 public:
  Sampler(const WebSpec& web, RankReport& report)
      : cfg_(web.cfg), report_(report), area_(ChartedWeb(web).area_density()) {
    confirm_ = cfg_.with_seed(cfg_.seed + 0x9e3779b97f4a7c15ULL);
    report_.cfg = cfg_;
    report_.confirm_seed = confirm_.seed;
  }

  /// Tests e * |omega1 ^ omega2|^(weight/2), which does not change under
  /// rescaling of the coordinates by constants of order one and keeps
  /// high-weight invariants out of the absolute-tolerance regime.
  bool zero(const std::string& name, const Expr& e, int weight) {
    Expr scaled = weight == 0 ? e : e * pow(area_ * area_, Expr::rational(weight, 4));
    ZeroCheck a = check_zero(scaled, cfg_);
    ZeroCheck b = check_zero(scaled, confirm_);
    if (a.zero != b.zero) {
      throw IndeterminateError(name + " vanishes under one seed but not the other (residuals " +
                               std::to_string(a.max_residual) + ", " + std::to_string(b.max_residual) + ")");
    }
    double residual = std::max(a.max_residual, b.max_residual);
    report_.invariants.push_back({name, e, weight, a.zero, std::max(a.max_abs, b.max_abs), residual});
    if (a.zero && residual > cfg_.tol / 100) report_.borderline = true;
    return a.zero;
  }

 private:
  SampleConfig cfg_;
  SampleConfig confirm_;
  RankReport& report_;
  Expr area_;
};

void decide(RankReport& r, int rank, std::string criterion) {
  r.rank = rank;
  r.criterion = std::move(criterion);
  r.verdict = "rank " + std::to_string(rank);
}

}  // namespace

RankReport classify_rank4(const WebSpec& web, const ClassifyOptions& opts) {
  if (web.degree() != 4) throw PreconditionError("classify_rank4 needs a 4-web");
  RankReport report;
  report.web = web.name;
  report.degree = 4;
  Sampler s(web, report);

  std::array<Expr, 3> c = c_explicit(web, opts.c1);
  const bool z0 = s.zero("c0", c[0], 2);
  const bool z1 = s.zero("c1", c[1], 3);
  const bool z2 = s.zero("c2", c[2], 3);

  if (z0 && z1 && z2) {
    decide(report, 3, "rank3.kappa-vanishes");
    return report;
  }
  if (z0) {
    std::vector<RankOneCase> cases = j_invariants(web, c, std::nullopt, opts.j);
    s.zero("c1-c2", c[1] - c[2], 3);
    for (const RankOneCase& rc : cases) {
      if (!rc.applicable) continue;
      bool all = true;
      for (const auto& inv : rc.invariants) all = s.zero(inv.name, inv.value, inv.weight) && all;
      if (all) {
        decide(report, 1, "rank1.case" + std::to_string(rc.index));
        return report;
      }
    }
    decide(report, 0, "rank0.c0-vanishes");
    return report;
  }

  std::array<Expr, 4> G = g_matrix(web, c);
  const char* gnames[] = {"G11", "G12", "G21", "G22"};
  bool gz = true;
  for (int i = 0; i < 4; ++i) gz = s.zero(gnames[i], G[i], 6) && gz;
  if (gz) {
    decide(report, 2, "rank2.compatible");
    return report;
  }
  std::vector<RankOneCase> cases = j_invariants(web, c, G, opts.j);
  bool all = true;
  for (const auto& inv : cases[3].invariants) all = s.zero(inv.name, inv.value, inv.weight) && all;
  if (all) {
    decide(report, 1, "rank1.case4");
  } else {
    decide(report, 0, "rank0.c0-nonzero");
  }
  return report;
}

RankReport max_rank_5web(const WebSpec& web) {
  if (web.degree() != 5) throw PreconditionError("max_rank_5web needs a 5-web");
  RankReport report;
  report.web = web.name;
  report.degree = 5;
  Sampler s(web, report);
  std::array<Expr, 6> c = kappa_reduce_5web(web);
  bool all = true;
  const int weights[] = {2, 3, 3, 4, 4, 4};
  for (int i = 0; i < 6; ++i) all = s.zero("c" + std::to_string(i), c[i], weights[i]) && all;
  report.rank = all ? max_rank_bound(5) : -1;
  report.verdict = all ? "max" : "not-max";
  report.criterion = all ? "max.kappa-vanishes" : "not-max.kappa-nonzero";
  return report;
}

}  // namespace webrank
