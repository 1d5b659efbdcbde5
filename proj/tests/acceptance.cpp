// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion followed by
// indented detail lines.
//
// acceptance [--allow-red 1,3]: exit status 0 iff the set of failing criteria
// equals the allowed set exactly.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"
#include "webrank/abel.hpp"
#include "webrank/obstruction.hpp"
#include "webrank/projective.hpp"
#include "webrank/rank.hpp"
#include "webrank/specfile.hpp"

using namespace webrank;
using namespace webrank::testing;

namespace {

struct Criterion {
  int id = 0;
  std::string title;
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("note " + what); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<Expr> parse_all(const std::vector<const char*>& r) {
  std::vector<Expr> out;
  for (const char* s : r) out.push_back(parse(s));
  return out;
}

const std::vector<const char*> kFourWebs{"W4-PAR", "W4-R3", "W4-R2", "W4-R1", "W4-R0", "W4-R2NL", "W4-R1NL"};

void rank_table(Criterion& c) {
  const std::vector<std::pair<const char*, int>> expected{{"W4-R3", 3}, {"W4-R2", 2}, {"W4-R2NL", 2},
                                                          {"W4-R1", 1}, {"W4-R1NL", 1}, {"W4-R0", 0}};
  for (const auto& [name, want] : expected) {
    std::set<int> ranks;
    std::string crit;
    for (std::uint64_t seed : {7u, 1001u, 424242u}) {
      RankReport r = classify_rank4(fixture(name, seed, 24, 1e-8));
      ranks.insert(r.rank);
      crit = r.criterion;
    }
    const int got = *ranks.begin();
    c.check(ranks.size() == 1, std::string(name) + ": verdict stable across seeds 7, 1001, 424242");
    c.check(got == want, std::string(name) + ": rank " + std::to_string(got) + " (" + crit + "), expected " +
                             std::to_string(want));
  }
  WebSpec r0 = fixture("W4-R0");
  c.note("W4-R0 carries log x + log y - log(xy) = 0 (relation [log t, log t, 0, -log t]): verify_relation = " +
         std::string(verify_relation(r0, parse_all({"log(t)", "log(t)", "0", "-log(t)"})) ? "holds" : "fails") +
         "; a web with an abelian relation has rank >= 1");
}

void bol(Criterion& c) {
  WebSpec w = fixture("W5-BOL");
  auto k = kappa_reduce_5web(w);
  bool all = true;
  for (const Expr& e : k) all = all && check_zero(e, w.cfg).zero;
  c.check(all, "kappa_reduce_5web: c0..c5 all identically 0");
  RankReport r = max_rank_5web(w);
  c.check(r.verdict == "max", "max_rank_5web: " + r.verdict);
  c.check(check_zero(curvature_function(w), w.cfg).zero, "curvature_function identically 0");
  auto inv = basic_invariants(w);
  const Expr a = parse("(x*y-x)/(x*y-y)"), b = parse("(y-1)/(x-1)");
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ux(w.box().xmin, w.box().xmax), uy(w.box().ymin, w.box().ymax);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const double x = ux(rng), y = uy(rng);
    worst = std::max({worst, std::fabs(at(inv[1], x, y) - at(a, x, y)), std::fabs(at(inv[2], x, y) - at(b, x, y))});
  }
  c.check(worst <= 1e-10, "basic invariants a, b at 10 random points, max |diff| " + fmt(worst) + " <= 1e-10");
  c.check(linearizability_verdict(w).verdict == Linearizability::NotLinearizable, "linearizability: not linearizable");
}

void obstruction(Criterion& c) {
  RandomExpr r(17);
  bool c0 = true, c1 = true, c2 = true, c1r = true, n_const = true;
  std::optional<double> n0;
  for (int i = 0; i < 10; ++i) {
    WebSpec w = random_web(r, 4);
    w.cfg.tol = 1e-7;
    auto derived = kappa_reduce_4web(w);
    auto printed = c_explicit(w, C1Reading::Printed);
    auto reconciled = c_explicit(w, C1Reading::Reconciled);
    c0 = c0 && check_zero(derived[0] - printed[0], w.cfg).zero;
    c1 = c1 && check_zero(derived[1] - printed[1], w.cfg).zero;
    c2 = c2 && check_zero(derived[2] - printed[2], w.cfg).zero;
    c1r = c1r && check_zero(derived[1] - reconciled[1], w.cfg).zero;
    // Normalization: raw c0 over the curvature function.
    const Expr N = kappa_normalization(ChartedWeb(w));
    for (const Point& p : valid_points({N}, w.cfg, 24)) {
      const double v = evaluate(N, p);
      if (!n0) n0 = v;
      n_const = n_const && std::fabs(v - *n0) <= 1e-7 * (1 + std::fabs(*n0));
    }
  }
  c.check(n_const, "normalization raw/transcribed constant across webs and points (measured 4a(1-a), not constant)");
  c.check(c0, "c0 derived = transcribed (10 random webs, 24 points, tol 1e-7, normalized by 4a(1-a))");
  c.check(c1, "c1 derived = transcribed as printed");
  c.check(c2, "c2 derived = transcribed");
  c.note(std::string("c1 derived = reconciled reading (printed + K(a1 - 2a2)/(12a(1-a))): ") + (c1r ? "yes" : "no"));
}

void curvature(Criterion& c) {
  std::vector<WebSpec> webs;
  for (const char* n : kFourWebs) webs.push_back(fixture(n, 7, 24, 1e-8));
  RandomExpr r(23);
  for (int i = 0; i < 5; ++i) {
    WebSpec w = random_web(r, 4);
    w.cfg.tol = 1e-8;
    webs.push_back(w);
  }
  int good = 0;
  double worst = 0;
  for (const WebSpec& w : webs) {
    ZeroCheck z = check_zero(c_explicit(w)[0] - curvature_function(w), w.cfg);
    good += z.zero;
    worst = std::max(worst, z.max_residual);
  }
  c.check(good == static_cast<int>(webs.size()), "c0 = mean of 3-subweb curvatures on " + std::to_string(good) + "/" +
                                                     std::to_string(webs.size()) +
                                                     " webs (7 fixtures + 5 random), max residual " + fmt(worst));
}

void commutation(Criterion& c) {
  RandomExpr r(21);
  int ok = 0, k_ok = 0;
  double worst = 0, k_worst = 0;
  for (int i = 0; i < 50; ++i) {
    WebSpec rw = random_web(r, 3 + r.pick(2));
    std::vector<int> order{0, 1, 2};
    if (rw.degree() == 4 && r.pick(2)) order = {2, 3, 0};
    ChartedWeb cw(rw, order);
    WeightedField f{r.any(2 + r.pick(2)), r.pick(4)};
    ZeroCheck z = check_zero(commutation_defect(f, cw), rw.cfg);
    ok += z.max_residual <= 1e-8;
    worst = std::max(worst, z.max_residual);
    ZeroCheck k = check_zero(cw.K_structure() - cw.K(), rw.cfg);
    k_ok += k.zero && k.max_residual <= 1e-8;
    k_worst = std::max(k_worst, k.max_residual);
  }
  c.check(ok == 50, "commutation defect <= 1e-8 on " + std::to_string(ok) + "/50 (web, u, weight), max " + fmt(worst));
  c.check(k_ok == 50, "K = d1(g2) - d2(g1) equals the explicit chart formula on " + std::to_string(k_ok) +
                          "/50, max " + fmt(k_worst));
}

void abel(Criterion& c) {
  WebSpec w = fixture("W4-R3");
  AbelTraceOptions o;
  o.order = {1, 3, 0, 2};
  AbelTrace t = abel_trace(w, o);
  c.check(t.terminal && t.terminal_order == 3, "W4-R3 (elimination y, xy, x): terminal equation in F(x+y) of order " +
                                                   std::to_string(t.terminal_order));
  bool annihilates = t.terminal.has_value();
  const SampleConfig tight = config(w.box(), 7, 24, 1e-8);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {3, -2}, {-5, 7}}) {
    if (!t.terminal) break;
    const Expr F = Expr(a) * pow(vars::t(), 2) + Expr(b) * vars::t();
    annihilates = annihilates && check_zero(abel_residual(w, *t.terminal, {{2, F}}).dx, tight).zero;
  }
  c.check(annihilates, "terminal equation annihilates a f^2 + b f (tol 1e-8)");

  const std::vector<std::pair<const char*, std::vector<const char*>>> explicit_relations{
      {"W4-R3", {"t", "t", "-t", "0"}},           {"W4-R3", {"t^2", "t^2", "-t^2", "2*t"}},
      {"W4-R3", {"log(t)", "log(t)", "0", "-log(t)"}}, {"W4-R2", {"-t", "-t", "t", "0"}},
      {"W4-R2", {"-t^2", "-t^2", "0", "t"}},      {"W4-R1", {"log(t)", "-log(t)", "log(t)", "-log(t)"}}};
  int held = 0;
  double worst = 0;
  for (const auto& [name, F] : explicit_relations) {
    RelationCheck r = check_relation(fixture(name), parse_all(F));
    held += r.holds && r.stddev <= 1e-9;
    worst = std::max(worst, r.stddev);
  }
  c.check(held == 6, "explicit relations of the rank 3/2/1 examples: " + std::to_string(held) +
                         "/6 pass, max std " + fmt(worst) + " <= 1e-9");
  c.note("six explicit relations: 3 on W4-R3, 2 on W4-R2, 1 on W4-R1");

  WebSpec r0 = fixture("W4-R0");
  std::mt19937_64 rng(50);
  int tried = 0, rejected = 0;
  while (tried < 50) {
    std::vector<Expr> F;
    bool nonconstant = false;
    for (int i = 0; i < 4; ++i) {
      Expr p = Expr(0);
      for (int k = 1; k <= 3; ++k) {
        const int co = static_cast<int>(rng() % 7) - 3;
        nonconstant = nonconstant || co != 0;
        p = p + Expr(co) * pow(vars::t(), k);
      }
      F.push_back(p);
    }
    if (!nonconstant) continue;
    ++tried;
    rejected += !verify_relation(r0, F);
  }
  c.check(rejected == 50, "W4-R0 rejects " + std::to_string(rejected) + "/50 random polynomial candidates");
}

void linearizability(Criterion& c) {
  WebSpec par = fixture("W4-PAR");
  LiouvilleData L = liouville(par);
  c.check(linearizability_verdict(par).verdict == Linearizability::Linearizable &&
              check_zero(L.L1, par.cfg).zero && check_zero(L.L2, par.cfg).zero,
          "W4-PAR linearizable with L1 = L2 = 0");
  const Box box{1, 2, 1, 2};
  bool chain = true;
  for (auto fs : std::vector<std::vector<const char*>>{{"x", "y", "x+y", "x+2*y"},
                                                       {"x", "y", "x^2+x*y", "y/x-2*log(x)"}}) {
    WebSpec w = web_of(fs, box);
    const bool constant_a = check_zero(ChartedWeb(w).partial(1, basic_invariants(w)[1]), w.cfg).zero &&
                            check_zero(ChartedWeb(w).partial(2, basic_invariants(w)[1]), w.cfg).zero;
    const bool lin = linearizability_verdict(w).verdict == Linearizability::Linearizable;
    chain = chain && constant_a && lin == is_parallelizable(w);
  }
  WebSpec counterpart = web_of({"x", "y", "x^2+x*y", "y/x-2*log(x)"}, box);
  chain = chain && !is_parallelizable(counterpart);
  c.check(chain, "constant a: linearizable <=> parallelizable ([x,y,x+y,x+2y] both true, "
                 "[x,y,x^2+xy,y/x-2log x] both false)");
  for (const char* n : {"W4-R2NL", "W4-R1NL", "W5-BOL"}) {
    c.check(linearizability_verdict(fixture(n)).verdict == Linearizability::NotLinearizable,
            std::string(n) + " not linearizable");
  }
  int agree = 0, total = 0;
  std::vector<std::string> names(kFourWebs.begin(), kFourWebs.end());
  names.push_back("W5-BOL");
  for (const std::string& n : names) {
    WebSpec w = fixture(n);
    if (w.degree() > 4) w = first_four(w);
    LiouvilleData l = liouville(w);
    auto C = liouville_via_ricci(w);
    const bool a = check_zero(l.L1, w.cfg).zero && check_zero(l.L2, w.cfg).zero;
    const bool b = check_zero(C[0], w.cfg).zero && check_zero(C[1], w.cfg).zero;
    agree += a == b;
    ++total;
  }
  c.check(agree == total, "zero sets of (L1, L2) and the Ricci route agree on " + std::to_string(agree) + "/" +
                              std::to_string(total) + " fixtures");
  c.note("L1, L2 use the reconciled k terms -(kw)_x/w, -w(k/w)_y; Ricci components = -(L1, L2)");
}

void properties(Criterion& c) {
  std::mt19937_64 rng(5);
  int perms = 0, consistent = 0;
  bool bounded = true;
  for (const char* name : {"W4-R3", "W4-R2", "W4-R1", "W4-R0", "W4-R2NL", "W4-R1NL"}) {
    WebSpec w = fixture(name);
    const int rank = classify_rank4(w).rank;
    bounded = bounded && rank <= max_rank_bound(4);
    std::vector<int> order{0, 1, 2, 3};
    for (int k = 0; k < 6; ++k) {
      std::shuffle(order.begin(), order.end(), rng);
      const int r = classify_rank4(reorder(w, order)).rank;
      bounded = bounded && r <= max_rank_bound(4);
      ++perms;
      consistent += r == rank;
    }
  }
  c.check(consistent == perms, "rank invariant under " + std::to_string(consistent) + "/" + std::to_string(perms) +
                                   " permutations (6 fixtures x 6)");

  RandomExpr r(2024);
  int checked = 0, fd_ok = 0, exprs = 0;
  for (int i = 0; i < 200; ++i) {
    Expr e = r.any(1 + r.pick(6));
    ++exprs;
    for (Var v : {Var::X, Var::Y}) {
      CompiledExpr f(e);
      CompiledExpr df(differentiate(e, v));
      for (int k = 0; k < 5; ++k) {
        const double x = r.uniform(1, 2), y = r.uniform(1, 2);
        long double fd, exact;
        try {
          fd = central_difference(f, v, x, y, 1e-5);
          exact = df.eval(Point{x, y}.env()).value;
        } catch (const DomainError&) {
          continue;
        }
        ++checked;
        fd_ok += std::fabs(static_cast<double>(fd - exact)) <= 1e-6 * (1 + std::fabs(static_cast<double>(exact)));
      }
    }
  }
  c.check(fd_ok == checked, "symbolic vs central-difference derivatives on " + std::to_string(exprs) +
                                " expressions: " + std::to_string(fd_ok) + "/" + std::to_string(checked) +
                                " evaluations within rel 1e-6");

  bool same = true;
  for (const char* f : {"w4-r2nl.yaml", "w5-bol.yaml", "w3-par.yaml"}) {
    SpecFile s = load_webspec(std::string(WEBRANK_FIXTURES_DIR) + "/" + f);
    same = same && run_report("analyze", s).json == run_report("analyze", s).json;
  }
  c.check(same, "analyze reports byte-identical across reruns (3 fixtures, fixed seed)");

  RankReport bol = max_rank_5web(fixture("W5-BOL"));
  bounded = bounded && bol.rank <= max_rank_bound(5);
  c.check(bounded, "rank <= (d-1)(d-2)/2 for every verdict above");
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> allowed;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--allow-red") allowed = parse_ids(argv[i + 1]);
  }

  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all{
      {"rank table", rank_table},
      {"Bol 5-web", bol},
      {"obstruction cross-validation", obstruction},
      {"curvature function", curvature},
      {"commutation identity", commutation},
      {"Abel trace and relations", abel},
      {"linearizability", linearizability},
      {"property suites", properties},
  };

  std::set<int> red;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Criterion c;
    c.id = static_cast<int>(i) + 1;
    c.title = all[i].first;
    try {
      all[i].second(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (c.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& d : c.details) std::cout << "    " << d << "\n";
    if (!c.pass) red.insert(c.id);
  }
  std::cout << "summary: " << all.size() - red.size() << "/" << all.size() << " criteria pass";
  if (!red.empty()) {
    std::cout << "; red:";
    for (int id : red) std::cout << " " << id;
  }
  std::cout << "\n";
  if (red != allowed) {
    std::cout << "red set differs from the documented set passed with --allow-red\n";
    return 1;
  }
  return 0;
}
