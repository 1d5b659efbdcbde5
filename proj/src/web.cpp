#include "webrank/web.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace webrank {

Expr jacobian(const Expr& a, const Expr& b) {
  return differentiate(a, Var::X) * differentiate(b, Var::Y) - differentiate(a, Var::Y) * differentiate(b, Var::X);
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

WebSpec make_web(std::vector<Expr> functions, const Box& box, SampleConfig cfg, std::string name) {
  if (functions.size() < 3) throw ValidationError("a web needs at least three functions");
  cfg.box = box;
  cfg.validate();
  WebSpec web;
  web.name = std::move(name);
  web.functions = std::move(functions);
  web.cfg = cfg;
  std::vector<Point> pts = valid_points(web.functions, cfg, cfg.samples);
  const int d = web.degree();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Expr J = jacobian(web.functions[i], web.functions[j]);
      if (check_zero(J, cfg).zero) throw DegeneratePairError(i + 1, j + 1);
      CompiledExpr c(J);
      double m = INFINITY;
      for (const Point& p : pts) m = std::min(m, std::fabs(c(p)));
      web.certificates.push_back({i + 1, j + 1, m});
    }
  }
  return web;
}

WebSpec reorder(const WebSpec& web, const std::vector<int>& order) {
  if (order.size() != web.functions.size()) throw ValidationError("ordering must list every web function once");
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (sorted[i] != i) throw ValidationError("ordering must be a permutation of the web functions");
  }
  WebSpec out = web;
  std::vector<int> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.functions[k] = web.functions[order[k]];
    pos[order[k]] = static_cast<int>(k);
  }
  for (auto& c : out.certificates) {
    int a = pos[c.i - 1] + 1, b = pos[c.j - 1] + 1;
    c.i = std::min(a, b);
    c.j = std::max(a, b);
  }
  std::sort(out.certificates.begin(), out.certificates.end(),
            [](const PairCertificate& p, const PairCertificate& q) { return std::tie(p.i, p.j) < std::tie(q.i, q.j); });
  return out;
}

// ---------------------------------------------------------------- Chart

Chart::Chart(Expr chart_x, Expr chart_y) : X_(std::move(chart_x)), Y_(std::move(chart_y)) {
  Xx_ = differentiate(X_, Var::X);
  Xy_ = differentiate(X_, Var::Y);
  Yx_ = differentiate(Y_, Var::X);
  Yy_ = differentiate(Y_, Var::Y);
  det_ = Xx_ * Yy_ - Xy_ * Yx_;
  identity_ = X_ == vars::x() && Y_ == vars::y();
}

Expr Chart::dX(const Expr& h) const {
  if (identity_) return differentiate(h, Var::X);
  return (Yy_ * differentiate(h, Var::X) - Yx_ * differentiate(h, Var::Y)) / det_;
}

Expr Chart::dY(const Expr& h) const {
  if (identity_) return differentiate(h, Var::Y);
  return (Xx_ * differentiate(h, Var::Y) - Xy_ * differentiate(h, Var::X)) / det_;
}

// ---------------------------------------------------------------- ChartedWeb

namespace {

std::vector<int> identity_order(const WebSpec& web) {
  std::vector<int> o(web.functions.size());
  std::iota(o.begin(), o.end(), 0);
  return o;
}

Chart make_chart(const WebSpec& web, const std::vector<int>& order) {
  if (order.size() < 3) throw ChartError("a charted web needs at least three functions");
  std::vector<int> seen(web.functions.size(), 0);
  for (int i : order) {
    if (i < 0 || i >= web.degree() || seen[i]++) throw ChartError("invalid function ordering");
  }
  return Chart(web.functions[order[0]], web.functions[order[1]]);
}

}  // namespace

ChartedWeb::ChartedWeb(const WebSpec& web) : ChartedWeb(web, identity_order(web)) {}

ChartedWeb::ChartedWeb(const WebSpec& web, std::vector<int> order)
    : web_(web), order_(std::move(order)), chart_(make_chart(web_, order_)) {
  const SampleConfig& c = web_.cfg;
  if (check_zero(chart_.det(), c).zero) {
    throw ChartError("chart Jacobian of f" + std::to_string(order_[0] + 1) + ", f" + std::to_string(order_[1] + 1) +
                     " vanishes identically");
  }
  f_ = web_.functions[order_[2]];
  fX_ = chart_.dX(f_);
  fY_ = chart_.dY(f_);
  if (check_zero(fX_, c).zero || check_zero(fY_, c).zero) {
    throw ChartError("f" + std::to_string(order_[2] + 1) + " has a vanishing chart derivative");
  }
  H_ = chart_.dY(fX_) / (fX_ * fY_);
  for (std::size_t k = 3; k < order_.size(); ++k) g_.push_back(web_.functions[order_[k]]);
}

Expr ChartedWeb::partial(int i, const Expr& h) const {
  if (i == 1) return -(chart_.dX(h) / fX_);
  if (i == 2) return -(chart_.dY(h) / fY_);
  throw PreconditionError("frame index must be 1 or 2");
}

Expr ChartedWeb::K() const {
  Expr L = log(fX_ / fY_);
  return -(chart_.dY(chart_.dX(L)) / (fX_ * fY_));
}

Expr ChartedWeb::K_structure() const { return partial(1, H_) - partial(2, H_); }

std::vector<Expr> ChartedWeb::basic_invariants() const {
  std::vector<Expr> a{Expr(1)};
  for (std::size_t k = 0; k < g_.size(); ++k) {
    Expr ai = fY_ * chart_.dX(g_[k]) / (fX_ * chart_.dY(g_[k]));
    if (check_zero(ai, cfg()).zero || check_zero(ai - Expr(1), cfg()).zero) {
      throw ValidationError("basic invariant a" + std::to_string(k + 2) + " is identically 0 or 1");
    }
    a.push_back(ai);
  }
  return a;
}

Expr ChartedWeb::area_density() const { return fX_ * fY_ * chart_.det(); }

Expr curvature_K(const ChartedWeb& web) { return web.K(); }

// ---------------------------------------------------------------- web equation

namespace {

const std::array<Var, 3> kU{Var::U1, Var::U2, Var::U3};

Expr bind(const WebEquation& weq, const Expr& e) {
  return substitute(e, {{Var::U1, weq.params[0]}, {Var::U2, weq.params[1]}, {Var::U3, weq.params[2]}});
}

}  // namespace

void validate(const WebEquation& weq, const SampleConfig& cfg) {
  if (!check_zero(bind(weq, weq.W), cfg).zero) {
    throw ValidationError("web equation does not vanish on its parametrization");
  }
}

Expr curvature_from_web_equation(const WebEquation& weq, const SampleConfig& cfg) {
  validate(weq, cfg);
  std::array<Expr, 3> Wr;
  for (int r = 0; r < 3; ++r) {
    Wr[r] = differentiate(weq.W, kU[r]);
    if (check_zero(bind(weq, Wr[r]), cfg).zero) {
      throw ValidationError("web equation derivative W_" + std::to_string(r + 1) + " vanishes on the box");
    }
  }
  auto A = [&](int r, int s) {
    Expr L = log(Wr[r] / Wr[s]);
    return differentiate(differentiate(L, kU[r]), kU[s]) / (Wr[r] * Wr[s]);
  };
  return bind(weq, A(0, 1) + A(1, 2) + A(2, 0));
}

// ---------------------------------------------------------------- subwebs

namespace {

ChartedWeb subweb_chart(const WebSpec& web, std::array<int, 3> idx) {
  for (int i : idx) {
    if (i < 1 || i > web.degree()) throw ValidationError("subweb index out of range");
  }
  return ChartedWeb(web, {idx[0] - 1, idx[1] - 1, idx[2] - 1});
}

}  // namespace

Expr subweb_curvature(const WebSpec& web, std::array<int, 3> indices) { return subweb_chart(web, indices).K(); }

Expr subweb_curvature_normalized(const WebSpec& web, std::array<int, 3> indices) {
  ChartedWeb sub = subweb_chart(web, indices);
  ChartedWeb main(web, {0, 1, 2});
  if (indices == std::array<int, 3>{1, 2, 3}) return sub.K();
  return sub.K() * sub.area_density() / main.area_density();
}

Expr curvature_function(const WebSpec& web) {
  const int d = web.degree();
  if (d != 4 && d != 5) throw PreconditionError("curvature function is defined here for 4- and 5-webs");
  Expr sum;
  auto triples = combinations(d, 3);
  for (const auto& t : triples) sum = sum + subweb_curvature_normalized(web, {t[0], t[1], t[2]});
  return sum / Expr(static_cast<std::int64_t>(triples.size()));
}

std::vector<Expr> basic_invariants(const WebSpec& web) {
  if (web.degree() < 4) throw PreconditionError("basic invariants need d >= 4");
  return ChartedWeb(web).basic_invariants();
}

bool is_parallelizable(const WebSpec& web) {
  ChartedWeb cw(web, {0, 1, 2});
  if (!check_zero(cw.K(), web.cfg).zero) return false;
  if (web.degree() < 4) return true;
  for (const Expr& a : ChartedWeb(web).basic_invariants()) {
    if (!check_zero(differentiate(a, Var::X), web.cfg).zero) return false;
    if (!check_zero(differentiate(a, Var::Y), web.cfg).zero) return false;
  }
  return true;
}

int max_rank_bound(int d) {
  if (d < 3) throw ValidationError("web degree must be at least 3");
  return (d - 1) * (d - 2) / 2;
}

}  // namespace webrank
