#include "webrank/obstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace webrank {

std::string Jet::name() const {
  std::string s(1, sym);
  if (k + l > 0) {
    s += "_";
    s.append(static_cast<std::size_t>(k), '1');
    s.append(static_cast<std::size_t>(l), '2');
  }
  return s;
}

// ---------------------------------------------------------------- JetPolynomial

Expr JetPolynomial::coeff(const Jet& j) const {
  auto it = terms_.find(j);
  return it == terms_.end() ? Expr(0) : it->second;
}

int JetPolynomial::max_order() const {
  int m = -1;
  for (const auto& [j, c] : terms_) m = std::max(m, j.order());
  return m;
}

void JetPolynomial::add(const Jet& j, const Expr& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(j, c);
  if (inserted) return;
  it->second = it->second + c;
  if (it->second.is_zero()) terms_.erase(it);
}

void JetPolynomial::add(const JetPolynomial& p, const Expr& scale) {
  if (scale.is_zero()) return;
  for (const auto& [j, c] : p.terms_) add(j, scale.is_one() ? c : scale * c);
}

JetPolynomial JetPolynomial::scaled(const Expr& c, int c_weight) const {
  JetPolynomial out(weight_ + c_weight);
  out.add(*this, c);
  return out;
}

std::string JetPolynomial::str(std::size_t max_chars) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [j, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << to_string_bounded(c, max_chars).value_or("...") << ")*" << j.name();
  }
  return os.str();
}

JetPolynomial operator+(const JetPolynomial& a, const JetPolynomial& b) {
  JetPolynomial out = a;
  out.add(b);
  return out;
}

JetPolynomial operator-(const JetPolynomial& a, const JetPolynomial& b) {
  JetPolynomial out = a;
  out.add(b, Expr(-1));
  return out;
}

// ---------------------------------------------------------------- operators

LinearOperator LinearOperator::Delta(const Expr& a) {
  LinearOperator op;
  op.terms.push_back({1, {OpAtom::delta(1)}});
  if (a.is_one()) {
    op.terms.push_back({-1, {OpAtom::delta(2)}});
  } else {
    op.terms.push_back({-1, {OpAtom::delta(2), OpAtom::multiply(a, 0)}});
  }
  return op;
}

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
  LinearOperator out;
  for (const auto& [ca, wa] : a.terms) {
    for (const auto& [cb, wb] : b.terms) {
      OperatorWord w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.terms.push_back({ca * cb, std::move(w)});
    }
  }
  return out;
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
  LinearOperator out = a;
  for (const auto& [c, w] : b.terms) out.terms.push_back({-c, w});
  return out;
}

// ---------------------------------------------------------------- JetCalculus

JetCalculus::JetCalculus(ChartedWeb web) : web_(std::move(web)), K_(web_.K()) {}

Expr JetCalculus::covariant(const Expr& c, int weight, int i) {
  if (c.is_constant()) return weight == 0 || c.is_zero() ? Expr(0) : -(Expr(weight) * web_.H() * c);
  return covariant_derivative(WeightedField{c, weight}, i, web_).value;
}

const JetPolynomial& JetCalculus::delta2_of(const Jet& j) {
  if (auto it = delta2_cache_.find(j); it != delta2_cache_.end()) return it->second;
  JetPolynomial out(j.weight() + 1);
  if (j.k == 0) {
    out.add(Jet{j.sym, 0, j.l + 1}, Expr(1));
  } else {
    // delta_2 delta_1 X = delta_1 delta_2 X + s K X, X = u_{k-1,l} of weight s.
    Jet lower{j.sym, j.k - 1, j.l};
    JetPolynomial inner = delta2_of(lower);
    out.add(delta(1, inner));
    out.add(lower, Expr(lower.weight()) * K_);
  }
  return delta2_cache_.emplace(j, std::move(out)).first->second;
}

JetPolynomial JetCalculus::delta(int i, const JetPolynomial& p) {
  if (i != 1 && i != 2) throw PreconditionError("frame index must be 1 or 2");
  JetPolynomial out(p.weight() + 1);
  for (const auto& [j, c] : p.terms()) {
    out.add(j, covariant(c, p.weight() - j.weight(), i));
    if (i == 1) {
      out.add(Jet{j.sym, j.k + 1, j.l}, c);
    } else {
      out.add(delta2_of(j), c);
    }
  }
  return out;
}

JetPolynomial JetCalculus::apply_word(const OperatorWord& w, const JetPolynomial& p) {
  JetPolynomial cur = p;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    switch (it->kind) {
      case OpAtom::Kind::Delta1: cur = delta(1, cur); break;
      case OpAtom::Kind::Delta2: cur = delta(2, cur); break;
      case OpAtom::Kind::Multiply: cur = cur.scaled(it->factor, it->factor_weight); break;
    }
  }
  return cur;
}

JetPolynomial JetCalculus::apply(const LinearOperator& op, const JetPolynomial& p) {
  std::optional<JetPolynomial> out;
  for (const auto& [c, w] : op.terms) {
    JetPolynomial t = apply_word(w, p);
    if (!out) {
      out = JetPolynomial(t.weight());
    } else if (t.weight() != out->weight()) {
      throw PreconditionError("operator terms have inconsistent weights");
    }
    out->add(t, Expr(c));
  }
  return out ? *out : JetPolynomial(p.weight());
}

// ---------------------------------------------------------------- abelian system

namespace {

LinearOperator chain(const std::vector<LinearOperator>& ops) {
  LinearOperator out = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) out = out * ops[i];
  return out;
}

}  // namespace

AbelianSystem abelian_system(JetCalculus& calc) {
  const int d = calc.web().degree();
  AbelianSystem sys;
  if (d == 4) {
    sys.unknowns = {'u', 'v'};
    sys.basis = {Jet{'v', 0, 1}, Jet{'v', 0, 0}, Jet{'u', 0, 0}};
  } else if (d == 5) {
    sys.unknowns = {'w', 'u', 'v'};
    sys.basis = {Jet{'w', 0, 2}, Jet{'w', 0, 1}, Jet{'v', 0, 1}, Jet{'w', 0, 0}, Jet{'u', 0, 0}, Jet{'v', 0, 0}};
  } else {
    throw PreconditionError("the obstruction engine handles 4- and 5-webs");
  }
  sys.depth = d - 2;
  sys.invariants = calc.web().basic_invariants();
  JetPolynomial sum(2);
  for (std::size_t i = 0; i < sys.unknowns.size(); ++i) {
    JetPolynomial u = JetPolynomial::of(Jet{sys.unknowns[i], 0, 0});
    sys.first_order.push_back(calc.apply(LinearOperator::Delta(sys.invariants[i]), u));
    sum.add(calc.delta(1, u));
  }
  sys.first_order.push_back(std::move(sum));
  return sys;
}

// ---------------------------------------------------------------- reduction

namespace {

struct Row {
  std::vector<Expr> a;
  std::vector<long double> n;
  JetPolynomial rest;
};

long double value_at(const Expr& e, const Env& env) {
  try {
    return CompiledExpr(e).eval(env).value;
  } catch (const DomainError&) {
    return 0.0L;
  }
}

}  // namespace

ReductionRules::ReductionRules(JetCalculus& calc, const AbelianSystem& sys, const ReductionOptions& opts) {
  const SampleConfig& cfg = calc.web().cfg();
  std::vector<Point> pts = valid_points(calc.web().web().functions, cfg, opts.pivot_point + 1);
  const Env env = pts.at(static_cast<std::size_t>(opts.pivot_point)).env();

  const int depth = opts.depth > 0 ? opts.depth : sys.depth;
  std::vector<int> perm = opts.relation_order;
  if (perm.empty()) {
    perm.resize(sys.first_order.size());
    std::iota(perm.begin(), perm.end(), 0);
  }
  if (perm.size() != sys.first_order.size()) throw PreconditionError("relation order must permute the relations");

  // prolongations[m] = every delta_1^i delta_2^j applied to each relation, i + j = m.
  std::vector<JetPolynomial> current;
  for (int idx : perm) current.push_back(sys.first_order.at(static_cast<std::size_t>(idx)));

  for (int order = 1; order <= depth; ++order) {
    if (order > 1) {
      // Extend by delta_2 on the pure-delta_2 prolongations and delta_1 on all.
      std::vector<JetPolynomial> next;
      const std::size_t r = perm.size();
      const std::size_t blocks = current.size() / r;
      for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t q = 0; q < r; ++q) next.push_back(calc.delta(1, current[b * r + q]));
      }
      for (std::size_t q = 0; q < r; ++q) next.push_back(calc.delta(2, current[(blocks - 1) * r + q]));
      current = std::move(next);
    }

    std::vector<Jet> cols;
    for (char s : sys.unknowns) {
      for (int k = order; k >= 0; --k) {
        Jet j{s, k, order - k};
        if (std::find(sys.basis.begin(), sys.basis.end(), j) == sys.basis.end()) cols.push_back(j);
      }
    }
    std::vector<Row> rows;
    for (const JetPolynomial& rel : current) {
      JetPolynomial p = reduce(rel);
      Row row;
      row.rest = JetPolynomial(p.weight());
      for (const Jet& c : cols) {
        row.a.push_back(p.coeff(c));
        row.n.push_back(value_at(row.a.back(), env));
      }
      for (const auto& [j, c] : p.terms()) {
        if (j.order() == order && std::find(cols.begin(), cols.end(), j) != cols.end()) continue;
        if (j.order() >= order && std::find(sys.basis.begin(), sys.basis.end(), j) == sys.basis.end()) {
          throw ReductionIncompleteError("prolongation of order " + std::to_string(order) + " contains " + j.name());
        }
        row.rest.add(j, c);
      }
      rows.push_back(std::move(row));
    }
    if (rows.size() != cols.size()) {
      throw ReductionIncompleteError("order " + std::to_string(order) + " has " + std::to_string(rows.size()) +
                                     " relations for " + std::to_string(cols.size()) + " jets");
    }

    // Gauss-Jordan with pivots chosen by magnitude at the pivot point.
    std::vector<bool> used(rows.size(), false);
    std::vector<std::size_t> pivot_of(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::size_t best = rows.size();
      long double best_abs = 0.0L;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        long double v = std::fabs(rows[r].n[c]);
        if (v > best_abs) {
          best_abs = v;
          best = r;
        }
      }
      if (best == rows.size() || best_abs < 1e-12L) {
        throw ReductionIncompleteError("prolongation system is singular at jet " + cols[c].name());
      }
      used[best] = true;
      pivot_of[c] = best;
      Row& p = rows[best];
      const Expr piv = p.a[c];
      const long double npiv = p.n[c];
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k == c) continue;
        p.a[k] = p.a[k] / piv;
        p.n[k] /= npiv;
      }
      p.a[c] = Expr(1);
      p.n[c] = 1.0L;
      JetPolynomial scaled(p.rest.weight());
      scaled.add(p.rest, Expr(1) / piv);
      p.rest = std::move(scaled);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == best || rows[r].a[c].is_zero()) continue;
        const Expr f = rows[r].a[c];
        const long double nf = rows[r].n[c];
        for (std::size_t k = 0; k < cols.size(); ++k) {
          if (k == c) continue;
          if (!p.a[k].is_zero()) rows[r].a[k] = rows[r].a[k] - f * p.a[k];
          rows[r].n[k] -= nf * p.n[k];
        }
        rows[r].a[c] = Expr(0);
        rows[r].n[c] = 0.0L;
        rows[r].rest.add(p.rest, -f);
      }
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      JetPolynomial rhs(cols[c].weight());
      rhs.add(rows[pivot_of[c]].rest, Expr(-1));
      rules_.emplace(cols[c], std::move(rhs));
    }
  }
}

JetPolynomial ReductionRules::reduce(const JetPolynomial& p) const {
  JetPolynomial out(p.weight());
  for (const auto& [j, c] : p.terms()) {
    auto it = rules_.find(j);
    if (it == rules_.end()) {
      out.add(j, c);
    } else {
      out.add(it->second, c);
    }
  }
  return out;
}

// ---------------------------------------------------------------- kappa

JetPolynomial kappa_expanded(JetCalculus& calc, const AbelianSystem& sys, KappaForm form) {
  const std::size_t n = sys.unknowns.size();
  std::vector<LinearOperator> D;
  for (const Expr& a : sys.invariants) D.push_back(LinearOperator::Delta(a));
  const LinearOperator d1 = LinearOperator::delta(1);

  std::vector<LinearOperator> lead = D;
  lead.push_back(d1);
  const LinearOperator common = chain(lead);

  JetPolynomial kappa(static_cast<int>(n) + 2);
  for (std::size_t i = 0; i < n; ++i) {
    // Delta_1 ... Delta_{i-1} delta_1 Delta_{i+1} ... Delta_n Delta_i
    std::vector<LinearOperator> ops(D.begin(), D.begin() + static_cast<std::ptrdiff_t>(i));
    ops.push_back(d1);
    for (std::size_t k = i + 1; k < n; ++k) ops.push_back(D[k]);
    ops.push_back(D[i]);
    if (form == KappaForm::Printed && n == 2 && i == 0) ops = {d1, D[0], D[1]};
    LinearOperator box = common - chain(ops);
    kappa.add(calc.apply(box, JetPolynomial::of(Jet{sys.unknowns[i], 0, 0})));
  }
  return kappa;
}

KappaResult kappa_reduce(const ChartedWeb& web, KappaForm form, const ReductionOptions& opts) {
  JetCalculus calc(web);
  AbelianSystem sys = abelian_system(calc);
  KappaResult res;
  res.basis = sys.basis;
  res.kappa = kappa_expanded(calc, sys, form);
  ReductionRules rules(calc, sys, opts);
  JetPolynomial reduced = rules.reduce(res.kappa);
  for (const auto& [j, c] : reduced.terms()) {
    if (std::find(sys.basis.begin(), sys.basis.end(), j) != sys.basis.end()) continue;
    res.max_unreduced_order = std::max(res.max_unreduced_order, j.order());
    ZeroCheck z = check_zero(c, web.cfg());
    if (!z.zero) {
      throw ReductionIncompleteError("jet " + j.name() + " survives the reduction (max residual " +
                                     std::to_string(z.max_residual) + ")");
    }
  }
  for (const Jet& b : sys.basis) res.coefficients.push_back(reduced.coeff(b));
  return res;
}

Expr kappa_normalization(const ChartedWeb& web) {
  std::vector<Expr> inv = web.basic_invariants();
  const Expr one(1);
  if (web.degree() == 4) return Expr(4) * inv[1] * (one - inv[1]);
  if (web.degree() == 5) return Expr(-10) * (one - inv[1]) * (one - inv[2]);
  throw PreconditionError("the obstruction engine handles 4- and 5-webs");
}

namespace {

template <std::size_t N>
std::array<Expr, N> normalized(const WebSpec& web) {
  ChartedWeb cw(web);
  KappaResult r = kappa_reduce(cw);
  const Expr n = kappa_normalization(cw);
  std::array<Expr, N> c;
  for (std::size_t i = 0; i < N; ++i) c[i] = r.coefficients[i] / n;
  return c;
}

}  // namespace

std::array<Expr, 3> kappa_reduce_4web(const WebSpec& web) {
  if (web.degree() != 4) throw PreconditionError("kappa_reduce_4web needs a 4-web");
  return normalized<3>(web);
}

std::array<Expr, 6> kappa_reduce_5web(const WebSpec& web) {
  if (web.degree() != 5) throw PreconditionError("kappa_reduce_5web needs a 5-web");
  return normalized<6>(web);
}

}  // namespace webrank
