#include "webrank/abel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "webrank/error.hpp"

namespace webrank {

namespace {

struct Gradient {
  Expr x, y;
};

Gradient gradient(const Expr& f) { return {differentiate(f, Var::X), differentiate(f, Var::Y)}; }

std::string function_name(int i, int k) {
  std::string s = "F" + std::to_string(i + 1);
  if (k <= 3) {
    s += std::string(static_cast<std::size_t>(k), '\'');
  } else {
    s += "^(" + std::to_string(k) + ")";
  }
  return s + "(f" + std::to_string(i + 1) + ")";
}

std::string bounded(const Expr& e, std::size_t max_chars) { return to_string_bounded(e, max_chars).value_or("..."); }

int lowest_function(const AbelEquation& eq) {
  if (eq.empty()) throw PreconditionError("equation has no terms");
  return eq.terms().begin()->first.first;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw PreconditionError(msg);
}

AbelEquation differentiate_eq(const AbelEquation& eq, const std::vector<Gradient>& grads) {
  require(eq.degree() == FormDegree::Scalar, "differentiate needs a scalar equation");
  AbelEquation out(FormDegree::OneForm);
  for (const auto& [key, c] : eq.terms()) {
    const auto [i, k] = key;
    out.add(i, k, differentiate(c.dx, Var::X), differentiate(c.dx, Var::Y));
    out.add(i, k + 1, c.dx * grads[static_cast<std::size_t>(i)].x, c.dx * grads[static_cast<std::size_t>(i)].y);
  }
  return out;
}

AbelEquation wedge_eq(const AbelEquation& eq, int j, const std::vector<Gradient>& grads) {
  require(eq.degree() == FormDegree::OneForm, "wedge needs a one-form equation");
  const Gradient& g = grads[static_cast<std::size_t>(j)];
  AbelEquation out(FormDegree::Scalar);
  for (const auto& [key, c] : eq.terms()) out.add(key.first, key.second, g.x * c.dy - g.y * c.dx);
  return out;
}

AbelEquation contract_eq(const AbelEquation& eq, int j, const std::vector<Gradient>& grads, const SampleConfig& cfg) {
  require(eq.degree() == FormDegree::OneForm, "contract needs a one-form equation");
  const Gradient& g = grads[static_cast<std::size_t>(j)];
  const Expr norm = g.x * g.x + g.y * g.y;
  AbelEquation out(FormDegree::Scalar);
  for (const auto& [key, c] : eq.terms()) {
    require(is_identically_zero(g.x * c.dy - g.y * c.dx, cfg),
            "contract: term " + function_name(key.first, key.second) + " is not proportional to df" +
                std::to_string(j + 1));
    out.add(key.first, key.second, (c.dx * g.x + c.dy * g.y) / norm);
  }
  return out;
}

AbelEquation divide_eq(const AbelEquation& eq, int j, const SampleConfig& cfg) {
  require(eq.degree() == FormDegree::Scalar, "divide-by-leading needs a scalar equation");
  if (j < 0) j = lowest_function(eq);
  const int k = eq.order(j);
  require(k >= 0, "divide-by-leading: F" + std::to_string(j + 1) + " does not occur");
  const Expr lead = eq.terms().at({j, k}).dx;
  if (is_identically_zero(lead, cfg)) throw VanishingCoefficientError(bounded(lead, 200));
  if (lead.is_one()) return eq;
  AbelEquation out(FormDegree::Scalar);
  for (const auto& [key, c] : eq.terms()) {
    out.add(key.first, key.second, key == AbelEquation::Key{j, k} ? Expr(1) : c.dx / lead);
  }
  return out;
}

AbelEquation substitute_eq(const AbelEquation& eq, const AbelEquation& from, int j, const SampleConfig& cfg) {
  require(from.degree() == FormDegree::Scalar, "substitute needs a scalar source equation");
  if (j < 0) j = lowest_function(from);
  const int L = from.order(j);
  require(L >= 0, "substitute: F" + std::to_string(j + 1) + " does not occur in the source");
  auto it = eq.terms().find({j, L});
  if (it == eq.terms().end()) return eq;
  const Expr lead = from.terms().at({j, L}).dx;
  if (is_identically_zero(lead, cfg)) throw VanishingCoefficientError(bounded(lead, 200));
  const AbelCoefficient a = it->second;
  AbelEquation out(eq.degree());
  for (const auto& [key, c] : eq.terms()) {
    if (key != AbelEquation::Key{j, L}) out.add(key.first, key.second, c.dx, c.dy);
  }
  for (const auto& [key, b] : from.terms()) {
    if (key == AbelEquation::Key{j, L}) continue;
    const Expr r = lead.is_one() ? b.dx : b.dx / lead;
    out.add(key.first, key.second, -(a.dx * r), eq.degree() == FormDegree::OneForm ? -(a.dy * r) : Expr(0));
  }
  return out;
}

AbelEquation apply(const AbelEquation& eq, const AbelRule& rule, const std::vector<Gradient>& grads,
                   const SampleConfig& cfg) {
  const int d = static_cast<int>(grads.size());
  if (rule.kind == AbelRule::Kind::Wedge || rule.kind == AbelRule::Kind::Contract) {
    require(rule.function >= 0 && rule.function < d, "rule names no web function");
  }
  AbelEquation out;
  switch (rule.kind) {
    case AbelRule::Kind::Differentiate: out = differentiate_eq(eq, grads); break;
    case AbelRule::Kind::Wedge: out = wedge_eq(eq, rule.function, grads); break;
    case AbelRule::Kind::Contract: out = contract_eq(eq, rule.function, grads, cfg); break;
    case AbelRule::Kind::DivideByLeading: out = divide_eq(eq, rule.function, cfg); break;
    case AbelRule::Kind::Substitute:
      require(rule.from.has_value(), "substitute needs a source equation");
      out = substitute_eq(eq, *rule.from, rule.function, cfg);
      break;
  }
  out.prune(cfg);
  return out;
}

std::vector<Gradient> gradients(const WebSpec& web) {
  std::vector<Gradient> g;
  for (const Expr& f : web.functions) g.push_back(gradient(f));
  return g;
}

Expr compose_derivative(const Expr& F, int k, const Expr& f) {
  Expr D = F;
  for (int i = 0; i < k; ++i) D = differentiate(D, Var::T);
  return substitute(D, Var::T, f);
}

}  // namespace

AbelEquation AbelEquation::relation(int d) {
  AbelEquation eq(FormDegree::Scalar);
  for (int i = 0; i < d; ++i) eq.add(i, 0, Expr(1));
  return eq;
}

bool AbelEquation::contains(int function) const { return order(function) >= 0; }

int AbelEquation::order(int function) const {
  int k = -1;
  for (const auto& [key, c] : terms_) {
    if (key.first == function) k = std::max(k, key.second);
  }
  return k;
}

std::vector<int> AbelEquation::functions() const {
  std::vector<int> out;
  for (const auto& [key, c] : terms_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

void AbelEquation::add(int function, int k, const Expr& dx, const Expr& dy) {
  if (function < 0 || k < 0) throw PreconditionError("term index out of range");
  const Expr y = degree_ == FormDegree::Scalar ? Expr(0) : dy;
  if (dx.is_zero() && y.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace({function, k}, AbelCoefficient{dx, y});
  if (!inserted) {
    it->second.dx = it->second.dx + dx;
    it->second.dy = it->second.dy + y;
    if (it->second.dx.is_zero() && it->second.dy.is_zero()) terms_.erase(it);
  }
}

void AbelEquation::prune(const SampleConfig& cfg) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    const bool zx = it->second.dx.is_zero() || is_identically_zero(it->second.dx, cfg);
    const bool zy = it->second.dy.is_zero() || is_identically_zero(it->second.dy, cfg);
    if (zx && zy) {
      it = terms_.erase(it);
    } else {
      if (zx) it->second.dx = Expr(0);
      if (zy) it->second.dy = Expr(0);
      ++it;
    }
  }
}

std::string AbelEquation::str(std::size_t max_chars) const {
  if (terms_.empty()) return "0 = 0";
  std::string out;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [key, c] = *it;
    if (!out.empty()) out += " + ";
    const std::string name = function_name(key.first, key.second);
    if (degree_ == FormDegree::Scalar) {
      out += c.dx.is_one() ? name : "(" + bounded(c.dx, max_chars) + ")*" + name;
    } else {
      out += name + "*(";
      if (!c.dx.is_zero()) out += "(" + bounded(c.dx, max_chars) + ")*dx";
      if (!c.dx.is_zero() && !c.dy.is_zero()) out += " + ";
      if (!c.dy.is_zero()) out += "(" + bounded(c.dy, max_chars) + ")*dy";
      out += ")";
    }
  }
  return out + " = 0";
}

std::string AbelRule::name() const {
  const std::string j = std::to_string(function + 1);
  switch (kind) {
    case Kind::Differentiate: return "differentiate";
    case Kind::Wedge: return "wedge-with(df" + j + ")";
    case Kind::DivideByLeading: return function < 0 ? "divide-by-leading" : "divide-by-leading(F" + j + ")";
    case Kind::Substitute: return function < 0 ? "substitute" : "substitute(F" + j + ")";
    case Kind::Contract: return "contract(df" + j + ")";
  }
  return "?";
}

AbelEquation eliminate_step(const AbelEquation& eq, const AbelRule& rule, const WebSpec& web) {
  return apply(eq, rule, gradients(web), web.cfg);
}

std::string AbelTrace::str(std::size_t max_chars) const {
  std::string out;
  for (const AbelStep& s : steps) {
    out += s.label;
    out += ": ";
    out += s.equation.str(max_chars);
    out += "\n";
  }
  if (!diagnostic.empty()) out += "stopped: " + diagnostic + "\n";
  return out;
}

namespace {

class Tracer {
 public:
  Tracer(const WebSpec& web, AbelTrace& trace, int max_steps)
      : grads_(gradients(web)), cfg_(web.cfg), trace_(trace), max_steps_(max_steps) {}

  AbelEquation step(char label, const AbelRule& rule, const AbelEquation& eq) {
    if (static_cast<int>(trace_.steps.size()) >= max_steps_) throw Stop{"step limit reached"};
    AbelEquation out = apply(eq, rule, grads_, cfg_);
    trace_.steps.push_back({label, rule.kind, rule.function, out});
    return out;
  }

  bool separable(const AbelEquation& eq, int j) const {
    const Gradient& g = grads_[static_cast<std::size_t>(j)];
    for (const auto& [key, c] : eq.terms()) {
      if (c.dx.is_constant()) continue;
      if (!is_identically_zero(g.x * differentiate(c.dx, Var::Y) - g.y * differentiate(c.dx, Var::X), cfg_)) {
        return false;
      }
    }
    return true;
  }

  struct Stop {
    std::string reason;
  };

 private:
  std::vector<Gradient> grads_;
  SampleConfig cfg_;
  AbelTrace& trace_;
  int max_steps_;
};

// Reduces the equations in F_j alone to one separable equation to which all
// others reduce.
void terminal_system(Tracer& t, AbelTrace& trace, int j, AbelEquation start) {
  std::vector<AbelEquation> system{std::move(start)};
  trace.terminal_system = system;
  auto record = [&](const AbelEquation& eq) { trace.terminal_system.push_back(eq); };

  for (;;) {
    auto lowest = std::min_element(system.begin(), system.end(),
                                   [&](const AbelEquation& a, const AbelEquation& b) { return a.order(j) < b.order(j); });
    AbelEquation N = t.step('g', AbelRule::divide(j), *lowest);
    system.erase(lowest);
    const int n = N.order(j);

    if (!t.separable(N, j)) {
      AbelEquation T = t.step('g', AbelRule::wedge(j), t.step('g', AbelRule::differentiate(), N));
      system.push_back(N);
      if (!T.empty()) {
        record(T);
        system.push_back(T);
        continue;
      }
      system.pop_back();
    }

    std::vector<AbelEquation> derivatives{N};
    std::optional<AbelEquation> remainder;
    std::vector<AbelEquation> kept;
    for (const AbelEquation& H : system) {
      AbelEquation R = H;
      while (!R.empty() && R.order(j) >= n) {
        const std::size_t m = static_cast<std::size_t>(R.order(j) - n);
        while (derivatives.size() <= m) {
          AbelEquation D = t.step('g', AbelRule::differentiate(), derivatives.back());
          derivatives.push_back(t.step('g', AbelRule::contract(j), D));
        }
        R = t.step('g', AbelRule::substitute(derivatives[m], j), R);
      }
      if (!R.empty() && !remainder) {
        remainder = R;
      } else if (!R.empty()) {
        kept.push_back(H);
      }
    }
    if (remainder) {
      record(*remainder);
      system = std::move(kept);
      system.push_back(N);
      system.push_back(*remainder);
      continue;
    }
    trace.terminal = N;
    trace.terminal_order = n;
    trace.separable = t.separable(N, j);
    return;
  }
}

}  // namespace

AbelTrace abel_trace(const WebSpec& web, const AbelTraceOptions& opts) {
  const int d = web.degree();
  if (d < 3 || d > 5) throw PreconditionError("abel_trace needs 3 <= d <= 5");
  std::vector<int> order = opts.order;
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(sorted.size()) != d || sorted[static_cast<std::size_t>(i)] != i) {
      throw PreconditionError("elimination order must be a permutation of the web functions");
    }
  }

  AbelTrace trace;
  trace.terminal_function = order.back();
  Tracer t(web, trace, opts.max_steps);
  try {
    AbelEquation E = t.step('a', AbelRule::differentiate(), AbelEquation::relation(d));
    E = t.step('b', AbelRule::wedge(order[0]), E);
    for (int jj = 1; jj + 1 < d; ++jj) {
      const int j = order[static_cast<std::size_t>(jj)];
      const char base = jj == 1 ? 'c' : jj == 2 ? 'd' : 'g';
      while (E.contains(j)) {
        E = t.step(base, AbelRule::divide(j), E);
        E = t.step(base, AbelRule::differentiate(), E);
        E = t.step(base, AbelRule::wedge(j), E);
        if (jj == 2) trace.steps.back().label = E.contains(j) ? 'e' : 'f';
        if (E.empty()) {
          trace.diagnostic = "equation vanished identically while eliminating F" + std::to_string(j + 1);
          return trace;
        }
      }
    }
    if (E.functions() != std::vector<int>{trace.terminal_function}) {
      trace.diagnostic = "terminal equation still involves other functions";
      return trace;
    }
    terminal_system(t, trace, trace.terminal_function, E);
  } catch (const Tracer::Stop& s) {
    trace.diagnostic = s.reason;
  } catch (const VanishingCoefficientError& e) {
    trace.diagnostic = std::string("degenerate branch: ") + e.what();
  }
  return trace;
}

AbelCoefficient abel_residual(const WebSpec& web, const AbelEquation& eq, const std::map<int, Expr>& solutions) {
  auto [rest, known] = std::pair{eq, AbelCoefficient{Expr(0), Expr(0)}};
  for (int i : eq.functions()) {
    auto it = solutions.find(i);
    if (it == solutions.end()) throw PreconditionError("no closed form for F" + std::to_string(i + 1));
    auto [r, k] = substitute_solution(web, rest, i, it->second);
    rest = r;
    known.dx = known.dx + k.dx;
    known.dy = known.dy + k.dy;
  }
  return known;
}

std::pair<AbelEquation, AbelCoefficient> substitute_solution(const WebSpec& web, const AbelEquation& eq, int function,
                                                             const Expr& F) {
  if (function < 0 || function >= web.degree()) throw PreconditionError("no such web function");
  AbelEquation rest(eq.degree());
  AbelCoefficient known{Expr(0), Expr(0)};
  for (const auto& [key, c] : eq.terms()) {
    if (key.first != function) {
      rest.add(key.first, key.second, c.dx, c.dy);
      continue;
    }
    const Expr v = compose_derivative(F, key.second, web.functions[static_cast<std::size_t>(function)]);
    known.dx = known.dx + c.dx * v;
    known.dy = known.dy + c.dy * v;
  }
  return {rest, known};
}

RelationCheck check_relation(const WebSpec& web, const std::vector<Expr>& F) {
  if (static_cast<int>(F.size()) != web.degree()) throw PreconditionError("one function per web function expected");
  Expr sum = Expr(0);
  for (std::size_t i = 0; i < F.size(); ++i) sum = sum + substitute(F[i], Var::T, web.functions[i]);
  RelationCheck r;
  const std::vector<Point> pts = valid_points({sum}, web.cfg, web.cfg.samples);
  CompiledExpr c(sum);
  std::vector<long double> v;
  for (const Point& p : pts) v.push_back(c.eval(p.env()).value);
  long double mean = 0;
  for (long double x : v) mean += x;
  mean /= static_cast<long double>(v.size());
  long double var = 0;
  for (long double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<long double>(v.size() - 1);
  r.mean = static_cast<double>(mean);
  r.stddev = static_cast<double>(std::sqrt(var));
  r.d_dx = check_zero(differentiate(sum, Var::X), web.cfg);
  r.d_dy = check_zero(differentiate(sum, Var::Y), web.cfg);
  r.holds = r.stddev <= web.cfg.tol * (1 + std::fabs(r.mean)) && r.d_dx.zero && r.d_dy.zero;
  return r;
}

bool verify_relation(const WebSpec& web, const std::vector<Expr>& F) { return check_relation(web, F).holds; }

}  // namespace webrank
