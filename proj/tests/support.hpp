#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "webrank/expr.hpp"

namespace webrank::testing {

// Random expression trees that stay finite and well defined on boxes inside
// the positive quadrant (x, y >= 1/2).
class RandomExpr {
 public:
  explicit RandomExpr(std::uint64_t seed) : rng_(seed) {}

  Expr any(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(9)) {
      case 0: return positive(depth);
      case 1: return any(depth - 1) + any(depth - 1);
      case 2: return any(depth - 1) - any(depth - 1);
      case 3: return any(depth - 1) * bounded(depth - 1);
      case 4: return any(depth - 1) / positive(depth - 1);
      case 5: return -any(depth - 1);
      case 6: return sin(any(std::min(depth - 1, 2)));
      case 7: return cos(any(std::min(depth - 1, 2)));
      default: return log(positive(depth - 1));
    }
  }

  // Values in [1/8, 8]-ish: factors that keep products moderate.
  Expr bounded(int depth) {
    switch (pick(4)) {
      case 0: return exp(sin(any(std::min(depth, 2))));
      case 1: return vars::x() / vars::y();
      case 2: return cos(any(std::min(depth, 2)));
      default: return positive_leaf();
    }
  }

  Expr positive(int depth) {
    if (depth <= 0) return positive_leaf();
    switch (pick(8)) {
      case 0: return positive(depth - 1) + positive(depth - 1);
      case 1: return positive(depth - 1) * exp(sin(any(std::min(depth - 1, 2))));
      case 2: return positive(depth - 1) / positive(depth - 1);
      case 3: return exp(sin(any(std::min(depth - 1, 2))));
      case 4: return sqrt(positive(depth - 1));
      case 5: return pow(positive(std::min(depth - 1, 1)), 2 + pick(2));
      case 6: return pow(positive(depth - 1), Expr::rational(1, 2 + pick(2)));
      default: return positive_leaf();
    }
  }

  // A rational function in x, y with positive denominator on the positive
  // quadrant.
  Expr rational_function(int degree) {
    auto poly = [&](bool positive_coeffs) {
      Expr p = Expr(0);
      for (int i = 0; i <= degree; ++i) {
        for (int j = 0; i + j <= degree; ++j) {
          int c = positive_coeffs ? 1 + pick(4) : pick(7) - 3;
          if (c == 0) continue;
          p = p + Expr(c) * pow(vars::x(), i) * pow(vars::y(), j);
        }
      }
      return p.is_zero() ? vars::x() : p;
    };
    return poly(false) / poly(true);
  }

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  double uniform(double a, double b) {
    return a + (b - a) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  Expr leaf() {
    switch (pick(4)) {
      case 0: return vars::x();
      case 1: return vars::y();
      case 2: return Expr(pick(7) - 3);
      default: return Expr::rational(pick(9) + 1, 1 + pick(4));
    }
  }

  Expr positive_leaf() {
    switch (pick(4)) {
      case 0: return vars::x();
      case 1: return vars::y();
      case 2: return Expr::euler();
      default: return Expr::rational(pick(4) + 1, 2);
    }
  }

  std::mt19937_64 rng_;
};

inline long double eval_ld(const CompiledExpr& c, double x, double y) {
  return c.eval(Point{x, y}.env()).value;
}

// Central finite difference in extended precision.
inline long double central_difference(const CompiledExpr& c, Var v, double x, double y, double h) {
  if (v == Var::X) return (eval_ld(c, x + h, y) - eval_ld(c, x - h, y)) / (2 * static_cast<long double>(h));
  return (eval_ld(c, x, y + h) - eval_ld(c, x, y - h)) / (2 * static_cast<long double>(h));
}

inline SampleConfig config(Box box, std::uint64_t seed = 7, int samples = 24, double tol = 1e-9) {
  SampleConfig c;
  c.box = box;
  c.seed = seed;
  c.samples = samples;
  c.tol = tol;
  return c;
}

}  // namespace webrank::testing

#include <map>
#include <string>

#include "webrank/web.hpp"

namespace webrank::testing {

struct FixtureDef {
  std::vector<const char*> functions;
  Box box;
};

inline const std::map<std::string, FixtureDef>& fixture_defs() {
  static const std::map<std::string, FixtureDef> defs = {
      {"W3-PAR", {{"x", "y", "x+y"}, {1, 2, 1, 2}}},
      {"W4-PAR", {{"x", "y", "x+y", "x+2*y"}, {1, 2, 1, 2}}},
      {"W4-R3", {{"x", "y", "x+y", "x*y"}, {2, 3, 4, 5}}},
      {"W4-R2", {{"x", "y", "x+y", "x^2+y^2"}, {2, 3, 4, 5}}},
      {"W4-R1", {{"x", "y", "(x-y)^2/x", "(x-y)^2/y"}, {2, 3, 0.5, 1}}},
      {"W4-R0", {{"x", "y", "(x+y)*exp(x)", "x*y"}, {1, 2, 1, 2}}},
      {"W4-R2NL", {{"x", "y", "x/y", "x*y*(x+y)"}, {2, 3, 4, 5}}},
      {"W4-R1NL", {{"x", "y", "x*y^2/(x-y)^2", "x^2*y/(x-y)^2"}, {2, 3, 0.5, 1}}},
      {"W5-BOL", {{"x", "y", "x/y", "(1-y)/(1-x)", "(x-x*y)/(y-x*y)"}, {2, 3, 4, 5}}},
  };
  return defs;
}

inline WebSpec fixture(const std::string& name, std::uint64_t seed = 7, int samples = 24, double tol = 1e-9) {
  const FixtureDef& def = fixture_defs().at(name);
  std::vector<Expr> fs;
  for (const char* f : def.functions) fs.push_back(parse(f));
  return make_web(std::move(fs), def.box, config(def.box, seed, samples, tol), name);
}

inline WebSpec web_of(std::vector<const char*> functions, Box box, std::uint64_t seed = 7) {
  std::vector<Expr> fs;
  for (const char* f : functions) fs.push_back(parse(f));
  return make_web(std::move(fs), box, config(box, seed));
}

inline double at(const Expr& e, double x, double y) { return evaluate(e, Point{x, y}); }

inline bool zero(const Expr& e, const SampleConfig& cfg) { return check_zero(e, cfg).zero; }

}  // namespace webrank::testing

namespace webrank::testing {

// Random d-web [x, y, R_3, ..., R_d] with rational R_i, in general position on
// the box [1,2]^2 (retries until make_web accepts it).
inline WebSpec random_web(RandomExpr& r, int d, int degree = 2, std::uint64_t seed = 7) {
  const Box box{1, 2, 1, 2};
  for (;;) {
    std::vector<Expr> fs{vars::x(), vars::y()};
    for (int i = 2; i < d; ++i) fs.push_back(r.rational_function(degree));
    try {
      WebSpec w = make_web(fs, box, config(box, seed));
      bool good = true;
      for (const auto& c : w.certificates) good = good && c.min_abs_jacobian > 1e-3;
      if (good) return w;
    } catch (const Error&) {
    }
  }
}

}  // namespace webrank::testing
