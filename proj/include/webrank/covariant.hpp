#pragma once

// Weighted covariant derivatives with respect to the Chern connection:
//   delta_i^(k)(u) = d_i(u) - k g_i u,   g_1 = g_2 = H,
// and the commutation relation (delta_2 delta_1 - delta_1 delta_2)(u) = s K u
// for u of weight s.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webrank/web.hpp"

namespace webrank {

struct WeightedField {
  Expr value;
  int weight = 0;
};

WeightedField covariant_derivative(const WeightedField& u, int i, const ChartedWeb& web);

/// Applies delta_{seq[0]} first, then delta_{seq[1]}, ...
WeightedField apply_deltas(const WeightedField& u, const std::vector<int>& seq, const ChartedWeb& web);

/// How a subscript string such as "112" is read.
enum class JetOrder {
  /// u_{k,l} = delta_1^k delta_2^l u: all delta_2 applied first.
  Canonical,
  /// Subscripts applied left to right: "12" = delta_2(delta_1(u)).
  Application,
};

std::vector<int> jet_sequence(std::string_view subscripts, JetOrder order);

WeightedField jet(const WeightedField& u, std::string_view subscripts, JetOrder order, const ChartedWeb& web);

/// Memoized covariant jets of K (weight 2) and of the basic invariants
/// a = a_2, b = a_3 (weight 0).
class JetTable {
 public:
  explicit JetTable(ChartedWeb web, JetOrder order = JetOrder::Canonical);

  const ChartedWeb& web() const { return web_; }
  JetOrder order() const { return order_; }

  /// symbol: "K", "a" or "b"; subscripts over {1,2}.
  const WeightedField& get(std::string_view symbol, std::string_view subscripts = "");
  Expr operator()(std::string_view symbol, std::string_view subscripts = "") { return get(symbol, subscripts).value; }

  /// The standard listing: K, K1, K2, a, a1, a2, a11, a12, a22, a112, a122
  /// (and the same for b on 5-webs).
  std::vector<std::pair<std::string, WeightedField>> entries();

 private:
  ChartedWeb web_;
  JetOrder order_;
  std::vector<Expr> basic_;
  std::map<std::string, WeightedField, std::less<>> cache_;
};

/// (delta_2 delta_1 - delta_1 delta_2)(u) - s K u with s = u.weight; vanishes
/// identically.
Expr commutation_defect(const WeightedField& u, const ChartedWeb& web);

}  // namespace webrank
