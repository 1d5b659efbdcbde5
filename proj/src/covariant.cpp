#include "webrank/covariant.hpp"

#include <algorithm>

namespace webrank {

WeightedField covariant_derivative(const WeightedField& u, int i, const ChartedWeb& web) {
  Expr d = web.partial(i, u.value);
  if (u.weight != 0) d = d - Expr(u.weight) * web.H() * u.value;
  return WeightedField{d, u.weight + 1};
}

WeightedField apply_deltas(const WeightedField& u, const std::vector<int>& seq, const ChartedWeb& web) {
  WeightedField r = u;
  for (int i : seq) r = covariant_derivative(r, i, web);
  return r;
}

std::vector<int> jet_sequence(std::string_view subscripts, JetOrder order) {
  std::vector<int> seq;
  for (char c : subscripts) {
    if (c != '1' && c != '2') throw PreconditionError("jet subscripts must be 1 or 2");
    seq.push_back(c - '0');
  }
  if (order == JetOrder::Canonical) std::sort(seq.begin(), seq.end(), std::greater<>());
  return seq;
}

WeightedField jet(const WeightedField& u, std::string_view subscripts, JetOrder order, const ChartedWeb& web) {
  return apply_deltas(u, jet_sequence(subscripts, order), web);
}

JetTable::JetTable(ChartedWeb web, JetOrder order) : web_(std::move(web)), order_(order) {
  if (web_.degree() >= 4) basic_ = web_.basic_invariants();
}

const WeightedField& JetTable::get(std::string_view symbol, std::string_view subscripts) {
  std::string key = std::string(symbol) + ":" + std::string(subscripts);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  WeightedField result;
  if (subscripts.empty()) {
    if (symbol == "K") {
      result = WeightedField{web_.K(), 2};
    } else if (symbol == "a" || symbol == "b") {
      std::size_t idx = symbol == "a" ? 1 : 2;
      if (idx >= basic_.size()) throw PreconditionError("basic invariant " + std::string(symbol) + " needs a larger web");
      result = WeightedField{basic_[idx], 0};
    } else {
      throw PreconditionError("unknown jet symbol " + std::string(symbol));
    }
  } else {
    // Peel off the last applied derivative and reuse the shorter jet.
    std::vector<int> seq = jet_sequence(subscripts, order_);
    int last = seq.back();
    std::string rest;
    if (order_ == JetOrder::Application) {
      rest = std::string(subscripts.substr(0, subscripts.size() - 1));
    } else {
      // Canonical: the last applied delta is a delta_1 if any are present.
      rest = std::string(subscripts);
      rest.erase(rest.find(static_cast<char>('0' + last)), 1);
    }
    WeightedField base = get(symbol, rest);
    result = covariant_derivative(base, last, web_);
  }
  return cache_.emplace(std::move(key), std::move(result)).first->second;
}

std::vector<std::pair<std::string, WeightedField>> JetTable::entries() {
  std::vector<std::pair<std::string, WeightedField>> out;
  for (const char* s : {"", "1", "2"}) out.emplace_back("K" + std::string(s), get("K", s));
  std::vector<std::string> symbols;
  if (basic_.size() >= 2) symbols.push_back("a");
  if (basic_.size() >= 3) symbols.push_back("b");
  for (const auto& sym : symbols) {
    for (const char* s : {"", "1", "2", "11", "12", "22", "112", "122"}) out.emplace_back(sym + s, get(sym, s));
  }
  return out;
}

Expr commutation_defect(const WeightedField& u, const ChartedWeb& web) {
  WeightedField d21 = apply_deltas(u, {1, 2}, web);
  WeightedField d12 = apply_deltas(u, {2, 1}, web);
  return d21.value - d12.value - Expr(u.weight) * web.K() * u.value;
}

}  // namespace webrank
