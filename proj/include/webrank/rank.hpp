#pragma once

// Rank of planar 4-webs from the coefficients c0, c1, c2 of the obstruction,
// the rank-two compatibility functions G_ij and the rank-one invariants J, and
// maximum-rank testing of 5-webs.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "webrank/covariant.hpp"

namespace webrank {

/// How the K coefficient of c1 is read.
enum class C1Reading {
  /// K ((a-4) a1 + (11 - 20a + 12a^2) a2) / (12 a (1-a)^2), as printed.
  Printed,
  /// K (-a1 + (3 - 6a + 4a^2) a2) / (4 a (1-a)^2); agrees with the operator
  /// reduction of kappa.
  Reconciled,
};

std::array<Expr, 3> c_explicit(JetTable& jets, C1Reading reading = C1Reading::Reconciled);
std::array<Expr, 3> c_explicit(const WebSpec& web, C1Reading reading = C1Reading::Reconciled);

/// Covariant derivative of a c-coefficient: weight 2 for c0, 3 for c1, c2.
int c_weight(int index);

/// G11, G12, G21, G22. Throws PreconditionError when c0 vanishes identically.
std::array<Expr, 4> g_matrix(const WebSpec& web, const std::array<Expr, 3>& c);

struct NamedInvariant {
  std::string name;
  Expr value;
  int weight = 0;
};

/// One of the four rank-one cases with its invariants.
struct RankOneCase {
  int index = 0;
  bool applicable = false;  // side conditions on c0, c1, c2 hold
  std::vector<NamedInvariant> invariants;
};

/// How the G21 G22 coefficient of J12 is read.
enum class J12Reading {
  /// a (c2 - c1), as printed.
  Printed,
  /// c1 + a c2; the delta_2 compatibility condition of G21 u + G22 v = 0.
  Reconciled,
};

struct JInvariantOptions {
  /// Reading of c_{i,jk}: Application means delta_k(delta_j(c_i)).
  JetOrder jets = JetOrder::Application;
  J12Reading j12 = J12Reading::Reconciled;
};

/// Evaluates the side conditions of every case and returns the J's of the
/// applicable ones (inapplicable cases carry no invariants). G is required
/// when c0 does not vanish.
std::vector<RankOneCase> j_invariants(const WebSpec& web, const std::array<Expr, 3>& c,
                                      const std::optional<std::array<Expr, 4>>& G,
                                      const JInvariantOptions& opts = {});

struct SampledInvariant {
  std::string name;
  Expr value;
  int weight = 0;
  /// Verdict and magnitudes refer to value * |omega1 ^ omega2|^(weight/2).
  bool zero = false;
  double max_abs = 0.0;
  double max_residual = 0.0;
};

struct RankReport {
  std::string web;
  int degree = 0;
  /// 0..3 for 4-webs; for 5-webs 6 means maximum rank and -1 not maximum.
  int rank = -1;
  std::string verdict;
  /// Which criterion decided the verdict, e.g. "rank1.case4".
  std::string criterion;
  std::vector<SampledInvariant> invariants;
  SampleConfig cfg;
  std::uint64_t confirm_seed = 0;
  /// Set when a deciding identity passed with a residual within a factor of
  /// 100 of the tolerance.
  bool borderline = false;
};

struct ClassifyOptions {
  C1Reading c1 = C1Reading::Reconciled;
  JInvariantOptions j{};
};

/// Decision tree: rank 3 iff c0 = c1 = c2 = 0; if c0 = 0, rank 1 iff one of
/// cases 1-3 holds, else 0; otherwise rank 2 iff all G_ij = 0, rank 1 iff
/// case 4 holds, else 0. Every identity is sampled under the web's seed and a
/// second seed; disagreement raises IndeterminateError.
RankReport classify_rank4(const WebSpec& web, const ClassifyOptions& opts = {});

/// Maximum rank 6 iff all six obstruction coefficients vanish.
RankReport max_rank_5web(const WebSpec& web);

}  // namespace webrank
