#pragma once

// Web specification files and analysis reports.
//
// A spec file is YAML (see docs/spec-file.md):
//
//   name: W4-R3
//   functions: [x, y, x+y, x*y]
//   box: [2, 3, 4, 5]          # xmin, xmax, ymin, ymax
//   samples: 24                # optional
//   tol: 1e-9                  # optional
//   seed: 20240601             # optional
//   relations:                 # optional, one closed form in t per function
//     - [t, t, -t, "0"]

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webrank/web.hpp"

namespace webrank {

struct SpecOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tol;
  /// 0-based permutation of the functions; empty keeps the file order.
  std::vector<int> order;
};

struct SpecFile {
  std::string origin;
  /// SHA-256 of the file bytes, lowercase hex.
  std::string digest;
  WebSpec web;
  std::vector<std::vector<Expr>> relations;
  std::vector<int> order;
};

/// Throws ParseError (message carries the line and field), ValidationError or
/// DegeneratePairError.
SpecFile parse_webspec(std::string_view text, std::string origin, const SpecOverrides& overrides = {});
SpecFile load_webspec(const std::string& path, const SpecOverrides& overrides = {});

/// "2,1,3,4" -> {1, 0, 2, 3}; throws ValidationError unless a permutation of
/// 1..d.
std::vector<int> parse_order(std::string_view text, int d);

std::string sha256_hex(std::string_view bytes);

const std::vector<std::string>& report_commands();

struct RunResult {
  /// JSON with a fixed key order, newline terminated.
  std::string json;
  /// 0 definitive, 1 an analysis failed, 2 indeterminate.
  int exit_code = 0;
};

/// Throws ValidationError for an unknown command. Analysis errors are
/// recorded in the report.
RunResult run_report(const std::string& command, const SpecFile& spec);

std::string version();

}  // namespace webrank
