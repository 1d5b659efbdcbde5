// webrank <command> <specfile> [--seed N] [--samples M] [--tol E] [--order perm] [--out report.json]

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "webrank/webrank.h"

namespace {

constexpr int kInputError = 1;

void print_trace(const std::string& report) {
  const auto j = nlohmann::ordered_json::parse(report);
  const auto& analyses = j.at("analyses");
  if (!analyses.contains("abel") || !analyses["abel"].contains("steps")) return;
  for (const auto& s : analyses["abel"]["steps"]) {
    std::cerr << s["label"].get<std::string>() << ": " << s["equation"].get<std::string>() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential invariants, rank and linearizability of planar webs"};
  app.set_version_flag("--version", std::string(webrank_version()));

  std::string command, specfile, order, out;
  std::uint64_t seed = 0;
  int samples = 0;
  double tol = 0.0;
  bool trace = false;
  app.add_option("command", command, "analyze, curvature, invariants, rank, abel, geodesic, linearizable, verify-relation")
      ->required()
      ->check(CLI::IsMember({"analyze", "curvature", "invariants", "rank", "abel", "geodesic", "linearizable",
                             "verify-relation"}));
  app.add_option("specfile", specfile, "web specification (YAML)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "sampling seed (default: $WEBRANK_SEED, then the file)");
  app.add_option("--samples", samples, "sample points per identity test")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "identity tolerance")->check(CLI::PositiveNumber);
  app.add_option("--order", order, "1-based permutation of the web functions, e.g. 2,1,3,4");
  app.add_option("--out", out, "write the report here instead of stdout");
  app.add_flag("--trace", trace, "print the Abel elimination steps to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  webrank_options opts{};
  if (*seed_opt) {
    opts.has_seed = 1;
    opts.seed = seed;
  } else if (const char* env = std::getenv("WEBRANK_SEED")) {
    try {
      opts.seed = std::stoull(env);
      opts.has_seed = 1;
    } catch (const std::exception&) {
      std::cerr << "webrank: WEBRANK_SEED is not an integer: " << env << "\n";
      return kInputError;
    }
  }
  opts.samples = samples;
  opts.tol = tol;
  opts.order = order.empty() ? nullptr : order.c_str();

  webrank_web* web = nullptr;
  webrank_status st = webrank_load(specfile.c_str(), &opts, &web);
  if (st != WEBRANK_OK) {
    std::cerr << "webrank: " << webrank_status_name(st) << " error: " << webrank_last_error() << "\n";
    int i = 0, j = 0;
    if (webrank_last_pair(&i, &j)) std::cerr << "webrank: degenerate pair (" << i << ", " << j << ")\n";
    return kInputError;
  }

  char* report = nullptr;
  int exit_code = 0;
  st = webrank_run(web, command.c_str(), &report, &exit_code);
  webrank_free(web);
  if (st != WEBRANK_OK) {
    std::cerr << "webrank: " << webrank_status_name(st) << " error: " << webrank_last_error() << "\n";
    return kInputError;
  }
  const std::string text(report);
  webrank_string_free(report);

  if (trace) print_trace(text);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!(f << text)) {
      std::cerr << "webrank: cannot write " << out << "\n";
      return kInputError;
    }
  }
  return exit_code;
}
